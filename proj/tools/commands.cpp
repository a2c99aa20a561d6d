#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "critesn/analysis.hpp"
#include "critesn/contraction.hpp"
#include "critesn/csv.hpp"
#include "critesn/dynamics.hpp"
#include "critesn/readout.hpp"

namespace critesn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// config parsing

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": expected " + type_name<T>() + ", got " +
                        std::string(it->type_name()));
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    T value{};
    get(key, value);
    out = std::move(value);
  }

  void range(const char* key, RangeConfig& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    Section s(*it, where(key));
    s.get("lo", out.lo);
    s.get("hi", out.hi);
    s.get("step", out.step);
    s.finish();
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, where(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where(it.key().c_str()) + ": unknown key");
    }
  }

  std::string where(const char* key = nullptr) const {
    std::string w = path_.empty() ? std::string("config") : path_;
    if (key) w += std::string(".") + key;
    return w;
  }

 private:
  template <class T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else return "an array";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::pair<int, int> line_and_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json range_json(const RangeConfig& r) { return {{"lo", r.lo}, {"hi", r.hi}, {"step", r.step}}; }

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// ---------------------------------------------------------------------------
// helpers shared by commands

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create output directory '" + dir.string() + "'");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::ios_base::failure("write failed for '" + path.string() + "'");
}

json number(double x) { return std::isfinite(x) ? json(x) : json(format_double(x)); }

json report_json(const VerificationReport& r) {
  json pt = json::array();
  for (double v : r.worst_point) pt.push_back(number(v));
  return {{"passed", r.passed},
          {"worst_margin", number(r.worst_margin)},
          {"worst_point", pt},
          {"grid", r.grid_spec},
          {"points_checked", r.points_checked}};
}

json fit_json(const DecayFit& f) {
  return {{"law", to_string(f.law)},
          {"exponent_exp", number(f.exponent_exp)},
          {"exponent_pow", number(f.exponent_pow)},
          {"r2_semilog", number(f.r2_semilog)},
          {"r2_loglog", number(f.r2_loglog)},
          {"fit_window", {f.fit_window.first, f.fit_window.second}},
          {"samples", f.samples}};
}

json trace_json(const ConvergenceTrace& trace) {
  json j = {{"reservoir", trace.meta.reservoir},
            {"input", trace.meta.input},
            {"floor_hit_at", trace.floor_hit_at ? json(*trace.floor_hit_at) : json(nullptr)},
            {"perturb_at", trace.meta.perturb_at ? json(*trace.meta.perturb_at) : json(nullptr)}};
  return j;
}

TransferFunction transfer_from(const std::string& name, const std::vector<double>& anchors = {}) {
  try {
    return TransferFunction::from_kind(parse_transfer_kind(name), anchors);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

InputSequence input_from(const InputConfig& ic, std::uint64_t seed) {
  if (ic.kind == "alternating") return InputSequence::alternating(ic.amplitude);
  if (ic.kind == "iid_sign") return InputSequence::iid_sign(ic.amplitude, seed);
  if (ic.kind == "constant") return InputSequence::constant(ic.value);
  if (ic.kind == "file") {
    if (ic.path.empty()) throw ConfigError("input.path: required for kind 'file'");
    return InputSequence::file(ic.path);
  }
  throw ConfigError("input.kind: unknown input kind '" + ic.kind + "'");
}

std::vector<double> grid_values(const RangeConfig& r, const char* what) {
  if (!(r.step > 0.0)) throw ConfigError(std::string(what) + ".step: must be > 0");
  if (!(r.lo <= r.hi)) throw ConfigError(std::string(what) + ": empty range (lo > hi)");
  return GridSpec{r.lo, r.hi, r.step}.points();
}

GridSpec grid_spec(const RangeConfig& r, const char* what) {
  grid_values(r, what);
  return {r.lo, r.hi, r.step};
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte);
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ":" +
                      std::to_string(col) + ": " + msg);
  }

  ExperimentConfig c;
  Section top(root, "");
  top.get("experiment", c.experiment);
  top.get("seed", c.seed);
  top.get("threads", c.threads);
  top.get("T", c.T);

  if (auto s = top.child("reservoir")) {
    auto& r = c.reservoir;
    s->get("family", r.family);
    s->get("k", r.k);
    s->get("n", r.n);
    s->get("spectrum", r.spectrum);
    s->get("spectrum_mode", r.spectrum_mode);
    s->get("transfer", r.transfer);
    s->get("anchors", r.anchors);
    s->get("input_scale", r.input_scale);
    s->get("b", r.b);
    s->get("input_gain", r.input_gain);
    s->get("weights", r.weights);
    s->get("input_weights", r.input_weights);
    s->finish();
  }
  if (auto s = top.child("input")) {
    s->get("kind", c.input.kind);
    s->get("amplitude", c.input.amplitude);
    s->get("value", c.input.value);
    s->get("path", c.input.path);
    s->finish();
  }
  if (auto s = top.child("figure3")) {
    auto& f = c.figure3;
    s->range("b_range", f.b_range);
    s->get("b_values", f.b_values);
    s->get("T", f.T);
    s->get("renorm_interval", f.renorm_interval);
    s->get("eps0", f.eps0);
    s->get("start_on_orbit", f.start_on_orbit);
    s->finish();
  }
  if (auto s = top.child("figure45")) {
    auto& f = c.figure45;
    s->get("b", f.b);
    s->get("perturbation", f.perturbation);
    s->get("perturb_at", f.perturb_at);
    s->get("T", f.T);
    s->get("fit_t_start", f.fit_t_start);
    s->finish();
  }
  if (auto s = top.child("verify")) {
    auto& v = c.verify;
    s->get("transfers", v.transfers);
    s->get("neurons", v.neurons);
    s->get("eta", v.eta);
    s->get("gamma", v.gamma);
    s->get("kappa", v.kappa);
    s->range("delta_grid", v.delta_grid);
    s->range("zeta_grid", v.zeta_grid);
    s->get("dominance_q0", v.dominance_q0);
    s->get("dominance_T", v.dominance_T);
    s->get("audit_runs", v.audit_runs);
    s->get("audit_T", v.audit_T);
    s->finish();
  }
  if (auto s = top.child("critical_b")) {
    auto& cb = c.critical_b;
    s->get("transfer", cb.transfer);
    s->get("amplitude", cb.amplitude);
    std::optional<std::vector<double>> bracket;
    s->get("bracket", bracket);
    if (bracket) {
      if (bracket->size() != 2) throw ConfigError(s->where("bracket") + ": expected [lo, hi]");
      cb.bracket_lo = (*bracket)[0];
      cb.bracket_hi = (*bracket)[1];
    }
    s->get("tol", cb.tol);
    s->finish();
  }
  if (auto s = top.child("mc")) {
    auto& m = c.mc;
    s->get("k", m.k);
    s->get("transfer", m.transfer);
    s->get("spectrum", m.spectrum);
    s->get("input_scale", m.input_scale);
    s->get("amplitude", m.amplitude);
    s->get("max_delay", m.max_delay);
    s->get("T", m.T);
    s->get("washout", m.washout);
    s->get("ridge", m.ridge);
    s->get("ceiling_slack", m.ceiling_slack);
    s->finish();
  }
  if (auto s = top.child("simulate")) {
    auto& m = c.simulate;
    s->get("x0", m.x0);
    s->get("y0", m.y0);
    s->get("offset", m.offset);
    s->get("keep_states", m.keep_states);
    s->get("fit_t_start", m.fit_t_start);
    s->finish();
  }
  top.finish();
  if (c.threads < 1) throw ConfigError("config.threads: must be >= 1");
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

json to_json(const ExperimentConfig& c) {
  const auto& r = c.reservoir;
  const auto& f3 = c.figure3;
  const auto& f45 = c.figure45;
  const auto& v = c.verify;
  const auto& cb = c.critical_b;
  const auto& m = c.mc;
  const auto& s = c.simulate;
  return {
      {"experiment", c.experiment},
      {"seed", c.seed},
      {"threads", c.threads},
      {"T", c.T},
      {"reservoir",
       {{"family", r.family}, {"k", r.k}, {"n", r.n}, {"spectrum", r.spectrum},
        {"spectrum_mode", r.spectrum_mode}, {"transfer", r.transfer}, {"anchors", r.anchors},
        {"input_scale", r.input_scale}, {"b", r.b}, {"input_gain", r.input_gain},
        {"weights", r.weights}, {"input_weights", r.input_weights}}},
      {"input",
       {{"kind", c.input.kind}, {"amplitude", c.input.amplitude}, {"value", c.input.value},
        {"path", c.input.path}}},
      {"figure3",
       {{"b_range", range_json(f3.b_range)}, {"b_values", opt_json(f3.b_values)}, {"T", f3.T},
        {"renorm_interval", f3.renorm_interval}, {"eps0", f3.eps0},
        {"start_on_orbit", f3.start_on_orbit}}},
      {"figure45",
       {{"b", f45.b}, {"perturbation", f45.perturbation}, {"perturb_at", f45.perturb_at},
        {"T", f45.T}, {"fit_t_start", f45.fit_t_start}}},
      {"verify",
       {{"transfers", v.transfers}, {"neurons", v.neurons}, {"eta", opt_json(v.eta)},
        {"gamma", v.gamma}, {"kappa", v.kappa}, {"delta_grid", range_json(v.delta_grid)},
        {"zeta_grid", range_json(v.zeta_grid)}, {"dominance_q0", v.dominance_q0},
        {"dominance_T", v.dominance_T}, {"audit_runs", v.audit_runs}, {"audit_T", v.audit_T}}},
      {"critical_b",
       {{"transfer", cb.transfer}, {"amplitude", cb.amplitude},
        {"bracket", {cb.bracket_lo, cb.bracket_hi}}, {"tol", cb.tol}}},
      {"mc",
       {{"k", m.k}, {"transfer", m.transfer}, {"spectrum", m.spectrum},
        {"input_scale", m.input_scale}, {"amplitude", m.amplitude}, {"max_delay", m.max_delay},
        {"T", m.T}, {"washout", m.washout}, {"ridge", m.ridge},
        {"ceiling_slack", m.ceiling_slack}}},
      {"simulate",
       {{"x0", opt_json(s.x0)}, {"y0", opt_json(s.y0)}, {"offset", s.offset},
        {"keep_states", s.keep_states}, {"fit_t_start", s.fit_t_start}}},
  };
}

Reservoir build_reservoir(const ReservoirConfig& rc, std::uint64_t seed) {
  const TransferFunction tf = transfer_from(rc.transfer, rc.anchors);
  SpectrumMode mode;
  if (rc.spectrum_mode == "singular") {
    mode = SpectrumMode::Singular;
  } else if (rc.spectrum_mode == "eigen") {
    mode = SpectrumMode::Eigen;
  } else {
    throw ConfigError("reservoir.spectrum_mode: expected 'singular' or 'eigen'");
  }

  if (rc.family == "alternating") return make_alternating_neuron(rc.b, tf);
  if (rc.family == "scalar") return make_scalar_neuron(rc.b, rc.input_gain, tf);
  if (rc.family == "orthogonal") {
    Reservoir base = make_orthogonal_reservoir(rc.k, rc.n, rc.input_scale, seed, tf);
    if (rc.spectrum == 1.0) return base;
    return Reservoir(scale_to_spectrum(base.weights(), rc.spectrum, mode), base.input_weights(), tf);
  }
  if (rc.family == "gaussian") {
    const Reservoir shape = make_orthogonal_reservoir(rc.k, rc.n, rc.input_scale, seed, tf);
    return Reservoir(scale_to_spectrum(gaussian_matrix(rc.k, seed), rc.spectrum, mode),
                     shape.input_weights(), tf);
  }
  if (rc.family == "csv") {
    if (rc.weights.empty() || rc.input_weights.empty()) {
      throw ConfigError("reservoir: family 'csv' needs 'weights' and 'input_weights' paths");
    }
    return Reservoir(read_matrix_csv(fs::path(rc.weights)), read_matrix_csv(fs::path(rc.input_weights)),
                     tf);
  }
  throw ConfigError("reservoir.family: unknown family '" + rc.family + "'");
}

// ---------------------------------------------------------------------------
// figure3: Lyapunov exponent of the alternating-input neuron over b

CommandResult cmd_figure3(const ExperimentConfig& config, const fs::path& out_dir) {
  const Figure3Config& f = config.figure3;
  const std::vector<double> grid = f.b_values ? *f.b_values : grid_values(f.b_range, "figure3.b_range");
  if (grid.empty()) throw ConfigError("figure3: the b grid is empty");

  const TransferFunction tf = transfer_from(config.reservoir.transfer, config.reservoir.anchors);
  const InputSequence input = input_from(config.input, config.seed);
  LyapunovOptions opts;
  opts.renorm_interval = f.renorm_interval;
  opts.eps0 = f.eps0;
  if (f.start_on_orbit) {
    // The designed orbit satisfies x_{t+1} = u_t, so x_0 = u_{-1} = -u_0.
    const Matrix u0 = generate_input(input, 1, 1);
    opts.x0 = Vector::Constant(1, -u0(0, 0));
  }
  const auto cells = lyapunov_sweep([&](double b) { return make_alternating_neuron(b, tf); }, input,
                                    grid, f.T, opts, config.threads);

  ensure_dir(out_dir);
  const fs::path csv = out_dir / "figure3.csv";
  auto out = open_out(csv);
  out << "b,lyapunov\n";
  json failed = json::array();
  std::optional<std::pair<double, double>> crossing;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out << format_double(cells[i].b) << ',' << format_double(cells[i].result.exponent) << '\n';
    if (!cells[i].ok) failed.push_back({{"b", cells[i].b}, {"error", cells[i].error}});
    if (i > 0 && !crossing && cells[i - 1].ok && cells[i].ok &&
        (cells[i - 1].result.exponent < 0.0) != (cells[i].result.exponent < 0.0)) {
      crossing = std::pair{cells[i - 1].b, cells[i].b};
    }
  }
  if (!out) throw std::ios_base::failure("write failed for '" + csv.string() + "'");

  CommandResult r;
  r.outputs = {csv};
  r.summary = {{"cells", cells.size()},
               {"failed_cells", failed},
               {"sign_change", crossing ? json{crossing->first, crossing->second} : json(nullptr)},
               {"input", input.describe()}};
  return r;
}

// ---------------------------------------------------------------------------
// figure45: perturbation decay under alternating vs i.i.d. input

CommandResult cmd_figure45(const ExperimentConfig& config, const fs::path& out_dir) {
  const Figure45Config& f = config.figure45;
  const TransferFunction tf = transfer_from(config.reservoir.transfer, config.reservoir.anchors);
  const Reservoir res = make_alternating_neuron(f.b, tf);
  const Vector delta = Vector::Constant(1, f.perturbation);
  const double a = config.input.amplitude;

  const ConvergenceTrace alt =
      perturbation_experiment(res, InputSequence::alternating(a), f.perturb_at, delta, f.T);
  const ConvergenceTrace iid =
      perturbation_experiment(res, InputSequence::iid_sign(a, config.seed), f.perturb_at, delta, f.T);
  const DecayFit alt_fit = fit_decay(alt, f.fit_t_start);
  const DecayFit iid_fit = fit_decay(iid, f.fit_t_start);

  ensure_dir(out_dir);
  const fs::path alt_csv = out_dir / "figure4_alternating.csv";
  const fs::path iid_csv = out_dir / "figure5_iid.csv";
  write_trace_csv(alt_csv, alt);
  write_trace_csv(iid_csv, iid);

  auto describe = [&](const ConvergenceTrace& t, const DecayFit& fit) {
    json j = trace_json(t);
    j["fit"] = fit_json(fit);
    j["q_at_64"] = t.q.size() > 64 ? number(t.q[64]) : json(nullptr);
    j["steps_to_floor_after_perturbation"] =
        t.floor_hit_at ? json(*t.floor_hit_at - f.perturb_at) : json(nullptr);
    return j;
  };
  const fs::path fits = out_dir / "figure45_fits.json";
  json summary = {{"alternating", describe(alt, alt_fit)}, {"iid", describe(iid, iid_fit)}};
  write_json(fits, summary);

  CommandResult r;
  r.outputs = {alt_csv, iid_csv, fits};
  r.summary = summary;
  return r;
}

// ---------------------------------------------------------------------------
// verify: cover inequality, dominance, phi properties, per-step audit

CommandResult cmd_verify(const ExperimentConfig& config, const fs::path& out_dir) {
  const VerifyConfig& v = config.verify;
  if (v.transfers.empty()) throw ConfigError("verify.transfers: must not be empty");
  if (v.neurons.empty()) throw ConfigError("verify.neurons: must not be empty");
  for (int n : v.neurons) {
    if (n < 1) throw ConfigError("verify.neurons: entries must be >= 1");
  }

  CoverParams single{v.eta.value_or(1.0 / 48.0), v.gamma, v.kappa, 1};
  try {
    single.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("verify: ") + e.what());
  }
  auto params_for = [&](int n) {
    const double nn = n;
    return CoverParams{single.eta / (nn * nn), single.gamma, single.kappa, n};
  };

  json checks = json::array();
  bool all_passed = true;
  auto record = [&](json entry, const VerificationReport& rep) {
    entry.update(report_json(rep));
    all_passed = all_passed && rep.passed;
    checks.push_back(std::move(entry));
  };

  const GridSpec dgrid = grid_spec(v.delta_grid, "verify.delta_grid");
  const GridSpec zgrid = grid_spec(v.zeta_grid, "verify.zeta_grid");
  std::vector<TransferFunction> transfers;
  for (const auto& name : v.transfers) transfers.push_back(transfer_from(name));

  for (const auto& tf : transfers) {
    record({{"check", "cover_inequality"}, {"transfer", tf.name()}, {"eta", single.eta}},
           verify_cover_inequality(tf, single, dgrid, zgrid, config.threads));
  }
  for (double q0 : v.dominance_q0) {
    record({{"check", "dominance"}, {"q0", q0}, {"T", v.dominance_T}},
           verify_dominance(q0, single, v.dominance_T));
  }
  for (int n : v.neurons) {
    record({{"check", "phi_properties"}, {"n", n}},
           verify_phi_properties(params_for(n), GridSpec{0.0, 4.0 * n * n, 1e-3 * n * n}));
  }

  // Twin trajectories on S = 1 orthogonal reservoirs with mixed inputs.
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> start(-1.0, 1.0);
  for (const auto& tf : transfers) {
    for (int n : v.neurons) {
      VerificationReport worst;
      worst.passed = true;
      worst.worst_margin = std::numeric_limits<double>::infinity();
      for (int run = 0; run < v.audit_runs; ++run) {
        const std::uint64_t seed = config.seed * 1000003ULL + static_cast<std::uint64_t>(run);
        const Reservoir res = make_orthogonal_reservoir(n, 1, 1.0, seed, tf);
        InputSequence input = InputSequence::constant(0.0);
        switch (run % 3) {
          case 0: input = InputSequence::alternating(std::numbers::pi / 4); break;
          case 1: input = InputSequence::iid_sign(std::numbers::pi / 4, seed); break;
          default: input = InputSequence::constant(0.0); break;
        }
        Vector x0(n), y0(n);
        for (int i = 0; i < n; ++i) {
          x0(i) = start(rng);
          y0(i) = start(rng);
        }
        const auto trace = convergence_trace(res, input, x0, y0, v.audit_T);
        const auto rep = audit_step_inequality(trace, params_for(n));
        worst.points_checked += rep.points_checked;
        if (rep.worst_margin < worst.worst_margin) {
          worst.worst_margin = rep.worst_margin;
          worst.worst_point = {static_cast<double>(run), rep.worst_point.empty() ? 0.0 : rep.worst_point[0]};
        }
        worst.passed = worst.passed && rep.passed;
      }
      worst.grid_spec = std::to_string(v.audit_runs) + " runs x " + std::to_string(v.audit_T) +
                        " steps; point = {run, t}";
      record({{"check", "step_audit"}, {"transfer", tf.name()}, {"n", n}}, worst);
    }
  }

  ensure_dir(out_dir);
  const fs::path path = out_dir / "verify.json";
  json summary = {{"passed", all_passed}, {"checks", checks}};
  write_json(path, summary);

  CommandResult r;
  r.exit_code = all_passed ? kExitOk : kExitCheckFailed;
  r.outputs = {path};
  r.summary = summary;
  return r;
}

// ---------------------------------------------------------------------------

CommandResult cmd_critical_b(const ExperimentConfig& config, const fs::path& out_dir) {
  const CriticalBConfig& cb = config.critical_b;
  const TransferFunction tf = transfer_from(cb.transfer);
  json summary;
  int code = kExitOk;
  try {
    const CriticalPoint cp = find_critical_b(tf, cb.amplitude, {cb.bracket_lo, cb.bracket_hi}, cb.tol);
    summary = {{"b_star", cp.b_star},
               {"orbit_amplitude", cp.orbit_amplitude},
               {"orbit_residual", cp.orbit_residual},
               {"marginal_residual", cp.marginal_residual},
               {"iterations", cp.iterations}};
  } catch (const std::runtime_error& e) {
    summary = {{"error", e.what()}};
    code = kExitCheckFailed;
  }
  summary["transfer"] = tf.name();
  summary["amplitude"] = cb.amplitude;
  summary["bracket"] = {cb.bracket_lo, cb.bracket_hi};
  summary["tol"] = cb.tol;

  ensure_dir(out_dir);
  const fs::path path = out_dir / "critical_b.json";
  write_json(path, summary);
  CommandResult r;
  r.exit_code = code;
  r.outputs = {path};
  r.summary = summary;
  return r;
}

// ---------------------------------------------------------------------------

CommandResult cmd_mc(const ExperimentConfig& config, const fs::path& out_dir) {
  const McConfig& m = config.mc;
  if (m.k.empty()) throw ConfigError("mc.k: must not be empty");
  const TransferFunction tf = transfer_from(m.transfer);
  MemoryCapacityOptions opts;
  opts.input_amplitude = m.amplitude;
  opts.max_delay = m.max_delay;
  opts.T = m.T;
  opts.washout = m.washout;
  opts.ridge = m.ridge;
  opts.seed = config.seed;

  ensure_dir(out_dir);
  CommandResult r;
  json rows = json::array();
  bool ok = true;
  for (int k : m.k) {
    Reservoir res = make_orthogonal_reservoir(k, 1, m.input_scale, config.seed, tf);
    if (m.spectrum != 1.0) {
      res = Reservoir(scale_to_spectrum(res.weights(), m.spectrum, SpectrumMode::Singular),
                      res.input_weights(), tf);
    }
    MemoryCapacity mc;
    try {
      mc = memory_capacity(res, opts);
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("mc: ") + e.what());
    }
    const fs::path csv = out_dir / ("mc_k" + std::to_string(k) + ".csv");
    auto out = open_out(csv);
    write_memory_capacity_csv(out, mc);
    if (!out) throw std::ios_base::failure("write failed for '" + csv.string() + "'");
    r.outputs.push_back(csv);
    const bool within = mc.total <= k + m.ceiling_slack;
    ok = ok && within;
    rows.push_back({{"k", k}, {"mc_total", mc.total}, {"within_ceiling", within}});
  }
  const fs::path path = out_dir / "mc.json";
  r.summary = {{"passed", ok}, {"results", rows}};
  write_json(path, r.summary);
  r.outputs.push_back(path);
  r.exit_code = ok ? kExitOk : kExitCheckFailed;
  return r;
}

// ---------------------------------------------------------------------------

CommandResult cmd_simulate(const ExperimentConfig& config, const fs::path& out_dir) {
  const SimulateConfig& s = config.simulate;
  const Reservoir res = build_reservoir(config.reservoir, config.seed);
  const InputSequence input = input_from(config.input, config.seed);
  const auto k = res.hidden_size();

  Vector x0 = Vector::Zero(k);
  if (s.x0) {
    if (static_cast<Eigen::Index>(s.x0->size()) != k) throw ConfigError("simulate.x0: expected k entries");
    x0 = to_vector(*s.x0);
  }
  Vector y0 = x0.array() + s.offset;
  if (s.y0) {
    if (static_cast<Eigen::Index>(s.y0->size()) != k) throw ConfigError("simulate.y0: expected k entries");
    y0 = to_vector(*s.y0);
  }
  if (config.T < 1) throw ConfigError("config.T: must be >= 1");

  const ConvergenceTrace trace = convergence_trace(res, input, x0, y0, config.T, s.keep_states);
  const DecayFit fit = fit_decay(trace, s.fit_t_start);
  const EscVerdict esc = check_esc(res);

  ensure_dir(out_dir);
  const fs::path csv = out_dir / "trace.csv";
  const fs::path w_csv = out_dir / "W.csv";
  const fs::path win_csv = out_dir / "w_in.csv";
  write_trace_csv(csv, trace);
  write_matrix_csv(w_csv, res.weights());
  write_matrix_csv(win_csv, res.input_weights());

  CommandResult r;
  r.summary = trace_json(trace);
  r.summary["fit"] = fit_json(fit);
  r.summary["esc"] = {{"c1_necessary", esc.c1_necessary},
                      {"c2_sufficient", esc.c2_sufficient},
                      {"critical_boundary", esc.critical_boundary},
                      {"covered_by_theorem", esc.covered_by_theorem},
                      {"max_singular_value", esc.spectrum.max_singular_value},
                      {"max_abs_eigenvalue", esc.spectrum.max_abs_eigenvalue},
                      {"is_normal", esc.spectrum.is_normal}};
  const fs::path fit_path = out_dir / "trace_fit.json";
  write_json(fit_path, r.summary);
  r.outputs = {csv, w_csv, win_csv, fit_path};
  return r;
}

// ---------------------------------------------------------------------------

int run_command(std::string_view name, const ExperimentConfig& config, const fs::path& out_dir) {
  using Fn = CommandResult (*)(const ExperimentConfig&, const fs::path&);
  static const std::map<std::string, Fn, std::less<>> table = {
      {"figure3", cmd_figure3},   {"figure45", cmd_figure45}, {"verify", cmd_verify},
      {"critical-b", cmd_critical_b}, {"mc", cmd_mc},         {"simulate", cmd_simulate},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + std::string(name) + "'");

  ExperimentConfig resolved = config;
  resolved.experiment = std::string(name);
  const CommandResult result = it->second(resolved, out_dir);

  const std::string stem(name);
  write_json(out_dir / (stem + ".config.json"), to_json(resolved));

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream stamp;
  stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  json outputs = json::array();
  for (const auto& p : result.outputs) outputs.push_back(p.filename().string());
  write_json(out_dir / (stem + ".meta.json"), {{"command", stem},
                                                {"finished_at", stamp.str()},
                                                {"exit_code", result.exit_code},
                                                {"outputs", outputs},
                                                {"summary", result.summary}});
  return result.exit_code;
}

}  // namespace critesn::cli
