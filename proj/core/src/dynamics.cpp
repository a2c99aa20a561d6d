#include "critesn/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "critesn/csv.hpp"

namespace critesn {
namespace {

constexpr double kFloorDistance = 1e-300;

void require_positive_horizon(int T, const char* what) {
  if (T < 1) throw std::domain_error(std::string(what) + ": T must be >= 1");
}

std::string describe_vector(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v(i));
  }
  return s + "]";
}

Matrix read_input_file(const std::filesystem::path& path, int T, int n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open input file '" + path.string() + "'");
  Matrix u(T, n);
  std::string line;
  int row = 0;
  int line_no = 0;
  while (row < T && std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != n) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(n) + " columns, got " +
                               std::to_string(fields.size()));
    }
    for (int j = 0; j < n; ++j) {
      try {
        u(row, j) = parse_double(fields[j]);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    ++row;
  }
  if (row < T) {
    throw std::runtime_error(path.string() + ": needs " + std::to_string(T) + " rows, has " +
                             std::to_string(row));
  }
  return u;
}

}  // namespace

InputSequence InputSequence::alternating(double amplitude) {
  return {InputKind::Alternating, amplitude, 0, {}};
}
InputSequence InputSequence::iid_sign(double amplitude, std::uint64_t seed) {
  return {InputKind::IidSign, amplitude, seed, {}};
}
InputSequence InputSequence::constant(double value) {
  return {InputKind::Constant, value, 0, {}};
}
InputSequence InputSequence::file(std::filesystem::path path) {
  return {InputKind::File, 0.0, 0, std::move(path)};
}

std::string InputSequence::describe() const {
  switch (kind) {
    case InputKind::Alternating: return "Alternating(" + format_double(amplitude) + ")";
    case InputKind::IidSign:
      return "IidSign(" + format_double(amplitude) + ",seed=" + std::to_string(seed) + ")";
    case InputKind::Constant: return "Constant(" + format_double(amplitude) + ")";
    case InputKind::File: return "File(" + path.string() + ")";
  }
  return "Unknown";
}

Matrix generate_input(const InputSequence& input, int T, int n) {
  require_positive_horizon(T, "generate_input");
  if (n < 1) throw std::domain_error("generate_input: n must be >= 1");
  Matrix u(T, n);
  switch (input.kind) {
    case InputKind::Alternating:
      for (int t = 0; t < T; ++t) u.row(t).setConstant(t % 2 == 0 ? input.amplitude : -input.amplitude);
      break;
    case InputKind::Constant:
      u.setConstant(input.amplitude);
      break;
    case InputKind::IidSign: {
      std::mt19937_64 rng(input.seed);
      for (int t = 0; t < T; ++t)
        for (int j = 0; j < n; ++j) u(t, j) = (rng() >> 63) ? input.amplitude : -input.amplitude;
      break;
    }
    case InputKind::File:
      u = read_input_file(input.path, T, n);
      break;
  }
  return u;
}

void step_into(const Reservoir& res, const Vector& x, const Eigen::Ref<const Vector>& u,
               Vector& next, Vector& linear) {
  linear.noalias() = res.weights() * x;
  linear.noalias() += res.input_weights() * u;
  const TransferFunction& tf = res.transfer();
  for (Eigen::Index i = 0; i < linear.size(); ++i) next(i) = tf.eval(linear(i));
}

StepResult step(const Reservoir& res, const Vector& x, const Vector& u) {
  if (x.size() != res.hidden_size() || u.size() != res.input_size()) {
    throw std::domain_error("step: expected state of size " + std::to_string(res.hidden_size()) +
                            " and input of size " + std::to_string(res.input_size()));
  }
  StepResult r{Vector(res.hidden_size()), Vector(res.hidden_size())};
  step_into(res, x, u, r.next, r.linear);
  return r;
}

Trajectory run(const Reservoir& res, const Matrix& inputs, const Vector& x0) {
  if (x0.size() != res.hidden_size() || inputs.cols() != res.input_size()) {
    throw std::domain_error("run: state or input dimension does not match the reservoir");
  }
  const Eigen::Index T = inputs.rows();
  const Eigen::Index k = res.hidden_size();
  Trajectory traj{x0, Matrix(T, k), Matrix(T, k), {}};
  Vector x = x0;
  Vector next(k);
  Vector lin(k);
  for (Eigen::Index t = 0; t < T; ++t) {
    step_into(res, x, inputs.row(t).transpose(), next, lin);
    traj.states.row(t) = next.transpose();
    traj.linear_states.row(t) = lin.transpose();
    x.swap(next);
  }
  return traj;
}

Trajectory run(const Reservoir& res, const InputSequence& input, const Vector& x0, int T) {
  require_positive_horizon(T, "run");
  Trajectory traj =
      run(res, generate_input(input, T, static_cast<int>(res.input_size())), x0);
  traj.input = input;
  return traj;
}

namespace {

// Shared twin-run loop. extra(t) returns the input offset of the y twin at
// step t (zero vector for none).
template <class Offset>
ConvergenceTrace twin_run(const Reservoir& res, const Matrix& inputs, const Vector& x0,
                          const Vector& y0, int floor_after, bool keep_states, Offset&& offset) {
  const Eigen::Index k = res.hidden_size();
  const int T = static_cast<int>(inputs.rows());
  ConvergenceTrace trace;
  trace.q.assign(static_cast<std::size_t>(T) + 1, 0.0);
  if (keep_states) {
    trace.x_states.resize(T + 1, k);
    trace.x_states.row(0) = x0.transpose();
  }
  Vector x = x0;
  Vector y = y0;
  Vector xn(k), yn(k), lin(k), uy(res.input_size());
  trace.q[0] = (x - y).norm();
  bool floored = false;
  for (int t = 0; t < T; ++t) {
    const auto u = inputs.row(t).transpose();
    step_into(res, x, u, xn, lin);
    if (floored) {
      yn = xn;
    } else {
      uy = u;
      offset(t, uy);
      step_into(res, y, uy, yn, lin);
    }
    x.swap(xn);
    y.swap(yn);
    if (keep_states) trace.x_states.row(t + 1) = x.transpose();
    if (floored) continue;
    double d = (x - y).norm();
    if (t + 1 > floor_after && d < kFloorDistance) {
      d = 0.0;
      y = x;
      floored = true;
      trace.floor_hit_at = t + 1;
    }
    trace.q[t + 1] = d;
  }
  return trace;
}

}  // namespace

ConvergenceTrace convergence_trace(const Reservoir& res, const InputSequence& input,
                                   const Vector& x0, const Vector& y0, int T, bool keep_states) {
  require_positive_horizon(T, "convergence_trace");
  if (x0.size() != res.hidden_size() || y0.size() != res.hidden_size()) {
    throw std::domain_error("convergence_trace: initial states must have size k");
  }
  const Matrix inputs = generate_input(input, T, static_cast<int>(res.input_size()));
  ConvergenceTrace trace =
      twin_run(res, inputs, x0, y0, 0, keep_states, [](int, Vector&) {});
  if (trace.q[0] < kFloorDistance) {
    trace.floor_hit_at = 0;
    std::fill(trace.q.begin(), trace.q.end(), 0.0);
  }
  trace.meta = {res.describe(), input.describe(), x0, y0, std::nullopt};
  return trace;
}

ConvergenceTrace perturbation_experiment(const Reservoir& res, const InputSequence& base_input,
                                         int perturb_at, const Vector& delta_u, int T,
                                         std::optional<Vector> x0) {
  require_positive_horizon(T, "perturbation_experiment");
  if (perturb_at < 0 || perturb_at >= T) {
    throw std::domain_error("perturbation_experiment: require 0 <= perturb_at < T");
  }
  if (delta_u.size() != res.input_size()) {
    throw std::domain_error("perturbation_experiment: delta_u must have size n");
  }
  const Vector start = x0.value_or(Vector::Zero(res.hidden_size()));
  if (start.size() != res.hidden_size()) {
    throw std::domain_error("perturbation_experiment: x0 must have size k");
  }
  const Matrix inputs = generate_input(base_input, T, static_cast<int>(res.input_size()));
  ConvergenceTrace trace = twin_run(res, inputs, start, start, perturb_at, false,
                                    [&](int t, Vector& u) {
                                      if (t == perturb_at) u += delta_u;
                                    });
  trace.meta = {res.describe(), base_input.describe() + " delta_u=" + describe_vector(delta_u),
                start, start, perturb_at};
  return trace;
}

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
  const bool states = trace.x_states.rows() == static_cast<Eigen::Index>(trace.q.size());
  out << "t,q";
  if (states) {
    for (Eigen::Index i = 0; i < trace.x_states.cols(); ++i) out << ",x_" << i;
  }
  out << '\n';
  for (std::size_t t = 0; t < trace.q.size(); ++t) {
    out << t << ',' << format_double(trace.q[t]);
    if (states) {
      for (Eigen::Index i = 0; i < trace.x_states.cols(); ++i) {
        out << ',' << format_double(trace.x_states(static_cast<Eigen::Index>(t), i));
      }
    }
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
  write_trace_csv(out, trace);
  if (!out) throw std::ios_base::failure("write failed for '" + path.string() + "'");
}

}  // namespace critesn
