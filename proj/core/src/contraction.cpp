#include "critesn/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "critesn/csv.hpp"

namespace critesn {

CoverParams CoverParams::defaults(int n_neurons) {
  if (n_neurons < 1) throw std::domain_error("CoverParams: n_neurons must be >= 1");
  const double n = n_neurons;
  return {1.0 / (48.0 * n * n), 0.5, 2.0, n_neurons};
}

CoverParams CoverParams::single_neuron() const {
  const double n = n_neurons;
  return {eta * n * n, gamma, kappa, 1};
}

void CoverParams::validate() const {
  if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("CoverParams: eta must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("CoverParams: gamma must lie in (0, 1)");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw std::domain_error("CoverParams: kappa must be >= 1");
  if (n_neurons < 1) throw std::domain_error("CoverParams: n_neurons must be >= 1");
}

double phi(double z, const CoverParams& p) {
  if (!(z >= 0.0)) throw std::domain_error("phi: argument must be >= 0");
  return z < p.gamma ? 1.0 - p.eta * std::pow(z, p.kappa) : 1.0 - p.eta * std::pow(p.gamma, p.kappa);
}

double phi_k(double x, const CoverParams& p) {
  const double n = p.n_neurons;
  return phi(x / (n * n), p.single_neuron());
}

double omega(const TransferFunction& tf, double delta, double zeta) {
  if (!(delta > 0.0)) throw std::domain_error("omega: delta must be > 0");
  const double quotient = (tf.eval(delta + zeta) - tf.eval(zeta)) / delta;
  return quotient * quotient;
}

OmegaMax argmax_omega(const TransferFunction& tf, double delta, double lo, double hi) {
  if (!(lo < hi)) throw std::domain_error("argmax_omega: require lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = omega(tf, delta, c);
  double fd = omega(tf, delta, d);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = omega(tf, delta, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = omega(tf, delta, d);
    }
  }
  const double z = 0.5 * (a + b);
  return {z, omega(tf, delta, z)};
}

std::vector<double> GridSpec::points() const {
  if (!(step > 0.0) || !(lo <= hi)) throw std::domain_error("GridSpec: require step > 0 and lo <= hi");
  const auto count = static_cast<long long>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) pts.push_back(lo + static_cast<double>(i) * step);
  return pts;
}

std::string GridSpec::describe() const {
  return "[" + format_double(lo) + ", " + format_double(hi) + "] step " + format_double(step);
}

namespace {

struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  std::vector<double> point;
  long long checked = 0;

  void consider(double m, std::vector<double> at) {
    ++checked;
    if (m < margin) {
      margin = m;
      point = std::move(at);
    }
  }
  void merge(const Worst& other) {
    checked += other.checked;
    if (other.margin < margin) {
      margin = other.margin;
      point = other.point;
    }
  }
};

VerificationReport to_report(const Worst& w, std::string grid) {
  VerificationReport r;
  r.worst_margin = w.margin;
  r.worst_point = w.point;
  r.points_checked = w.checked;
  r.grid_spec = std::move(grid);
  r.passed = w.checked > 0 && w.margin >= -kVerificationSlack;
  return r;
}

}  // namespace

VerificationReport verify_cover_inequality(const TransferFunction& tf, const CoverParams& p,
                                           const GridSpec& delta_grid, const GridSpec& zeta_grid,
                                           int threads) {
  p.validate();
  const CoverParams single = p.single_neuron();
  std::vector<double> deltas;
  for (double d : delta_grid.points()) {
    if (d > 0.0) deltas.push_back(d);
  }
  deltas.push_back(std::sqrt(single.gamma));
  const std::vector<double> zetas = zeta_grid.points();
  const std::vector<double> wide = GridSpec{-16.0, 16.0, 0.1}.points();

  auto check_delta = [&](double delta, Worst& worst) {
    const double bound = phi(delta * delta, single);
    for (double z : zetas) worst.consider(bound - omega(tf, delta, z), {delta, z});
    for (double z : wide) worst.consider(bound - omega(tf, delta, z), {delta, z});
  };

  const std::size_t workers = std::clamp<std::size_t>(
      threads < 1 ? 1 : static_cast<std::size_t>(threads), 1, deltas.size());
  std::vector<Worst> partial(workers);
  if (workers == 1) {
    for (double d : deltas) check_delta(d, partial[0]);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < deltas.size(); i += workers) check_delta(deltas[i], partial[w]);
      });
    }
  }
  Worst total;
  for (const Worst& w : partial) total.merge(w);
  return to_report(total, "delta " + delta_grid.describe() + " + sqrt(gamma); zeta " +
                              zeta_grid.describe() + " + [-16, 16] step 0.1; transfer " +
                              tf.name());
}

VerificationReport verify_phi_properties(const CoverParams& p, const GridSpec& x_grid) {
  p.validate();
  Worst worst;
  const std::vector<double> xs = x_grid.points();
  double prev_x = -1.0;
  double prev_phi = 0.0;
  for (double x : xs) {
    if (x < 0.0) continue;
    const double f = phi_k(x, p);
    worst.consider(1.0 - f, {x, 0.0});
    if (prev_x >= 0.0) {
      worst.consider(prev_phi - f, {x, 1.0});
      // x phi(x) >= x' phi(x') for x >= x'; rounding of the products is
      // below the verification slack on any grid within [0, 1e3].
      worst.consider(x * f - prev_x * prev_phi, {x, 2.0});
    }
    prev_x = x;
    prev_phi = f;
  }
  return to_report(worst, "x " + x_grid.describe() + "; point = {x, check(0:<=1,1:monotone,2:product)}");
}

std::vector<double> iterate_q(double q0, const CoverParams& p, int T) {
  p.validate();
  if (!(q0 >= 0.0 && q0 <= 1.0)) throw std::domain_error("iterate_q: q0 must lie in [0, 1]");
  if (T < 0) throw std::domain_error("iterate_q: T must be >= 0");
  if (!(p.eta * std::pow(q0, p.kappa) < 1.0)) {
    throw std::domain_error("iterate_q: eta * q0^kappa must be < 1");
  }
  std::vector<double> q(static_cast<std::size_t>(T) + 1);
  q[0] = q0;
  for (std::size_t t = 1; t < q.size(); ++t) {
    q[t] = q[t - 1] * (1.0 - p.eta * std::pow(q[t - 1], p.kappa));
  }
  return q;
}

double q_star(double t, double q0, const CoverParams& p) {
  if (!(q0 > 0.0)) throw std::domain_error("q_star: q0 must be > 0");
  if (t == 0.0) return q0;
  return std::pow(p.eta / p.kappa * t + std::pow(q0, -p.kappa), -1.0 / p.kappa);
}

VerificationReport verify_dominance(double q0, const CoverParams& p, int T) {
  const std::vector<double> q = iterate_q(q0, p, T);
  Worst worst;
  for (std::size_t t = 0; t < q.size(); ++t) {
    worst.consider(q_star(static_cast<double>(t), q0, p) - q[t], {static_cast<double>(t)});
  }
  return to_report(worst, "t in [0, " + std::to_string(T) + "], q0 = " + format_double(q0));
}

double tau_bound(double epsilon, double d0, const TauRegime& regime, const CoverParams& p) {
  if (!(epsilon > 0.0) || !(d0 > 0.0)) throw std::domain_error("tau_bound: epsilon and d0 must be > 0");
  switch (regime.kind) {
    case TauRegimeKind::Subcritical:
      if (!(regime.S > 0.0 && regime.S < 1.0)) {
        throw std::domain_error("tau_bound: subcritical regime needs 0 < S < 1");
      }
      if (!(epsilon < d0)) throw std::domain_error("tau_bound: require epsilon < d0");
      return (std::log(epsilon) - std::log(d0)) / std::log(regime.S);
    case TauRegimeKind::CriticalFar:
      p.validate();
      if (!(epsilon < d0)) throw std::domain_error("tau_bound: require epsilon < d0");
      if (!(epsilon * epsilon >= p.gamma)) {
        throw std::domain_error("tau_bound: far phase requires epsilon^2 >= gamma");
      }
      return (2.0 * std::log(epsilon) - 2.0 * std::log(d0)) /
             std::log(1.0 - p.eta * std::pow(p.gamma, p.kappa));
    case TauRegimeKind::CriticalNear: {
      p.validate();
      if (!(epsilon * epsilon < p.gamma)) {
        throw std::domain_error("tau_bound: near phase requires epsilon^2 < gamma");
      }
      const double q0 = d0 * d0;
      const double tau =
          p.kappa / p.eta * (std::pow(epsilon, -2.0 * p.kappa) - std::pow(q0, -p.kappa));
      return std::max(0.0, tau);
    }
  }
  throw std::domain_error("tau_bound: unknown regime");
}

VerificationReport audit_step_inequality(const ConvergenceTrace& trace, const CoverParams& p,
                                         double slack) {
  p.validate();
  Worst worst;
  for (std::size_t t = 0; t + 1 < trace.q.size(); ++t) {
    // Steps between coinciding twins hold trivially and would pin the margin at 0.
    if (trace.q[t] == 0.0 && trace.q[t + 1] == 0.0) continue;
    const double q2 = trace.q[t] * trace.q[t];
    const double next2 = trace.q[t + 1] * trace.q[t + 1];
    worst.consider(q2 * phi_k(q2, p) - next2, {static_cast<double>(t)});
  }
  VerificationReport r = to_report(worst, "trace of " + std::to_string(trace.q.size()) + " samples");
  r.passed = worst.checked == 0 || worst.margin >= -slack;
  return r;
}

std::optional<int> first_time_below(const std::vector<double>& q, double epsilon) {
  for (std::size_t t = 0; t < q.size(); ++t) {
    if (q[t] <= epsilon) return static_cast<int>(t);
  }
  return std::nullopt;
}

}  // namespace critesn
