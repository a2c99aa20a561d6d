#include "critesn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace critesn {

std::string to_string(LyapunovMethod method) {
  return method == LyapunovMethod::TwoTrajectory ? "two_trajectory" : "jacobian_product";
}

std::string to_string(DecayLaw law) {
  switch (law) {
    case DecayLaw::Exponential: return "exponential";
    case DecayLaw::PowerLaw: return "power_law";
    case DecayLaw::None: return "none";
  }
  return "none";
}

namespace {

// step_into without the domain error: returns false when x_lin overflowed.
bool advance(const Reservoir& res, const Vector& x, const Eigen::Ref<const Vector>& u, Vector& next,
             Vector& lin) {
  lin.noalias() = res.weights() * x;
  lin.noalias() += res.input_weights() * u;
  if (!lin.allFinite()) return false;
  const TransferFunction& tf = res.transfer();
  for (Eigen::Index j = 0; j < lin.size(); ++j) next(j) = tf.eval(lin(j));
  return true;
}

LyapunovResult diverged_result(const LyapunovOptions& options, int T_used) {
  LyapunovResult r;
  r.exponent = std::numeric_limits<double>::infinity();
  r.diverged = true;
  r.T_used = T_used;
  r.renorm_interval = options.renorm_interval;
  r.method = options.method;
  return r;
}

LyapunovResult two_trajectory(const Reservoir& res, const Matrix& inputs,
                              const LyapunovOptions& options, const Vector& x0) {
  const Eigen::Index k = res.hidden_size();
  const int R = options.renorm_interval;
  const int segments = static_cast<int>(inputs.rows()) / R;
  const Vector direction = Vector::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));

  Vector x = x0;
  Vector y = x0 + options.eps0 * direction;
  Vector xn(k), yn(k), lin(k);
  double log_sum = 0.0;
  bool limited = false;
  int t = 0;
  for (int s = 0; s < segments; ++s) {
    for (int i = 0; i < R; ++i, ++t) {
      const auto u = inputs.row(t).transpose();
      if (!advance(res, x, u, xn, lin) || !advance(res, y, u, yn, lin)) {
        return diverged_result(options, t);
      }
      x.swap(xn);
      y.swap(yn);
    }
    Vector sep = y - x;
    const double d = sep.norm();
    if (!std::isfinite(d)) return diverged_result(options, t);
    if (d == 0.0) {
      const double floor =
          std::numeric_limits<double>::epsilon() * std::max(1.0, x.cwiseAbs().maxCoeff());
      log_sum += std::log(floor / options.eps0);
      limited = true;
      y = x + options.eps0 * direction;
    } else {
      log_sum += std::log(d / options.eps0);
      y = x + (options.eps0 / d) * sep;
    }
  }
  LyapunovResult r;
  r.T_used = segments * R;
  r.exponent = log_sum / r.T_used;
  r.renorm_interval = R;
  r.method = LyapunovMethod::TwoTrajectory;
  r.resolution_limited = limited;
  return r;
}

LyapunovResult jacobian_product(const Reservoir& res, const Matrix& inputs,
                                const LyapunovOptions& options, const Vector& x0) {
  const Eigen::Index k = res.hidden_size();
  const int R = options.renorm_interval;
  const int segments = static_cast<int>(inputs.rows()) / R;
  const TransferFunction& tf = res.transfer();

  Vector x = x0;
  Vector xn(k), lin(k);
  Vector v = Vector::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
  Vector vn(k);
  double log_sum = 0.0;
  bool limited = false;
  int t = 0;
  for (int s = 0; s < segments; ++s) {
    for (int i = 0; i < R; ++i, ++t) {
      const auto u = inputs.row(t).transpose();
      if (!advance(res, x, u, xn, lin)) return diverged_result(options, t);
      vn.noalias() = res.weights() * v;
      for (Eigen::Index j = 0; j < k; ++j) vn(j) *= tf.derivative(lin(j));
      v.swap(vn);
      x.swap(xn);
    }
    const double norm = v.norm();
    if (!std::isfinite(norm)) return diverged_result(options, t);
    if (norm == 0.0) {
      log_sum += std::log(std::numeric_limits<double>::min());
      limited = true;
      v = Vector::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
    } else {
      log_sum += std::log(norm);
      v /= norm;
    }
  }
  LyapunovResult r;
  r.T_used = segments * R;
  r.exponent = log_sum / r.T_used;
  r.renorm_interval = R;
  r.method = LyapunovMethod::JacobianProduct;
  r.resolution_limited = limited;
  return r;
}

void check_lyapunov_args(int T, const LyapunovOptions& options) {
  if (options.renorm_interval < 1) throw std::domain_error("lyapunov: renorm_interval must be >= 1");
  if (T < 10 * options.renorm_interval) {
    throw std::domain_error("lyapunov: T must be at least 10 * renorm_interval");
  }
  if (!(options.eps0 > 0.0 && options.eps0 <= 1e-6)) {
    throw std::domain_error("lyapunov: eps0 must lie in (0, 1e-6]");
  }
}

LyapunovResult lyapunov_with_inputs(const Reservoir& res, const Matrix& inputs,
                                    const LyapunovOptions& options) {
  const Vector x0 = options.x0.value_or(Vector::Zero(res.hidden_size()));
  if (x0.size() != res.hidden_size()) throw std::domain_error("lyapunov: x0 must have size k");
  return options.method == LyapunovMethod::TwoTrajectory
             ? two_trajectory(res, inputs, options, x0)
             : jacobian_product(res, inputs, options, x0);
}

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit fit;
  if (sxx <= 0.0) return fit;
  fit.slope = sxy / sxx;
  if (syy > 0.0) fit.r2 = std::clamp((sxy * sxy) / (sxx * syy), 0.0, 1.0);
  return fit;
}

}  // namespace

LyapunovResult lyapunov_exponent(const Reservoir& res, const InputSequence& input, int T,
                                 const LyapunovOptions& options) {
  check_lyapunov_args(T, options);
  const Matrix inputs = generate_input(input, T, static_cast<int>(res.input_size()));
  return lyapunov_with_inputs(res, inputs, options);
}

std::vector<SweepCell> lyapunov_sweep(const std::function<Reservoir(double)>& family,
                                      const InputSequence& input, const std::vector<double>& b_grid,
                                      int T, const LyapunovOptions& options, int threads) {
  if (b_grid.empty()) throw std::domain_error("lyapunov_sweep: grid must not be empty");
  check_lyapunov_args(T, options);

  std::vector<SweepCell> cells(b_grid.size());
  // Input dimension is taken from the first cell; every family member must agree.
  Matrix inputs;
  {
    const Reservoir probe = family(b_grid.front());
    inputs = generate_input(input, T, static_cast<int>(probe.input_size()));
  }

  auto work = [&](std::size_t i) {
    SweepCell& cell = cells[i];
    cell.b = b_grid[i];
    try {
      const Reservoir res = family(cell.b);
      if (res.input_size() != inputs.cols()) {
        throw std::domain_error("lyapunov_sweep: family changes the input dimension");
      }
      cell.result = lyapunov_with_inputs(res, inputs, options);
      cell.ok = !cell.result.diverged;
      if (!cell.ok) cell.error = "diverged";
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  };

  const std::size_t workers =
      std::clamp<std::size_t>(threads < 1 ? 1 : static_cast<std::size_t>(threads), 1, cells.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) work(i);
    return cells;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < cells.size(); i += workers) work(i);
    });
  }
  pool.clear();
  return cells;
}

DecayFit fit_decay(const ConvergenceTrace& trace, int t_start) {
  DecayFit fit;
  const int first = std::max(t_start, 1);
  const int end = trace.floor_hit_at ? *trace.floor_hit_at : static_cast<int>(trace.q.size());
  std::vector<double> ts, logts, logqs;
  for (int t = first; t < end && t < static_cast<int>(trace.q.size()); ++t) {
    const double q = trace.q[static_cast<std::size_t>(t)];
    if (!(q > 0.0) || !std::isfinite(q)) continue;
    ts.push_back(static_cast<double>(t));
    logts.push_back(std::log(static_cast<double>(t)));
    logqs.push_back(std::log(q));
  }
  fit.samples = static_cast<int>(ts.size());
  if (fit.samples < 20) return fit;
  fit.fit_window = {static_cast<int>(ts.front()), static_cast<int>(ts.back())};

  const LineFit semi = least_squares(ts, logqs);
  const LineFit loglog = least_squares(logts, logqs);
  fit.exponent_exp = semi.slope;
  fit.r2_semilog = semi.r2;
  fit.exponent_pow = loglog.slope;
  fit.r2_loglog = loglog.r2;

  constexpr double kMargin = 0.02;
  if (fit.r2_loglog >= fit.r2_semilog + kMargin && fit.exponent_pow < -0.05) {
    fit.law = DecayLaw::PowerLaw;
  } else if (fit.r2_semilog >= fit.r2_loglog + kMargin && fit.exponent_exp < 0.0) {
    fit.law = DecayLaw::Exponential;
  }
  return fit;
}

namespace {

struct OrbitProbe {
  double residual;  // max over c >= 0 of theta(b c - a) - c
  double c;
};

OrbitProbe probe_orbit(const TransferFunction& tf, double a, double b) {
  const auto g = [&](double c) { return tf.eval(b * c - a) - c; };
  const auto dg = [&](double c) { return b * tf.derivative(b * c - a) - 1.0; };

  const double c_hi = 4.0 + std::abs(a);
  constexpr int kScan = 4000;
  OrbitProbe best{g(0.0), 0.0};
  const double end_value = g(c_hi);
  if (end_value > best.residual) best = {end_value, c_hi};

  double c_prev = 0.0;
  double d_prev = dg(0.0);
  for (int i = 1; i <= kScan; ++i) {
    const double c = c_hi * i / kScan;
    const double d = dg(c);
    if (d_prev > 0.0 && d <= 0.0) {
      double lo = c_prev, hi = c;
      for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (dg(mid) > 0.0 ? lo : hi) = mid;
      }
      const double cm = 0.5 * (lo + hi);
      const double value = g(cm);
      if (value > best.residual) best = {value, cm};
    }
    c_prev = c;
    d_prev = d;
  }
  return best;
}

}  // namespace

CriticalPoint find_critical_b(const TransferFunction& tf, double input_amplitude,
                              std::pair<double, double> bracket, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("find_critical_b: tol must be positive");
  auto [lo, hi] = bracket;
  if (!(lo < hi)) throw std::domain_error("find_critical_b: bracket must satisfy lo < hi");
  const double a = std::abs(input_amplitude);

  // Orbit exists on the side where the residual is positive.
  const bool lo_exists = probe_orbit(tf, a, lo).residual > 0.0;
  const bool hi_exists = probe_orbit(tf, a, hi).residual > 0.0;
  if (lo_exists == hi_exists) {
    throw std::runtime_error("find_critical_b: no sign change of the orbit residual in [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  CriticalPoint cp;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const bool exists = probe_orbit(tf, a, mid).residual > 0.0;
    (exists == hi_exists ? hi : lo) = mid;
    ++cp.iterations;
  }
  cp.b_star = hi_exists ? hi : lo;
  const OrbitProbe orbit = probe_orbit(tf, a, cp.b_star);
  cp.orbit_amplitude = orbit.c;
  cp.orbit_residual = std::abs(orbit.residual);
  cp.marginal_residual = std::abs(cp.b_star * tf.derivative(cp.b_star * orbit.c - a) - 1.0);
  return cp;
}

}  // namespace critesn
