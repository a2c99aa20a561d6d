#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "critesn/dynamics.hpp"

namespace critesn {

enum class LyapunovMethod { TwoTrajectory, JacobianProduct };

std::string to_string(LyapunovMethod method);

struct LyapunovResult {
  double exponent = 0.0;  // natural-log rate per step; +inf on divergence
  int T_used = 0;
  int renorm_interval = 0;
  LyapunovMethod method = LyapunovMethod::TwoTrajectory;
  bool diverged = false;
  // The separation (or tangent vector) collapsed below floating-point
  // resolution at least once; that segment was counted at the resolution
  // limit, so the exponent is an upper bound.
  bool resolution_limited = false;
};

struct LyapunovOptions {
  int renorm_interval = 10;
  double eps0 = 1e-9;
  std::optional<Vector> x0;  // zero state when empty
  LyapunovMethod method = LyapunovMethod::TwoTrajectory;
};

// Largest Lyapunov exponent of the input-driven system.
//
// TwoTrajectory follows a partner started eps0 away and rescales the
// separation back to eps0 every renorm_interval steps, averaging the log
// stretch factors. JacobianProduct propagates a tangent vector through
// diag(theta'(x_lin)) W.
//
// Requires T >= 10 * renorm_interval and eps0 in (0, 1e-6].
LyapunovResult lyapunov_exponent(const Reservoir& res, const InputSequence& input, int T,
                                 const LyapunovOptions& options = {});

struct SweepCell {
  double b = 0.0;
  LyapunovResult result;
  bool ok = false;
  std::string error;
};

// One exponent per grid value, all driven by the same input realization.
// Failed cells are flagged rather than thrown. Cells run on up to `threads`
// worker threads; output order follows the grid.
std::vector<SweepCell> lyapunov_sweep(const std::function<Reservoir(double)>& family,
                                      const InputSequence& input, const std::vector<double>& b_grid,
                                      int T, const LyapunovOptions& options = {}, int threads = 1);

enum class DecayLaw { Exponential, PowerLaw, None };

std::string to_string(DecayLaw law);

struct DecayFit {
  DecayLaw law = DecayLaw::None;
  double exponent_exp = 0.0;  // b in q ~ exp(b t)
  double exponent_pow = 0.0;  // a in q ~ t^a
  double r2_semilog = 0.0;
  double r2_loglog = 0.0;
  std::pair<int, int> fit_window{0, 0};
  int samples = 0;
};

// Least-squares fits of log q against t and against log t over the
// strictly positive samples with t >= max(t_start, 1) that precede the
// floor. The law is power_law when the log-log fit wins by >= 0.02 in r^2
// with exponent < -0.05, exponential when the semilog fit wins by >= 0.02
// with negative rate, otherwise none. Fewer than 20 usable samples gives
// law none with zero r^2.
DecayFit fit_decay(const ConvergenceTrace& trace, int t_start = 10);

struct CriticalPoint {
  double b_star = 0.0;
  double orbit_amplitude = 0.0;
  double orbit_residual = 0.0;     // |theta(b c - a) - c|
  double marginal_residual = 0.0;  // |b theta'(b c - a) - 1|
  int iterations = 0;
};

// Critical coupling of x_{t+1} = theta(-b x_t + u_t) with u_t = (-1)^t a.
//
// The antisymmetric period-2 orbit x_t = sign(u_t) c solves
// c = theta(b c - a). It appears through a tangency where additionally
// b theta'(b c - a) = 1, so the largest value of theta(b c - a) - c over
// c >= 0 changes sign at the critical b; bisection on that residual
// locates it. Throws std::runtime_error when the bracket has no sign change.
CriticalPoint find_critical_b(const TransferFunction& tf, double input_amplitude,
                              std::pair<double, double> bracket, double tol);

}  // namespace critesn
