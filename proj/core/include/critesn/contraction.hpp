#pragma once

#include <optional>
#include <string>
#include <vector>

#include "critesn/dynamics.hpp"
#include "critesn/transfer.hpp"

namespace critesn {

// Parameters (eta, gamma, kappa) of the cover function phi for an
// n-neuron network.
struct CoverParams {
  double eta = 1.0 / 48.0;
  double gamma = 0.5;
  double kappa = 2.0;
  int n_neurons = 1;

  // eta = 1 / (48 n^2), gamma = 1/2, kappa = 2.
  static CoverParams defaults(int n_neurons = 1);

  // The one-neuron cover underlying this parameter set: same gamma and
  // kappa, eta scaled by n^2 (so defaults(n).single_neuron() == defaults(1)).
  CoverParams single_neuron() const;

  // Throws std::domain_error unless eta, gamma in (0,1), kappa >= 1, n >= 1.
  void validate() const;
};

// phi(z) = 1 - eta z^kappa for z < gamma, 1 - eta gamma^kappa otherwise.
double phi(double z, const CoverParams& p);

// Network cover phi_k(x) = phi_1(x / n^2) with phi_1 from p.single_neuron().
double phi_k(double x, const CoverParams& p);

// omega(delta, zeta) = ((theta(delta + zeta) - theta(zeta)) / delta)^2
double omega(const TransferFunction& tf, double delta, double zeta);

struct OmegaMax {
  double zeta;
  double value;
};
// Golden-section search for the maximizing zeta on [lo, hi]; assumes a
// single interior maximum on the interval.
OmegaMax argmax_omega(const TransferFunction& tf, double delta, double lo, double hi);

// Uniform grid lo, lo + step, ..., up to hi (inclusive, rounded to the
// nearest whole number of steps).
struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.01;

  std::vector<double> points() const;
  std::string describe() const;
};

struct VerificationReport {
  bool passed = false;
  double worst_margin = 0.0;  // min over checked points of (bound - value)
  std::vector<double> worst_point;
  std::string grid_spec;
  long long points_checked = 0;
};

constexpr double kVerificationSlack = 1e-12;

// Checks omega(delta, zeta) <= phi_1(delta^2) at every grid point with
// delta > 0, plus delta = sqrt(gamma) and a coarse extension of zeta to
// |zeta| <= 16 at step 0.1.
VerificationReport verify_cover_inequality(const TransferFunction& tf, const CoverParams& p,
                                           const GridSpec& delta_grid = {0.0, 4.0, 0.01},
                                           const GridSpec& zeta_grid = {-4.0, 4.0, 0.01},
                                           int threads = 1);

// phi_k <= 1, phi_k non-increasing and x phi_k(x) non-decreasing on the grid.
VerificationReport verify_phi_properties(const CoverParams& p, const GridSpec& x_grid);

// q_0 .. q_T of q_{t+1} = q_t (1 - eta q_t^kappa). q0 = 0 is the fixed point.
std::vector<double> iterate_q(double q0, const CoverParams& p, int T);

// q*(t) = [(eta/kappa) t + q0^-kappa]^(-1/kappa)
double q_star(double t, double q0, const CoverParams& p);

// q*(t) >= q_t for t = 0..T.
VerificationReport verify_dominance(double q0, const CoverParams& p, int T);

enum class TauRegimeKind { Subcritical, CriticalFar, CriticalNear };

struct TauRegime {
  TauRegimeKind kind = TauRegimeKind::Subcritical;
  double S = 0.0;  // only for Subcritical

  static TauRegime subcritical(double S) { return {TauRegimeKind::Subcritical, S}; }
  static TauRegime critical_far() { return {TauRegimeKind::CriticalFar, 0.0}; }
  static TauRegime critical_near() { return {TauRegimeKind::CriticalNear, 0.0}; }
};

// Upper limit on the number of steps until d(x_t, y_t) <= epsilon, given
// the initial distance d0.
//   Subcritical:  (log eps - log d0) / log S
//   CriticalFar:  (2 log eps - 2 log d0) / log(1 - eta gamma^kappa), eps^2 >= gamma
//   CriticalNear: (kappa/eta) (eps^(-2 kappa) - d0^(-2 kappa)), eps^2 < gamma,
//                 clamped at 0 when eps >= d0
double tau_bound(double epsilon, double d0, const TauRegime& regime, const CoverParams& p);

// Checks q_{t+1}^2 <= q_t^2 phi_k(q_t^2) + slack at every step of a trace.
// worst_margin excludes the slack; steps with q_t = q_{t+1} = 0 are skipped.
VerificationReport audit_step_inequality(const ConvergenceTrace& trace, const CoverParams& p,
                                         double slack = 1e-12);

// First t with q[t] <= epsilon, if any.
std::optional<int> first_time_below(const std::vector<double>& q, double epsilon);

}  // namespace critesn
