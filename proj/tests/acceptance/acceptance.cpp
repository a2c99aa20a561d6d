// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "critesn/analysis.hpp"
#include "critesn/contraction.hpp"
#include "critesn/csv.hpp"
#include "critesn/readout.hpp"

using namespace critesn;

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) { return format_double(x); }

Vector random_state(std::mt19937_64& rng, int k, double spread) {
  std::uniform_real_distribution<double> d(-spread, spread);
  Vector v(k);
  for (int i = 0; i < k; ++i) v(i) = d(rng);
  return v;
}

InputSequence mixed_input(int run, std::uint64_t seed) {
  switch (run % 3) {
    case 0: return InputSequence::alternating(kQuarterPi);
    case 1: return InputSequence::iid_sign(kQuarterPi, seed);
    default: return InputSequence::constant(0.0);
  }
}

Outcome lyapunov_zero_crossing(double& seconds_limit) {
  seconds_limit = 10.0;
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.5 + 0.05 * i);
  LyapunovOptions o;
  o.x0 = Vector::Constant(1, -kQuarterPi);  // on the alternating orbit
  const auto cells = lyapunov_sweep([](double b) { return make_alternating_neuron(b); },
                                    InputSequence::alternating(kQuarterPi), grid, 100000, o);
  double at_one = NAN;
  bool crossing = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].ok) return {false, "cell b=" + num(cells[i].b) + " failed: " + cells[i].error};
    if (std::abs(cells[i].b - 1.0) < 1e-12) at_one = cells[i].result.exponent;
    if (i > 0 && (cells[i - 1].result.exponent < 0) != (cells[i].result.exponent < 0) &&
        cells[i - 1].b >= 0.95 - 1e-12 && cells[i].b <= 1.05 + 1e-12) {
      crossing = true;
    }
  }
  const bool pass = crossing && std::abs(at_one) <= 2e-3;
  return {pass, "Lambda(1)=" + num(at_one) + " sign change in [0.95,1.05]: " + (crossing ? "yes" : "no")};
}

Outcome power_law_persistence(double&) {
  const auto trace = perturbation_experiment(make_alternating_neuron(1.0), InputSequence::alternating(kQuarterPi),
                                             1, Vector::Constant(1, 0.01), 10000);
  const auto fit = fit_decay(trace, 10);
  const bool pass = trace.q[64] > 0.0 && fit.law == DecayLaw::PowerLaw && fit.r2_loglog >= 0.98 &&
                    fit.fit_window.first == 10 && fit.fit_window.second == 10000;
  return {pass, "q(64)=" + num(trace.q[64]) + " law=" + to_string(fit.law) + " r2_loglog=" +
                    num(fit.r2_loglog) + " slope=" + num(fit.exponent_pow)};
}

Outcome iid_fast_forgetting(double&) {
  int late = 0;
  int worst = 0;
  bool within_80 = true;
  const int seeds = 20;
  for (int s = 1; s <= seeds; ++s) {
    const auto trace = perturbation_experiment(make_alternating_neuron(1.0),
                                               InputSequence::iid_sign(kQuarterPi, s), 1,
                                               Vector::Constant(1, 0.01), 10000);
    const int steps = trace.floor_hit_at ? *trace.floor_hit_at - 1 : 1 << 30;
    worst = std::max(worst, steps);
    if (steps > 69) ++late;
    if (steps > 80) within_80 = false;
  }
  const bool pass = late <= 2 && within_80;
  return {pass, std::to_string(seeds) + " seeds, slowest floor after " + std::to_string(worst) +
                    " steps, " + std::to_string(late) + " beyond 69"};
}

Outcome critical_parameter(double& seconds_limit) {
  seconds_limit = 1.0;
  const auto cp = find_critical_b(TransferFunction::tanh(), kQuarterPi, {1.5, 3.0}, 1e-9);
  const bool pass = std::abs(cp.b_star - 2.344) <= 1e-3 && std::abs(cp.orbit_amplitude - 0.757) <= 1e-3;
  return {pass, "b*=" + num(cp.b_star) + " amplitude=" + num(cp.orbit_amplitude)};
}

Outcome cover_certificate(double&) {
  const GridSpec delta{0.0, 4.0, 1e-2};
  const GridSpec zeta{-4.0, 4.0, 1e-2};
  std::string detail;
  bool pass = true;
  for (int n : {1, 2, 4}) {
    for (const auto& tf : {TransferFunction::tanh(), TransferFunction::sine_sigmoid()}) {
      const auto rep = verify_cover_inequality(tf, CoverParams::defaults(n), delta, zeta);
      pass = pass && rep.passed && rep.worst_margin >= 0.0;
      if (n == 1) detail += tf.name() + " margin=" + num(rep.worst_margin) + " ";
    }
  }
  const auto lin = verify_cover_inequality(TransferFunction::linear(), CoverParams::defaults(1), delta, zeta);
  pass = pass && !lin.passed;
  return {pass, detail + "Linear passed=" + (lin.passed ? "true" : "false")};
}

Outcome dominance_certificate(double&) {
  bool pass = true;
  double worst = INFINITY;
  for (double q0 : {0.1, 0.5, 1.0}) {
    const auto rep = verify_dominance(q0, CoverParams::defaults(1), 100000);
    pass = pass && rep.passed && rep.worst_margin >= -1e-12;
    worst = std::min(worst, rep.worst_margin);
  }
  return {pass, "min gap over q0 in {0.1,0.5,1} and t<=1e5: " + num(worst)};
}

Outcome proof_step_audit(double&) {
  std::mt19937_64 rng(2024);
  const int ks[] = {1, 4, 16};
  int failures = 0;
  long long steps = 0;
  double worst = INFINITY;
  for (int run = 0; run < 100; ++run) {
    const int k = ks[run % 3];
    const auto tf = (run / 3) % 2 ? TransferFunction::sine_sigmoid() : TransferFunction::tanh();
    const std::uint64_t seed = 7000 + static_cast<std::uint64_t>(run);
    const auto res = make_orthogonal_reservoir(k, 1, 1.0, seed, tf);
    const auto trace = convergence_trace(res, mixed_input(run / 6, seed), random_state(rng, k, 1.5),
                                         random_state(rng, k, 1.5), 2000);
    const auto rep = audit_step_inequality(trace, CoverParams::defaults(k), 1e-12);
    if (!rep.passed) ++failures;
    steps += rep.points_checked;
    worst = std::min(worst, rep.worst_margin);
  }
  return {failures == 0, "100 runs, " + std::to_string(steps) + " steps, " + std::to_string(failures) +
                             " violations, worst margin " + num(worst)};
}

Outcome subcritical_envelope(double&) {
  std::mt19937_64 rng(99);
  const int ks[] = {1, 4, 16};
  bool envelope_ok = true;
  bool tau_ok = true;
  double worst_ratio = 0.0;
  for (int run = 0; run < 30; ++run) {
    const int k = ks[run % 3];
    const auto tf = run % 2 ? TransferFunction::sine_sigmoid() : TransferFunction::tanh();
    const auto base = make_orthogonal_reservoir(k, 1, 1.0, 8000 + run, tf);
    const Reservoir res(scale_to_spectrum(base.weights(), 0.9, SpectrumMode::Singular), base.input_weights(), tf);
    const auto trace = convergence_trace(res, mixed_input(run / 2, run), random_state(rng, k, 1.0),
                                         random_state(rng, k, 1.0), 200);
    double bound = trace.q[0];
    for (std::size_t t = 1; t < trace.q.size(); ++t) {
      bound *= 0.9;
      if (trace.q[t] > bound * (1 + 1e-9)) envelope_ok = false;
      if (bound > 0) worst_ratio = std::max(worst_ratio, trace.q[t] / bound);
    }
    for (double rel : {1e-1, 1e-3, 1e-6}) {
      const double eps = rel * trace.q[0];
      const auto hit = first_time_below(trace.q, eps);
      if (!hit || *hit > tau_bound(eps, trace.q[0], TauRegime::subcritical(0.9), CoverParams::defaults(k))) {
        tau_ok = false;
      }
    }
  }
  return {envelope_ok && tau_ok, "30 runs at S=0.9, max q_t/(0.9^t q0)=" + num(worst_ratio) +
                                     " tau within bound: " + (tau_ok ? "yes" : "no")};
}

Outcome memory_capacity_ceiling(double& seconds_limit) {
  seconds_limit = 60.0;
  bool pass = true;
  std::string detail;
  for (int k : {4, 8, 16}) {
    const auto res = make_orthogonal_reservoir(k, 1, 0.5, 1, TransferFunction::tanh());
    MemoryCapacityOptions o;
    o.max_delay = 48;
    const auto mc = memory_capacity(res, o);
    pass = pass && mc.total <= k + 0.5;
    detail += "k=" + std::to_string(k) + ": " + num(mc.total) + " ";
  }
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(double&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Lyapunov zero crossing at b=1", lyapunov_zero_crossing},
      {2, "power-law persistence under alternating input", power_law_persistence},
      {3, "fast forgetting under i.i.d. input", iid_fast_forgetting},
      {4, "critical coupling of the over-tuned tanh neuron", critical_parameter},
      {5, "cover-inequality certificate", cover_certificate},
      {6, "dominance of the covering sequence", dominance_certificate},
      {7, "per-step contraction audit at S=1", proof_step_audit},
      {8, "subcritical exponential envelope and tau bound", subcritical_envelope},
      {9, "memory-capacity ceiling", memory_capacity_ceiling},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    double limit = INFINITY;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run(limit);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > limit) {
      out.pass = false;
      out.detail += " (over the " + num(limit) + " s budget)";
    }
    if (!out.pass) ++failed;
    std::printf("criterion %d %s: %s | %s | %.3f s\n", c.id, out.pass ? "PASS" : "FAIL", c.name,
                out.detail.c_str(), secs);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
