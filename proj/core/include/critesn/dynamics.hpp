#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "critesn/reservoir.hpp"

namespace critesn {

enum class InputKind { Alternating, IidSign, Constant, File };

// Descriptor of an input time series u_0, u_1, ...
//
// Alternating(a): u_t = (-1)^t a, starting with +a at t = 0.
// IidSign(a, s):  u_t in {+a, -a} i.i.d. with fair signs, reproducible from s.
// Constant(v):    u_t = v.
// File(path):     rows of a CSV file, one time step per row, n columns
//                 (lines starting with '#' are skipped).
//
// For n > 1 inputs, Alternating and Constant repeat the value on every
// channel and IidSign draws every channel independently.
struct InputSequence {
  InputKind kind = InputKind::Constant;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path path;

  static InputSequence alternating(double amplitude);
  static InputSequence iid_sign(double amplitude, std::uint64_t seed);
  static InputSequence constant(double value);
  static InputSequence file(std::filesystem::path path);

  std::string describe() const;
};

// T x n matrix, one time step per row. Throws std::ios_base::failure for an
// unreadable file and std::runtime_error for malformed or short files.
Matrix generate_input(const InputSequence& input, int T, int n = 1);

struct StepResult {
  Vector next;
  Vector linear;
};

// x_lin = W x + w_in u, x_next = theta(x_lin).
StepResult step(const Reservoir& res, const Vector& x, const Vector& u);

// Allocation-free variant used by the simulation loops; buffers must be
// sized k.
void step_into(const Reservoir& res, const Vector& x, const Eigen::Ref<const Vector>& u,
               Vector& next, Vector& linear);

// states.row(t) is the state after consuming input row t, i.e. x_{t+1};
// linear_states likewise holds x_lin,{t+1}.
struct Trajectory {
  Vector initial_state;
  Matrix states;
  Matrix linear_states;
  InputSequence input;
};

Trajectory run(const Reservoir& res, const InputSequence& input, const Vector& x0, int T);
Trajectory run(const Reservoir& res, const Matrix& inputs, const Vector& x0);

struct TraceMeta {
  std::string reservoir;
  std::string input;
  Vector x0;
  Vector y0;
  std::optional<int> perturb_at;
};

// q[t] = ||x_t - y_t||_2 for t = 0..T; q[0] is the initial distance.
// Once the twins coincide exactly (or drift below 1e-300) floor_hit_at is
// set and every later entry is 0.
struct ConvergenceTrace {
  std::vector<double> q;
  TraceMeta meta;
  std::optional<int> floor_hit_at;
  // Optional per-step states of the x twin (row t = x_t), filled on request.
  Matrix x_states;
};

ConvergenceTrace convergence_trace(const Reservoir& res, const InputSequence& input,
                                   const Vector& x0, const Vector& y0, int T,
                                   bool keep_states = false);

// Two copies start from x0; at step perturb_at the second copy receives
// u + delta_u, otherwise both see the same input.
ConvergenceTrace perturbation_experiment(const Reservoir& res, const InputSequence& base_input,
                                         int perturb_at, const Vector& delta_u, int T,
                                         std::optional<Vector> x0 = std::nullopt);

// CSV with header "t,q" (plus x_0..x_{k-1} when states were kept).
void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace);

}  // namespace critesn
