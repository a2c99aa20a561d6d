#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace critesn {

enum class TransferKind { Tanh, SineSigmoid, Tailored, Linear };

std::string to_string(TransferKind kind);
// Case-insensitive; accepts "tanh", "sine_sigmoid"/"sinesigmoid", "tailored", "linear".
TransferKind parse_transfer_kind(std::string_view name);

// Elementwise neuron transfer function theta(.) together with its analytic
// derivative and its epi-critical points (points where theta' == 1).
//
// Tanh:        tanh(x), single epi-critical point at 0.
// SineSigmoid: 0.5 x - 0.25 sin(2x), epi-critical points at (n + 1/2) pi.
// Tailored:    tanh(x - a) + tanh(a) around each anchor a (nearest anchor
//              within distance 1, ties to the smaller anchor), tanh(x)
//              elsewhere. Not necessarily continuous; see discontinuities().
// Linear:      identity. Not a contraction; used as a counterexample.
//
// Values are immutable after construction.
class TransferFunction {
 public:
  static TransferFunction tanh();
  static TransferFunction sine_sigmoid();
  static TransferFunction linear();
  static TransferFunction tailored(std::vector<double> anchors);
  static TransferFunction from_kind(TransferKind kind, std::vector<double> anchors = {});

  TransferKind kind() const noexcept { return kind_; }
  std::span<const double> anchors() const noexcept { return anchors_; }
  std::string name() const { return to_string(kind_); }

  // Both throw std::domain_error on non-finite x.
  double eval(double x) const;
  double derivative(double x) const;

  // Sorted points in [lo, hi] where theta'(x) == 1 to within 1e-12.
  // Throws std::domain_error for lo >= hi and std::logic_error for Linear.
  std::vector<double> epi_critical_points(double lo, double hi) const;

  struct Jump {
    double at;
    double size;  // theta(at+) - theta(at-)
  };
  // Piece boundaries of a Tailored function with the jump across each one.
  // Empty for every other kind.
  std::vector<Jump> discontinuities() const;

  bool operator==(const TransferFunction&) const = default;

 private:
  TransferFunction(TransferKind kind, std::vector<double> anchors);

  // Anchor whose shifted piece is active at x, or nullptr for plain tanh.
  const double* active_anchor(double x) const noexcept;

  TransferKind kind_;
  std::vector<double> anchors_;
};

// Largest finite-difference slope |theta(x_{i+1}) - theta(x_i)| / h over a
// uniform grid of n_grid points on [lo, hi].
double max_slope_estimate(const TransferFunction& tf, double lo, double hi, int n_grid);

}  // namespace critesn
