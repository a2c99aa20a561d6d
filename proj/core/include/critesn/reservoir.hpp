#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "critesn/transfer.hpp"

namespace critesn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Recurrent weights W (k x k), input weights w_in (k x n) and the transfer
// function applied elementwise to W x + w_in u.
class Reservoir {
 public:
  // Throws std::domain_error on shape mismatch or non-finite entries.
  Reservoir(Matrix weights, Matrix input_weights, TransferFunction tf);

  const Matrix& weights() const noexcept { return weights_; }
  const Matrix& input_weights() const noexcept { return input_weights_; }
  const TransferFunction& transfer() const noexcept { return tf_; }
  Eigen::Index hidden_size() const noexcept { return weights_.rows(); }
  Eigen::Index input_size() const noexcept { return input_weights_.cols(); }

  // One-line human readable summary, recorded in experiment metadata.
  std::string describe() const;

 private:
  Matrix weights_;
  Matrix input_weights_;
  TransferFunction tf_;
};

struct SpectralSummary {
  double max_abs_eigenvalue = 0.0;
  double max_singular_value = 0.0;
  bool is_normal = false;
  std::vector<double> singular_values;  // descending
  double normality_residual = 0.0;      // max |W W^T - W^T W|
};

struct EscVerdict {
  bool c1_necessary = false;        // max |lambda| < 1
  bool c2_sufficient = false;       // max s < 1
  bool critical_boundary = false;   // max s == max |lambda| == 1 within tol
  bool covered_by_theorem = false;  // critical boundary with Tanh or SineSigmoid
  SpectralSummary spectrum;
};

enum class SpectrumMode { Singular, Eigen };

// Orthogonal W from a seeded Gaussian matrix (QR with sign-fixed R), and
// w_in drawn i.i.d. uniform on [-input_scale, input_scale].
Reservoir make_orthogonal_reservoir(int k, int n, double input_scale, std::uint64_t seed,
                                    TransferFunction tf = TransferFunction::tanh());

// Seeded i.i.d. standard normal k x k matrix.
Matrix gaussian_matrix(int k, std::uint64_t seed);

// The single-neuron network x_{t+1} = theta(-b x_t + (2 - b) u_t) whose
// alternating input (-1)^t pi/4 pins the linear state to slope-1 points of
// the sine sigmoid for every b.
Reservoir make_alternating_neuron(double b, TransferFunction tf = TransferFunction::sine_sigmoid());

// x_{t+1} = theta(b x_t + g u_t)
Reservoir make_scalar_neuron(double b, double input_gain, TransferFunction tf);

// Uniformly rescales W so its largest singular value (or spectral radius)
// equals target. Throws on zero or non-square matrices.
Matrix scale_to_spectrum(const Matrix& w, double target, SpectrumMode mode);

SpectralSummary spectral_summary(const Matrix& w);

EscVerdict check_esc(const Reservoir& reservoir, double tol = 1e-9);

// Row-major CSV with a leading "# rows,cols" comment line.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace critesn
