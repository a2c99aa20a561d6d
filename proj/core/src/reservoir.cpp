#include "critesn/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "critesn/csv.hpp"

namespace critesn {
namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::domain_error(std::string(what) + " has non-finite entries");
}

double max_abs_eigenvalue(const Matrix& w) {
  if (w.rows() == 1) return std::abs(w(0, 0));
  Eigen::EigenSolver<Matrix> solver(w, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue solver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Vector singular_values(const Matrix& w) {
  Eigen::JacobiSVD<Matrix> svd(w);
  return svd.singularValues();
}

}  // namespace

Reservoir::Reservoir(Matrix weights, Matrix input_weights, TransferFunction tf)
    : weights_(std::move(weights)), input_weights_(std::move(input_weights)), tf_(std::move(tf)) {
  if (weights_.rows() < 1 || weights_.rows() != weights_.cols()) {
    throw std::domain_error("Reservoir: recurrent weights must be square and non-empty");
  }
  if (input_weights_.rows() != weights_.rows() || input_weights_.cols() < 1) {
    throw std::domain_error("Reservoir: input weights must be k x n with n >= 1");
  }
  require_finite(weights_, "Reservoir: recurrent weights");
  require_finite(input_weights_, "Reservoir: input weights");
}

std::string Reservoir::describe() const {
  std::ostringstream os;
  os << "k=" << hidden_size() << " n=" << input_size() << " transfer=" << tf_.name();
  if (!tf_.anchors().empty()) {
    os << " anchors=[";
    for (std::size_t i = 0; i < tf_.anchors().size(); ++i) {
      os << (i ? "," : "") << format_double(tf_.anchors()[i]);
    }
    os << "]";
  }
  if (hidden_size() == 1) {
    os << " W=" << format_double(weights_(0, 0)) << " w_in=" << format_double(input_weights_(0, 0));
  }
  return os.str();
}

Matrix gaussian_matrix(int k, std::uint64_t seed) {
  if (k < 1) throw std::domain_error("gaussian_matrix: k must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = normal(rng);
  return g;
}

Reservoir make_orthogonal_reservoir(int k, int n, double input_scale, std::uint64_t seed,
                                    TransferFunction tf) {
  if (k < 1 || n < 1) throw std::domain_error("make_orthogonal_reservoir: k and n must be >= 1");
  if (!std::isfinite(input_scale) || input_scale < 0.0) {
    throw std::domain_error("make_orthogonal_reservoir: input_scale must be finite and >= 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = normal(rng);

  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }

  std::uniform_real_distribution<double> uniform(-input_scale, input_scale);
  Matrix w_in(k, n);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) w_in(i, j) = input_scale == 0.0 ? 0.0 : uniform(rng);

  return Reservoir(std::move(q), std::move(w_in), std::move(tf));
}

Reservoir make_alternating_neuron(double b, TransferFunction tf) {
  return Reservoir(Matrix::Constant(1, 1, -b), Matrix::Constant(1, 1, 2.0 - b), std::move(tf));
}

Reservoir make_scalar_neuron(double b, double input_gain, TransferFunction tf) {
  return Reservoir(Matrix::Constant(1, 1, b), Matrix::Constant(1, 1, input_gain), std::move(tf));
}

Matrix scale_to_spectrum(const Matrix& w, double target, SpectrumMode mode) {
  if (w.rows() < 1 || w.rows() != w.cols()) {
    throw std::domain_error("scale_to_spectrum: matrix must be square and non-empty");
  }
  if (!(target > 0.0) || !std::isfinite(target)) {
    throw std::domain_error("scale_to_spectrum: target must be positive and finite");
  }
  require_finite(w, "scale_to_spectrum: matrix");
  const double current =
      mode == SpectrumMode::Singular ? singular_values(w).maxCoeff() : max_abs_eigenvalue(w);
  if (!(current > 0.0)) {
    throw std::domain_error("scale_to_spectrum: spectral quantity is zero, no finite scaling");
  }
  return w * (target / current);
}

SpectralSummary spectral_summary(const Matrix& w) {
  if (w.rows() < 1 || w.rows() != w.cols()) {
    throw std::domain_error("spectral_summary: matrix must be square and non-empty");
  }
  require_finite(w, "spectral_summary: matrix");

  SpectralSummary s;
  const Vector sv = singular_values(w);
  s.singular_values.assign(sv.data(), sv.data() + sv.size());
  std::sort(s.singular_values.begin(), s.singular_values.end(), std::greater<>());
  s.max_singular_value = s.singular_values.front();
  s.max_abs_eigenvalue = max_abs_eigenvalue(w);

  const Matrix commutator = w * w.transpose() - w.transpose() * w;
  s.normality_residual = commutator.cwiseAbs().maxCoeff();
  const double scale = w.cwiseAbs().maxCoeff();
  s.is_normal = s.normality_residual <= 1e-9 * (1.0 + scale * scale);
  return s;
}

EscVerdict check_esc(const Reservoir& reservoir, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("check_esc: tol must be positive");
  EscVerdict v;
  v.spectrum = spectral_summary(reservoir.weights());
  const double s = v.spectrum.max_singular_value;
  const double rho = v.spectrum.max_abs_eigenvalue;
  // Strict inequalities are decided with a tol margin so that a matrix on
  // the boundary is never simultaneously "below 1" and "at 1".
  v.c2_sufficient = s < 1.0 - tol;
  v.c1_necessary = v.c2_sufficient || rho < 1.0 - tol;
  v.critical_boundary = std::abs(s - 1.0) <= tol && std::abs(rho - 1.0) <= tol;
  const TransferKind kind = reservoir.transfer().kind();
  v.covered_by_theorem = v.critical_boundary &&
                         (kind == TransferKind::Tanh || kind == TransferKind::SineSigmoid);
  return v;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  out << "# " << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
  write_matrix_csv(out, m);
  if (!out) throw std::ios_base::failure("write failed for '" + path.string() + "'");
}

Matrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') {
    throw std::runtime_error("matrix csv: missing '# rows,cols' header");
  }
  long rows = 0;
  long cols = 0;
  char comma = 0;
  std::istringstream header(line.substr(1));
  if (!(header >> rows >> comma >> cols) || comma != ',' || rows < 1 || cols < 1) {
    throw std::runtime_error("matrix csv: malformed header '" + line + "'");
  }
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("matrix csv: expected " + std::to_string(rows) + " rows, got " +
                               std::to_string(i));
    }
    const auto fields = split_csv_line(line);
    if (static_cast<long>(fields.size()) != cols) {
      throw std::runtime_error("matrix csv: row " + std::to_string(i + 1) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(cols));
    }
    for (long j = 0; j < cols; ++j) m(i, j) = parse_double(fields[j]);
  }
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path.string() + "'");
  return read_matrix_csv(in);
}

}  // namespace critesn
