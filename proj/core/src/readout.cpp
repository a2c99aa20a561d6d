#include "critesn/readout.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "critesn/csv.hpp"
#include "critesn/dynamics.hpp"

namespace critesn {
namespace {

double squared_correlation(const Vector& a, const Vector& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  const Vector da = a.array() - ma;
  const Vector db = b.array() - mb;
  const double saa = da.squaredNorm();
  const double sbb = db.squaredNorm();
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  const double sab = da.dot(db);
  return (sab * sab) / (saa * sbb);
}

}  // namespace

ReadoutModel fit_readout(const Matrix& states, const Matrix& targets, double ridge) {
  if (states.rows() != targets.rows() || states.rows() < 1) {
    throw std::domain_error("fit_readout: states and targets need the same, non-zero row count");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw std::domain_error("fit_readout: ridge must be finite and >= 0");
  }
  Matrix gram = states.transpose() * states;
  gram.diagonal().array() += ridge;
  const Matrix rhs = states.transpose() * targets;

  Eigen::LDLT<Matrix> ldlt(gram);
  const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-13 * scale) {
    if (ridge == 0.0) {
      throw std::runtime_error(
          "fit_readout: normal matrix is singular; use a ridge > 0 to regularize");
    }
    throw std::runtime_error("fit_readout: regularized normal matrix is not positive definite");
  }

  ReadoutModel model;
  model.ridge = ridge;
  model.w_out = ldlt.solve(rhs).transpose();
  const Matrix residual = states * model.w_out.transpose() - targets;
  model.training_error = std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size()));
  return model;
}

Matrix predict(const ReadoutModel& model, const Matrix& states) {
  if (states.cols() != model.w_out.cols()) {
    throw std::domain_error("predict: state dimension " + std::to_string(states.cols()) +
                            " does not match readout input dimension " +
                            std::to_string(model.w_out.cols()));
  }
  return states * model.w_out.transpose();
}

MemoryCapacity memory_capacity(const Reservoir& res, const MemoryCapacityOptions& o) {
  if (res.input_size() != 1) throw std::domain_error("memory_capacity: reservoir must have n = 1");
  if (o.max_delay < 1) throw std::domain_error("memory_capacity: max_delay must be >= 1");
  if (o.washout < o.max_delay) throw std::domain_error("memory_capacity: washout must be >= max_delay");
  const int usable = o.T - o.washout;
  if (usable < 2 * (10 * o.max_delay)) {
    throw std::domain_error("memory_capacity: T too small for the washout and delay range");
  }

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> uniform(-o.input_amplitude, o.input_amplitude);
  Matrix u(o.T, 1);
  for (int t = 0; t < o.T; ++t) u(t, 0) = uniform(rng);

  const Trajectory traj = run(res, u, Vector::Zero(res.hidden_size()));
  const int train = usable / 2;
  const int test = usable - train;
  const Matrix x_train = traj.states.middleRows(o.washout, train);
  const Matrix x_test = traj.states.middleRows(o.washout + train, test);

  MemoryCapacity mc;
  mc.per_delay.reserve(static_cast<std::size_t>(o.max_delay));
  for (int d = 1; d <= o.max_delay; ++d) {
    const Matrix y_train = u.middleRows(o.washout - d, train);
    const Vector y_test = u.middleRows(o.washout + train - d, test).col(0);
    const ReadoutModel model = fit_readout(x_train, y_train, o.ridge);
    const Vector pred = predict(model, x_test).col(0);
    const double score = squared_correlation(pred, y_test);
    mc.per_delay.push_back(score);
    mc.total += score;
  }
  return mc;
}

void write_memory_capacity_csv(std::ostream& out, const MemoryCapacity& mc) {
  out << "delay,score\n";
  for (std::size_t i = 0; i < mc.per_delay.size(); ++i) {
    out << (i + 1) << ',' << format_double(mc.per_delay[i]) << '\n';
  }
  out << "total," << format_double(mc.total) << '\n';
}

}  // namespace critesn
