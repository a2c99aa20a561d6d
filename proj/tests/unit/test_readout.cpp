#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "critesn/readout.hpp"

using namespace critesn;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
  return m;
}

Reservoir linear_orthogonal(int k, double S, std::uint64_t seed) {
  const auto base = make_orthogonal_reservoir(k, 1, 0.5, seed, TransferFunction::linear());
  return Reservoir(S * base.weights(), base.input_weights(), TransferFunction::linear());
}

}  // namespace

TEST(FitReadout, IdentityWhenTargetsAreStates) {
  const Matrix x = random_matrix(200, 5, 1);
  const auto m = fit_readout(x, x, 0.0);
  EXPECT_LE((m.w_out - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE(m.training_error, 1e-8);
}

TEST(FitReadout, ZeroTargetsGiveZeroWeights) {
  const auto m = fit_readout(random_matrix(100, 4, 2), Matrix::Zero(100, 3), 0.0);
  EXPECT_EQ(m.w_out.rows(), 3);
  EXPECT_EQ(m.w_out.cols(), 4);
  EXPECT_LE(m.w_out.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitReadout, RecoversLinearMap) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix x = random_matrix(300, 6, seed);
    const Matrix M = random_matrix(2, 6, 100 + seed);
    const auto m = fit_readout(x, x * M.transpose(), 0.0);
    ASSERT_LE((m.w_out - M).cwiseAbs().maxCoeff(), 1e-8);
    ASSERT_LE(m.training_error, 1e-8);
  }
}

TEST(FitReadout, SingularWithoutRidgeAdvisesRidge) {
  Matrix x = random_matrix(50, 3, 4);
  x.col(2) = x.col(0);
  try {
    fit_readout(x, random_matrix(50, 1, 5), 0.0);
    FAIL() << "expected singular normal matrix";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("ridge"), std::string::npos);
  }
  EXPECT_NO_THROW(fit_readout(x, random_matrix(50, 1, 5), 1e-6));
}

TEST(FitReadout, Preconditions) {
  EXPECT_THROW(fit_readout(Matrix::Zero(5, 2), Matrix::Zero(4, 1), 0.1), std::domain_error);
  EXPECT_THROW(fit_readout(Matrix::Zero(5, 2), Matrix::Zero(5, 1), -1.0), std::domain_error);
}

TEST(Predict, Examples) {
  const Matrix x = random_matrix(10, 3, 6);
  ReadoutModel id{Matrix::Identity(3, 3), 0.0, 0.0};
  EXPECT_EQ(predict(id, x), x);
  ReadoutModel zero{Matrix::Zero(2, 3), 0.0, 0.0};
  EXPECT_EQ(predict(zero, x), Matrix::Zero(10, 2));
  EXPECT_THROW(predict(id, random_matrix(10, 4, 1)), std::domain_error);
}

TEST(Predict, TrainingErrorIsRecomputable) {
  const Matrix x = random_matrix(120, 4, 7);
  const Matrix y = random_matrix(120, 2, 8);
  const auto m = fit_readout(x, y, 0.5);
  const Matrix r = predict(m, x) - y;
  EXPECT_NEAR(m.training_error, std::sqrt(r.squaredNorm() / static_cast<double>(r.size())), 1e-12);
}

TEST(MemoryCapacity, CeilingIsNeuronCount) {
  for (int k : {4, 8, 16}) {
    const auto res = make_orthogonal_reservoir(k, 1, 0.5, 1, TransferFunction::tanh());
    const auto mc = memory_capacity(res, {});
    EXPECT_LE(mc.total, k + 0.5) << k;
    EXPECT_GT(mc.total, 1.0) << k;
  }
}

TEST(MemoryCapacity, PerDelayScoresAreUnitBounded) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto tf = seed % 2 ? TransferFunction::tanh() : TransferFunction::sine_sigmoid();
    const auto res = make_orthogonal_reservoir(6, 1, 1.0, seed, tf);
    MemoryCapacityOptions o;
    o.seed = seed;
    const auto mc = memory_capacity(res, o);
    ASSERT_EQ(mc.per_delay.size(), 40u);
    double sum = 0.0;
    for (double s : mc.per_delay) {
      ASSERT_GE(s, 0.0);
      ASSERT_LE(s, 1.0 + 1e-9);
      sum += s;
    }
    EXPECT_NEAR(sum, mc.total, 1e-12);
  }
}

// Frozen regression value for a linear orthogonal reservoir, k = 8, S = 0.99,
// default options, seed 1.
TEST(MemoryCapacity, LinearOrthogonalBaseline) {
  const auto mc = memory_capacity(linear_orthogonal(8, 0.99, 1), {});
  EXPECT_GE(mc.total, 4.0);
  EXPECT_NEAR(mc.total, 4.38820866949562, 1e-6);
}

// Training error of a ridge fit never decreases as the ridge grows.
TEST(FitReadout, TrainingErrorGrowsWithRidge) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix x = random_matrix(80, 6, seed);
    const Matrix y = random_matrix(80, 2, 50 + seed);
    double prev = 0.0;
    for (double ridge = 1e-8; ridge < 1e6; ridge *= 10) {
      const double err = fit_readout(x, y, ridge).training_error;
      ASSERT_GE(err, prev * (1 - 1e-12)) << ridge;
      prev = err;
    }
  }
}

// Held-out capacity is not monotone in the ridge: moderate shrinkage can
// improve generalization. Heavy shrinkage does lower it.
TEST(MemoryCapacity, RidgeEffectOnHeldOutCapacity) {
  const auto res = linear_orthogonal(8, 0.99, 2);
  auto total = [&](double ridge) {
    MemoryCapacityOptions o;
    o.ridge = ridge;
    return memory_capacity(res, o).total;
  };
  const double small = total(1e-8);
  EXPECT_GT(total(1e2), small);
  EXPECT_LT(total(1e4), small);
  EXPECT_LT(total(1e6), total(1e4));
}

TEST(MemoryCapacity, Preconditions) {
  const auto res = make_orthogonal_reservoir(4, 1, 0.5, 1);
  MemoryCapacityOptions o;
  o.max_delay = 0;
  EXPECT_THROW(memory_capacity(res, o), std::domain_error);
  o = {};
  o.T = 500;
  EXPECT_THROW(memory_capacity(res, o), std::domain_error);
  o = {};
  o.washout = 10;
  EXPECT_THROW(memory_capacity(res, o), std::domain_error);
  EXPECT_THROW(memory_capacity(make_orthogonal_reservoir(4, 2, 0.5, 1), {}), std::domain_error);
}

TEST(MemoryCapacity, CsvLayout) {
  MemoryCapacity mc{0.75, {0.5, 0.25}};
  std::ostringstream out;
  write_memory_capacity_csv(out, mc);
  EXPECT_EQ(out.str(), "delay,score\n1,0.5\n2,0.25\ntotal,0.75\n");
}

TEST(MemoryCapacity, Deterministic) {
  const auto res = make_orthogonal_reservoir(5, 1, 0.5, 3);
  const auto a = memory_capacity(res, {});
  const auto b = memory_capacity(res, {});
  EXPECT_EQ(a.per_delay, b.per_delay);
}
