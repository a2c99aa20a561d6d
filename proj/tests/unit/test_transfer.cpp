#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "critesn/transfer.hpp"

using namespace critesn;
using std::numbers::pi;

namespace {

const TransferFunction kTanh = TransferFunction::tanh();
const TransferFunction kSine = TransferFunction::sine_sigmoid();
const TransferFunction kLinear = TransferFunction::linear();

}  // namespace

TEST(Transfer, KnownValues) {
  EXPECT_EQ(kTanh.eval(0.0), 0.0);
  EXPECT_NEAR(kSine.eval(pi / 2), pi / 4, 1e-15);
  EXPECT_NEAR(kSine.eval(3 * pi / 2), 3 * pi / 4, 1e-15);
  EXPECT_EQ(kTanh.derivative(0.0), 1.0);
  EXPECT_NEAR(kSine.derivative(pi / 2), 1.0, 1e-15);
  EXPECT_EQ(kSine.derivative(0.0), 0.0);
  EXPECT_EQ(kLinear.eval(3.25), 3.25);
  EXPECT_EQ(kLinear.derivative(-7.0), 1.0);
}

TEST(Transfer, NonFiniteInputThrows) {
  for (const auto& tf : {kTanh, kSine, kLinear, TransferFunction::tailored({1.0})}) {
    EXPECT_THROW(tf.eval(std::nan("")), std::domain_error);
    EXPECT_THROW(tf.derivative(std::numeric_limits<double>::infinity()), std::domain_error);
  }
}

TEST(Transfer, ParseKindNames) {
  EXPECT_EQ(parse_transfer_kind("tanh"), TransferKind::Tanh);
  EXPECT_EQ(parse_transfer_kind("Sine_Sigmoid"), TransferKind::SineSigmoid);
  EXPECT_EQ(parse_transfer_kind("sinesigmoid"), TransferKind::SineSigmoid);
  EXPECT_EQ(parse_transfer_kind("LINEAR"), TransferKind::Linear);
  EXPECT_EQ(parse_transfer_kind("tailored"), TransferKind::Tailored);
  EXPECT_THROW(parse_transfer_kind("relu"), std::invalid_argument);
}

TEST(EpiCriticalPoints, AnalyticSets) {
  auto tanh_ecp = kTanh.epi_critical_points(-1.0, 1.0);
  ASSERT_EQ(tanh_ecp.size(), 1u);
  EXPECT_EQ(tanh_ecp[0], 0.0);

  auto sine_ecp = kSine.epi_critical_points(0.0, 2 * pi);
  ASSERT_EQ(sine_ecp.size(), 2u);
  EXPECT_NEAR(sine_ecp[0], pi / 2, 1e-15);
  EXPECT_NEAR(sine_ecp[1], 3 * pi / 2, 1e-15);

  EXPECT_TRUE(kSine.epi_critical_points(0.0, 0.1).empty());
  EXPECT_TRUE(kTanh.epi_critical_points(0.5, 3.0).empty());
}

TEST(EpiCriticalPoints, Errors) {
  EXPECT_THROW(kLinear.epi_critical_points(-1.0, 1.0), std::logic_error);
  EXPECT_THROW(kTanh.epi_critical_points(1.0, 1.0), std::domain_error);
}

// Random windows: the sine set is exactly {(m + 1/2) pi} inside the window.
TEST(EpiCriticalPoints, SineWindowsMatchAnalyticSet) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lo_dist(-40.0, 40.0);
  std::uniform_real_distribution<double> width(0.01, 30.0);
  for (int i = 0; i < 500; ++i) {
    const double lo = lo_dist(rng);
    const double hi = lo + width(rng);
    std::vector<double> expected;
    for (long m = static_cast<long>(std::floor(lo / pi)) - 1; (m + 0.5) * pi <= hi + 1.0; ++m) {
      const double x = (m + 0.5) * pi;
      if (x >= lo && x <= hi) expected.push_back(x);
    }
    const auto got = kSine.epi_critical_points(lo, hi);
    ASSERT_EQ(got.size(), expected.size()) << lo << " " << hi;
    for (std::size_t j = 0; j < got.size(); ++j) {
      EXPECT_NEAR(got[j], expected[j], 1e-12);
      EXPECT_NEAR(kSine.eval(got[j]), got[j] / 2, 1e-12);
      EXPECT_NEAR(kSine.derivative(got[j]), 1.0, 1e-12);
    }
    const auto t = kTanh.epi_critical_points(lo, hi);
    EXPECT_EQ(t.size(), (lo <= 0.0 && hi >= 0.0) ? 1u : 0u);
  }
}

TEST(Transfer, SlopeBoundedAndMatchesFiniteDifference) {
  const double h = 1e-5;
  for (const auto& tf : {kTanh, kSine}) {
    for (int i = 0; i <= 20000; ++i) {
      const double x = -10.0 + 1e-3 * i;
      const double d = tf.derivative(x);
      ASSERT_GE(d, 0.0) << tf.name() << " x=" << x;
      ASSERT_LE(d, 1.0) << tf.name() << " x=" << x;
      const double fd = (tf.eval(x + h) - tf.eval(x - h)) / (2 * h);
      ASSERT_NEAR(d, fd, 1e-6) << tf.name() << " x=" << x;
    }
  }
}

TEST(MaxSlopeEstimate, Examples) {
  EXPECT_LE(max_slope_estimate(kTanh, -4.0, 4.0, 10000), 1.0 + 1e-9);
  EXPECT_NEAR(max_slope_estimate(kLinear, -1.0, 1.0, 100), 1.0, 1e-12);

  // Oracle: brute force over the same grid, evaluated independently here.
  const double lo = -4.0, hi = 4.0;
  const int n = 10000;
  const double h = (hi - lo) / (n - 1);
  double best = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double x0 = lo + h * i, x1 = lo + h * (i + 1);
    const double f0 = 0.5 * x0 - 0.25 * std::sin(2 * x0);
    const double f1 = 0.5 * x1 - 0.25 * std::sin(2 * x1);
    best = std::max(best, std::abs(f1 - f0) / (x1 - x0));
  }
  const double est = max_slope_estimate(kSine, lo, hi, n);
  EXPECT_GE(est, 0.999);
  EXPECT_LE(est, 1.0 + 1e-9);
  EXPECT_NEAR(est, best, 1e-9);
}

TEST(MaxSlopeEstimate, Preconditions) {
  EXPECT_THROW(max_slope_estimate(kTanh, 1.0, 1.0, 10), std::domain_error);
  EXPECT_THROW(max_slope_estimate(kTanh, -1.0, 1.0, 1), std::domain_error);
}

TEST(Tailored, NearestAnchorPieces) {
  const auto tf = TransferFunction::tailored({2.0, -3.0});
  ASSERT_EQ(tf.anchors().size(), 2u);
  EXPECT_EQ(tf.anchors()[0], -3.0);
  // Inside the reach of 2.0: shifted piece, slope 1 at the anchor.
  EXPECT_NEAR(tf.eval(2.0), std::tanh(2.0), 1e-15);
  EXPECT_NEAR(tf.derivative(2.0), 1.0, 1e-15);
  EXPECT_NEAR(tf.eval(2.5), std::tanh(0.5) + std::tanh(2.0), 1e-15);
  // Outside every reach: plain tanh.
  EXPECT_NEAR(tf.eval(0.0), 0.0, 1e-15);
  EXPECT_NEAR(tf.eval(5.0), std::tanh(5.0), 1e-15);
}

TEST(Tailored, TiesGoToSmallerAnchor) {
  const auto tf = TransferFunction::tailored({0.0, 1.0});
  // x = 0.5 is equidistant; the piece of anchor 0 is plain tanh.
  EXPECT_NEAR(tf.eval(0.5), std::tanh(0.5), 1e-15);
  EXPECT_NEAR(tf.eval(0.5000001), std::tanh(0.5000001 - 1.0) + std::tanh(1.0), 1e-15);
}

TEST(Tailored, EcpsAreAnchorsAndOrigin) {
  const auto tf = TransferFunction::tailored({2.0, -3.0});
  const auto ecp = tf.epi_critical_points(-5.0, 5.0);
  ASSERT_EQ(ecp.size(), 3u);
  EXPECT_NEAR(ecp[0], -3.0, 1e-12);
  EXPECT_NEAR(ecp[1], 0.0, 1e-12);
  EXPECT_NEAR(ecp[2], 2.0, 1e-12);
}

TEST(Tailored, DiscontinuitiesReported) {
  EXPECT_TRUE(kTanh.discontinuities().empty());
  const auto tf = TransferFunction::tailored({2.0});
  const auto jumps = tf.discontinuities();
  ASSERT_EQ(jumps.size(), 2u);
  // At x = 1 the piece switches from tanh(x) to tanh(x - 2) + tanh(2).
  EXPECT_NEAR(jumps[0].at, 1.0, 1e-15);
  EXPECT_NEAR(jumps[0].size, std::tanh(-1.0) + std::tanh(2.0) - std::tanh(1.0), 1e-12);
  EXPECT_NEAR(jumps[1].at, 3.0, 1e-15);
  EXPECT_NEAR(jumps[1].size, std::tanh(3.0) - std::tanh(1.0) - std::tanh(2.0), 1e-12);
}

// Monotone within every piece; the jumps between pieces may be negative.
TEST(Tailored, MonotoneWithinPieces) {
  const auto tf = TransferFunction::tailored({-2.5, 0.7, 2.0});
  for (int i = 0; i <= 16000; ++i) {
    const double x = -8.0 + 1e-3 * i;
    const double d = tf.derivative(x);
    ASSERT_GT(d, 0.0);
    ASSERT_LE(d, 1.0);
  }
}
