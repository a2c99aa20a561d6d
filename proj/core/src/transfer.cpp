#include "critesn/transfer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace critesn {
namespace {

constexpr double kEcpTolerance = 1e-12;
constexpr double kTailoredReach = 1.0;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string(what) + ": argument must be finite");
  }
}

double sech2(double x) {
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

}  // namespace

std::string to_string(TransferKind kind) {
  switch (kind) {
    case TransferKind::Tanh: return "Tanh";
    case TransferKind::SineSigmoid: return "SineSigmoid";
    case TransferKind::Tailored: return "Tailored";
    case TransferKind::Linear: return "Linear";
  }
  return "Unknown";
}

TransferKind parse_transfer_kind(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '_' || c == '-') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "tanh") return TransferKind::Tanh;
  if (key == "sinesigmoid" || key == "sine") return TransferKind::SineSigmoid;
  if (key == "tailored") return TransferKind::Tailored;
  if (key == "linear") return TransferKind::Linear;
  throw std::invalid_argument("unknown transfer kind '" + std::string(name) + "'");
}

TransferFunction::TransferFunction(TransferKind kind, std::vector<double> anchors)
    : kind_(kind), anchors_(std::move(anchors)) {}

TransferFunction TransferFunction::tanh() { return {TransferKind::Tanh, {}}; }
TransferFunction TransferFunction::sine_sigmoid() { return {TransferKind::SineSigmoid, {}}; }
TransferFunction TransferFunction::linear() { return {TransferKind::Linear, {}}; }

TransferFunction TransferFunction::tailored(std::vector<double> anchors) {
  for (double a : anchors) require_finite(a, "tailored anchor");
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  return {TransferKind::Tailored, std::move(anchors)};
}

TransferFunction TransferFunction::from_kind(TransferKind kind, std::vector<double> anchors) {
  switch (kind) {
    case TransferKind::Tanh: return tanh();
    case TransferKind::SineSigmoid: return sine_sigmoid();
    case TransferKind::Linear: return linear();
    case TransferKind::Tailored: return tailored(std::move(anchors));
  }
  throw std::invalid_argument("unknown transfer kind");
}

const double* TransferFunction::active_anchor(double x) const noexcept {
  // anchors_ is sorted; the first element at or above x and its predecessor
  // are the only nearest-anchor candidates.
  auto it = std::lower_bound(anchors_.begin(), anchors_.end(), x);
  const double* best = nullptr;
  double best_dist = kTailoredReach;
  if (it != anchors_.begin()) {
    const double* left = &*std::prev(it);
    const double d = x - *left;
    if (d <= best_dist) {
      best = left;
      best_dist = d;
    }
  }
  if (it != anchors_.end()) {
    const double d = *it - x;
    // strict: ties keep the smaller (left) anchor
    if (d < best_dist || (best == nullptr && d <= kTailoredReach)) {
      best = &*it;
    }
  }
  return best;
}

double TransferFunction::eval(double x) const {
  require_finite(x, "TransferFunction::eval");
  switch (kind_) {
    case TransferKind::Tanh: return std::tanh(x);
    case TransferKind::SineSigmoid: return 0.5 * x - 0.25 * std::sin(2.0 * x);
    case TransferKind::Linear: return x;
    case TransferKind::Tailored: {
      if (const double* a = active_anchor(x)) return std::tanh(x - *a) + std::tanh(*a);
      return std::tanh(x);
    }
  }
  return x;
}

double TransferFunction::derivative(double x) const {
  require_finite(x, "TransferFunction::derivative");
  switch (kind_) {
    case TransferKind::Tanh: return sech2(x);
    case TransferKind::SineSigmoid: return 0.5 - 0.5 * std::cos(2.0 * x);
    case TransferKind::Linear: return 1.0;
    case TransferKind::Tailored: {
      if (const double* a = active_anchor(x)) return sech2(x - *a);
      return sech2(x);
    }
  }
  return 1.0;
}

std::vector<double> TransferFunction::epi_critical_points(double lo, double hi) const {
  require_finite(lo, "epi_critical_points");
  require_finite(hi, "epi_critical_points");
  if (!(lo < hi)) throw std::domain_error("epi_critical_points: require lo < hi");

  std::vector<double> out;
  switch (kind_) {
    case TransferKind::Linear:
      throw std::logic_error("epi_critical_points: every point of a linear transfer has slope 1");
    case TransferKind::Tanh:
      if (lo <= 0.0 && 0.0 <= hi) out.push_back(0.0);
      break;
    case TransferKind::SineSigmoid: {
      const double pi = std::numbers::pi;
      const auto first = static_cast<long long>(std::ceil(lo / pi - 0.5));
      const auto last = static_cast<long long>(std::floor(hi / pi - 0.5));
      for (long long n = first; n <= last; ++n) {
        const double p = (static_cast<double>(n) + 0.5) * pi;
        if (p >= lo && p <= hi) out.push_back(p);
      }
      break;
    }
    case TransferKind::Tailored: {
      // Newton on theta'(x) - 1 seeded at 0 and at every anchor.
      std::vector<double> seeds(anchors_.begin(), anchors_.end());
      seeds.push_back(0.0);
      for (double x : seeds) {
        bool converged = false;
        for (int iter = 0; iter < 50; ++iter) {
          const double f = derivative(x) - 1.0;
          if (std::abs(f) <= kEcpTolerance) {
            converged = true;
            break;
          }
          const double* a = active_anchor(x);
          const double shift = a ? x - *a : x;
          const double t = std::tanh(shift);
          const double fp = -2.0 * t * (1.0 - t * t);
          if (fp == 0.0) break;
          x -= f / fp;
        }
        if (converged && x >= lo && x <= hi) out.push_back(x);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end(),
                            [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
                out.end());
      break;
    }
  }
  return out;
}

std::vector<TransferFunction::Jump> TransferFunction::discontinuities() const {
  std::vector<Jump> jumps;
  if (kind_ != TransferKind::Tailored) return jumps;

  auto piece = [](const double* a, double x) {
    return a ? std::tanh(x - *a) + std::tanh(*a) : std::tanh(x);
  };

  std::vector<double> boundaries;
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    boundaries.push_back(anchors_[i] - kTailoredReach);
    boundaries.push_back(anchors_[i] + kTailoredReach);
    if (i + 1 < anchors_.size()) boundaries.push_back(0.5 * (anchors_[i] + anchors_[i + 1]));
  }
  std::sort(boundaries.begin(), boundaries.end());
  boundaries.erase(std::unique(boundaries.begin(), boundaries.end()), boundaries.end());

  for (double b : boundaries) {
    // One ulp is not enough: the distance |x - a| rounds back onto the reach.
    const double h = 1e-12 * (1.0 + std::abs(b));
    const double* left = active_anchor(b - h);
    const double* right = active_anchor(b + h);
    if (left == right) continue;
    jumps.push_back({b, piece(right, b) - piece(left, b)});
  }
  return jumps;
}

double max_slope_estimate(const TransferFunction& tf, double lo, double hi, int n_grid) {
  if (!(lo < hi)) throw std::domain_error("max_slope_estimate: require lo < hi");
  if (n_grid < 2) throw std::domain_error("max_slope_estimate: require n_grid >= 2");
  const double h = (hi - lo) / static_cast<double>(n_grid - 1);
  double best = 0.0;
  double prev = tf.eval(lo);
  for (int i = 1; i < n_grid; ++i) {
    const double x = (i == n_grid - 1) ? hi : lo + h * i;
    const double cur = tf.eval(x);
    const double xprev = lo + h * (i - 1);
    best = std::max(best, std::abs(cur - prev) / (x - xprev));
    prev = cur;
  }
  return best;
}

}  // namespace critesn
