#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace mnklab {

// exp-normalizes scale*logits in place; max-subtraction keeps it stable for
// extreme inputs. The result is a probability vector.
inline void softmax_inplace(std::span<double> logits, double scale = 1.0) {
  if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
  double hi = -std::numeric_limits<double>::infinity();
  for (double& v : logits) {
    v *= scale;
    hi = std::max(hi, v);
  }
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - hi);
    total += v;
  }
  for (double& v : logits) v /= total;
}

inline std::vector<double> softmax(std::span<const double> logits, double scale = 1.0) {
  std::vector<double> out(logits.begin(), logits.end());
  softmax_inplace(out, scale);
  return out;
}

inline double logsumexp(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("logsumexp of empty vector");
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : xs) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double total = 0.0;
  for (double v : xs) total += std::exp(v - hi);
  return hi + std::log(total);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

// Checks a probability vector: nonnegative entries summing to 1 within tol.
inline void check_distribution(std::span<const double> p, double tol = 1e-9) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= -1e-12)) throw std::invalid_argument("distribution has a negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > tol)
    throw std::invalid_argument("distribution does not sum to 1");
}

struct WilsonInterval {
  double lo = 0.0, hi = 1.0;
};

// 95% Wilson score interval for a proportion; well-behaved near 0 and 1.
inline WilsonInterval wilson95(double successes, double n) {
  if (n <= 0.0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  double phat = successes / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (phat + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom;
  return {center - half, center + half};
}

}  // namespace mnklab
