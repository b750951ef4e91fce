#include "mnklab/optimize.hpp"

#include <cmath>
#include <stdexcept>

#include "mnklab/numeric.hpp"

namespace mnklab::opt {

namespace {

// y = M x for row-major k x k M.
void matvec(std::span<const double> m, std::span<const double> x, std::span<double> y) {
  const std::size_t k = x.size();
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += m[i * k + j] * x[j];
    y[i] = s;
  }
}

}  // namespace

Result maximize(const Objective& f, std::vector<double> x0, const Options& options) {
  const std::size_t k = x0.size();
  Result result;
  result.x = std::move(x0);

  std::vector<double> grad(k), new_grad(k);
  double value = f(result.x, grad);
  if (!std::isfinite(value) || !all_finite(grad))
    throw std::runtime_error("objective not finite at the starting point");

  // Inverse Hessian approximation of the *negated* objective, kept positive
  // definite by the curvature guard below. Identity start.
  std::vector<double> h(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) h[i * k + i] = 1.0;

  std::vector<double> direction(k), xs(k), s(k), y(k), hy(k);
  bool reset_since_fail = false;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double gnorm = norm2(grad);
    result.trace.push_back({iter, value, gnorm, 0.0});
    result.iterations = iter;
    if (gnorm <= options.gradient_tolerance) {
      result.converged = true;
      result.message = "gradient norm below tolerance";
      break;
    }
    if (norm2(result.x) > options.divergence_norm) {
      result.diverged = true;
      result.message =
          "parameter norm exceeded the divergence bound; the objective appears "
          "unbounded along a ray (separation)";
      break;
    }

    matvec(h, grad, direction);  // ascent direction H g
    double slope = dot(grad, direction);
    if (slope <= 0.0) {  // H lost positive definiteness: steepest-ascent restart
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) h[i * k + j] = i == j ? 1.0 : 0.0;
      direction.assign(grad.begin(), grad.end());
      slope = dot(grad, grad);
    }

    bool accepted = false;
    double step = 1.0;
    double new_value = value;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      for (std::size_t i = 0; i < k; ++i) xs[i] = result.x[i] + step * direction[i];
      new_value = f(xs, new_grad);
      if (std::isfinite(new_value) &&
          new_value > value + options.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!reset_since_fail) {
        // One steepest-ascent retry, then give up at this point.
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) h[i * k + j] = i == j ? 1.0 : 0.0;
        reset_since_fail = true;
        continue;
      }
      result.converged = gnorm <= options.gradient_tolerance;
      result.message = "line search found no ascent step";
      break;
    }
    reset_since_fail = false;
    result.trace.back().step = step;

    for (std::size_t i = 0; i < k; ++i) {
      s[i] = xs[i] - result.x[i];
      y[i] = new_grad[i] - grad[i];
    }
    result.x = xs;
    value = new_value;
    grad = new_grad;

    // BFGS update on the maximization form: with u = -y, H' = (I - r s u^T) H
    // (I - r u s^T) + r s s^T where r = 1 / (s.u). Curvature guard: skip the
    // update when s.u is too small to keep H positive definite.
    double su = -dot(s, y);
    if (su > 1e-12) {
      double r = 1.0 / su;
      std::vector<double> u(k);
      for (std::size_t i = 0; i < k; ++i) u[i] = -y[i];
      matvec(h, u, hy);
      double uhu = dot(u, hy);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          h[i * k + j] += -r * (s[i] * hy[j] + hy[i] * s[j]) +
                          r * r * uhu * s[i] * s[j] + r * s[i] * s[j];
        }
      }
    }

    if (iter + 1 == options.max_iterations) {
      result.message = "iteration limit reached";
      result.iterations = iter + 1;
    }
  }

  result.value = value;
  result.gradient_norm = norm2(grad);
  if (!result.converged && !result.diverged && result.message.empty())
    result.message = "iteration limit reached";
  if (result.converged && norm2(result.x) > options.divergence_norm) {
    result.converged = false;
    result.diverged = true;
    result.message = "parameter norm exceeded the divergence bound";
  }
  return result;
}

std::vector<double> invert_matrix(std::vector<double> a, int k) {
  std::vector<double> inv(k * k, 0.0);
  for (int i = 0; i < k; ++i) inv[i * k + i] = 1.0;
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[pivot * k + col])) pivot = r;
    if (std::abs(a[pivot * k + col]) < 1e-14)
      throw std::runtime_error("matrix is singular (not invertible)");
    if (pivot != col) {
      for (int j = 0; j < k; ++j) {
        std::swap(a[pivot * k + j], a[col * k + j]);
        std::swap(inv[pivot * k + j], inv[col * k + j]);
      }
    }
    double d = a[col * k + col];
    for (int j = 0; j < k; ++j) {
      a[col * k + j] /= d;
      inv[col * k + j] /= d;
    }
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      double factor = a[r * k + col];
      if (factor == 0.0) continue;
      for (int j = 0; j < k; ++j) {
        a[r * k + j] -= factor * a[col * k + j];
        inv[r * k + j] -= factor * inv[col * k + j];
      }
    }
  }
  return inv;
}

}  // namespace mnklab::opt
