// Dense BFGS maximizer with backtracking line search. Problem sizes here are
// tiny (a handful of evaluation weights), so the full inverse-Hessian update
// is the right tool; every accepted step strictly increases the objective.
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mnklab::opt {

// Returns the objective value and fills grad_out (same length as x).
using Objective =
    std::function<double(std::span<const double> x, std::span<double> grad_out)>;

struct Options {
  int max_iterations = 300;
  double gradient_tolerance = 1e-6;
  int max_line_search = 50;
  double armijo_c1 = 1e-4;
  // Iterates beyond this norm are flagged as divergence (an objective
  // unbounded along a ray, e.g. logit separation).
  double divergence_norm = 1e4;
};

struct IterationRow {
  int iteration = 0;
  double value = 0.0;
  double gradient_norm = 0.0;
  double step = 0.0;
};

struct Result {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  std::string message;
  std::vector<IterationRow> trace;
};

Result maximize(const Objective& f, std::vector<double> x0, const Options& options = {});

// Gauss-Jordan inverse of a row-major k x k matrix; throws on singularity.
std::vector<double> invert_matrix(std::vector<double> a, int k);

}  // namespace mnklab::opt
