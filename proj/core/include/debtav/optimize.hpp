#pragma once

// Small dense unconstrained minimisers. Objectives may return +infinity to
// mark infeasible points; both methods treat that as a hard rejection.

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace debtav::optimize {

using Objective = std::function<double(std::span<const double> x)>;
/// Returns f(x) and writes the gradient into `grad` (same size as x).
using ObjectiveWithGradient = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct Result {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

struct NelderMeadOptions {
  double initial_step = 0.25;
  double size_tolerance = 1e-8;  ///< max coordinate distance of any vertex to the best one
  int max_iterations = 2000;
  int restarts = 1;              ///< rebuild the simplex at the optimum this many times
};

Result nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& opts = {});

struct BfgsOptions {
  double gradient_tolerance = 1e-6;  ///< infinity norm
  int max_iterations = 2000;
  double armijo = 1e-4;
  int max_backtracks = 60;
};

Result bfgs(const ObjectiveWithGradient& f, std::vector<double> start, const BfgsOptions& opts = {});

/// Golden-section minimisation of a unimodal 1-D function on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double tolerance = 1e-6);

}  // namespace debtav::optimize
