#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nolm::opt {

struct Result {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;
// Writes the gradient into the second argument and returns the objective.
using ObjectiveWithGradient = std::function<double(std::span<const double>, std::span<double>)>;

struct SimplexOptions {
  double initial_step = 0.1;
  double size_tolerance = 1e-9;
  std::size_t max_iterations = 20000;
};

// Derivative-free local minimization (Nelder-Mead).
Result minimize_simplex(const Objective& f, std::vector<double> x0, const SimplexOptions& opts = {});

struct GradientOptions {
  double objective_tolerance = 1e-10;  // relative change treated as stalled
  double gradient_tolerance = 1e-9;
  std::size_t max_iterations = 100000;
  // Stalled iterations required before declaring convergence on objective change.
  std::size_t stall_window = 20;
};

// Quasi-Newton local minimization (BFGS). `converged` is false only when the
// iteration cap was hit while the objective was still decreasing.
Result minimize_bfgs(const ObjectiveWithGradient& f, std::vector<double> x0,
                     const GradientOptions& opts = {});

// Bracketed scalar minimization (Brent). `guess` must satisfy f(guess) < f(lo), f(hi).
Result minimize_scalar(const std::function<double(double)>& f, double lo, double guess, double hi,
                       double abs_tolerance, std::size_t max_iterations = 200);

}  // namespace nolm::opt
