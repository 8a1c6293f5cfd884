#include "nolm/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <memory>
#include <stdexcept>

namespace nolm::opt {
namespace {

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;

VectorPtr to_gsl(std::span<const double> x) {
  VectorPtr v(gsl_vector_alloc(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) gsl_vector_set(v.get(), i, x[i]);
  return v;
}

std::vector<double> from_gsl(const gsl_vector* v) {
  return std::vector<double>(v->data, v->data + v->size);
}

std::span<const double> view(const gsl_vector* v) { return {v->data, v->size}; }

// GSL reports failures through a global handler that aborts by default.
struct ErrorHandlerGuard {
  gsl_error_handler_t* previous;
  ErrorHandlerGuard() : previous(gsl_set_error_handler_off()) {}
  ~ErrorHandlerGuard() { gsl_set_error_handler(previous); }
};

}  // namespace

Result minimize_simplex(const Objective& f, std::vector<double> x0, const SimplexOptions& opts) {
  if (x0.empty()) throw std::invalid_argument("minimize_simplex: empty start point");
  ErrorHandlerGuard guard;
  const std::size_t n = x0.size();

  gsl_multimin_function fn;
  fn.n = n;
  fn.params = const_cast<Objective*>(&f);
  fn.f = [](const gsl_vector* x, void* p) {
    return (*static_cast<const Objective*>(p))(view(x));
  };

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n),
      &gsl_multimin_fminimizer_free);
  auto start = to_gsl(x0);
  VectorPtr steps(gsl_vector_alloc(n));
  gsl_vector_set_all(steps.get(), opts.initial_step);
  gsl_multimin_fminimizer_set(s.get(), &fn, start.get(), steps.get());

  Result r;
  for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(s.get());
    if (gsl_multimin_test_size(size, opts.size_tolerance) == GSL_SUCCESS) {
      r.converged = true;
      break;
    }
  }
  r.x = from_gsl(gsl_multimin_fminimizer_x(s.get()));
  r.value = gsl_multimin_fminimizer_minimum(s.get());
  return r;
}

Result minimize_bfgs(const ObjectiveWithGradient& f, std::vector<double> x0,
                     const GradientOptions& opts) {
  if (x0.empty()) throw std::invalid_argument("minimize_bfgs: empty start point");
  ErrorHandlerGuard guard;
  const std::size_t n = x0.size();

  gsl_multimin_function_fdf fn;
  fn.n = n;
  fn.params = const_cast<ObjectiveWithGradient*>(&f);
  fn.f = [](const gsl_vector* x, void* p) {
    std::vector<double> g(x->size);
    return (*static_cast<const ObjectiveWithGradient*>(p))(view(x), g);
  };
  fn.df = [](const gsl_vector* x, void* p, gsl_vector* g) {
    (*static_cast<const ObjectiveWithGradient*>(p))(view(x), {g->data, g->size});
  };
  fn.fdf = [](const gsl_vector* x, void* p, double* fx, gsl_vector* g) {
    *fx = (*static_cast<const ObjectiveWithGradient*>(p))(view(x), {g->data, g->size});
  };

  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> s(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n),
      &gsl_multimin_fdfminimizer_free);
  auto start = to_gsl(x0);
  gsl_multimin_fdfminimizer_set(s.get(), &fn, start.get(), 0.01, 0.1);

  Result r;
  double previous = s->f;
  std::size_t stalled = 0;
  for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
    const int status = gsl_multimin_fdfminimizer_iterate(s.get());
    if (status != GSL_SUCCESS) {
      // No further progress is possible along the search direction: a stationary point
      // to working precision.
      r.converged = true;
      break;
    }
    if (gsl_multimin_test_gradient(s->gradient, opts.gradient_tolerance) == GSL_SUCCESS) {
      r.converged = true;
      break;
    }
    const double change = previous - s->f;
    stalled = (change <= opts.objective_tolerance * (1.0 + std::abs(s->f))) ? stalled + 1 : 0;
    previous = s->f;
    if (stalled >= opts.stall_window) {
      r.converged = true;
      break;
    }
  }
  r.x = from_gsl(s->x);
  r.value = s->f;
  return r;
}

Result minimize_scalar(const std::function<double(double)>& f, double lo, double guess, double hi,
                       double abs_tolerance, std::size_t max_iterations) {
  ErrorHandlerGuard guard;
  gsl_function fn;
  fn.params = const_cast<std::function<double(double)>*>(&f);
  fn.function = [](double x, void* p) {
    return (*static_cast<const std::function<double(double)>*>(p))(x);
  };
  std::unique_ptr<gsl_min_fminimizer, decltype(&gsl_min_fminimizer_free)> s(
      gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent), &gsl_min_fminimizer_free);
  if (gsl_min_fminimizer_set(s.get(), &fn, guess, lo, hi) != GSL_SUCCESS) {
    throw std::invalid_argument("minimize_scalar: guess does not bracket a minimum");
  }
  Result r;
  for (r.iterations = 0; r.iterations < max_iterations; ++r.iterations) {
    if (gsl_min_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    const double a = gsl_min_fminimizer_x_lower(s.get());
    const double b = gsl_min_fminimizer_x_upper(s.get());
    if (gsl_min_test_interval(a, b, abs_tolerance, 0.0) == GSL_SUCCESS) {
      r.converged = true;
      break;
    }
  }
  r.x = {gsl_min_fminimizer_x_minimum(s.get())};
  r.value = gsl_min_fminimizer_f_minimum(s.get());
  return r;
}

}  // namespace nolm::opt
