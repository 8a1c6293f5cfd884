#include "nolm/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nolm {

double SampledProfile::at(double t, double outside) const {
  if (empty()) return outside;
  const double u = (t - t0_ps) / step_ps;
  if (u < 0.0 || u > static_cast<double>(size() - 1)) return outside;
  const auto i = static_cast<std::size_t>(u);
  if (i + 1 >= size()) return values.back();
  const double frac = u - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

double SampledProfile::area() const {
  return step_ps * std::accumulate(values.begin(), values.end(), 0.0);
}

double SampledProfile::max() const {
  if (empty()) throw std::invalid_argument("max of empty profile");
  return *std::max_element(values.begin(), values.end());
}

SampledProfile make_profile(double t0_ps, double step_ps, std::size_t n) {
  if (!(step_ps > 0.0)) throw std::invalid_argument("profile step must be positive");
  return SampledProfile{t0_ps, step_ps, std::vector<double>(n, 0.0)};
}

SampledProfile gaussian_profile(double center_ps, double fwhm_ps, double step_ps,
                                double half_span_ps) {
  if (!(fwhm_ps > 0.0)) throw std::invalid_argument("Gaussian FWHM must be positive");
  const double sigma = fwhm_ps / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const auto half = static_cast<std::size_t>(std::ceil(half_span_ps / step_ps));
  auto p = make_profile(center_ps - static_cast<double>(half) * step_ps, step_ps, 2 * half + 1);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = (p.time(i) - center_ps) / sigma;
    p.values[i] = std::exp(-0.5 * z * z);
  }
  return normalized_to_unit_area(p);
}

SampledProfile normalized_to_unit_area(const SampledProfile& p) {
  const double a = p.area();
  if (!(a > 0.0)) throw std::invalid_argument("profile has no positive area");
  SampledProfile out = p;
  for (double& v : out.values) v /= a;
  return out;
}

SampledProfile powered(const SampledProfile& p, int exponent) {
  if (exponent < 1) throw std::invalid_argument("exponent must be >= 1");
  SampledProfile out = p;
  for (double& v : out.values) {
    if (v < 0.0) throw std::invalid_argument("profile must be nonnegative");
    v = std::pow(v, exponent);
  }
  return normalized_to_unit_area(out);
}

double fwhm(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("fwhm: bad curve");
  const auto peak = static_cast<std::size_t>(
      std::distance(y.begin(), std::max_element(y.begin(), y.end())));
  const double half = 0.5 * y[peak];
  if (!(y[peak] > 0.0)) throw std::invalid_argument("fwhm: curve has no positive peak");

  std::size_t l = peak;
  while (l > 0 && y[l - 1] >= half) --l;
  if (l == 0) throw std::runtime_error("fwhm: left half-maximum crossing not sampled");
  std::size_t r = peak;
  while (r + 1 < y.size() && y[r + 1] >= half) ++r;
  if (r + 1 == y.size()) throw std::runtime_error("fwhm: right half-maximum crossing not sampled");

  auto cross = [&](std::size_t a, std::size_t b) {
    const double dy = y[b] - y[a];
    return x[a] + (half - y[a]) * (x[b] - x[a]) / dy;
  };
  return cross(r, r + 1) - cross(l - 1, l);
}

double fwhm(const SampledProfile& p) {
  std::vector<double> x(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) x[i] = p.time(i);
  return fwhm(x, p.values);
}

double fwhm(const Curve& c) { return fwhm(c.x, c.y); }

double fraction_outside(const SampledProfile& p, double lo_ps, double hi_ps) {
  double inside = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total += p.values[i];
    const double t = p.time(i);
    if (t >= lo_ps && t <= hi_ps) inside += p.values[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("profile has no positive area");
  return 1.0 - inside / total;
}

}  // namespace nolm
