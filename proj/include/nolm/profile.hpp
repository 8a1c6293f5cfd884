#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nolm {

// Real samples on a uniform time grid. Sample i sits at t0_ps + i * step_ps.
struct SampledProfile {
  double t0_ps = 0.0;
  double step_ps = 1.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  double time(std::size_t i) const { return t0_ps + static_cast<double>(i) * step_ps; }
  double t_last() const { return empty() ? t0_ps : time(size() - 1); }

  // Linear interpolation; `outside` is returned beyond the sampled span.
  double at(double t, double outside = 0.0) const;
  // Rectangle-rule integral (step * sum); exact for profiles that vanish at both ends.
  double area() const;
  double max() const;
  bool covers(double t) const { return !empty() && t >= t0_ps && t <= t_last(); }
};

// A curve on an arbitrary abscissa (delay sweeps, energy sweeps).
struct Curve {
  std::vector<double> x;
  std::vector<double> y;
};

SampledProfile make_profile(double t0_ps, double step_ps, std::size_t n);

// Unit-area Gaussian of the given FWHM sampled over center +/- half_span.
SampledProfile gaussian_profile(double center_ps, double fwhm_ps, double step_ps,
                                double half_span_ps);

SampledProfile normalized_to_unit_area(const SampledProfile& p);

// Pointwise power, renormalized to unit area.
SampledProfile powered(const SampledProfile& p, int exponent);

// Full width at half maximum of a single-peaked curve, with linear interpolation of
// the half-maximum crossings nearest the peak. Throws if a crossing is missing.
double fwhm(std::span<const double> x, std::span<const double> y);
double fwhm(const SampledProfile& p);
double fwhm(const Curve& c);

// Fraction of the profile's area outside [lo, hi].
double fraction_outside(const SampledProfile& p, double lo_ps, double hi_ps);

}  // namespace nolm
