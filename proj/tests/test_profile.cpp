#include <doctest.h>

#include "nolm/profile.hpp"

#include <cmath>

using namespace nolm;

TEST_CASE("gaussian profile has unit area and the requested width") {
  const auto g = gaussian_profile(10.0, 100.0, 0.5, 400.0);
  CHECK(g.area() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fwhm(g) == doctest::Approx(100.0).epsilon(1e-4));
  CHECK(g.at(10.0) == doctest::Approx(g.max()));
}

TEST_CASE("squaring a gaussian narrows it by sqrt 2") {
  const auto g = gaussian_profile(0.0, 100.0, 0.25, 500.0);
  CHECK(fwhm(powered(g, 2)) == doctest::Approx(100.0 / std::sqrt(2.0)).epsilon(1e-4));
  CHECK(powered(g, 2).area() == doctest::Approx(1.0));
}

TEST_CASE("interpolation and fwhm edge cases") {
  auto p = make_profile(0.0, 1.0, 5);
  p.values = {0, 1, 2, 1, 0};
  CHECK(p.at(1.5) == doctest::Approx(1.5));
  CHECK(p.at(-1.0, 7.0) == 7.0);
  CHECK(fwhm(p) == doctest::Approx(2.0));
  auto flat = make_profile(0.0, 1.0, 3);
  flat.values = {1, 1, 1};
  CHECK_THROWS(fwhm(flat));
  CHECK(fraction_outside(p, 0.0, 4.0) == doctest::Approx(0.0));
}
