#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lemni/spherical.hpp"

using lemni::Chart;
using lemni::ChartPoint;
using lemni::CircleOnSphere;
using lemni::Cplx;
using lemni::RationalFunction;
using lemni::SphericalCurve;
using lemni::SpherePoint;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

RationalFunction poly_map(std::vector<Cplx> coeffs) {
  return RationalFunction::from_coefficients(std::move(coeffs), {Cplx(1)});
}

RationalFunction zpow(int d) {
  std::vector<Cplx> num(d + 1, Cplx(0));
  num[d] = 1;
  return poly_map(std::move(num));
}

SphericalCurve one_component(const std::vector<Cplx>& pts,
                             const std::vector<Chart>& charts) {
  SphericalCurve curve;
  lemni::SphericalComponent comp;
  comp.pts = pts;
  comp.charts = charts;
  curve.components.push_back(std::move(comp));
  curve.spherical_length = lemni::spherical_length(curve);
  return curve;
}

const CircleOnSphere kRealLine = CircleOnSphere::line(M_PI / 2.0, 0.0);

}  // namespace

TEST_CASE("rational function validation") {
  CHECK_THROWS_AS(RationalFunction::from_coefficients({Cplx(1)}, {Cplx(1)}),
                  std::invalid_argument);  // degree 0
  CHECK_THROWS_AS(
      RationalFunction::from_coefficients({Cplx(0), Cplx(0)}, {Cplx(1)}),
      std::invalid_argument);  // zero numerator
  // shared root at z = 1: (z-1) / (z-1)(z+2) = (z-1)/(z^2+z-2)
  CHECK_THROWS_AS(RationalFunction::from_coefficients(
                      {Cplx(-1), Cplx(1)}, {Cplx(-2), Cplx(1), Cplx(1)}),
                  std::invalid_argument);
  // denominator normalized monic (coefficient lists are degree-padded)
  auto f = RationalFunction::from_coefficients({Cplx(0), Cplx(2)}, {Cplx(2)});
  CHECK(std::abs(f.denominator()[0] - Cplx(1)) < 1e-15);
  CHECK(std::abs(f.numerator()[1] - Cplx(1)) < 1e-15);
  CHECK(f.degree() == 1);
}

TEST_CASE("spherical length of synthetic polylines") {
  // unit-circle polyline, 1024 vertices: the equator, length 2 pi
  std::vector<Cplx> pts;
  std::vector<Chart> charts;
  for (int k = 0; k < 1024; ++k) {
    pts.push_back(std::polar(1.0, kTwoPi * k / 1024));
    charts.push_back(Chart::plane);
  }
  CHECK(std::abs(one_component(pts, charts).spherical_length - kTwoPi) <
        1e-4);

  // dense out-and-back along the diameter [-1, 1]: twice the one-way
  // integral of 2 dt/(1+t^2), i.e. 2 pi... the one-way value is pi
  pts.clear();
  charts.clear();
  const int n = 400;
  for (int k = 0; k < n; ++k) {
    pts.push_back(Cplx(-1.0 + 2.0 * k / (n - 1), 0.0));
    charts.push_back(Chart::plane);
  }
  for (int k = n - 2; k >= 1; --k) {
    pts.push_back(Cplx(-1.0 + 2.0 * k / (n - 1), 0.0));
    charts.push_back(Chart::plane);
  }
  const double out_and_back = one_component(pts, charts).spherical_length;
  CHECK(std::abs(0.5 * out_and_back - M_PI) < 1e-4);
}

TEST_CASE("identity map: preimage of the unit circle is the equator") {
  auto f = poly_map({Cplx(0), Cplx(1)});
  auto curve = lemni::preimage_trace(f, CircleOnSphere::circle(Cplx(0), 1.0));
  CHECK(curve.components.size() == 1);
  CHECK(std::abs(curve.spherical_length - kTwoPi) < 1e-4);
  for (const auto& comp : curve.components)
    for (std::size_t i = 0; i < comp.pts.size(); ++i) {
      const Cplx z = comp.pts[i];
      if (comp.charts[i] == Chart::plane)
        CHECK(std::abs(std::abs(z) - 1.0) < 1e-9);
    }
}

TEST_CASE("identity map traced over the real line passes through infinity") {
  auto f = poly_map({Cplx(0), Cplx(1)});
  auto curve = lemni::preimage_trace(f, kRealLine);
  CHECK(curve.components.size() == 1);
  CHECK(std::abs(curve.spherical_length - kTwoPi) < 1e-3);
  // both charts must appear (the branch rides through infinity)
  bool saw_plane = false, saw_inverted = false;
  for (const auto& comp : curve.components)
    for (Chart c : comp.charts)
      (c == Chart::plane ? saw_plane : saw_inverted) = true;
  CHECK(saw_plane);
  CHECK(saw_inverted);
}

TEST_CASE("z^d preimage of the real line has spherical length 2 pi d") {
  for (int d = 1; d <= 4; ++d) {
    auto curve = lemni::preimage_trace(zpow(d), kRealLine);
    CHECK(std::abs(curve.spherical_length - kTwoPi * d) < 1e-3);
    if (d >= 2) {
      // the rays meet at 0 and at infinity
      REQUIRE(curve.touch_points.size() == 2);
      double zmin = 2.0, zmax = -2.0;
      for (const SpherePoint& t : curve.touch_points) {
        zmin = std::min(zmin, t.z);
        zmax = std::max(zmax, t.z);
      }
      CHECK(zmin == doctest::Approx(-1.0));  // origin (south pole)
      CHECK(zmax == doctest::Approx(1.0));   // infinity (north pole)
    }
  }
}

TEST_CASE("degree-2 rational map with a pole: bound holds") {
  // f(z) = (z^2 + 1) / z
  auto f = RationalFunction::from_coefficients({Cplx(1), Cplx(0), Cplx(1)},
                                               {Cplx(0), Cplx(1)});
  REQUIRE(f.degree() == 2);
  auto check =
      lemni::verify_spherical_bound(f, CircleOnSphere::circle(Cplx(0), 1.0));
  CHECK(check.ok);
  CHECK(check.length <= 2.0 * kTwoPi + 1e-3);
  CHECK(check.length > 0.1);
}

TEST_CASE("Moebius maps carry circles to circles: length at most 2 pi") {
  std::mt19937_64 rng(31415);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 6; ++trial) {
    Cplx a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)},
        d{u(rng), u(rng)};
    if (std::abs(a * d - b * c) < 0.1) continue;  // keep it nondegenerate
    auto f = RationalFunction::from_coefficients({b, a}, {d, c});
    if (f.degree() != 1) continue;
    const Cplx center{u(rng), u(rng)};
    const double radius = 0.3 + std::abs(u(rng));
    auto check =
        lemni::verify_spherical_bound(f, CircleOnSphere::circle(center, radius));
    CHECK(check.ok);
    CHECK(check.length <= kTwoPi + 1e-3);
  }
}

TEST_CASE("chart-switch annulus move leaves the length unchanged") {
  auto f = zpow(3);
  lemni::SphereTraceOptions a, b;
  b.chart_switch = 2.25;  // annulus 0.4 < |z| < 2.5
  const double la = lemni::preimage_trace(f, kRealLine, a).spherical_length;
  const double lb = lemni::preimage_trace(f, kRealLine, b).spherical_length;
  CHECK(std::abs(la - lb) <= 1e-6 * la);
}

TEST_CASE("great circle crossing counts") {
  // equator
  std::vector<Cplx> pts;
  std::vector<Chart> charts;
  for (int k = 0; k < 512; ++k) {
    pts.push_back(std::polar(1.0, kTwoPi * k / 512));
    charts.push_back(Chart::plane);
  }
  auto equator = one_component(pts, charts);
  // the pole-centered great circle IS the equator: degenerate
  auto polar = lemni::great_circle_intersections(equator, {0.0, 0.0, 1.0});
  CHECK(polar.degenerate);
  // a generic center: exactly two crossings
  auto generic = lemni::great_circle_intersections(
      equator, {0.3, -0.5, 0.81});
  CHECK(!generic.degenerate);
  CHECK(generic.count == 2);

  // z^2 preimage of the real line: two great circles, four crossings
  auto curve = lemni::preimage_trace(zpow(2), kRealLine);
  auto four = lemni::great_circle_intersections(curve, {0.48, 0.6, 0.64});
  CHECK(four.count == 4);

  // random directions: never more than 2d
  std::mt19937_64 rng(999);
  std::normal_distribution<double> g(0.0, 1.0);
  auto cubic = lemni::preimage_trace(zpow(3), kRealLine);
  for (int k = 0; k < 500; ++k) {
    SpherePoint x{g(rng), g(rng), g(rng)};
    auto r = lemni::great_circle_intersections(cubic, x);
    if (!r.degenerate) CHECK(r.count <= 6);
  }
}

TEST_CASE("poincare estimator") {
  // a great circle crosses almost every great circle exactly twice
  std::vector<Cplx> pts;
  std::vector<Chart> charts;
  for (int k = 0; k < 512; ++k) {
    pts.push_back(std::polar(1.0, kTwoPi * k / 512));
    charts.push_back(Chart::plane);
  }
  auto equator = one_component(pts, charts);
  auto est = lemni::poincare_length(equator, 4000, 5);
  CHECK(std::abs(est.length - kTwoPi) <= std::max(3.0 * est.stderr_, 1e-3));

  // equality case: z^2 over the real line, length 4 pi
  auto curve = lemni::preimage_trace(zpow(2), kRealLine);
  auto est2 = lemni::poincare_length(curve, 10000, 5);
  CHECK(std::abs(est2.length - 2.0 * kTwoPi) <= 3.0 * est2.stderr_ + 1e-6);

  // agreement with the direct length on a generic curve
  auto f = RationalFunction::from_coefficients(
      {Cplx(0.3, 0.1), Cplx(1.0), Cplx(-0.2, 0.4)},
      {Cplx(0.5, -0.3), Cplx(0), Cplx(1)});
  auto gcurve = lemni::preimage_trace(f, CircleOnSphere::circle(Cplx(0.2), 0.8));
  auto est3 = lemni::poincare_length(gcurve, 10000, 17);
  const double tol =
      std::max(0.02 * gcurve.spherical_length, 3.0 * est3.stderr_);
  CHECK(std::abs(est3.length - gcurve.spherical_length) <= tol);
}

TEST_CASE("random rationals stay within the degree bound") {
  std::mt19937_64 rng(246);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int tested = 0;
  while (tested < 5) {
    const int D = 1 + static_cast<int>(rng() % 4);
    std::vector<Cplx> num(D + 1), den(D + 1);
    for (auto& c : num) c = {u(rng), u(rng)};
    for (auto& c : den) c = {u(rng), u(rng)};
    den[D] = 1.0;
    num[D] += Cplx(0.3, 0.0);  // keep the degree at D
    RationalFunction f = [&]() {
      try {
        return RationalFunction::from_coefficients(num, den);
      } catch (const std::invalid_argument&) {
        return RationalFunction::from_coefficients({Cplx(0), Cplx(1)},
                                                   {Cplx(1)});
      }
    }();
    if (f.degree() != D) continue;
    const Cplx center{u(rng), u(rng)};
    const double radius = 0.4 + std::abs(u(rng));
    ++tested;
    auto check =
        lemni::verify_spherical_bound(f, CircleOnSphere::circle(center, radius));
    CHECK(check.ok);
  }
}
