#pragma once

#include <cstdint>
#include <vector>

#include "lemni/complex.hpp"

namespace lemni {

inline constexpr int kMaxSphereDegree = 32;

/// Ratio of two coprime polynomials, denominator monic by convention.
/// Coefficients ascending. Degree = max of the two degrees.
class RationalFunction {
 public:
  static RationalFunction from_coefficients(std::vector<Cplx> numerator,
                                            std::vector<Cplx> denominator);

  int degree() const { return degree_; }
  const std::vector<Cplx>& numerator() const { return num_; }
  const std::vector<Cplx>& denominator() const { return den_; }
  /// Reversed pair (padded to degree): z^D num(1/z), z^D den(1/z); the
  /// representation of f in the inverted chart.
  const std::vector<Cplx>& numerator_reversed() const { return num_rev_; }
  const std::vector<Cplx>& denominator_reversed() const { return den_rev_; }

 private:
  RationalFunction() = default;
  std::vector<Cplx> num_, den_, num_rev_, den_rev_;
  int degree_ = 0;
};

/// Which stereographic chart a stored coordinate lives in.
enum class Chart { plane, inverted };

struct SpherePoint {
  double x = 0, y = 0, z = 0;
};

double chordal_distance(const SpherePoint& a, const SpherePoint& b);

/// A point of the Riemann sphere held in one chart (inverted chart stores
/// zeta = 1/z, so infinity is zeta = 0).
struct ChartPoint {
  Chart chart = Chart::plane;
  Cplx v;
  SpherePoint to_sphere() const;
};

/// A circle on the sphere: either a Euclidean circle in the plane or a
/// line (a circle through infinity).
struct CircleOnSphere {
  enum class Kind { circle, line };
  Kind kind = Kind::circle;
  Cplx center;         // circle form
  double radius = 0.0;
  double theta = 0.0;  // line form: { z : Re(z e^{-i theta}) = x }
  double x = 0.0;

  static CircleOnSphere circle(const Cplx& center, double radius);
  static CircleOnSphere line(double theta, double x);
  /// Plane { P : n . P = c } cutting the circle out of the unit sphere.
  void sphere_plane(SpherePoint* normal, double* offset) const;
};

struct SphereTraceOptions {
  double param_step_max = M_PI / 64.0;
  /// Max spherical arc advance per vertex (great circle = 2 pi).
  double spherical_step_max = 0.005;
  /// Chordal distance of a critical value from C to split the parameter
  /// circle there.
  double critical_tol = 1e-6;
  double glue_tol = 1e-6;
  /// Switch chart when the active-chart modulus exceeds this (the switch
  /// event then lands inside the annulus 1/s < |z| < s).
  double chart_switch = 1.8;
};

struct SphericalComponent {
  std::vector<Cplx> pts;
  std::vector<Chart> charts;
};

struct SphericalCurve {
  std::vector<SphericalComponent> components;
  double spherical_length = 0.0;  // cached by the tracer
  std::vector<SpherePoint> touch_points;
};

/// Trace f^{-1}(C) by continuation over a parametrization of C, solving
/// num(z) - w den(z) = 0 per target (or its reciprocal form past |w| = 1)
/// in both charts. Branches passing near infinity ride the inverted
/// chart. Critical values on C split the parameter circle; arcs glue at
/// touch points exactly as in the planar tracer.
SphericalCurve preimage_trace(const RationalFunction& f,
                              const CircleOnSphere& C,
                              const SphereTraceOptions& opts = {});

/// Piecewise midpoint integral of 2 |dz| / (1 + |z|^2) along each
/// polyline (the formula is chart-symmetric).
double spherical_length(const SphericalCurve& curve);

struct PoincareEstimate {
  double length = 0.0;
  double stderr_ = 0.0;
  int samples = 0;
};

/// Monte-Carlo integral-geometric length: pi times the mean number of
/// crossings with great circles centered at uniform sphere points.
PoincareEstimate poincare_length(const SphericalCurve& curve, int n_samples,
                                 std::uint64_t seed);

struct GreatCircleCount {
  int count = 0;
  /// The curve runs along the great circle itself (count meaningless).
  bool degenerate = false;
};

/// Crossings of the curve with the great circle centered at x.
GreatCircleCount great_circle_intersections(const SphericalCurve& curve,
                                            const SpherePoint& x);

struct SphericalBoundCheck {
  bool ok = false;
  double length = 0.0;
  double bound = 0.0;  // 2 pi degree
};

/// Checks spherical_length(f^{-1}(C)) <= 2 pi deg(f) + 1e-3.
SphericalBoundCheck verify_spherical_bound(const RationalFunction& f,
                                           const CircleOnSphere& C,
                                           const SphereTraceOptions& opts = {});

}  // namespace lemni
