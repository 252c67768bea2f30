#pragma once

#include <vector>

#include "lemni/complex.hpp"
#include "lemni/levelset.hpp"

namespace lemni {

/// Perimeter bound for the convex hull of a connected compact set of
/// logarithmic capacity 1 (filled lemniscates of monic polynomials have
/// capacity exactly 1, so it applies to every connected E(p)).
inline const double kHullPerimeterBound =
    M_PI * (std::sqrt(10.0) - 3.0 * std::sqrt(2.0) + 4.0);  // < 9.173

/// Convex hull with cached perimeter and diameter. Vertices are the
/// extreme points in counterclockwise order (collinear points dropped).
struct Hull {
  std::vector<Cplx> vertices;
  double perimeter = 0.0;
  double diameter = 0.0;
};

/// Monotone-chain hull. Degenerate input (all points collinear) yields a
/// 2-vertex hull whose perimeter is twice the segment length; a single
/// point yields a 1-vertex hull with zero perimeter.
Hull convex_hull(const std::vector<Cplx>& points);

struct HullBoundCheck {
  bool ok = true;           // perimeter within the capacity-1 bound
  bool applicable = false;  // curve was connected, so the bound applies
  double perimeter = 0.0;
};

/// Checks the hull perimeter of a traced level curve against
/// kHullPerimeterBound (+1e-3 slack). Only meaningful for connected
/// curves; disconnected input returns ok with applicable = false.
HullBoundCheck verify_hull_perimeter_bound(const LevelCurve& curve);

}  // namespace lemni
