#include "lemni/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace lemni {
namespace {

double cross(const Cplx& o, const Cplx& a, const Cplx& b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) -
         (a.imag() - o.imag()) * (b.real() - o.real());
}

}  // namespace

Hull convex_hull(const std::vector<Cplx>& points) {
  if (points.empty())
    throw std::invalid_argument("convex_hull: need at least one point");

  std::vector<Cplx> pts = points;
  std::sort(pts.begin(), pts.end(), [](const Cplx& a, const Cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  Hull hull;
  double scale = 0.0;
  for (const Cplx& p : pts) scale = std::max(scale, std::abs(p));
  const double eps = 1e-12 * std::max(1.0, scale * scale);

  if (pts.size() == 1) {
    hull.vertices = pts;
    return hull;
  }

  std::vector<Cplx> chain(2 * pts.size());
  std::size_t k = 0;
  for (const Cplx& p : pts) {  // lower
    while (k >= 2 && cross(chain[k - 2], chain[k - 1], p) <= eps) --k;
    chain[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {  // upper
    while (k >= lower && cross(chain[k - 2], chain[k - 1], *it) <= eps) --k;
    chain[k++] = *it;
  }
  chain.resize(k - 1);  // last point equals the first
  hull.vertices = std::move(chain);

  const std::size_t n = hull.vertices.size();
  // n == 2 (collinear input) comes out as out-and-back, twice the length
  for (std::size_t i = 0; i < n; ++i)
    hull.perimeter += std::abs(hull.vertices[(i + 1) % n] - hull.vertices[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      hull.diameter =
          std::max(hull.diameter, std::abs(hull.vertices[i] - hull.vertices[j]));
  return hull;
}

HullBoundCheck verify_hull_perimeter_bound(const LevelCurve& curve) {
  HullBoundCheck out;
  if (curve.components.size() != 1) return out;
  out.applicable = true;
  std::vector<Cplx> pts;
  for (const CurveComponent& c : curve.components)
    pts.insert(pts.end(), c.pts.begin(), c.pts.end());
  out.perimeter = convex_hull(pts).perimeter;
  out.ok = out.perimeter <= kHullPerimeterBound + 1e-3;
  return out;
}

}  // namespace lemni
