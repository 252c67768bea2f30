#pragma once

#include <vector>

#include "lemni/complex.hpp"
#include "lemni/poly.hpp"

namespace lemni {

struct TraceOptions {
  /// Max phase advance per continuation step (radians).
  double phase_step_max = M_PI / 64.0;
  /// Max predicted spatial move per step; <= 0 means auto:
  /// 0.05 * (root diameter + 2), a cheap bound on diam E(p).
  double spatial_step_max = 0.0;
  /// Residual target for traced vertices, | |p(z)| - 1 |.
  double residual_tol = 1e-9;
  /// A critical value a with | |a| - 1 | below this counts as lying on
  /// the unit circle; the phase circle is split there.
  double critical_phase_tol = 1e-6;
  /// Arc endpoints within this distance are glued into one touch point.
  double touch_merge_tol = 1e-6;

  void validate() const;
  double resolved_spatial_step(const MonicPolynomial& p) const;
};

/// One closed polyline with per-vertex phase and branch index.
struct CurveComponent {
  std::vector<Cplx> pts;
  std::vector<double> phases;   // theta in [0, 2pi)
  std::vector<int> branches;    // continuation branch index at the vertex
};

struct Monodromy {
  std::vector<int> sigma;  // permutation of {0..d-1}
  bool perturbed = false;  // computed on radius 1 + 2*critical_phase_tol
};

/// Traced level set E(p) = {z : |p(z)| = 1}.
struct LevelCurve {
  std::vector<CurveComponent> components;
  Monodromy monodromy;
  std::vector<double> critical_phases;  // sorted, in [0, 2pi)
  std::vector<Cplx> touch_points;       // where components meet

  std::size_t total_vertices() const {
    std::size_t n = 0;
    for (const CurveComponent& c : components) n += c.pts.size();
    return n;
  }
};

/// Trace E(p) by continuation of the d preimages of e^{i theta}. Branches
/// are continuous in theta except across critical phases, where open arcs
/// are traced and glued at touch points (the z^2+1 figure-eight path).
/// `backward` runs the continuation with theta decreasing.
LevelCurve trace(const MonicPolynomial& p, const TraceOptions& opts = {},
                 bool backward = false);

/// Boundary-circle monodromy: index matching of the preimages of w = 1
/// after one counterclockwise continuation around the circle. If a
/// critical value lies on the unit circle (within critical_phase_tol),
/// the circle of radius 1 + 2*critical_phase_tol is used and the result
/// is flagged perturbed. Branches are labelled by sorting the initial
/// fiber by argument, so z^d yields the cycle k -> k+1 (mod d).
Monodromy monodromy(const MonicPolynomial& p, const TraceOptions& opts = {},
                    bool backward = false);

int component_count(const MonicPolynomial& p, const TraceOptions& opts = {});
bool is_connected(const MonicPolynomial& p, const TraceOptions& opts = {});

}  // namespace lemni
