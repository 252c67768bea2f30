#pragma once

#include <utility>
#include <vector>

#include "lemni/complex.hpp"
#include "lemni/geometry.hpp"
#include "lemni/levelset.hpp"
#include "lemni/poly.hpp"

namespace lemni {

/// pi * (sqrt(10) - 3 sqrt(2) + 4), the hull-perimeter constant; the
/// level-set length bound is this times the degree.
inline const double kLengthBoundAlpha0 = kHullPerimeterBound;

/// The earlier, weaker linear bound 8 pi e (per unit degree).
inline const double kLengthBoundWeak = 8.0 * M_PI * std::exp(1.0);

/// The line { z : Re(z e^{-i theta}) = x }, theta in [0, pi).
struct Line {
  double theta = 0.0;
  double x = 0.0;
};

struct CroftonEstimate {
  double length = 0.0;
  double stderr_ = 0.0;
};

/// Finite disc cover of the sublevel set { |p| < M } with certified
/// total radius <= 2 e M^(1/d).
struct DiscCover {
  struct Disc {
    Cplx center;
    double radius;
  };
  std::vector<Disc> discs;
  double level = 0.0;
  double total_radius = 0.0;
  double radius_budget = 0.0;  // 2 e M^(1/d)

  bool covers(const Cplx& z) const {
    for (const Disc& d : discs)
      if (std::abs(z - d.center) <= d.radius) return true;
    return false;
  }
};

/// The three length estimates with the bound-compliance flags.
struct LengthReport {
  double exact_integral = 0.0;
  double polyline = 0.0;
  double crofton = 0.0;
  double crofton_stderr = 0.0;
  int degree = 0;
  double bound_alpha0 = kLengthBoundAlpha0;
  bool satisfies_alpha0_bound = false;  // exact <= alpha0 * d (+1e-6)
  bool satisfies_weak_bound = false;    // exact <= 8 pi e * d
  bool connected = false;
};

/// |E(p)| as the circle integral of sum_k 1/|p'(z_k(theta))| over the
/// fiber, by adaptive quadrature with the phase circle split at critical
/// phases (the integrand has integrable inverse-square-root singularities
/// there). Absolute error target: tol * (1 + result).
double length_integral(const MonicPolynomial& p, double tol = 1e-9);

/// Total segment length of all closed components.
double length_polyline(const LevelCurve& curve);

/// Midpoint-rule evaluation of the line-integral-geometry formula
/// (1/2) int int N(theta, x) dx dtheta, with x confined to the curve's
/// bounding disc. The stderr proxy comes from the per-direction spread.
CroftonEstimate crofton_length(const LevelCurve& curve, int n_theta = 256,
                               int n_x = 256);

/// Number of distinct points where the traced polyline meets the line.
/// Transversal segment crossings are interpolated; vertices lying on the
/// line count as intersection points outright, and segments lying on the
/// line count their two endpoints. Coincident points are deduplicated
/// (a figure-eight node on the line is one intersection point).
int line_intersection_count(const MonicPolynomial& p, const Line& line,
                            const LevelCurve& curve);

/// Lebesgue measure of the projections onto the x- and y-axes
/// (interval-union sweep over the segments).
std::pair<double, double> projection_lengths(const LevelCurve& curve);

/// Per-component check: length <= 2d (px + py) and 2d (px + py) <=
/// 4d diam, with slack 1e-6 * length.
bool verify_projection_bound(const LevelCurve& curve, int degree);

/// Greedy disc cover of { |p| < M }: repeatedly find the largest k such
/// that some disc of radius k*e*M^(1/d)/d captures k of the remaining
/// roots, and emit it at twice the radius.
DiscCover disc_cover(const MonicPolynomial& p, double level);

/// Assembles all three length estimates for E(p) plus the bound flags.
LengthReport verify_length_bound(const MonicPolynomial& p, double tol = 1e-9,
                                 const TraceOptions& trace_opts = {},
                                 int crofton_n_theta = 256,
                                 int crofton_n_x = 256);

}  // namespace lemni
