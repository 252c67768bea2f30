#pragma once

#include <functional>
#include <vector>

namespace lemni {

struct QuadratureOptions {
  /// Stop when the summed panel error estimate is <= tol * (1 + |value|).
  double tol = 1e-9;
  int max_panels = 1 << 20;
  /// Panels abutting a split point are bisected geometrically toward it,
  /// never below this width (the singularities we meet are integrable).
  double min_width = 1e-12;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int panels = 0;
};

/// Adaptive (G7, K15) quadrature of f over [a, b]. `split_points` are
/// interior abscissae where f may have an integrable singularity; the
/// initial partition breaks at each of them and no node is ever placed
/// on one (Kronrod nodes are interior). Throws NumericalError if the
/// panel budget runs out with the target unmet; running into min_width
/// alone is not an error (the achieved estimate is reported).
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    std::vector<double> split_points,
                                    const QuadratureOptions& opts = {});

}  // namespace lemni
