#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace lemni {

using Cplx = std::complex<double>;

inline bool is_finite(const Cplx& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline bool all_finite(const std::vector<Cplx>& zs) {
  for (const Cplx& z : zs)
    if (!is_finite(z)) return false;
  return true;
}

/// Largest pairwise distance of a point set (0 for a single point).
inline double point_set_diameter(const std::vector<Cplx>& zs) {
  double d = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = i + 1; j < zs.size(); ++j)
      d = std::max(d, std::abs(zs[i] - zs[j]));
  return d;
}

inline double max_modulus(const std::vector<Cplx>& zs) {
  double m = 0.0;
  for (const Cplx& z : zs) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace lemni
