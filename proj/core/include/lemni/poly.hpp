#pragma once

#include <vector>

#include "lemni/complex.hpp"
#include "lemni/roots.hpp"

namespace lemni {

/// Hard degree cap; keeps coefficient dynamic range inside double
/// precision. Raise at compile time if you know what you are doing.
#ifndef LEMNI_MAX_DEGREE
#define LEMNI_MAX_DEGREE 64
#endif
inline constexpr int kMaxDegree = LEMNI_MAX_DEGREE;

/// Monic complex polynomial stored by its root vector, with cached
/// coefficients (ascending order, leading entry exactly 1). Immutable
/// after construction and safe to share across threads.
class MonicPolynomial {
 public:
  /// d = roots.size() >= 1; roots kept in input order.
  static MonicPolynomial from_roots(std::vector<Cplx> roots);

  /// Ascending coefficients, leading entry within 1e-12 of 1. The root
  /// vector is recovered numerically (sorted by argument, then modulus).
  static MonicPolynomial from_coefficients(std::vector<Cplx> coeffs);

  int degree() const { return static_cast<int>(roots_.size()); }
  const std::vector<Cplx>& roots() const { return roots_; }
  const std::vector<Cplx>& coefficients() const { return coeffs_; }

  /// Horner evaluation via the cached coefficients.
  Cplx evaluate(const Cplx& z) const;
  Cplx operator()(const Cplx& z) const { return evaluate(z); }

  /// Product over (z - z_j); used as an independent evaluation route.
  Cplx evaluate_from_roots(const Cplx& z) const;

  Cplx derivative_at(const Cplx& z) const;
  /// Ascending coefficients of p' (length d, leading entry d).
  std::vector<Cplx> derivative_coefficients() const;

  /// The d-1 roots of p' (with multiplicity), sorted by (arg, modulus).
  /// Empty for d = 1.
  std::vector<Cplx> critical_points() const;
  /// Images of the critical points under p, in the same order.
  std::vector<Cplx> critical_values() const;

  /// The d solutions of p(z) = w, with multiplicity. With a valid hint
  /// vector (size d) the output is ordered by nearest-hint matching, the
  /// contract continuation code relies on.
  std::vector<Cplx> solve_preimages(const Cplx& w,
                                    const std::vector<Cplx>* hints = nullptr) const;

  double max_root_modulus() const { return max_modulus(roots_); }
  double root_diameter() const { return point_set_diameter(roots_); }

 private:
  MonicPolynomial() = default;
  std::vector<Cplx> roots_;
  std::vector<Cplx> coeffs_;  // ascending; coeffs_.back() == 1
};

/// Sort key used for canonical root ordering: argument in [0, 2pi) first,
/// then modulus, then lexicographic.
bool canonical_complex_less(const Cplx& a, const Cplx& b);

}  // namespace lemni
