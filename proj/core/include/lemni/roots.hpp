#pragma once

#include <cstdint>
#include <vector>

#include "lemni/complex.hpp"

namespace lemni {

struct SolveOptions {
  /// Accept a root z when |p(z)| <= residual_tol * sum_k |a_k| |z|^k
  /// (backward error). Multiple-root clusters that stall at the rounding
  /// floor are accepted by stagnation.
  double residual_tol = 1e-12;
  int max_iterations = 1500;
  int restarts = 3;
  /// Seeds the phase jitter of the initial circle (deterministic).
  std::uint64_t seed = 0x5eedULL;
};

/// All complex roots of a_0 + a_1 z + ... + a_n z^n, with multiplicity,
/// by simultaneous Ehrlich-Aberth iteration. Coefficients ascending.
/// Leading coefficients below 1e-14 * max|a_k| are trimmed (the dropped
/// roots are "at infinity" and not returned). When `hints` is given and
/// has the right length, the iteration starts there and the result is
/// ordered by nearest-hint matching; otherwise root order is unspecified.
/// Throws NumericalError when the restart budget is exhausted.
std::vector<Cplx> solve_polynomial(const std::vector<Cplx>& coeffs,
                                   const SolveOptions& opts = {},
                                   const std::vector<Cplx>* hints = nullptr);

/// Greedy globally-nearest bijective matching: result[i] is the element of
/// `values` matched to anchors[i]. Sizes must agree.
std::vector<Cplx> match_to_anchors(const std::vector<Cplx>& anchors,
                                   const std::vector<Cplx>& values);

}  // namespace lemni
