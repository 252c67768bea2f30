#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lemni/complex.hpp"
#include "lemni/poly.hpp"

namespace lemni {

struct SearchResult {
  MonicPolynomial best;
  double best_length = 0.0;
  long evaluations = 0;
  /// (evaluation count, running best) at every improvement.
  std::vector<std::pair<long, double>> history;
  /// | |a_j| - 1 | per critical value, sorted descending.
  std::vector<double> critical_value_distances;
  bool connected = false;
};

struct SearchOptions {
  /// Objective quadrature tolerance during the search.
  double objective_tol = 1e-4;
  /// Root configurations with diameter beyond this are rejected without
  /// evaluation (the length decays to zero far out, no optimum there).
  double diameter_barrier = 8.0;
};

/// Derivative-free search for root vectors maximizing |E(p)|, d in [2, 6].
/// Multi-start Nelder-Mead in the translation gauge sum(z_j) = 0; restart
/// simplexes seed at perturbed z^d+1, perturbed z^d and uniform random
/// configurations. Deterministic per (d, budget, seed). The objective has
/// square-root kinks where critical values cross the unit circle, which
/// is why no gradients are used.
SearchResult search(int degree, long budget, std::uint64_t seed,
                    const SearchOptions& opts = {});

/// | |a_j| - 1 | for each critical value a_j, sorted descending. For a
/// length-extremal polynomial these all vanish.
std::vector<double> critical_value_report(const MonicPolynomial& p);

struct CandidateComparison {
  double candidate_length = 0.0;  // |E(z^d + 1)|
  double search_length = 0.0;
  double margin = 0.0;  // search - candidate; conjectured <= 0
};

/// Roots of z^d + 1 (the conjectured extremal configuration).
std::vector<Cplx> power_candidate_roots(int degree);

/// Compares the search result against the conjectured extremal z^d + 1.
CandidateComparison compare_with_power_candidate(
    int degree, std::uint64_t seed, std::optional<long> budget = std::nullopt);

}  // namespace lemni
