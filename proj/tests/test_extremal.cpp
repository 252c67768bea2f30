#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lemni/extremal.hpp"
#include "lemni/levelset.hpp"
#include "lemni/measure.hpp"

using lemni::Cplx;
using lemni::MonicPolynomial;

TEST_CASE("critical value report on fixed polynomials") {
  auto p = MonicPolynomial::from_roots({Cplx(0, 1), Cplx(0, -1)});  // z^2+1
  auto r = lemni::critical_value_report(p);
  REQUIRE(r.size() == 1);
  CHECK(r[0] < 1e-12);

  auto q = MonicPolynomial::from_roots({Cplx(2), Cplx(-2)});  // z^2-4
  auto rq = lemni::critical_value_report(q);
  REQUIRE(rq.size() == 1);
  CHECK(rq[0] == doctest::Approx(3.0));  // |(-4)| - 1

  for (int d = 3; d <= 5; ++d) {
    auto c = MonicPolynomial::from_roots(lemni::power_candidate_roots(d));
    auto rc = lemni::critical_value_report(c);
    REQUIRE(static_cast<int>(rc.size()) == d - 1);
    for (double v : rc) CHECK(v < 1e-6);
    // sorted descending
    for (std::size_t i = 1; i < rc.size(); ++i) CHECK(rc[i - 1] >= rc[i]);
  }

  auto line = MonicPolynomial::from_roots({Cplx(1)});
  CHECK_THROWS_AS(lemni::critical_value_report(line), std::invalid_argument);
}

TEST_CASE("objective gauge invariance (independent of the optimizer)") {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Cplx> roots{{0.9, 0.2}, {-0.4, 0.6}, {-0.5, -0.7}};
  const double base =
      lemni::length_integral(MonicPolynomial::from_roots(roots), 1e-9);
  for (int trial = 0; trial < 3; ++trial) {
    const Cplx c{u(rng), u(rng)};
    const double alpha = u(rng) * M_PI;
    auto shifted = roots;
    for (Cplx& r : shifted) r += c;
    auto rotated = roots;
    for (Cplx& r : rotated) r *= std::polar(1.0, alpha);
    CHECK(std::abs(lemni::length_integral(
                       MonicPolynomial::from_roots(shifted), 1e-9) -
                   base) <= 1e-6 * base);
    CHECK(std::abs(lemni::length_integral(
                       MonicPolynomial::from_roots(rotated), 1e-9) -
                   base) <= 1e-6 * base);
  }
}

TEST_CASE("search input validation") {
  CHECK_THROWS_AS(lemni::search(1, 1000, 0), std::invalid_argument);
  CHECK_THROWS_AS(lemni::search(7, 1000, 0), std::invalid_argument);
  CHECK_THROWS_AS(lemni::search(2, 100, 0), std::invalid_argument);
}

TEST_CASE("d=2 search finds the figure-eight configuration") {
  auto result = lemni::search(2, 2000, 1);
  CHECK(result.best_length > 7.40);
  CHECK(result.best_length < 7.42);
  // the structure-exploiting polish may spend up to d-1 extra evaluations
  CHECK(result.evaluations <= 2001);
  // history's running maximum is the reported best
  REQUIRE(!result.history.empty());
  double run = 0.0;
  for (const auto& [it, len] : result.history) {
    CHECK(len >= run);
    run = len;
  }
  // near-extremal structure: critical values on the circle, connected set
  REQUIRE(!result.critical_value_distances.empty());
  CHECK(result.critical_value_distances.front() <= 1e-2);
  CHECK(result.connected);
  // roots come out as an antipodal pair of modulus about 1 (z^2 + c, |c|=1)
  REQUIRE(result.best.degree() == 2);
  const Cplx r0 = result.best.roots()[0], r1 = result.best.roots()[1];
  CHECK(std::abs(r0 + r1) < 5e-2);
  CHECK(std::abs(std::abs(r0) - 1.0) < 5e-2);
}

TEST_CASE("search is deterministic per seed") {
  auto a = lemni::search(2, 600, 42);
  auto b = lemni::search(2, 600, 42);
  CHECK(a.best_length == b.best_length);
  CHECK(a.evaluations == b.evaluations);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].first == b.history[i].first);
    CHECK(a.history[i].second == b.history[i].second);
  }
  for (int k = 0; k < 2; ++k)
    CHECK(a.best.roots()[k] == b.best.roots()[k]);
}

TEST_CASE("best_length is the tight re-evaluation of the best polynomial") {
  auto result = lemni::search(2, 600, 3);
  const double re = lemni::length_integral(result.best, 1e-8);
  CHECK(std::abs(result.best_length - re) <= 1e-6 * re);
}

TEST_CASE("d=3 search reaches the conjectured candidate") {
  const double candidate = lemni::length_integral(
      MonicPolynomial::from_roots(lemni::power_candidate_roots(3)), 1e-8);
  auto result = lemni::search(3, 5000, 0);
  CHECK(result.best_length >= candidate - 1e-2);
}

TEST_CASE("candidate comparison at d=2") {
  auto cmp = lemni::compare_with_power_candidate(2, 0, 2000);
  CHECK(std::abs(cmp.candidate_length - 7.416) < 5e-3);
  CHECK(cmp.margin <= 1e-2);
  CHECK(cmp.search_length > 7.40);
}
