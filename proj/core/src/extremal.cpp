#include "lemni/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "lemni/error.hpp"
#include "lemni/levelset.hpp"
#include "lemni/measure.hpp"

namespace lemni {
namespace {

// Search space: the first d-1 roots as 2(d-1) reals; the last root is
// determined by the translation gauge sum(z_j) = 0.
std::vector<Cplx> roots_from_params(const std::vector<double>& x) {
  const std::size_t dm1 = x.size() / 2;
  std::vector<Cplx> roots(dm1 + 1);
  Cplx sum = 0.0;
  for (std::size_t j = 0; j < dm1; ++j) {
    roots[j] = Cplx(x[2 * j], x[2 * j + 1]);
    sum += roots[j];
  }
  roots[dm1] = -sum;
  return roots;
}

std::vector<double> params_from_roots(std::vector<Cplx> roots) {
  Cplx mean = 0.0;
  for (const Cplx& r : roots) mean += r;
  mean /= static_cast<double>(roots.size());
  for (Cplx& r : roots) r -= mean;  // gauge fix
  std::vector<double> x(2 * (roots.size() - 1));
  for (std::size_t j = 0; j + 1 < roots.size(); ++j) {
    x[2 * j] = roots[j].real();
    x[2 * j + 1] = roots[j].imag();
  }
  return x;
}

struct Objective {
  const SearchOptions* opts;
  long budget;
  long evaluations = 0;  // real objective evaluations (budgeted)
  long calls = 0;        // including barrier rejections; loop progress
  double best = -std::numeric_limits<double>::infinity();
  std::vector<Cplx> best_roots;
  std::vector<std::pair<long, double>> history;

  // Returns -length (minimized). Out-of-budget or rejected points get +inf.
  double operator()(const std::vector<double>& x) {
    ++calls;
    if (evaluations >= budget) return std::numeric_limits<double>::infinity();
    std::vector<Cplx> roots = roots_from_params(x);
    if (point_set_diameter(roots) > opts->diameter_barrier)
      return std::numeric_limits<double>::infinity();
    ++evaluations;
    double len;
    try {
      len = length_integral(MonicPolynomial::from_roots(roots),
                            opts->objective_tol);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
    if (len > best) {
      best = len;
      best_roots = std::move(roots);
      history.push_back({evaluations, best});
    }
    return -len;
  }
};

// Standard Nelder-Mead (reflect 1, expand 2, contract 1/2, shrink 1/2).
void nelder_mead(Objective& f, std::vector<double> x0, double scale,
                 long max_evals, std::mt19937_64& rng) {
  const std::size_t n = x0.size();
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::vector<std::vector<double>> v(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i)
    v[i + 1][i] += scale * (1.0 + jitter(rng));
  std::vector<double> fv(n + 1);
  const long start_calls = f.calls;
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(v[i]);

  auto order = [&]() {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> v2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      v2[i] = v[idx[i]];
      f2[i] = fv[idx[i]];
    }
    v.swap(v2);
    fv.swap(f2);
  };

  while (f.calls - start_calls < max_evals && f.evaluations < f.budget) {
    order();
    // convergence: simplex collapsed in value and size
    double fspread = std::abs(fv[n] - fv[0]);
    double size = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      size = std::max(size, std::abs(v[n][i] - v[0][i]));
    if (fspread < 1e-7 * (1.0 + std::abs(fv[0])) && size < 1e-6) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += v[i][j] / n;

    auto towards = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = centroid[j] + coef * (centroid[j] - v[n][j]);
      return p;
    };

    std::vector<double> xr = towards(1.0);
    const double fr = f(xr);
    if (fr < fv[0]) {
      std::vector<double> xe = towards(2.0);
      const double fe = f(xe);
      if (fe < fr) {
        v[n] = xe;
        fv[n] = fe;
      } else {
        v[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      v[n] = xr;
      fv[n] = fr;
    } else {
      const bool outside = fr < fv[n];
      std::vector<double> xc;
      if (outside) {
        xc = towards(0.5);
      } else {
        xc.resize(n);
        for (std::size_t j = 0; j < n; ++j)
          xc[j] = centroid[j] + 0.5 * (v[n][j] - centroid[j]);
      }
      const double fc = f(xc);
      if (fc < std::min(fr, fv[n])) {
        v[n] = xc;
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j)
            v[i][j] = v[0][j] + 0.5 * (v[i][j] - v[0][j]);
          fv[i] = f(v[i]);
        }
      }
    }
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t h = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  return h;
}

}  // namespace

std::vector<Cplx> power_candidate_roots(int degree) {
  std::vector<Cplx> roots(degree);
  for (int k = 0; k < degree; ++k)
    roots[k] = std::polar(1.0, M_PI * (2.0 * k + 1.0) / degree);
  return roots;
}

SearchResult search(int degree, long budget, std::uint64_t seed,
                    const SearchOptions& opts) {
  if (degree < 2 || degree > 6)
    throw std::invalid_argument("search: degree must be in [2, 6]");
  if (budget < 500) throw std::invalid_argument("search: budget >= 500");

  Objective obj;
  obj.opts = &opts;
  obj.budget = budget;

  const long per_restart = std::max<long>(200, budget / 5);
  for (int restart = 0; obj.evaluations < budget; ++restart) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(restart)));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Cplx> roots0;
    switch (restart % 3) {
      case 0:  // the conjectured extremal z^d + 1; perturbed on revisits
        roots0 = power_candidate_roots(degree);
        if (restart >= 3)
          for (Cplx& r : roots0) r += 0.05 * Cplx(u(rng), u(rng));
        break;
      case 1:  // perturbed z^d (everything clustered at the origin)
        roots0.assign(degree, Cplx(0.0));
        for (Cplx& r : roots0) r += 0.1 * Cplx(u(rng), u(rng));
        break;
      default:  // uniform random configuration
        roots0.resize(degree);
        for (Cplx& r : roots0) {
          do {
            r = 1.5 * Cplx(u(rng), u(rng));
          } while (std::abs(r) > 1.5);
        }
        break;
    }
    nelder_mead(obj, params_from_roots(roots0), 0.15, per_restart, rng);
  }

  if (obj.best_roots.empty())
    throw NumericalError("search: every objective evaluation failed");

  SearchResult result{MonicPolynomial::from_roots(obj.best_roots), 0.0,
                      0, {}, {}, false};
  result.best_length = length_integral(result.best, 1e-8);

  // Structure-exploiting trial points: the optimum has its critical
  // values on the unit circle, where the objective is kinked and the
  // simplex stalls just off it. Rescaling the roots moves all critical
  // values radially by s^d; try landing each one exactly on the circle
  // and keep a trial only when the tight evaluation strictly improves.
  {
    const std::vector<Cplx> cvs = result.best.critical_values();
    for (const Cplx& a : cvs) {
      const double mod = std::abs(a);
      if (std::abs(mod - 1.0) > 0.05 || mod <= 0.0) continue;
      const double s = std::pow(mod, -1.0 / degree);
      std::vector<Cplx> scaled = result.best.roots();
      for (Cplx& r : scaled) r *= s;
      try {
        MonicPolynomial trial = MonicPolynomial::from_roots(scaled);
        const double len = length_integral(trial, 1e-8);
        ++obj.evaluations;
        if (len > result.best_length) {
          result.best = trial;
          result.best_length = len;
          obj.history.push_back({obj.evaluations, len});
        }
      } catch (const NumericalError&) {
      }
    }
  }
  result.evaluations = obj.evaluations;
  result.history = std::move(obj.history);
  result.critical_value_distances = critical_value_report(result.best);
  result.connected = is_connected(result.best);
  return result;
}

std::vector<double> critical_value_report(const MonicPolynomial& p) {
  if (p.degree() < 2)
    throw std::invalid_argument("critical_value_report: degree >= 2");
  std::vector<double> out;
  for (const Cplx& a : p.critical_values())
    out.push_back(std::abs(std::abs(a) - 1.0));
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

CandidateComparison compare_with_power_candidate(int degree,
                                                 std::uint64_t seed,
                                                 std::optional<long> budget) {
  CandidateComparison out;
  out.candidate_length = length_integral(
      MonicPolynomial::from_roots(power_candidate_roots(degree)), 1e-8);
  const long b = budget.value_or(2000 + 500L * degree);
  out.search_length = search(degree, b, seed).best_length;
  out.margin = out.search_length - out.candidate_length;
  return out;
}

}  // namespace lemni
