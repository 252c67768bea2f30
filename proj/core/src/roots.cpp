#include "lemni/roots.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

#include "lemni/error.hpp"

namespace lemni {
namespace {

// p(z), p'(z) and the scaled magnitude sum_k |a_k| |z|^k in one pass.
struct HornerEval {
  Cplx value;
  Cplx deriv;
  double scale;
};

HornerEval horner(const std::vector<Cplx>& a, Cplx z) {
  const int n = static_cast<int>(a.size()) - 1;
  Cplx v = a[n];
  Cplx dv = 0.0;
  double s = std::abs(a[n]);
  const double az = std::abs(z);
  for (int k = n - 1; k >= 0; --k) {
    dv = dv * z + v;
    v = v * z + a[k];
    s = s * az + std::abs(a[k]);
  }
  return {v, dv, s};
}

std::vector<Cplx> initial_circle(int d, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-0.4, 0.4);
  std::vector<Cplx> z(d);
  const double step = 2.0 * M_PI / d;
  const double base = 0.376;  // avoid axes; helps real-coefficient cases
  for (int k = 0; k < d; ++k) {
    double phi = base + step * (k + jitter(rng));
    z[k] = std::polar(radius, phi);
  }
  return z;
}

// Residual scaled by the evaluation magnitude sum |a_k||z|^k; this is the
// backward-error measure and stays meaningful when the coefficients are
// tiny (scale-free), unlike an absolute floor.
double scaled_residual(const HornerEval& e) {
  return std::abs(e.value) / std::max(e.scale, 1e-300);
}

// One Ehrlich-Aberth sweep over all roots. Reports the worst scaled
// residual and the largest relative step taken.
void aberth_sweep(const std::vector<Cplx>& a, std::vector<Cplx>& z,
                  double tol, double* worst, double* max_step) {
  const int d = static_cast<int>(z.size());
  *worst = 0.0;
  *max_step = 0.0;
  for (int i = 0; i < d; ++i) {
    HornerEval e = horner(a, z[i]);
    const double resid = scaled_residual(e);
    *worst = std::max(*worst, resid);
    if (resid <= tol) continue;
    Cplx newton;
    if (std::abs(e.deriv) > 0.0) {
      newton = e.value / e.deriv;
    } else {
      newton = Cplx(1e-8, 1e-8);
    }
    Cplx repel = 0.0;
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      Cplx diff = z[i] - z[j];
      if (std::abs(diff) < 1e-100) diff = Cplx(1e-100, 0.0);
      repel += 1.0 / diff;
    }
    Cplx denom = 1.0 - newton * repel;
    Cplx step = (std::abs(denom) > 1e-100) ? newton / denom : newton;
    // Damp absurd steps; keeps clustered configurations from exploding.
    const double cap = 1.0 + std::abs(z[i]);
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    z[i] -= step;
    *max_step = std::max(*max_step, std::abs(step) / (1.0 + std::abs(z[i])));
  }
}

double worst_residual(const std::vector<Cplx>& a, const std::vector<Cplx>& z) {
  double worst = 0.0;
  for (const Cplx& zi : z) worst = std::max(worst, scaled_residual(horner(a, zi)));
  return worst;
}

}  // namespace

std::vector<Cplx> solve_polynomial(const std::vector<Cplx>& coeffs,
                                   const SolveOptions& opts,
                                   const std::vector<Cplx>* hints) {
  // Trim negligible leading coefficients (roots at infinity).
  double cmax = 0.0;
  for (const Cplx& c : coeffs) cmax = std::max(cmax, std::abs(c));
  if (!(cmax > 0.0))
    throw NumericalError("solve_polynomial: zero polynomial");
  int n = static_cast<int>(coeffs.size()) - 1;
  while (n > 0 && std::abs(coeffs[n]) <= 1e-14 * cmax) --n;
  if (n == 0) return {};

  std::vector<Cplx> a(coeffs.begin(), coeffs.begin() + n + 1);
  const Cplx lead = a[n];
  for (Cplx& c : a) c /= lead;

  if (n == 1) return {-a[0]};
  if (n == 2) {
    // Stable quadratic formula.
    const Cplx b = a[1], c = a[0];
    Cplx s = std::sqrt(b * b - 4.0 * c);
    if (std::real(std::conj(b) * s) < 0.0) s = -s;
    const Cplx q = -0.5 * (b + s);
    Cplx r0 = q;
    Cplx r1 = (std::abs(q) > 0.0) ? c / q : -b - q;
    std::vector<Cplx> out{r0, r1};
    if (hints && hints->size() == 2) return match_to_anchors(*hints, out);
    return out;
  }

  double amax = 0.0;
  for (const Cplx& c : a) amax = std::max(amax, std::abs(c));
  const double radius = 1.0 + amax;

  std::mt19937_64 rng(opts.seed);
  std::vector<Cplx> best;
  double best_worst = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
    std::vector<Cplx> z;
    if (attempt == 0 && hints && static_cast<int>(hints->size()) == n) {
      z = *hints;
      // Aberth needs pairwise-distinct iterates; nudge collisions.
      std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
          if (std::abs(z[i] - z[j]) < 1e-10 * (1.0 + std::abs(z[i])))
            z[i] += std::polar(1e-9 * (1.0 + std::abs(z[i])), u(rng));
    } else {
      z = initial_circle(n, radius, rng);
    }

    // Converged when every residual reaches the backward-error target, or
    // when the iteration stagnates at its rounding floor (the multiple-
    // root case: the cluster radius cannot shrink further in doubles).
    double worst = std::numeric_limits<double>::infinity();
    bool done = false;
    int stagnant = 0;
    for (int it = 0; it < opts.max_iterations && !done; ++it) {
      double max_step = 0.0;
      aberth_sweep(a, z, opts.residual_tol, &worst, &max_step);
      if (worst <= opts.residual_tol) {
        done = true;
      } else if (max_step <= 1e-15) {
        if (++stagnant >= 3) done = true;
      } else {
        stagnant = 0;
      }
    }
    if (done) {
      if (hints && static_cast<int>(hints->size()) == n)
        return match_to_anchors(*hints, z);
      return z;
    }
    worst = worst_residual(a, z);
    if (worst < best_worst) {
      best_worst = worst;
      best = z;
    }
  }

  std::ostringstream msg;
  msg << "solve_polynomial: no convergence for degree " << n
      << " after " << (opts.restarts + 1)
      << " starts (best scaled residual " << best_worst << ")";
  throw NumericalError(msg.str());
}

std::vector<Cplx> match_to_anchors(const std::vector<Cplx>& anchors,
                                   const std::vector<Cplx>& values) {
  const std::size_t n = anchors.size();
  std::vector<Cplx> out(n);
  std::vector<bool> a_used(n, false), v_used(n, false);
  for (std::size_t pick = 0; pick < n; ++pick) {
    double bestd = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (a_used[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (v_used[j]) continue;
        const double dist = std::abs(anchors[i] - values[j]);
        if (dist < bestd) {
          bestd = dist;
          bi = i;
          bj = j;
        }
      }
    }
    a_used[bi] = true;
    v_used[bj] = true;
    out[bi] = values[bj];
  }
  return out;
}

}  // namespace lemni
