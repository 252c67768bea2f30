#include "lemni/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lemni/error.hpp"
#include "lemni/quadrature.hpp"

namespace lemni {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double normalize_phase(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return (t >= kTwoPi) ? 0.0 : t;
}

}  // namespace

double length_integral(const MonicPolynomial& p, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("length_integral: tol > 0");
  // Split the phase circle wherever a critical value comes near the unit
  // circle; the integrand spikes there (and genuinely diverges, square-
  // root integrably, when the value lies on the circle).
  std::vector<double> splits;
  for (const Cplx& a : p.critical_values())
    if (std::abs(std::abs(a) - 1.0) < 0.3)
      splits.push_back(normalize_phase(std::arg(a)));
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end(),
                           [](double u, double v) {
                             return std::abs(u - v) < 1e-12;
                           }),
               splits.end());

  auto integrand = [&p](double theta) {
    const Cplx w = std::polar(1.0, theta);
    double sum = 0.0;
    for (const Cplx& z : p.solve_preimages(w)) {
      const double dp = std::abs(p.derivative_at(z));
      sum += 1.0 / std::max(dp, 1e-150);
    }
    return sum;
  };

  QuadratureOptions qopts;
  qopts.tol = tol;
  QuadratureResult r = integrate_adaptive(integrand, 0.0, kTwoPi, splits, qopts);
  return r.value;
}

double length_polyline(const LevelCurve& curve) {
  if (curve.components.empty())
    throw std::invalid_argument("length_polyline: empty curve");
  double total = 0.0;
  for (const CurveComponent& c : curve.components) {
    const std::size_t n = c.pts.size();
    for (std::size_t i = 0; i < n; ++i)
      total += std::abs(c.pts[(i + 1) % n] - c.pts[i]);
  }
  return total;
}

CroftonEstimate crofton_length(const LevelCurve& curve, int n_theta, int n_x) {
  if (curve.components.empty())
    throw std::invalid_argument("crofton_length: empty curve");
  if (n_theta < 8 || n_x < 8)
    throw std::invalid_argument("crofton_length: need n_theta, n_x >= 8");

  double R = 0.0;
  for (const CurveComponent& c : curve.components)
    for (const Cplx& z : c.pts) R = std::max(R, std::abs(z));
  R += 1.0;

  const double dtheta = M_PI / n_theta;
  const double dx = 2.0 * R / n_x;

  // For one direction, the number of (segment, grid line) crossings summed
  // over the grid equals, per segment, the count of grid abscissae strictly
  // inside its projected span; no per-line bookkeeping is needed.
  std::vector<double> per_theta(n_theta, 0.0);
  for (int i = 0; i < n_theta; ++i) {
    const double theta = (i + 0.5) * dtheta;
    const Cplx rot = std::polar(1.0, -theta);
    long crossings = 0;
    for (const CurveComponent& c : curve.components) {
      const std::size_t n = c.pts.size();
      if (n < 2) continue;
      double prev = (c.pts[0] * rot).real();
      for (std::size_t k = 1; k <= n; ++k) {
        const double cur = (c.pts[k % n] * rot).real();
        double lo = std::min(prev, cur), hi = std::max(prev, cur);
        // grid points x_j = -R + (j + 1/2) dx, j = 0..n_x-1, in (lo, hi)
        double a = (lo + R) / dx - 0.5;
        double b = (hi + R) / dx - 0.5;
        long jlo = static_cast<long>(std::floor(a)) + 1;
        long jhi = static_cast<long>(std::ceil(b)) - 1;
        jlo = std::max(jlo, 0L);
        jhi = std::min(jhi, static_cast<long>(n_x) - 1);
        if (jhi >= jlo) crossings += jhi - jlo + 1;
        prev = cur;
      }
    }
    per_theta[i] = 0.5 * M_PI * dx * static_cast<double>(crossings);
  }

  CroftonEstimate out;
  double mean = 0.0;
  for (double v : per_theta) mean += v;
  mean /= n_theta;
  out.length = mean;
  double var = 0.0;
  for (double v : per_theta) var += (v - mean) * (v - mean);
  var /= std::max(1, n_theta - 1);
  out.stderr_ = std::sqrt(var / n_theta);
  return out;
}

int line_intersection_count(const MonicPolynomial& p, const Line& line,
                            const LevelCurve& curve) {
  (void)p;  // the 2d contract belongs to the caller; p kept for reporting
  double scale = 1.0;
  for (const CurveComponent& c : curve.components)
    for (const Cplx& z : c.pts) scale = std::max(scale, std::abs(z));
  const double tie_tol = 1e-12 * scale;

  const Cplx rot = std::polar(1.0, -line.theta);
  std::vector<Cplx> hits;
  for (const CurveComponent& c : curve.components) {
    const std::size_t n = c.pts.size();
    if (n < 2) continue;
    // signed offsets from the line
    std::vector<double> s(n);
    std::vector<int> sign(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = (c.pts[i] * rot).real() - line.x;
      sign[i] = (s[i] > tie_tol) ? 1 : (s[i] < -tie_tol ? -1 : 0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      if (sign[i] != 0 && sign[j] != 0 && sign[i] != sign[j]) {
        const double t = s[i] / (s[i] - s[j]);
        hits.push_back(c.pts[i] + t * (c.pts[j] - c.pts[i]));
      }
    }
    // Zero runs: vertices (or whole segments) sitting on the line. These
    // are points of the level set on the line, so they count regardless
    // of transversality (a figure-eight node on the line is one genuine
    // intersection even when the assembled walk bounces off it); a flat
    // segment contributes its two endpoints.
    for (std::size_t i = 0; i < n; ++i) {
      if (sign[i] != 0 || sign[(i + n - 1) % n] == 0) continue;
      std::size_t run_end = i;  // last index of the zero run
      while (sign[(run_end + 1) % n] == 0) {
        run_end = (run_end + 1) % n;
        if (run_end == i) break;  // fully degenerate component on the line
      }
      hits.push_back(c.pts[i]);
      if (run_end != i) hits.push_back(c.pts[run_end]);
    }
  }

  // Deduplicate coincident crossing points (a node on the line is one
  // intersection of E(p) even though the walk passes it twice).
  const double dedup = 1e-9 * scale;
  std::vector<Cplx> distinct;
  for (const Cplx& h : hits) {
    bool fresh = true;
    for (const Cplx& q : distinct)
      if (std::abs(h - q) <= dedup) {
        fresh = false;
        break;
      }
    if (fresh) distinct.push_back(h);
  }
  return static_cast<int>(distinct.size());
}

std::pair<double, double> projection_lengths(const LevelCurve& curve) {
  if (curve.components.empty())
    throw std::invalid_argument("projection_lengths: empty curve");
  auto sweep = [](std::vector<std::pair<double, double>>& iv) {
    std::sort(iv.begin(), iv.end());
    double total = 0.0, lo = 0.0, hi = -1.0;
    bool openiv = false;
    for (const auto& [a, b] : iv) {
      if (!openiv || a > hi) {
        if (openiv) total += hi - lo;
        lo = a;
        hi = b;
        openiv = true;
      } else {
        hi = std::max(hi, b);
      }
    }
    if (openiv) total += hi - lo;
    return total;
  };
  std::vector<std::pair<double, double>> ix, iy;
  for (const CurveComponent& c : curve.components) {
    const std::size_t n = c.pts.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Cplx a = c.pts[i], b = c.pts[(i + 1) % n];
      ix.push_back({std::min(a.real(), b.real()), std::max(a.real(), b.real())});
      iy.push_back({std::min(a.imag(), b.imag()), std::max(a.imag(), b.imag())});
    }
  }
  return {sweep(ix), sweep(iy)};
}

bool verify_projection_bound(const LevelCurve& curve, int degree) {
  for (const CurveComponent& comp : curve.components) {
    LevelCurve single;
    single.components.push_back(comp);
    const double len = length_polyline(single);
    const auto [px, py] = projection_lengths(single);
    const double diam = convex_hull(comp.pts).diameter;
    const double tol = 1e-6 * len;
    const double n2d = 2.0 * degree;
    if (len > n2d * (px + py) + tol) return false;
    if (n2d * (px + py) > 2.0 * n2d * diam + tol) return false;
  }
  return true;
}

DiscCover disc_cover(const MonicPolynomial& p, double level) {
  if (!(level > 0.0)) throw std::invalid_argument("disc_cover: level > 0");
  const int d = p.degree();
  const double eta = std::exp(1.0) * std::pow(level, 1.0 / d);

  DiscCover cover;
  cover.level = level;
  cover.radius_budget = 2.0 * eta;

  std::vector<Cplx> remaining = p.roots();
  while (!remaining.empty()) {
    const int n = static_cast<int>(remaining.size());
    // Candidate centers: remaining roots, pairwise midpoints, and the two
    // circumcenters each pair admits at the trial radius, which makes the
    // "some disc of radius k eta/d holds k points" search exact.
    int best_k = 0;
    Cplx best_center;
    for (int k = n; k >= 1; --k) {
      const double r = k * eta / d;
      std::vector<Cplx> centers = remaining;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const Cplx mid = 0.5 * (remaining[i] + remaining[j]);
          centers.push_back(mid);
          const double half = 0.5 * std::abs(remaining[j] - remaining[i]);
          if (half < r && half > 0.0) {
            const double h = std::sqrt(r * r - half * half);
            const Cplx dirv = (remaining[j] - remaining[i]) / (2.0 * half);
            const Cplx normal = Cplx(0.0, 1.0) * dirv * h;
            centers.push_back(mid + normal);
            centers.push_back(mid - normal);
          }
        }
      }
      for (const Cplx& c : centers) {
        int inside = 0;
        for (const Cplx& z : remaining)
          if (std::abs(z - c) <= r * (1.0 + 1e-12)) ++inside;
        if (inside >= k) {
          best_k = k;
          best_center = c;
          break;
        }
      }
      if (best_k > 0) break;
    }
    // k = 1 with a root as center always succeeds, so best_k >= 1 here.
    const double r = best_k * eta / d;
    // Assign the best_k nearest remaining roots to this disc.
    std::vector<std::size_t> idx(remaining.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(remaining[a] - best_center) <
             std::abs(remaining[b] - best_center);
    });
    cover.discs.push_back({best_center, 2.0 * r});
    cover.total_radius += 2.0 * r;
    std::vector<Cplx> rest;
    for (std::size_t i = static_cast<std::size_t>(best_k); i < idx.size(); ++i)
      rest.push_back(remaining[idx[i]]);
    remaining = std::move(rest);
  }
  return cover;
}

LengthReport verify_length_bound(const MonicPolynomial& p, double tol,
                                 const TraceOptions& trace_opts,
                                 int crofton_n_theta, int crofton_n_x) {
  LengthReport report;
  report.degree = p.degree();
  report.exact_integral = length_integral(p, tol);

  const LevelCurve curve = trace(p, trace_opts);
  report.polyline = length_polyline(curve);
  const CroftonEstimate ce =
      crofton_length(curve, crofton_n_theta, crofton_n_x);
  report.crofton = ce.length;
  report.crofton_stderr = ce.stderr_;
  report.connected = curve.components.size() == 1;

  report.satisfies_alpha0_bound =
      report.exact_integral <= kLengthBoundAlpha0 * p.degree() + 1e-6;
  report.satisfies_weak_bound =
      report.exact_integral <= kLengthBoundWeak * p.degree() + 1e-6;
  return report;
}

}  // namespace lemni
