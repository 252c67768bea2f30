#include "lemni/spherical.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lemni/detail/curve_graph.hpp"
#include "lemni/error.hpp"
#include "lemni/roots.hpp"

namespace lemni {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double normalize_param(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return (t >= kTwoPi) ? 0.0 : t;
}

double circular_gap(double from, double to) {
  const double g = normalize_param(to - from);
  return (g == 0.0) ? kTwoPi : g;
}

Cplx poly_eval(const std::vector<Cplx>& c, const Cplx& z) {
  Cplx v = c.back();
  for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k) v = v * z + c[k];
  return v;
}

std::vector<Cplx> derivative(const std::vector<Cplx>& c) {
  std::vector<Cplx> d(c.size() > 1 ? c.size() - 1 : 1, Cplx(0.0));
  for (std::size_t k = 0; k + 1 < c.size(); ++k)
    d[k] = static_cast<double>(k + 1) * c[k + 1];
  return d;
}

std::vector<Cplx> taylor_at(const std::vector<Cplx>& coeffs, const Cplx& c) {
  std::vector<Cplx> b = coeffs;
  const int n = static_cast<int>(b.size()) - 1;
  for (int j = 0; j < n; ++j)
    for (int k = n - 1; k >= j; --k) b[k] += c * b[k + 1];
  return b;
}

// a*b' convolution helper for the Wronskian num' den - num den'.
std::vector<Cplx> convolve(const std::vector<Cplx>& a,
                           const std::vector<Cplx>& b) {
  std::vector<Cplx> out(a.size() + b.size() - 1, Cplx(0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<Cplx> wronskian(const std::vector<Cplx>& num,
                            const std::vector<Cplx>& den) {
  const std::vector<Cplx> a = convolve(derivative(num), den);
  const std::vector<Cplx> b = convolve(num, derivative(den));
  std::vector<Cplx> out(std::max(a.size(), b.size()), Cplx(0.0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  return out;
}

}  // namespace

RationalFunction RationalFunction::from_coefficients(
    std::vector<Cplx> numerator, std::vector<Cplx> denominator) {
  auto trim = [](std::vector<Cplx>& c) {
    double m = 0.0;
    for (const Cplx& v : c) m = std::max(m, std::abs(v));
    while (c.size() > 1 && std::abs(c.back()) <= 1e-14 * m) c.pop_back();
    return m;
  };
  const double nm = trim(numerator);
  const double dm = trim(denominator);
  if (!(nm > 0.0)) throw std::invalid_argument("RationalFunction: zero numerator");
  if (!(dm > 0.0))
    throw std::invalid_argument("RationalFunction: zero denominator");

  // denominator monic by convention
  const Cplx lead = denominator.back();
  for (Cplx& c : denominator) c /= lead;
  for (Cplx& c : numerator) c /= lead;

  const int dn = static_cast<int>(numerator.size()) - 1;
  const int dd = static_cast<int>(denominator.size()) - 1;
  const int deg = std::max(dn, dd);
  if (deg < 1)
    throw std::invalid_argument("RationalFunction: degree must be >= 1");
  if (deg > kMaxSphereDegree)
    throw std::invalid_argument("RationalFunction: degree too large");

  // coprimality: no shared root within 1e-8
  if (dn >= 1 && dd >= 1) {
    const std::vector<Cplx> zn = solve_polynomial(numerator);
    const std::vector<Cplx> zd = solve_polynomial(denominator);
    for (const Cplx& a : zn)
      for (const Cplx& b : zd)
        if (std::abs(a - b) <= 1e-8)
          throw std::invalid_argument(
              "RationalFunction: numerator and denominator share a root");
  }

  RationalFunction f;
  f.degree_ = deg;
  f.num_ = std::move(numerator);
  f.den_ = std::move(denominator);
  f.num_.resize(deg + 1, Cplx(0.0));
  f.den_.resize(deg + 1, Cplx(0.0));
  f.num_rev_.assign(f.num_.rbegin(), f.num_.rend());
  f.den_rev_.assign(f.den_.rbegin(), f.den_.rend());
  return f;
}

double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

SpherePoint ChartPoint::to_sphere() const {
  const double m2 = std::norm(v);
  const double s = 1.0 / (1.0 + m2);
  if (chart == Chart::plane)
    return {2.0 * v.real() * s, 2.0 * v.imag() * s, (m2 - 1.0) * s};
  return {2.0 * v.real() * s, -2.0 * v.imag() * s, (1.0 - m2) * s};
}

CircleOnSphere CircleOnSphere::circle(const Cplx& center, double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("CircleOnSphere: radius must be positive");
  CircleOnSphere c;
  c.kind = Kind::circle;
  c.center = center;
  c.radius = radius;
  return c;
}

CircleOnSphere CircleOnSphere::line(double theta, double x) {
  CircleOnSphere c;
  c.kind = Kind::line;
  c.theta = theta;
  c.x = x;
  return c;
}

void CircleOnSphere::sphere_plane(SpherePoint* normal, double* offset) const {
  double nx, ny, nz, cc;
  if (kind == Kind::circle) {
    nx = -2.0 * center.real();
    ny = -2.0 * center.imag();
    nz = 1.0 - std::norm(center) + radius * radius;
    cc = -(1.0 + std::norm(center) - radius * radius);
  } else {
    nx = std::cos(theta);
    ny = std::sin(theta);
    nz = x;
    cc = x;
  }
  const double m = std::sqrt(nx * nx + ny * ny + nz * nz);
  *normal = {nx / m, ny / m, nz / m};
  *offset = cc / m;
}

namespace {

Chart other(Chart c) {
  return c == Chart::plane ? Chart::inverted : Chart::plane;
}

// Target point of the parametrized circle at t: either w itself (|w| <= 1)
// or u = 1/w, together with its t-derivative.
struct Target {
  bool u_form = false;
  Cplx val;
  Cplx dval;
};

Target parametrize(const CircleOnSphere& C, double t) {
  Target out;
  if (C.kind == CircleOnSphere::Kind::circle) {
    const Cplx e = std::polar(1.0, t);
    const Cplx w = C.center + C.radius * e;
    const Cplx dw = Cplx(0.0, 1.0) * C.radius * e;
    if (std::abs(w) <= 1.0) {
      out.val = w;
      out.dval = dw;
    } else {
      out.u_form = true;
      out.val = 1.0 / w;
      out.dval = -dw / (w * w);
    }
    return out;
  }
  // line { e^{i theta} (x + i s) : s = tan(t/2) }, half-angle form keeps
  // both representations finite across t = pi (the point at infinity).
  const double c2 = std::cos(0.5 * t), s2 = std::sin(0.5 * t);
  const Cplx rot = std::polar(1.0, C.theta);
  const Cplx denh = Cplx(C.x * c2, s2);
  if (std::abs(denh) <= std::abs(c2)) {  // |w| <= 1
    out.val = rot * denh / c2;
    out.dval = rot * Cplx(0.0, 0.5) / (c2 * c2);
  } else {
    out.u_form = true;
    out.val = std::conj(rot) * c2 / denh;
    out.dval = std::conj(rot) * Cplx(0.0, -0.5) / (denh * denh);
  }
  return out;
}

std::vector<Cplx> target_poly(const RationalFunction& f, const Target& tg,
                              bool inverted_chart) {
  const std::vector<Cplx>& num =
      inverted_chart ? f.numerator_reversed() : f.numerator();
  const std::vector<Cplx>& den =
      inverted_chart ? f.denominator_reversed() : f.denominator();
  std::vector<Cplx> out(num.size());
  for (std::size_t k = 0; k < num.size(); ++k)
    out[k] = tg.u_form ? den[k] - tg.val * num[k] : num[k] - tg.val * den[k];
  return out;
}

/// Full fiber of the target on the sphere: plane-chart roots inside the
/// closed unit disc plus inverted-chart roots strictly inside it. Degree
/// drops in one chart are the other chart's roots near its origin, so the
/// union has exactly deg(f) members; stray boundary duplicates from
/// rounding are repaired by count.
std::vector<ChartPoint> sphere_fiber(const RationalFunction& f,
                                     const Target& tg) {
  const int D = f.degree();
  std::vector<ChartPoint> sel;
  std::vector<ChartPoint> spare;
  for (int inv = 0; inv < 2; ++inv) {
    std::vector<Cplx> roots;
    try {
      roots = solve_polynomial(target_poly(f, tg, inv == 1));
    } catch (const NumericalError&) {
      roots.clear();
    }
    const Chart chart = (inv == 1) ? Chart::inverted : Chart::plane;
    for (const Cplx& z : roots) {
      const bool keep = (inv == 0) ? (std::abs(z) <= 1.0) : (std::abs(z) < 1.0);
      (keep ? sel : spare).push_back({chart, z});
    }
  }
  if (static_cast<int>(sel.size()) > D) {
    // boundary duplicates: drop one of each cross-chart pair
    for (std::size_t i = 0; i < sel.size() && static_cast<int>(sel.size()) > D;
         ++i)
      for (std::size_t j = sel.size(); j-- > i + 1;) {
        if (sel[i].chart == sel[j].chart) continue;
        if (chordal_distance(sel[i].to_sphere(), sel[j].to_sphere()) < 1e-7) {
          sel.erase(sel.begin() + static_cast<long>(j));
          if (static_cast<int>(sel.size()) <= D) break;
        }
      }
  }
  if (static_cast<int>(sel.size()) < D) {
    std::sort(spare.begin(), spare.end(), [](const ChartPoint& a,
                                             const ChartPoint& b) {
      return std::abs(std::abs(a.v) - 1.0) < std::abs(std::abs(b.v) - 1.0);
    });
    for (const ChartPoint& s : spare) {
      if (static_cast<int>(sel.size()) >= D) break;
      bool dup = false;
      for (const ChartPoint& q : sel)
        if (chordal_distance(s.to_sphere(), q.to_sphere()) < 1e-9) {
          dup = true;
          break;
        }
      if (!dup) sel.push_back(s);
    }
  }
  if (static_cast<int>(sel.size()) != D)
    throw NumericalError("sphere_fiber: fiber cardinality mismatch");
  return sel;
}

struct SphereCritical {
  ChartPoint point;
  ChartPoint value;
  int local_degree = 2;
  double phase = 0.0;  // set when the value lies on C
};

ChartPoint value_at(const std::vector<Cplx>& num, const std::vector<Cplx>& den,
                    const Cplx& z) {
  const Cplx X = poly_eval(num, z);
  const Cplx Y = poly_eval(den, z);
  if (std::abs(X) <= std::abs(Y)) return {Chart::plane, X / Y};
  return {Chart::inverted, Y / X};
}

int vanishing_order(const std::vector<Cplx>& taylor) {
  double amax = 0.0;
  for (std::size_t k = 1; k < taylor.size(); ++k)
    amax = std::max(amax, std::abs(taylor[k]));
  for (std::size_t k = 1; k < taylor.size(); ++k)
    if (std::abs(taylor[k]) > 1e-8 * amax) return static_cast<int>(k);
  return static_cast<int>(taylor.size()) - 1;
}

std::vector<SphereCritical> critical_data(const RationalFunction& f) {
  std::vector<SphereCritical> out;
  const std::vector<Cplx> W = wronskian(f.numerator(), f.denominator());

  double wmax = 0.0;
  for (const Cplx& c : W) wmax = std::max(wmax, std::abs(c));
  std::vector<Cplx> cps;
  if (wmax > 0.0) {
    bool nonconst = false;
    for (std::size_t k = 1; k < W.size(); ++k)
      if (std::abs(W[k]) > 1e-14 * wmax) nonconst = true;
    if (nonconst) cps = solve_polynomial(W);
  }

  // Cluster and polish: an m-fold root of W is a simple root of W^{(m-1)}.
  double scale = 1.0;
  for (const Cplx& c : cps) scale = std::max(scale, std::abs(c));
  const double linkage = 0.02 * scale;
  std::vector<int> cluster(cps.size(), -1);
  int n_clusters = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cluster[i] >= 0) continue;
    cluster[i] = n_clusters;
    for (std::size_t j = i + 1; j < cps.size(); ++j)
      if (cluster[j] < 0 && std::abs(cps[i] - cps[j]) <= linkage)
        cluster[j] = n_clusters;
    ++n_clusters;
  }
  for (int cl = 0; cl < n_clusters; ++cl) {
    Cplx mean = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < cps.size(); ++i)
      if (cluster[i] == cl) {
        mean += cps[i];
        ++m;
      }
    mean /= static_cast<double>(m);
    std::vector<Cplx> g = W;
    for (int j = 1; j < m; ++j) g = derivative(g);
    const std::vector<Cplx> gp = derivative(g);
    Cplx c = mean;
    for (int it = 0; it < 60; ++it) {
      const Cplx gv = poly_eval(g, c);
      const Cplx gd = poly_eval(gp, c);
      if (std::abs(gd) < 1e-300) break;
      const Cplx step = gv / gd;
      c -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(c))) break;
    }

    SphereCritical crit;
    crit.point = (std::abs(c) <= 1.0) ? ChartPoint{Chart::plane, c}
                                      : ChartPoint{Chart::inverted, 1.0 / c};
    crit.value = value_at(f.numerator(), f.denominator(), c);
    // local degree from h = num * den(c) - num(c) * den
    const Cplx X = poly_eval(f.numerator(), c);
    const Cplx Y = poly_eval(f.denominator(), c);
    std::vector<Cplx> h(f.numerator().size());
    for (std::size_t k = 0; k < h.size(); ++k)
      h[k] = f.numerator()[k] * Y - X * f.denominator()[k];
    crit.local_degree = vanishing_order(taylor_at(h, c));
    if (crit.local_degree >= 2) out.push_back(crit);
  }

  // Infinity is critical iff the reversed-pair Wronskian vanishes at 0.
  const std::vector<Cplx> Wr =
      wronskian(f.numerator_reversed(), f.denominator_reversed());
  double wrmax = 0.0;
  for (const Cplx& c : Wr) wrmax = std::max(wrmax, std::abs(c));
  if (wrmax > 0.0 && std::abs(Wr[0]) <= 1e-10 * wrmax) {
    SphereCritical crit;
    crit.point = {Chart::inverted, Cplx(0.0)};
    crit.value =
        value_at(f.numerator_reversed(), f.denominator_reversed(), Cplx(0.0));
    const Cplx X = poly_eval(f.numerator_reversed(), Cplx(0.0));
    const Cplx Y = poly_eval(f.denominator_reversed(), Cplx(0.0));
    std::vector<Cplx> h(f.numerator_reversed().size());
    for (std::size_t k = 0; k < h.size(); ++k)
      h[k] = f.numerator_reversed()[k] * Y - X * f.denominator_reversed()[k];
    crit.local_degree = vanishing_order(h);
    if (crit.local_degree >= 2) out.push_back(crit);
  }
  return out;
}

double chordal_distance_to_circle(const SpherePoint& p,
                                  const CircleOnSphere& C) {
  SpherePoint n;
  double c;
  C.sphere_plane(&n, &c);
  const double h = p.x * n.x + p.y * n.y + p.z * n.z - c;
  const double px = p.x - (h + c) * n.x;
  const double py = p.y - (h + c) * n.y;
  const double pz = p.z - (h + c) * n.z;
  const double rho = std::sqrt(px * px + py * py + pz * pz);
  const double r3 = std::sqrt(std::max(0.0, 1.0 - c * c));
  return std::hypot(h, rho - r3);
}

/// Parameter of the point of C nearest to the given value.
bool param_of_value(const CircleOnSphere& C, const ChartPoint& v, double* t) {
  if (C.kind == CircleOnSphere::Kind::circle) {
    if (v.chart == Chart::plane) {
      const Cplx d = v.v - C.center;
      if (std::abs(d) < 1e-300) return false;
      *t = normalize_param(std::arg(d));
      return true;
    }
    if (std::abs(v.v) < 1e-300) return false;  // infinity, not on a circle
    // arg(1/u - center) = arg(1 - center u) - arg(u)
    *t = normalize_param(std::arg(1.0 - C.center * v.v) - std::arg(v.v));
    return true;
  }
  if (v.chart == Chart::inverted && std::abs(v.v) < 1e-300) {
    *t = M_PI;
    return true;
  }
  const Cplx vp = (v.chart == Chart::plane) ? v.v : 1.0 / v.v;
  const double s = (vp * std::polar(1.0, -C.theta)).imag();
  *t = normalize_param(2.0 * std::atan(s));
  return true;
}

/// Greedy chordal matching of a fiber to anchor positions.
std::vector<ChartPoint> match_fiber(const std::vector<SpherePoint>& anchors,
                                    const std::vector<ChartPoint>& fiber) {
  const std::size_t n = anchors.size();
  std::vector<SpherePoint> fs(fiber.size());
  for (std::size_t j = 0; j < fiber.size(); ++j) fs[j] = fiber[j].to_sphere();
  std::vector<ChartPoint> out(n);
  std::vector<bool> au(n, false), fu(n, false);
  for (std::size_t pick = 0; pick < n; ++pick) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (au[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (fu[j]) continue;
        const double d = chordal_distance(anchors[i], fs[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    au[bi] = true;
    fu[bj] = true;
    out[bi] = fiber[bj];
  }
  return out;
}

ChartPoint rechart(const ChartPoint& p, Chart desired, double sw) {
  if (p.chart == desired) {
    if (std::abs(p.v) <= sw) return p;
    return {other(desired), 1.0 / p.v};
  }
  if (std::abs(p.v) >= 1.0 / sw) return {desired, 1.0 / p.v};
  return p;
}

struct SphereBranchRec {
  std::vector<std::vector<ChartPoint>> pts;
  explicit SphereBranchRec(int d) : pts(d) {}
  void push(const std::vector<ChartPoint>& zs) {
    for (std::size_t k = 0; k < zs.size(); ++k) pts[k].push_back(zs[k]);
  }
};

Cplx chart_derivative(const RationalFunction& f, const ChartPoint& p) {
  const std::vector<Cplx>& num =
      (p.chart == Chart::plane) ? f.numerator() : f.numerator_reversed();
  const std::vector<Cplx>& den =
      (p.chart == Chart::plane) ? f.denominator() : f.denominator_reversed();
  const Cplx W = poly_eval(wronskian(num, den), p.v);
  const Cplx d = poly_eval(den, p.v);
  return W / (d * d);
}

/// Continuation from t0 to t1 (either direction). With singular_ends the
/// endpoints are branch-collision parameters: steps are additionally
/// throttled multiplicatively in the distance to either endpoint (the
/// fiber behaves like (t - t_c)^{1/m} there) and the landing on t1 is an
/// unconditional final solve.
void continue_sphere_fiber(const RationalFunction& f, const CircleOnSphere& C,
                           double t0, double t1, std::vector<ChartPoint>& zs,
                           SphereBranchRec* rec, const SphereTraceOptions& opts,
                           bool singular_ends) {
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const int d = f.degree();
  const double end_gap = singular_ends ? 1e-9 : 1e-15;
  double t = t0;
  long guard = 0;
  while (dir * (t1 - t) > end_gap) {
    if (++guard > 2000000)
      throw NumericalError("preimage_trace: continuation livelock");
    const Target tg = parametrize(C, t);
    std::vector<Cplx> vel(d);
    double vmax_sph = 0.0;
    for (int k = 0; k < d; ++k) {
      const Cplx fp = chart_derivative(f, zs[k]);
      Cplx v(0.0);
      if (std::abs(fp) > 1e-300) {
        if (!tg.u_form) {
          v = tg.dval / fp;
        } else {
          const Cplx u2 = tg.val * tg.val;
          const Cplx den = u2 * fp;
          v = (std::abs(den) > 1e-300) ? -tg.dval / den : Cplx(0.0);
        }
      }
      if (!is_finite(v)) v = 0.0;
      vel[k] = v;
      const double sph_speed =
          2.0 * std::abs(v) / (1.0 + std::norm(zs[k].v));
      vmax_sph = std::max(vmax_sph, (std::abs(fp) > 1e-300) ? sph_speed : 1e12);
    }
    double dt = std::min(opts.param_step_max,
                         opts.spherical_step_max / std::max(vmax_sph, 1e-300));
    const double remaining = dir * (t1 - t);
    const double escaped = dir * (t - t0);
    bool final_step = false;
    // Inside the singular zones around collision endpoints the fiber
    // moves like (t - t_c)^{1/m}: step geometrically in that distance and
    // accept the solved fiber outright (predictions are meaningless and
    // branch labels there are interchangeable anyway).
    const double zone = 1e-4;
    const bool in_zone =
        singular_ends && (escaped < zone || remaining < zone);
    if (in_zone) {
      dt = std::min(std::max(escaped, 1e-12), 0.5 * remaining);
    } else if (!singular_ends && dt >= remaining) {
      dt = remaining;
      final_step = true;
    }

    bool accepted = false;
    for (int att = 0; att < 60 && !accepted; ++att) {
      const double tn = final_step ? t1 : t + dir * dt;
      std::vector<SpherePoint> pred(d);
      for (int k = 0; k < d; ++k) {
        ChartPoint q = zs[k];
        // velocity extrapolation is meaningless inside a singular zone
        if (!in_zone) q.v += vel[k] * (dir * dt);
        pred[k] = q.to_sphere();
      }
      std::vector<ChartPoint> fiber;
      bool solved = true;
      try {
        fiber = sphere_fiber(f, parametrize(C, tn));
      } catch (const NumericalError&) {
        solved = false;
      }
      if (solved) {
        std::vector<ChartPoint> matched = match_fiber(pred, fiber);
        bool ok = true;
        if (!in_zone) {
          std::vector<SpherePoint> now(d), nxt(d);
          for (int k = 0; k < d; ++k) {
            now[k] = zs[k].to_sphere();
            nxt[k] = matched[k].to_sphere();
          }
          double move = 0.0;
          for (int k = 0; k < d; ++k)
            move = std::max(move, chordal_distance(now[k], nxt[k]));
          // Reject steps whose prediction error rivals the branch
          // separation; branches leaving a cluster are exempt.
          bool match_ok = true;
          for (int k = 0; k < d && match_ok; ++k) {
            double sep_now = std::numeric_limits<double>::infinity();
            for (int j = 0; j < d; ++j)
              if (j != k)
                sep_now = std::min(sep_now, chordal_distance(now[k], now[j]));
            if (sep_now < 1e-6) continue;
            double sep_new = std::numeric_limits<double>::infinity();
            for (int j = 0; j < d; ++j) {
              if (j == k) continue;
              const double dist = chordal_distance(nxt[k], nxt[j]);
              if (dist > 1e-7) sep_new = std::min(sep_new, dist);
            }
            const double move_k = chordal_distance(now[k], nxt[k]);
            if (sep_new < 0.25 * move_k) continue;
            if (chordal_distance(pred[k], nxt[k]) > 0.45 * sep_new)
              match_ok = false;
          }
          ok = match_ok && move <= 4.0 * opts.spherical_step_max;
        }
        if (ok) {
          for (int k = 0; k < d; ++k)
            zs[k] = rechart(matched[k], zs[k].chart, opts.chart_switch);
          t = tn;
          if (rec) rec->push(zs);
          accepted = true;
          break;
        }
      }
      dt *= 0.5;
      final_step = false;
      if (dir * (t + dir * dt - t) <= 0.0) break;  // no representable step
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "preimage_trace: continuation stalled at t=" << t;
      throw NumericalError(msg.str());
    }
  }
  if (singular_ends && dir * (t1 - t) > 0.0) {
    // land on the collision fiber; branch labels there are interchangeable
    std::vector<SpherePoint> pred(d);
    for (int k = 0; k < d; ++k) pred[k] = zs[k].to_sphere();
    std::vector<ChartPoint> fiber = sphere_fiber(f, parametrize(C, t1));
    std::vector<ChartPoint> matched = match_fiber(pred, fiber);
    for (int k = 0; k < d; ++k)
      zs[k] = rechart(matched[k], zs[k].chart, opts.chart_switch);
    if (rec) rec->push(zs);
  }
}

bool sphere_less(const ChartPoint& a, const ChartPoint& b) {
  const SpherePoint pa = a.to_sphere(), pb = b.to_sphere();
  if (std::abs(pa.z - pb.z) > 1e-12) return pa.z < pb.z;
  if (std::abs(pa.x - pb.x) > 1e-12) return pa.x < pb.x;
  return pa.y < pb.y;
}

void snap_sphere_fiber(std::vector<ChartPoint>& zs,
                       const std::vector<const SphereCritical*>& cands) {
  if (cands.empty()) return;
  struct Pair {
    double dist;
    std::size_t sol, cand;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = 0; j < cands.size(); ++j)
      pairs.push_back({chordal_distance(zs[i].to_sphere(),
                                        cands[j]->point.to_sphere()),
                       i, j});
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
  std::vector<int> quota(cands.size());
  for (std::size_t j = 0; j < cands.size(); ++j)
    quota[j] = cands[j]->local_degree;
  std::vector<bool> taken(zs.size(), false);
  for (const Pair& pr : pairs) {
    if (taken[pr.sol] || quota[pr.cand] == 0) continue;
    taken[pr.sol] = true;
    --quota[pr.cand];
    zs[pr.sol] = cands[pr.cand]->point;
  }
}

double segment_length(const ChartPoint& a, const ChartPoint& b) {
  Cplx va = a.v, vb = b.v;
  if (a.chart != b.chart) {
    // hysteresis keeps the other-chart modulus >= 1/chart_switch, so the
    // conversion stays bounded
    if (std::abs(vb) > 1e-300) {
      vb = 1.0 / vb;
    } else {
      return 2.0 * std::asin(
                 std::min(1.0, 0.5 * chordal_distance(a.to_sphere(),
                                                      b.to_sphere())));
    }
  }
  const Cplx mid = 0.5 * (va + vb);
  return 2.0 * std::abs(vb - va) / (1.0 + std::norm(mid));
}

}  // namespace

double spherical_length(const SphericalCurve& curve) {
  double total = 0.0;
  for (const SphericalComponent& c : curve.components) {
    const std::size_t n = c.pts.size();
    for (std::size_t i = 0; i < n; ++i) {
      const ChartPoint a{c.charts[i], c.pts[i]};
      const ChartPoint b{c.charts[(i + 1) % n], c.pts[(i + 1) % n]};
      total += segment_length(a, b);
    }
  }
  return total;
}

SphericalCurve preimage_trace(const RationalFunction& f,
                              const CircleOnSphere& C,
                              const SphereTraceOptions& opts) {
  const int d = f.degree();
  std::vector<SphereCritical> crits = critical_data(f);
  std::vector<SphereCritical> on_curve;
  for (SphereCritical& cr : crits) {
    if (chordal_distance_to_circle(cr.value.to_sphere(), C) > opts.critical_tol)
      continue;
    double t;
    if (!param_of_value(C, cr.value, &t)) continue;
    cr.phase = t;
    on_curve.push_back(cr);
  }

  SphericalCurve out;

  if (on_curve.empty()) {
    // smooth closed-loop continuation around the parameter circle
    std::vector<ChartPoint> start = sphere_fiber(f, parametrize(C, 0.0));
    std::sort(start.begin(), start.end(), sphere_less);
    std::vector<ChartPoint> zs = start;
    SphereBranchRec rec(d);
    rec.push(zs);
    continue_sphere_fiber(f, C, 0.0, kTwoPi, zs, &rec, opts, false);

    // close up: match the final fiber to the start
    std::vector<int> sigma(d, -1);
    std::vector<bool> used(d, false);
    for (int k = 0; k < d; ++k) {
      double best = std::numeric_limits<double>::infinity();
      int bj = -1;
      for (int j = 0; j < d; ++j) {
        if (used[j]) continue;
        const double dist =
            chordal_distance(zs[k].to_sphere(), start[j].to_sphere());
        if (dist < best) {
          best = dist;
          bj = j;
        }
      }
      if (bj < 0 || best > 1e-5)
        throw NumericalError("preimage_trace: fiber failed to close up");
      sigma[k] = bj;
      used[bj] = true;
    }
    std::vector<bool> seen(d, false);
    for (int k0 = 0; k0 < d; ++k0) {
      if (seen[k0]) continue;
      SphericalComponent comp;
      int k = k0;
      do {
        seen[k] = true;
        const std::size_t n = rec.pts[k].size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
          comp.pts.push_back(rec.pts[k][i].v);
          comp.charts.push_back(rec.pts[k][i].chart);
        }
        k = sigma[k];
      } while (k != k0);
      out.components.push_back(std::move(comp));
    }
    out.spherical_length = spherical_length(out);
    return out;
  }

  // arcs between critical parameters, glued at the critical preimages
  std::vector<double> phases;
  for (const SphereCritical& cr : on_curve) phases.push_back(cr.phase);
  std::sort(phases.begin(), phases.end());
  phases.erase(std::unique(phases.begin(), phases.end(),
                           [](double a, double b) {
                             return std::abs(a - b) < 1e-12;
                           }),
               phases.end());

  auto cands_at = [&](double t) {
    std::vector<const SphereCritical*> at;
    const double tn = normalize_param(t);
    for (const SphereCritical& cr : on_curve) {
      double gap = std::abs(tn - cr.phase);
      gap = std::min(gap, kTwoPi - gap);
      if (gap < 1e-9) at.push_back(&cr);
    }
    return at;
  };

  // One shared fiber per critical parameter: the two arcs meeting there
  // end on identical points, so glue nodes have even degree structurally.
  struct Path {
    std::vector<ChartPoint> pts;
  };
  const std::size_t m = phases.size();
  std::vector<std::vector<ChartPoint>> fibers(m);
  for (std::size_t j = 0; j < m; ++j) {
    fibers[j] = sphere_fiber(f, parametrize(C, phases[j]));
    snap_sphere_fiber(fibers[j], cands_at(phases[j]));
    std::sort(fibers[j].begin(), fibers[j].end(), sphere_less);
  }

  std::vector<Path> paths;
  std::vector<detail::ArcEnds> ends;
  for (std::size_t j = 0; j < m; ++j) {
    const double t0 = phases[j];
    const double t1 = t0 + circular_gap(t0, phases[(j + 1) % m]);
    std::vector<ChartPoint> zs = fibers[j];
    SphereBranchRec rec(d);
    rec.push(zs);
    continue_sphere_fiber(f, C, t0, t1, zs, &rec, opts, true);
    std::vector<SpherePoint> anchors(d);
    for (int k = 0; k < d; ++k) anchors[k] = zs[k].to_sphere();
    const std::vector<ChartPoint> landed =
        match_fiber(anchors, fibers[(j + 1) % m]);
    for (int k = 0; k < d; ++k) {
      rec.pts[k].back() = landed[k];
      Path path{std::move(rec.pts[k])};
      const SpherePoint s0 = path.pts.front().to_sphere();
      const SpherePoint s1 = path.pts.back().to_sphere();
      ends.push_back({{s0.x, s0.y, s0.z}, {s1.x, s1.y, s1.z}});
      paths.push_back(std::move(path));
    }
  }

  std::vector<detail::Vec3> junctions;
  for (const SphereCritical& cr : on_curve) {
    const SpherePoint s = cr.point.to_sphere();
    junctions.push_back({s.x, s.y, s.z});
  }

  detail::GluedComponents glued =
      detail::glue_arcs(ends, junctions, opts.glue_tol);

  std::vector<int> degree_of(glued.node_pos.size(), 0);
  for (const auto& [ns, ne] : glued.arc_nodes) {
    ++degree_of[ns];
    ++degree_of[ne];
  }
  for (std::size_t n = 0; n < glued.node_pos.size(); ++n)
    if (glued.node_junction[n] >= 0 && degree_of[n] >= 4)
      out.touch_points.push_back(
          {glued.node_pos[n].x, glued.node_pos[n].y, glued.node_pos[n].z});

  for (const auto& walk : glued.walks) {
    SphericalComponent comp;
    for (const detail::WalkStep& step : walk) {
      const Path& path = paths[step.arc];
      const int jn = glued.node_junction[step.entry_node];
      if (jn >= 0) {
        comp.pts.push_back(on_curve[jn].point.v);
        comp.charts.push_back(on_curve[jn].point.chart);
      }
      const std::size_t n = path.pts.size();
      if (step.reversed) {
        for (std::size_t i = n; i-- > 0;) {
          comp.pts.push_back(path.pts[i].v);
          comp.charts.push_back(path.pts[i].chart);
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          comp.pts.push_back(path.pts[i].v);
          comp.charts.push_back(path.pts[i].chart);
        }
      }
    }
    out.components.push_back(std::move(comp));
  }
  out.spherical_length = spherical_length(out);
  return out;
}

namespace {

int crossings_with_plane(const std::vector<SpherePoint>& pts,
                         const SpherePoint& n, bool* degenerate) {
  const std::size_t npts = pts.size();
  std::vector<int> sign(npts);
  bool any_nonzero = false;
  for (std::size_t i = 0; i < npts; ++i) {
    const double s = pts[i].x * n.x + pts[i].y * n.y + pts[i].z * n.z;
    sign[i] = (s > 1e-12) ? 1 : (s < -1e-12 ? -1 : 0);
    if (sign[i] != 0) any_nonzero = true;
  }
  if (!any_nonzero) {
    *degenerate = true;
    return 0;
  }
  int count = 0;
  for (std::size_t i = 0; i < npts; ++i) {
    const std::size_t j = (i + 1) % npts;
    if (sign[i] != 0 && sign[j] != 0 && sign[i] != sign[j]) ++count;
  }
  // zero runs
  for (std::size_t i = 0; i < npts; ++i) {
    if (sign[i] != 0 || sign[(i + npts - 1) % npts] == 0) continue;
    std::size_t run_end = i;
    while (sign[(run_end + 1) % npts] == 0) run_end = (run_end + 1) % npts;
    const int before = sign[(i + npts - 1) % npts];
    const int after = sign[(run_end + 1) % npts];
    const std::size_t run_len = (run_end + npts - i) % npts + 1;
    if (before != after) {
      ++count;
    } else if (run_len >= 2) {
      count += 2;
    }
  }
  return count;
}

}  // namespace

PoincareEstimate poincare_length(const SphericalCurve& curve, int n_samples,
                                 std::uint64_t seed) {
  if (n_samples < 100)
    throw std::invalid_argument("poincare_length: need >= 100 samples");
  std::vector<std::vector<SpherePoint>> comps;
  for (const SphericalComponent& c : curve.components) {
    std::vector<SpherePoint> pts(c.pts.size());
    for (std::size_t i = 0; i < c.pts.size(); ++i)
      pts[i] = ChartPoint{c.charts[i], c.pts[i]}.to_sphere();
    comps.push_back(std::move(pts));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double sum = 0.0, sum2 = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    SpherePoint x;
    do {
      x = {gauss(rng), gauss(rng), gauss(rng)};
    } while (x.x * x.x + x.y * x.y + x.z * x.z < 1e-12);
    const double m = std::sqrt(x.x * x.x + x.y * x.y + x.z * x.z);
    x = {x.x / m, x.y / m, x.z / m};
    int v = 0;
    for (const auto& pts : comps) {
      bool degenerate = false;
      v += crossings_with_plane(pts, x, &degenerate);
    }
    sum += v;
    sum2 += static_cast<double>(v) * v;
  }
  const double mean = sum / n_samples;
  const double var =
      std::max(0.0, (sum2 - n_samples * mean * mean) / (n_samples - 1));
  PoincareEstimate out;
  out.length = M_PI * mean;
  out.stderr_ = M_PI * std::sqrt(var / n_samples);
  out.samples = n_samples;
  return out;
}

GreatCircleCount great_circle_intersections(const SphericalCurve& curve,
                                            const SpherePoint& x) {
  GreatCircleCount out;
  const double m = std::sqrt(x.x * x.x + x.y * x.y + x.z * x.z);
  const SpherePoint n{x.x / m, x.y / m, x.z / m};
  for (const SphericalComponent& c : curve.components) {
    std::vector<SpherePoint> pts(c.pts.size());
    for (std::size_t i = 0; i < c.pts.size(); ++i)
      pts[i] = ChartPoint{c.charts[i], c.pts[i]}.to_sphere();
    bool degenerate = false;
    out.count += crossings_with_plane(pts, n, &degenerate);
    if (degenerate) out.degenerate = true;
  }
  return out;
}

SphericalBoundCheck verify_spherical_bound(const RationalFunction& f,
                                           const CircleOnSphere& C,
                                           const SphereTraceOptions& opts) {
  SphericalBoundCheck out;
  out.length = preimage_trace(f, C, opts).spherical_length;
  out.bound = kTwoPi * f.degree();
  out.ok = out.length <= out.bound + 1e-3;
  return out;
}

}  // namespace lemni
