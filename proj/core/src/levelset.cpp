#include "lemni/levelset.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lemni/detail/curve_graph.hpp"
#include "lemni/error.hpp"

namespace lemni {

void TraceOptions::validate() const {
  if (!(phase_step_max > 0.0) || !(residual_tol > 0.0) ||
      !(critical_phase_tol > 0.0) || !(touch_merge_tol > 0.0))
    throw std::invalid_argument("TraceOptions: tolerances must be positive");
}

double TraceOptions::resolved_spatial_step(const MonicPolynomial& p) const {
  if (spatial_step_max > 0.0) return spatial_step_max;
  return 0.05 * (p.root_diameter() + 2.0);
}

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double normalize_phase(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return (t >= kTwoPi) ? 0.0 : t;
}

double circular_gap(double from, double to) {
  double g = normalize_phase(to - from);
  return (g == 0.0) ? kTwoPi : g;
}

/// Taylor coefficients of p about c (full Horner shift; no factorials).
std::vector<Cplx> taylor_at(const std::vector<Cplx>& coeffs, const Cplx& c) {
  std::vector<Cplx> b = coeffs;
  const int n = static_cast<int>(b.size()) - 1;
  for (int j = 0; j < n; ++j)
    for (int k = n - 1; k >= j; --k) b[k] += c * b[k + 1];
  return b;
}

/// A critical point lying on E(p) (its critical value sits on the unit
/// circle). local_degree branches of the fiber collide there.
struct TouchCandidate {
  Cplx point;
  int local_degree;
  double phase;  // arg of the critical value, in [0, 2pi)
};

std::vector<Cplx> nth_derivative_coeffs(std::vector<Cplx> c, int order) {
  for (int j = 0; j < order; ++j) {
    std::vector<Cplx> d(c.size() > 1 ? c.size() - 1 : 1, Cplx(0.0));
    for (std::size_t k = 0; k + 1 < c.size(); ++k)
      d[k] = static_cast<double>(k + 1) * c[k + 1];
    c = std::move(d);
  }
  return c;
}

Cplx poly_eval(const std::vector<Cplx>& c, const Cplx& z) {
  Cplx v = c.back();
  for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k) v = v * z + c[k];
  return v;
}

/// Cluster the on-circle critical points, refine each cluster by Newton
/// on p^{(m)} (a cluster of m critical points is an m-fold root of p',
/// hence a simple root of p^{(m)}), then read the collision count off the
/// Taylor expansion of p at the refined point.
std::vector<TouchCandidate> find_touch_candidates(const MonicPolynomial& p,
                                                  double crit_tol) {
  std::vector<TouchCandidate> out;
  if (p.degree() < 2) return out;
  const std::vector<Cplx> cps = p.critical_points();
  std::vector<Cplx> on_circle;
  for (const Cplx& c : cps)
    if (std::abs(std::abs(p(c)) - 1.0) <= crit_tol) on_circle.push_back(c);
  if (on_circle.empty()) return out;

  const double linkage = 0.02 * (1.0 + p.max_root_modulus());
  std::vector<int> cluster(on_circle.size(), -1);
  int n_clusters = 0;
  for (std::size_t i = 0; i < on_circle.size(); ++i) {
    if (cluster[i] >= 0) continue;
    cluster[i] = n_clusters;
    for (std::size_t j = i + 1; j < on_circle.size(); ++j)
      if (cluster[j] < 0 && std::abs(on_circle[i] - on_circle[j]) <= linkage)
        cluster[j] = n_clusters;
    ++n_clusters;
  }

  for (int cl = 0; cl < n_clusters; ++cl) {
    Cplx mean = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < on_circle.size(); ++i)
      if (cluster[i] == cl) {
        mean += on_circle[i];
        ++m;
      }
    mean /= static_cast<double>(m);

    // Newton polish on g = p^{(m)}; quadratic since the root is simple.
    const std::vector<Cplx> g = nth_derivative_coeffs(p.coefficients(), m);
    const std::vector<Cplx> gp = nth_derivative_coeffs(g, 1);
    Cplx c = mean;
    for (int it = 0; it < 60; ++it) {
      const Cplx gv = poly_eval(g, c);
      const Cplx gd = poly_eval(gp, c);
      if (std::abs(gd) < 1e-300) break;
      const Cplx step = gv / gd;
      c -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(c))) break;
    }

    // Local degree: first nonvanishing Taylor coefficient of p at c.
    const std::vector<Cplx> tay = taylor_at(p.coefficients(), c);
    double amax = 0.0;
    for (std::size_t k = 1; k < tay.size(); ++k)
      amax = std::max(amax, std::abs(tay[k]));
    int local = 1;
    for (std::size_t k = 1; k < tay.size(); ++k)
      if (std::abs(tay[k]) > 1e-8 * amax) {
        local = static_cast<int>(k);
        break;
      }

    const Cplx value = p(c);
    if (std::abs(std::abs(value) - 1.0) > 10.0 * crit_tol) continue;  // refined away
    out.push_back({c, local, normalize_phase(std::arg(value))});
  }
  return out;
}

/// Snap fiber entries onto touch candidates at this phase: candidate j
/// absorbs its local_degree nearest solutions. Order is preserved.
void snap_fiber(std::vector<Cplx>& zs,
                const std::vector<const TouchCandidate*>& cands) {
  if (cands.empty()) return;
  struct Pair {
    double dist;
    std::size_t sol;
    std::size_t cand;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = 0; j < cands.size(); ++j)
      pairs.push_back({std::abs(zs[i] - cands[j]->point), i, j});
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

struct FiberRecorder {
  std::vector<std::vector<Cplx>> pts;
  std::vector<std::vector<double>> phases;
  explicit FiberRecorder(int d) : pts(d), phases(d) {}
  void push(const std::vector<Cplx>& zs, double t) {
    for (std::size_t k = 0; k < zs.size(); ++k) {
      pts[k].push_back(zs[k]);
      phases[k].push_back(normalize_phase(t));
    }
  }
};

/// First-order predictor / full-resolve corrector continuation of the
/// fiber of w(t) = R e^{it} from t0 to t1 (either direction). The step is
/// capped in phase and in predicted spatial motion; steps whose corrected
/// motion exceeds the cap are halved and retried. With singular_ends the
/// endpoints are branch-collision phases: steps are additionally
/// throttled multiplicatively in the distance to either endpoint (the
/// fiber behaves like (t - t_c)^{1/m} there) and the landing on t1 is an
/// unconditional final solve.
void continue_fiber(const MonicPolynomial& p, double radius, double t0,
                    double t1, std::vector<Cplx>& zs, FiberRecorder* rec,
                    double phase_cap, double spatial_cap, const char* stage,
                    bool singular_ends) {
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const int d = p.degree();
  const double end_gap = singular_ends ? 1e-9 : 1e-15;
  double t = t0;
  long guard = 0;
  while (dir * (t1 - t) > end_gap) {
    if (++guard > 2000000) {
      std::ostringstream msg;
      msg << stage << ": continuation livelock near theta=" << t;
      throw NumericalError(msg.str());
    }
    const Cplx w = std::polar(radius, t);
    std::vector<Cplx> vel(d);
    double vmax = 0.0;
    for (int k = 0; k < d; ++k) {
      const Cplx dp = p.derivative_at(zs[k]);
      const double m = std::abs(dp);
      if (m > 1e-300) {
        vel[k] = Cplx(0.0, 1.0) * w / dp;
        vmax = std::max(vmax, std::abs(vel[k]));
      } else {
        vel[k] = 0.0;
        vmax = std::max(vmax, 1e12);
      }
    }
    double dt = std::min(phase_cap, spatial_cap / vmax);
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
      const Cplx wn = std::polar(radius, tn);
      std::vector<Cplx> pred(d);
      for (int k = 0; k < d; ++k)
        // velocity extrapolation is meaningless inside a singular zone
        pred[k] = in_zone ? zs[k] : zs[k] + vel[k] * (dir * dt);
      std::vector<Cplx> zn;
      bool solved = true;
      try {
        zn = p.solve_preimages(wn, &pred);
      } catch (const NumericalError&) {
        solved = false;
      }
      if (solved) {
        bool ok = true;
        if (!in_zone) {
          double move = 0.0;
          for (int k = 0; k < d; ++k)
            move = std::max(move, std::abs(zn[k] - zs[k]));
          // Matching is trustworthy only if each prediction lands well
          // clear of the other branches; branches leaving a cluster and
          // branches collapsing into one are exempt.
          bool match_ok = true;
          for (int k = 0; k < d && match_ok; ++k) {
            double sep_now = std::numeric_limits<double>::infinity();
            for (int j = 0; j < d; ++j)
              if (j != k) sep_now = std::min(sep_now, std::abs(zs[k] - zs[j]));
            if (sep_now < 1e-6) continue;  // leaving a cluster
            double sep_new = std::numeric_limits<double>::infinity();
            for (int j = 0; j < d; ++j) {
              if (j == k) continue;
              const double dist = std::abs(zn[k] - zn[j]);
              if (dist > 1e-7) sep_new = std::min(sep_new, dist);
            }
            const double move_k = std::abs(zn[k] - zs[k]);
            if (sep_new < 0.25 * move_k) continue;
            if (std::abs(zn[k] - pred[k]) > 0.45 * sep_new) match_ok = false;
          }
          ok = match_ok && move <= 4.0 * spatial_cap;
        }
        if (ok) {
          zs = std::move(zn);
          t = tn;
          if (rec) rec->push(zs, tn);
          accepted = true;
          break;
        }
      }
      dt *= 0.5;
      final_step = false;
      if (t + dir * dt == t) break;  // no representable step left
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << stage << ": continuation stalled at theta=" << t
          << " (radius " << radius << ")";
      throw NumericalError(msg.str());
    }
  }
  if (singular_ends && dir * (t1 - t) > 0.0) {
    // land on the collision fiber; labels there are interchangeable
    std::vector<Cplx> pred = zs;
    zs = p.solve_preimages(std::polar(radius, t1), &pred);
    if (rec) rec->push(zs, t1);
  }
}

std::vector<Cplx> sorted_fiber(const MonicPolynomial& p, const Cplx& w) {
  std::vector<Cplx> zs = p.solve_preimages(w);
  std::sort(zs.begin(), zs.end(), canonical_complex_less);
  return zs;
}

std::vector<int> match_permutation(const std::vector<Cplx>& start,
                                   const std::vector<Cplx>& final,
                                   const char* stage) {
  const std::size_t d = start.size();
  std::vector<int> sigma(d, -1);
  std::vector<bool> used(d, false);
  for (std::size_t k = 0; k < d; ++k) {
    double best = std::numeric_limits<double>::infinity();
    int bj = -1;
    for (std::size_t j = 0; j < d; ++j) {
      if (used[j]) continue;
      const double dist = std::abs(final[k] - start[j]);
      if (dist < best) {
        best = dist;
        bj = static_cast<int>(j);
      }
    }
    if (bj < 0 || best > 1e-5)
      throw NumericalError(std::string(stage) +
                           ": fiber failed to close up after one loop");
    sigma[k] = bj;
    used[bj] = true;
  }
  return sigma;
}

Monodromy monodromy_impl(const MonicPolynomial& p, const TraceOptions& opts,
                         bool backward) {
  opts.validate();
  bool perturbed = false;
  for (const Cplx& a : p.critical_values())
    if (std::abs(std::abs(a) - 1.0) < opts.critical_phase_tol) {
      perturbed = true;
      break;
    }
  const double radius = perturbed ? 1.0 + 2.0 * opts.critical_phase_tol : 1.0;
  std::vector<Cplx> start = sorted_fiber(p, Cplx(radius, 0.0));
  std::vector<Cplx> zs = start;
  const double spatial = opts.resolved_spatial_step(p);
  if (backward)
    continue_fiber(p, radius, kTwoPi, 0.0, zs, nullptr, opts.phase_step_max,
                   spatial, "monodromy", false);
  else
    continue_fiber(p, radius, 0.0, kTwoPi, zs, nullptr, opts.phase_step_max,
                   spatial, "monodromy", false);
  Monodromy out;
  out.perturbed = perturbed;
  out.sigma = match_permutation(start, zs, "monodromy");
  return out;
}

}  // namespace

Monodromy monodromy(const MonicPolynomial& p, const TraceOptions& opts,
                    bool backward) {
  return monodromy_impl(p, opts, backward);
}

namespace {

struct TracedPath {
  std::vector<Cplx> pts;
  std::vector<double> phases;
  int branch;
};

LevelCurve trace_smooth(const MonicPolynomial& p, const TraceOptions& opts,
                        double spatial, bool backward) {
  const int d = p.degree();
  std::vector<Cplx> start = sorted_fiber(p, Cplx(1.0, 0.0));
  std::vector<Cplx> zs = start;
  FiberRecorder rec(d);
  rec.push(zs, backward ? kTwoPi : 0.0);
  if (backward)
    continue_fiber(p, 1.0, kTwoPi, 0.0, zs, &rec, opts.phase_step_max,
                   spatial, "trace", false);
  else
    continue_fiber(p, 1.0, 0.0, kTwoPi, zs, &rec, opts.phase_step_max,
                   spatial, "trace", false);

  LevelCurve out;
  out.monodromy.sigma = match_permutation(start, zs, "trace");
  out.monodromy.perturbed = false;

  // Components are the cycles of sigma; branch k's path ends where branch
  // sigma(k) starts, so concatenation (dropping each duplicated joint)
  // closes up.
  std::vector<bool> seen(d, false);
  for (int k0 = 0; k0 < d; ++k0) {
    if (seen[k0]) continue;
    CurveComponent comp;
    int k = k0;
    do {
      seen[k] = true;
      const std::size_t n = rec.pts[k].size();
      for (std::size_t i = 0; i + 1 < n; ++i) {
        comp.pts.push_back(rec.pts[k][i]);
        comp.phases.push_back(rec.phases[k][i]);
        comp.branches.push_back(k);
      }
      k = out.monodromy.sigma[k];
    } while (k != k0);
    out.components.push_back(std::move(comp));
  }
  return out;
}

LevelCurve trace_with_touches(const MonicPolynomial& p,
                              const TraceOptions& opts, double spatial,
                              const std::vector<TouchCandidate>& cands,
                              bool backward) {
  const int d = p.degree();
  std::vector<double> phases;
  for (const TouchCandidate& c : cands) phases.push_back(c.phase);
  std::sort(phases.begin(), phases.end());
  phases.erase(std::unique(phases.begin(), phases.end(),
                           [](double a, double b) {
                             return std::abs(a - b) < 1e-12;
                           }),
               phases.end());

  auto cands_at = [&](double t) {
    std::vector<const TouchCandidate*> at;
    const double tn = normalize_phase(t);
    for (const TouchCandidate& c : cands) {
      double gap = std::abs(tn - c.phase);
      gap = std::min(gap, kTwoPi - gap);
      if (gap < 1e-9) at.push_back(&c);
    }
    return at;
  };

  // The fiber over each critical phase is computed once and shared by the
  // two arcs meeting there, so junction endpoints coincide exactly and
  // every glue node has even degree by construction.
  const std::size_t m = phases.size();
  std::vector<std::vector<Cplx>> fibers(m);
  for (std::size_t j = 0; j < m; ++j) {
    fibers[j] = p.solve_preimages(std::polar(1.0, phases[j]));
    snap_fiber(fibers[j], cands_at(phases[j]));
    std::sort(fibers[j].begin(), fibers[j].end(), canonical_complex_less);
  }

  std::vector<TracedPath> paths;
  std::vector<detail::ArcEnds> ends;
  for (std::size_t j = 0; j < m; ++j) {
    const double t0 = phases[j];
    const double t1 = t0 + circular_gap(t0, phases[(j + 1) % m]);
    std::size_t jfrom = j, jto = (j + 1) % m;
    double a = t0, b = t1;
    if (backward) {
      std::swap(a, b);
      std::swap(jfrom, jto);
    }

    std::vector<Cplx> zs = fibers[jfrom];
    FiberRecorder rec(d);
    rec.push(zs, a);
    continue_fiber(p, 1.0, a, b, zs, &rec, opts.phase_step_max, spatial,
                   "trace", true);
    // land exactly on the shared destination fiber
    const std::vector<Cplx> landed = match_to_anchors(zs, fibers[jto]);
    for (int k = 0; k < d; ++k) {
      rec.pts[k].back() = landed[k];
      TracedPath path{std::move(rec.pts[k]), std::move(rec.phases[k]), k};
      ends.push_back({{path.pts.front().real(), path.pts.front().imag(), 0.0},
                      {path.pts.back().real(), path.pts.back().imag(), 0.0}});
      paths.push_back(std::move(path));
    }
  }

  std::vector<detail::Vec3> junctions;
  for (const TouchCandidate& c : cands)
    junctions.push_back({c.point.real(), c.point.imag(), 0.0});

  detail::GluedComponents glued =
      detail::glue_arcs(ends, junctions, opts.touch_merge_tol);

  LevelCurve out;
  out.critical_phases = phases;
  out.monodromy = monodromy(p, opts);

  // Touch points: junction nodes where more than two path ends meet.
  std::vector<int> degree(glued.node_pos.size(), 0);
  for (const auto& [ns, ne] : glued.arc_nodes) {
    ++degree[ns];
    ++degree[ne];
  }
  for (std::size_t n = 0; n < glued.node_pos.size(); ++n)
    if (glued.node_junction[n] >= 0 && degree[n] >= 4)
      out.touch_points.push_back(
          Cplx(glued.node_pos[n].x, glued.node_pos[n].y));

  for (const auto& walk : glued.walks) {
    CurveComponent comp;
    for (const detail::WalkStep& step : walk) {
      const TracedPath& path = paths[step.arc];
      const detail::Vec3& rep = glued.node_pos[step.entry_node];
      const std::size_t n = path.pts.size();
      // node representative, then the path interior in traversal order
      comp.pts.push_back(Cplx(rep.x, rep.y));
      comp.phases.push_back(step.reversed ? path.phases.back()
                                          : path.phases.front());
      comp.branches.push_back(path.branch);
      if (step.reversed) {
        for (std::size_t i = n - 2; i >= 1; --i) {
          comp.pts.push_back(path.pts[i]);
          comp.phases.push_back(path.phases[i]);
          comp.branches.push_back(path.branch);
        }
      } else {
        for (std::size_t i = 1; i + 1 < n; ++i) {
          comp.pts.push_back(path.pts[i]);
          comp.phases.push_back(path.phases[i]);
          comp.branches.push_back(path.branch);
        }
      }
    }
    out.components.push_back(std::move(comp));
  }
  return out;
}

}  // namespace

LevelCurve trace(const MonicPolynomial& p, const TraceOptions& opts,
                 bool backward) {
  opts.validate();
  const double spatial = opts.resolved_spatial_step(p);
  const std::vector<TouchCandidate> cands =
      find_touch_candidates(p, opts.critical_phase_tol);
  if (cands.empty()) return trace_smooth(p, opts, spatial, backward);
  return trace_with_touches(p, opts, spatial, cands, backward);
}

int component_count(const MonicPolynomial& p, const TraceOptions& opts) {
  return static_cast<int>(trace(p, opts).components.size());
}

bool is_connected(const MonicPolynomial& p, const TraceOptions& opts) {
  return component_count(p, opts) == 1;
}

}  // namespace lemni
