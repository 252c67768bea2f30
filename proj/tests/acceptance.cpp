// Acceptance suite: every quantitative contract the library ships with,
// one pass/fail line each. Exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lemni/extremal.hpp"
#include "lemni/geometry.hpp"
#include "lemni/levelset.hpp"
#include "lemni/measure.hpp"
#include "lemni/poly.hpp"
#include "lemni/spherical.hpp"
#include "oracles.hpp"

using namespace lemni;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int n, const std::string& what, bool ok,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s  (%s)\n", ok ? "PASS" : "FAIL", n,
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename F>
void criterion(int n, const std::string& what, F&& body) {
  try {
    std::string detail;
    const bool ok = body(detail);
    report(n, what, ok, detail);
  } catch (const std::exception& e) {
    report(n, what, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

MonicPolynomial zd(int d) {
  return MonicPolynomial::from_roots(std::vector<Cplx>(d, Cplx(0)));
}

MonicPolynomial zd_plus_one(int d) {
  return MonicPolynomial::from_roots(power_candidate_roots(d));
}

double min_crit_distance(const MonicPolynomial& p) {
  double dmin = 1e300;
  for (const Cplx& a : p.critical_values())
    dmin = std::min(dmin, std::abs(std::abs(a) - 1.0));
  return dmin;
}

std::vector<Cplx> random_roots(int d, std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Cplx> roots(d);
  for (auto& r : roots) {
    do {
      r = {u(rng), u(rng)};
    } while (std::abs(r) >= radius);
  }
  return roots;
}

// Random polynomials with all critical values at least 1e-3 from the unit
// circle (the concordance-suite condition).
std::vector<MonicPolynomial> random_smooth_polys(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<MonicPolynomial> out;
  while (static_cast<int>(out.size()) < count) {
    const int d = 2 + static_cast<int>(rng() % 4);  // 2..5
    MonicPolynomial p = MonicPolynomial::from_roots(random_roots(d, rng, 2.0));
    if (min_crit_distance(p) < 1e-3) continue;
    out.push_back(std::move(p));
  }
  return out;
}

struct TracedPoly {
  MonicPolynomial p;
  LevelCurve curve;
};

std::vector<TracedPoly>* g_suite34 = nullptr;  // shared by criteria 4, 6, 8

bool run_cli_twice_identical(const std::string& args, std::string* why) {
#ifdef LEMNI_CLI_PATH
  const std::string cli = LEMNI_CLI_PATH;
#else
  *why = "CLI path not configured";
  return false;
#endif
  const std::string f1 = "/tmp/lemni_acc_a.out", f2 = "/tmp/lemni_acc_b.out";
  for (const std::string& f : {f1, f2}) {
    const std::string cmd = cli + " " + args + " --output " + f;
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      *why = "exit code " + std::to_string(rc) + " for: " + cmd;
      return false;
    }
  }
  std::ifstream a(f1, std::ios::binary), b(f2, std::ios::binary);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  if (sa.str().empty() || sa.str() != sb.str()) {
    *why = "outputs differ or empty for: " + args;
    return false;
  }
  return true;
}

}  // namespace

int main() {
  criterion(1, "figure-eight length 7.416 (integral, polyline, 1-D oracle)",
            [](std::string& detail) {
              const auto t0 = Clock::now();
              const MonicPolynomial p = zd_plus_one(2);
              const double exact = length_integral(p, 1e-9);
              const double poly = length_polyline(trace(p));
              const double oracle = oracle::bernoulli_length_oracle();
              const double secs = seconds_since(t0);
              std::ostringstream os;
              os << "integral=" << exact << " polyline=" << poly
                 << " oracle=" << oracle << " in " << secs << "s";
              detail = os.str();
              return std::abs(exact - 7.416) <= 5e-3 &&
                     std::abs(poly - exact) <= 2e-2 &&
                     std::abs(exact - oracle) <= 1e-6 && secs < 10.0;
            });

  criterion(2, "circle baseline: |E(z^d)| = 2 pi to 1e-6 for d = 1..6",
            [](std::string& detail) {
              double worst = 0.0;
              for (int d = 1; d <= 6; ++d)
                worst = std::max(
                    worst, std::abs(length_integral(zd(d), 1e-9) - 2.0 * M_PI));
              detail = "worst deviation " + std::to_string(worst);
              return worst <= 1e-6;
            });

  criterion(3, "length bound sweep over z^d+1, d = 1..6",
            [](std::string& detail) {
              if (!(kLengthBoundAlpha0 < 9.173)) {
                detail = "bound constant out of range";
                return false;
              }
              std::ostringstream os;
              bool ok = true;
              for (int d = 1; d <= 6; ++d) {
                const double len = length_integral(zd_plus_one(d), 1e-9);
                const double ratio = len / d;
                os << "d=" << d << ":" << ratio << " ";
                ok = ok && len <= 9.1723 * d && ratio > 2.0 && ratio < 9.173;
              }
              detail = os.str() + "alpha0=" +
                       std::to_string(kLengthBoundAlpha0);
              return ok;
            });

  // Criteria 4, 6 and 8 share the same traced random sample.
  std::vector<TracedPoly> suite34;
  g_suite34 = &suite34;
  for (int d = 1; d <= 6; ++d) {
    MonicPolynomial p = zd_plus_one(d);
    LevelCurve curve = trace(p);
    suite34.push_back({std::move(p), std::move(curve)});
  }

  criterion(
      4, "estimator concordance on 25 random polynomials (2%)",
      [&suite34](std::string& detail) {
        const auto t0 = Clock::now();
        double worst_rel = 0.0;
        for (MonicPolynomial& p : random_smooth_polys(25, 20260809)) {
          const double exact = length_integral(p, 1e-9);
          LevelCurve curve = trace(p);
          const double poly = length_polyline(curve);
          const double crofton = crofton_length(curve, 256, 256).length;
          const double scale = std::max({exact, poly, crofton});
          worst_rel = std::max(worst_rel, std::abs(exact - poly) / scale);
          worst_rel = std::max(worst_rel, std::abs(exact - crofton) / scale);
          worst_rel = std::max(worst_rel, std::abs(poly - crofton) / scale);
          suite34.push_back({std::move(p), std::move(curve)});
        }
        const double secs = seconds_since(t0);
        std::ostringstream os;
        os << "worst pairwise " << worst_rel * 100 << "% in " << secs << "s";
        detail = os.str();
        return worst_rel <= 0.02 && secs < 120.0;
      });

  criterion(
      5, "crossing counts: 1000 lines x 10 polynomials stay within 2d",
      [](std::string& detail) {
        std::mt19937_64 rng(555);
        std::uniform_real_distribution<double> utheta(0.0, M_PI);
        bool ok = true;
        int worst = 0;
        for (const MonicPolynomial& p : random_smooth_polys(10, 77)) {
          const LevelCurve curve = trace(p);
          double R = 0.0;
          for (const auto& comp : curve.components)
            for (const Cplx& z : comp.pts) R = std::max(R, std::abs(z));
          std::uniform_real_distribution<double> ux(-R - 1.0, R + 1.0);
          for (int k = 0; k < 1000; ++k) {
            const int n = line_intersection_count(
                p, Line{utheta(rng), ux(rng)}, curve);
            worst = std::max(worst, n - 2 * p.degree());
            ok = ok && n <= 2 * p.degree();
          }
        }
        // the pinned example: imaginary axis meets |z^2+1|=1 in 3 points
        const MonicPolynomial p8 = zd_plus_one(2);
        auto g = [&p8](double y) {
          return std::norm(p8.evaluate(Cplx(0.0, y))) - 1.0;
        };
        const int oracle_points =
            static_cast<int>(oracle::scan_roots(g, -3.0, 3.0).size());
        const int traced_points =
            line_intersection_count(p8, Line{0.0, 0.0}, trace(p8));
        std::ostringstream os;
        os << "worst excess " << worst << "; figure-eight axis points: oracle "
           << oracle_points << ", traced " << traced_points;
        detail = os.str();
        return ok && oracle_points == 3 && traced_points == 3;
      });

  criterion(6, "projection bound on every traced component of suites 3-4",
            [&suite34](std::string& detail) {
              bool ok = true;
              for (const TracedPoly& tp : suite34)
                ok = ok && verify_projection_bound(tp.curve, tp.p.degree());
              detail = std::to_string(suite34.size()) + " curves";
              return ok;
            });

  criterion(
      7, "connectivity: components match the 1500^2 grid; z^d monodromy",
      [](std::string& detail) {
        std::ostringstream os;
        bool ok = true;
        const MonicPolynomial two = MonicPolynomial::from_roots({2.0, -2.0});
        const int c2 = component_count(two);
        const int g2 = oracle::grid_component_count(two.roots(), 1500);
        os << "z^2-4: traced " << c2 << " grid " << g2 << "; ";
        ok = ok && c2 == 2 && g2 == 2;
        for (int d = 2; d <= 5; ++d) {
          const MonicPolynomial p = zd_plus_one(d);
          const int c = component_count(p);
          const int g = oracle::grid_component_count(p.roots(), 1500);
          os << "z^" << d << "+1: " << c << "/" << g << " ";
          ok = ok && c == 1 && g == 1;
        }
        for (int d = 2; d <= 6; ++d) {
          const Monodromy m = monodromy(zd(d));
          for (int k = 0; k < d; ++k)
            ok = ok && m.sigma[static_cast<std::size_t>(k)] == (k + 1) % d;
        }
        detail = os.str() + "monodromy cycles checked d=2..6";
        return ok;
      });

  criterion(8, "hull perimeter of every connected curve within the bound",
            [&suite34](std::string& detail) {
              bool ok = true;
              double worst = 0.0;
              int connected = 0;
              for (const TracedPoly& tp : suite34) {
                const HullBoundCheck check =
                    verify_hull_perimeter_bound(tp.curve);
                if (!check.applicable) continue;
                ++connected;
                worst = std::max(worst, check.perimeter);
                ok = ok && check.perimeter <= 9.1723 + 1e-3;
              }
              std::ostringstream os;
              os << connected << " connected curves, max perimeter " << worst;
              detail = os.str();
              return ok && connected > 0;
            });

  criterion(
      9, "disc covers: radius certificate and 10^4-sample coverage",
      [](std::string& detail) {
        std::mt19937_64 rng(42424242);
        bool ok = true;
        int checked = 0;
        for (const MonicPolynomial& p : random_smooth_polys(10, 99991)) {
          const int d = p.degree();
          for (double level : {0.25, 1.0, 4.0}) {
            const DiscCover cover = disc_cover(p, level);
            ok = ok && cover.total_radius <=
                           2.0 * std::exp(1.0) * std::pow(level, 1.0 / d) +
                               1e-9;
            const double pad = std::pow(level, 1.0 / d) + 0.1;
            double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
            for (const Cplx& r : p.roots()) {
              x0 = std::min(x0, r.real() - pad);
              x1 = std::max(x1, r.real() + pad);
              y0 = std::min(y0, r.imag() - pad);
              y1 = std::max(y1, r.imag() + pad);
            }
            std::uniform_real_distribution<double> sx(x0, x1), sy(y0, y1);
            int accepted = 0;
            while (accepted < 10000) {
              const Cplx z{sx(rng), sy(rng)};
              if (std::abs(p.evaluate(z)) >= level) continue;
              ++accepted;
              if (!cover.covers(z)) {
                ok = false;
                break;
              }
            }
            ++checked;
          }
        }
        detail = std::to_string(checked) + " (polynomial, level) pairs";
        return ok;
      });

  criterion(
      10, "extremal search at d=2 recovers the figure-eight",
      [](std::string& detail) {
        const auto t0 = Clock::now();
        int in_window = 0;
        bool structure_ok = true;
        std::ostringstream os;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
          const SearchResult r = search(2, 2000, seed);
          os << r.best_length << " ";
          if (r.best_length >= 7.40 && r.best_length <= 7.42) {
            ++in_window;
            structure_ok = structure_ok &&
                           !r.critical_value_distances.empty() &&
                           r.critical_value_distances.front() <= 1e-2 &&
                           r.connected;
          }
        }
        const double secs = seconds_since(t0);
        os << "in " << secs << "s";
        detail = os.str();
        return in_window >= 3 && structure_ok && secs < 300.0;
      });

  criterion(
      11, "spherical bound: z^d equality cases and random rational maps",
      [](std::string& detail) {
        std::ostringstream os;
        bool ok = true;
        const CircleOnSphere real_line = CircleOnSphere::line(M_PI / 2.0, 0.0);
        std::vector<SphericalCurve> curves;
        for (int d = 1; d <= 4; ++d) {
          std::vector<Cplx> num(d + 1, Cplx(0.0));
          num[d] = 1.0;
          const RationalFunction f =
              RationalFunction::from_coefficients(num, {Cplx(1.0)});
          SphericalCurve curve = preimage_trace(f, real_line);
          const double err =
              std::abs(curve.spherical_length - 2.0 * M_PI * d);
          os << "z^" << d << " err=" << err << " ";
          ok = ok && err <= 1e-3;
          curves.push_back(std::move(curve));
        }
        std::mt19937_64 rng(1212);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        int tested = 0;
        while (tested < 10) {
          const int D = 1 + static_cast<int>(rng() % 4);
          std::vector<Cplx> num(D + 1), den(D + 1);
          for (auto& c : num) c = {u(rng), u(rng)};
          for (auto& c : den) c = {u(rng), u(rng)};
          den[D] = 1.0;
          num[D] += Cplx(0.4, 0.0);
          RationalFunction f = [&]() {
            try {
              return RationalFunction::from_coefficients(num, den);
            } catch (const std::invalid_argument&) {
              return RationalFunction::from_coefficients({Cplx(0), Cplx(1)},
                                                         {Cplx(1)});
            }
          }();
          if (f.degree() != D) continue;
          const CircleOnSphere C = CircleOnSphere::circle(
              Cplx(u(rng), u(rng)), 0.4 + std::abs(u(rng)));
          SphericalCurve curve = preimage_trace(f, C);
          ok = ok &&
               curve.spherical_length <= 2.0 * M_PI * f.degree() + 1e-3;
          curves.push_back(std::move(curve));
          ++tested;
        }
        double worst_poincare = 0.0;
        for (const SphericalCurve& curve : curves) {
          const PoincareEstimate est = poincare_length(curve, 10000, 7);
          const double tol = std::max(0.02 * curve.spherical_length,
                                      3.0 * est.stderr_);
          const double gap = std::abs(est.length - curve.spherical_length);
          worst_poincare = std::max(worst_poincare, gap / tol);
          ok = ok && gap <= tol;
        }
        os << "| 10 random maps; worst poincare gap " << worst_poincare
           << "x tolerance";
        detail = os.str();
        return ok;
      });

  criterion(12, "seeded CLI runs are byte-identical",
            [](std::string& detail) {
              std::string why;
              const bool a = run_cli_twice_identical(
                  "length --roots i,-i --seed 11", &why);
              if (!a) {
                detail = why;
                return false;
              }
              const bool b = run_cli_twice_identical(
                  "search --degree 2 --budget 600 --seed 3", &why);
              if (!b) {
                detail = why;
                return false;
              }
              const bool c = run_cli_twice_identical(
                  "sphere --num 0,0,1 --den 1 --line 1.5707963,0 "
                  "--samples 2000 --seed 4",
                  &why);
              if (!c) {
                detail = why;
                return false;
              }
              const bool d = run_cli_twice_identical(
                  "bounds --roots 2,-2 --lines 200 --samples 1000 --seed 9",
                  &why);
              if (!d) {
                detail = why;
                return false;
              }
              detail = "length, search, sphere, bounds";
              return true;
            });

  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", failures);
  return 1;
}
