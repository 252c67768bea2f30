#include "lemni/poly.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "lemni/error.hpp"

namespace lemni {

bool canonical_complex_less(const Cplx& a, const Cplx& b) {
  double pa = std::arg(a), pb = std::arg(b);
  if (pa < 0) pa += 2.0 * M_PI;
  if (pb < 0) pb += 2.0 * M_PI;
  if (std::abs(pa - pb) > 1e-12) return pa < pb;
  const double ma = std::abs(a), mb = std::abs(b);
  if (std::abs(ma - mb) > 1e-12) return ma < mb;
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

MonicPolynomial MonicPolynomial::from_roots(std::vector<Cplx> roots) {
  if (roots.empty())
    throw std::invalid_argument("MonicPolynomial: degree zero (empty root list)");
  if (static_cast<int>(roots.size()) > kMaxDegree) {
    std::ostringstream msg;
    msg << "MonicPolynomial: degree " << roots.size() << " exceeds cap "
        << kMaxDegree;
    throw std::invalid_argument(msg.str());
  }
  if (!all_finite(roots))
    throw std::invalid_argument("MonicPolynomial: non-finite root");

  MonicPolynomial p;
  p.coeffs_.assign(1, Cplx(1.0));
  for (const Cplx& r : roots) {
    p.coeffs_.insert(p.coeffs_.begin(), Cplx(0.0));
    const std::size_t n = p.coeffs_.size();
    for (std::size_t k = 0; k + 1 < n; ++k) p.coeffs_[k] -= r * p.coeffs_[k + 1];
  }
  p.roots_ = std::move(roots);
  return p;
}

MonicPolynomial MonicPolynomial::from_coefficients(std::vector<Cplx> coeffs) {
  if (coeffs.size() < 2)
    throw std::invalid_argument("MonicPolynomial: need degree >= 1");
  if (static_cast<int>(coeffs.size()) - 1 > kMaxDegree)
    throw std::invalid_argument("MonicPolynomial: degree exceeds cap");
  if (std::abs(coeffs.back() - Cplx(1.0)) > 1e-12)
    throw std::invalid_argument("MonicPolynomial: leading coefficient must be 1");
  if (!all_finite(coeffs))
    throw std::invalid_argument("MonicPolynomial: non-finite coefficient");

  coeffs.back() = Cplx(1.0);
  std::vector<Cplx> roots = solve_polynomial(coeffs);
  std::sort(roots.begin(), roots.end(), canonical_complex_less);

  MonicPolynomial p;
  p.roots_ = std::move(roots);
  p.coeffs_ = std::move(coeffs);
  return p;
}

Cplx MonicPolynomial::evaluate(const Cplx& z) const {
  Cplx v = coeffs_.back();
  for (int k = static_cast<int>(coeffs_.size()) - 2; k >= 0; --k)
    v = v * z + coeffs_[k];
  return v;
}

Cplx MonicPolynomial::evaluate_from_roots(const Cplx& z) const {
  Cplx v = 1.0;
  for (const Cplx& r : roots_) v *= z - r;
  return v;
}

Cplx MonicPolynomial::derivative_at(const Cplx& z) const {
  const int n = degree();
  Cplx v = coeffs_[n];
  Cplx dv = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    dv = dv * z + v;
    v = v * z + coeffs_[k];
  }
  return dv;
}

std::vector<Cplx> MonicPolynomial::derivative_coefficients() const {
  const int n = degree();
  std::vector<Cplx> dc(n);
  for (int k = 0; k < n; ++k) dc[k] = static_cast<double>(k + 1) * coeffs_[k + 1];
  return dc;
}

std::vector<Cplx> MonicPolynomial::critical_points() const {
  if (degree() < 2) return {};
  std::vector<Cplx> cps = solve_polynomial(derivative_coefficients());
  std::sort(cps.begin(), cps.end(), canonical_complex_less);
  return cps;
}

std::vector<Cplx> MonicPolynomial::critical_values() const {
  std::vector<Cplx> cvs;
  for (const Cplx& c : critical_points()) cvs.push_back(evaluate(c));
  return cvs;
}

std::vector<Cplx> MonicPolynomial::solve_preimages(
    const Cplx& w, const std::vector<Cplx>* hints) const {
  std::vector<Cplx> shifted = coeffs_;
  shifted[0] -= w;
  try {
    return solve_polynomial(shifted, SolveOptions{}, hints);
  } catch (const NumericalError& e) {
    std::ostringstream msg;
    msg << e.what() << " for p(z) = w at w = (" << w.real() << ", "
        << w.imag() << ")";
    throw NumericalError(msg.str());
  }
}

}  // namespace lemni
