#pragma once
// Dense univariate polynomial helpers over std::complex<double>.
// Coefficients ascending: p[k] is the coefficient of x^k.

#include <vector>
#include <cmath>
#include <algorithm>

#include "kdvtau/common.hpp"
#include "kdvtau/errors.hpp"

namespace kdvtau::poly {

using Poly = std::vector<cplx>;

inline cplx eval(const Poly& p, cplx x) {
  cplx v = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
  return v;
}

inline cplx eval_deriv(const Poly& p, cplx x) {
  cplx v = 0.0;
  for (std::size_t k = p.size(); k-- > 1;) v = v * x + double(k) * p[k];
  return v;
}

inline Poly mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

inline Poly add(Poly a, const Poly& b, cplx scale = 1.0) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += scale * b[i];
  return a;
}

inline void trim(Poly& p, double tol = 0.0) {
  while (p.size() > 1 && std::abs(p.back()) <= tol) p.pop_back();
}

// Synthetic division by (x - root): p = (x - root) * q + rem.
inline Poly deflate(const Poly& p, cplx root, cplx* rem = nullptr) {
  if (p.size() <= 1) {
    if (rem) *rem = p.empty() ? cplx(0.0) : p[0];
    return {cplx(0.0)};
  }
  Poly q(p.size() - 1);
  cplx carry = p.back();
  for (std::size_t k = p.size() - 1; k-- > 0;) {
    q[k] = carry;
    carry = p[k] + root * carry;
  }
  if (rem) *rem = carry;
  return q;
}

// Simultaneous root refinement (Aberth-Ehrlich) with a deterministic start:
// points on the circle of radius max(1, 1 + max|a_k/a_n|), angles offset to
// avoid the real axis. Returns all roots of p (degree = size-1 after trim).
inline std::vector<cplx> roots(Poly p, int max_iter = 300, double tol = 1e-13) {
  trim(p, 0.0);
  const std::size_t n = p.size() - 1;
  if (n == 0) return {};
  const cplx lead = p.back();
  double cb = 0.0;
  for (std::size_t k = 0; k < n; ++k) cb = std::max(cb, std::abs(p[k] / lead));
  const double radius = std::max(1.0, 1.0 + cb);
  std::vector<cplx> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    double th = 2.0 * pi * (double(k) + 0.36) / double(n) + 0.5;
    z[k] = radius * cplx(std::cos(th), std::sin(th));
  }
  for (int it = 0; it < max_iter; ++it) {
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      cplx pk = eval(p, z[k]), dk = eval_deriv(p, z[k]);
      if (std::abs(pk) == 0.0) continue;
      cplx newton = (std::abs(dk) > 0.0) ? pk / dk : cplx(1e-3, 1e-3);
      cplx s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != k) {
          cplx d = z[k] - z[j];
          if (std::abs(d) < 1e-300) d = cplx(1e-300, 0.0);
          s += 1.0 / d;
        }
      cplx denom = 1.0 - newton * s;
      cplx step = (std::abs(denom) > 1e-300) ? newton / denom : newton;
      z[k] -= step;
      worst = std::max(worst, std::abs(step));
    }
    if (worst < tol * radius) {
      // Pair-separation guard: clustered roots would poison downstream
      // deflation-based consumers that assume simple roots.
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
          if (std::abs(z[a] - z[b]) < 1e-8 * radius)
            throw RootsTooClose("root pair separated by " +
                                fmt17(std::abs(z[a] - z[b])));
      std::sort(z.begin(), z.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
      });
      return z;
    }
  }
  throw NoConvergence("root iteration did not reach tolerance");
}

}  // namespace kdvtau::poly
