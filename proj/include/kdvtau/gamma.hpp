#pragma once
// Group elements g: products of the rational atoms
//   q_zeta(z) = (1 - z/zeta)^{-1},  p_zeta(z) = 1 + z/zeta,
//   r_zeta(z) = (1 - z^2/zeta^2)^{-1} = q_zeta q_{-zeta},
// times an entire exponential exp(h(z)) with polynomial h, h(0) = 0.

#include <string>
#include <vector>

#include "kdvtau/common.hpp"
#include "kdvtau/errors.hpp"
#include "kdvtau/poly.hpp"

namespace kdvtau {

enum class AtomKind { QPole, PZero, REven };

struct Atom {
  AtomKind kind;
  cplx zeta;
  int mult = 1;
};

struct GammaElement {
  std::vector<Atom> atoms;
  std::vector<double> exp_part;  // exp_part[k] is h_{k+1}: h(z) = sum h_k z^k
  bool realness_flag = true;

  bool has_atoms() const { return !atoms.empty(); }
  bool has_exp() const {
    for (double c : exp_part)
      if (c != 0.0) return true;
    return false;
  }
};

namespace detail {

inline bool atom_multiset_conj_closed(const std::vector<Atom>& atoms) {
  // Each atom with Im zeta != 0 must be matched by its conjugate with the
  // same kind and multiplicity (greedy pairing on a copy).
  std::vector<Atom> rest = atoms;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (rest[i].mult == 0 || std::abs(rest[i].zeta.imag()) == 0.0) continue;
    bool found = false;
    for (std::size_t j = 0; j < rest.size(); ++j) {
      if (j == i || rest[j].mult != rest[i].mult) continue;
      if (rest[j].kind == rest[i].kind &&
          std::abs(rest[j].zeta - std::conj(rest[i].zeta)) <=
              1e-14 * (1.0 + std::abs(rest[i].zeta))) {
        rest[j].mult = 0;
        rest[i].mult = 0;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace detail

inline void refresh_realness(GammaElement& g) {
  g.realness_flag = detail::atom_multiset_conj_closed(g.atoms);
}

inline GammaElement gamma_identity() { return GammaElement{}; }

inline GammaElement q_atom(cplx zeta, int mult = 1) {
  GammaElement g;
  g.atoms.push_back({AtomKind::QPole, zeta, mult});
  refresh_realness(g);
  return g;
}

inline GammaElement p_atom(cplx zeta, int mult = 1) {
  GammaElement g;
  g.atoms.push_back({AtomKind::PZero, zeta, mult});
  refresh_realness(g);
  return g;
}

inline GammaElement r_atom(cplx zeta, int mult = 1) {
  GammaElement g;
  g.atoms.push_back({AtomKind::REven, zeta, mult});
  refresh_realness(g);
  return g;
}

inline GammaElement exp_line(double x) {
  GammaElement g;
  g.exp_part = {x};
  return g;
}

// e^{xz - 4 t z^3}, the time direction of the KdV hierarchy.
inline GammaElement exp_kdv(double x, double t) {
  GammaElement g;
  g.exp_part = {x, 0.0, -4.0 * t};
  return g;
}

inline GammaElement operator*(const GammaElement& a, const GammaElement& b) {
  GammaElement g;
  g.atoms = a.atoms;
  g.atoms.insert(g.atoms.end(), b.atoms.begin(), b.atoms.end());
  g.exp_part = a.exp_part;
  if (g.exp_part.size() < b.exp_part.size()) g.exp_part.resize(b.exp_part.size(), 0.0);
  for (std::size_t k = 0; k < b.exp_part.size(); ++k) g.exp_part[k] += b.exp_part[k];
  refresh_realness(g);
  return g;
}

inline cplx eval_exp_poly(const GammaElement& g, cplx z) {
  cplx h = 0.0;
  for (std::size_t k = g.exp_part.size(); k-- > 0;)
    h = (h + g.exp_part[k]) * z;
  return h;
}

inline cplx eval(const GammaElement& g, cplx z) {
  cplx v = 1.0;
  for (const Atom& a : g.atoms) {
    cplx base;
    switch (a.kind) {
      case AtomKind::QPole: {
        const cplx d = 1.0 - z / a.zeta;
        if (std::abs(d) <= 1e-12 * (1.0 + std::abs(z / a.zeta)))
          throw PoleHit("q pole at zeta = " + fmt17(a.zeta));
        base = 1.0 / d;
        break;
      }
      case AtomKind::PZero:
        base = 1.0 + z / a.zeta;
        break;
      case AtomKind::REven: {
        const cplx d = 1.0 - (z * z) / (a.zeta * a.zeta);
        if (std::abs(d) <= 1e-12 * (1.0 + std::abs((z * z) / (a.zeta * a.zeta))))
          throw PoleHit("r pole at zeta = " + fmt17(a.zeta));
        base = 1.0 / d;
        break;
      }
    }
    v *= (a.mult == 1) ? base : std::pow(base, a.mult);
  }
  const cplx h = eval_exp_poly(g, z);
  if (std::abs(h.real()) > 700.0)
    throw OverflowGuard("Re h(z) = " + fmt17(h.real()));
  return v * std::exp(h);
}

inline cplx eval_inv(const GammaElement& g, cplx z) {
  const cplx v = eval(g, z);
  if (std::abs(v) <= 1e-300) throw PoleHit("g vanishes at z = " + fmt17(z));
  return 1.0 / v;
}

struct ParityParts {
  cplx g_e, g_o, ghat_e, ghat_o;
};

// Even/odd parts of g and ghat = 1/g at lambda: f(z) = f_e(z^2) + z f_o(z^2).
inline ParityParts parity_parts(const GammaElement& g, cplx lambda) {
  const cplx s = std::sqrt(lambda);
  if (std::abs(s) == 0.0) {
    // g(0) = 1 and ghat(0) = 1; odd parts reduce to g'(0), not needed at 0.
    throw Error("parity_parts: lambda = 0 is a parity branch point");
  }
  const cplx a = eval(g, s), b = eval(g, -s);
  if (std::abs(a) <= 1e-300 || std::abs(b) <= 1e-300)
    throw PoleHit("g vanishes at a parity point");
  return {0.5 * (a + b), (a - b) / (2.0 * s), 0.5 * (1.0 / a + 1.0 / b),
          (1.0 / a - 1.0 / b) / (2.0 * s)};
}

// g = g1 g2 with g1 even, g2 odd: h = h_e(z^2) + z h_o(z^2).
inline std::pair<GammaElement, GammaElement> split_parity(const GammaElement& g) {
  if (g.has_atoms()) throw AtomsPresent("split_parity needs a pure exponential");
  GammaElement g1, g2;
  g1.exp_part.assign(g.exp_part.size(), 0.0);
  g2.exp_part.assign(g.exp_part.size(), 0.0);
  for (std::size_t k = 0; k < g.exp_part.size(); ++k) {
    // index k holds the coefficient of z^{k+1}
    if ((k + 1) % 2 == 0)
      g1.exp_part[k] = g.exp_part[k];
    else
      g2.exp_part[k] = g.exp_part[k];
  }
  return {g1, g2};
}

// Rational approximation of a pure exponential: the product over all roots
// zeta_k of 1 - h(z)/n of q_{zeta_k}^n converges to e^{h} on compacts.
inline GammaElement factorize(const GammaElement& g, int n, double s,
                              double* sup_err = nullptr) {
  if (g.has_atoms()) throw AtomsPresent("factorize needs a pure exponential");
  if (g.exp_part.empty()) throw Error("factorize: degree of h must be >= 1");
  poly::Poly p{cplx(1.0)};
  p.resize(g.exp_part.size() + 1, 0.0);
  for (std::size_t k = 0; k < g.exp_part.size(); ++k)
    p[k + 1] = -g.exp_part[k] / double(n);
  poly::trim(p, 0.0);
  if (p.size() <= 1) throw Error("factorize: h is identically zero");
  const auto zs = poly::roots(p);
  GammaElement out;
  for (cplx zeta : zs) {
    if (!(std::abs(zeta) > s))
      throw RootsTooClose("root modulus " + fmt17(std::abs(zeta)) +
                          " <= s = " + fmt17(s) + "; increase n");
    out.atoms.push_back({AtomKind::QPole, zeta, n});
  }
  refresh_realness(out);
  if (sup_err) {
    double worst = 0.0;
    const int grid = 256;
    for (int k = 0; k < grid; ++k) {
      const cplx z = s * std::polar(1.0, 2.0 * pi * k / grid);
      worst = std::max(worst, std::abs(eval(out, z) - eval(g, z)));
    }
    *sup_err = worst;
  }
  return out;
}

inline std::string describe(const GammaElement& g) {
  std::string s = "g{atoms=[";
  for (auto& a : g.atoms) {
    const char* k = a.kind == AtomKind::QPole ? "q" : a.kind == AtomKind::PZero ? "p" : "r";
    s += std::string(k) + "(" + fmt17(a.zeta) + ")^" + std::to_string(a.mult) + ",";
  }
  s += "];h=[";
  for (double c : g.exp_part) s += fmt17(c) + ",";
  return s + "]}";
}

}  // namespace kdvtau
