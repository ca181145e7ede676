#pragma once
// m-functions of class M_r and Herglotz samplers, with the d and D
// transforms.
//
// An M_r function is represented as a rational function of the uniformizer
// w(z) = z sqrt(1 + r^2/z^2) (odd branch, cut on i[-r,r]); w maps the
// exterior of the cross [-r,r] u i[-r,r] onto the exterior of the segment
// [-sqrt2 r, sqrt2 r].  A discrete measure sigma = sum w_j delta_{xi_j} gives
//     m(z) = w + sum_j w_j / (xi_j - w),   w = w(z),
// stored as a pair of polynomials P/Q in w.  Applied d_zeta transforms are
// kept as a lazy chain and evaluated by the memoized pointwise recursion
//     (d_zeta m)(z) = (z^2 - zeta^2)/(m(z) - m(zeta)) - m(zeta);
// an exact rational closure of the same transform serves as a cross-check.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <utility>
#include <vector>

#include "kdvtau/common.hpp"
#include "kdvtau/errors.hpp"
#include "kdvtau/poly.hpp"

namespace kdvtau {

struct MFunction {
  double branch_radius = 0.0;
  poly::Poly P{cplx(0.0), cplx(1.0)};  // m = P(w)/Q(w), deg P = deg Q + 1
  poly::Poly Q{cplx(1.0)};             // leading ratio 1
  std::vector<cplx> transform_chain;   // d_zeta points, applied in order

  struct Memo {
    std::mutex mu;
    std::map<std::pair<std::size_t, std::pair<double, double>>, cplx> vals;
  };
  // Shared across copies: a chain extension reuses all prefix values.
  std::shared_ptr<Memo> memo = std::make_shared<Memo>();
};

struct ClauseResult {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // signed distance from failure; > 0 means pass
  std::string note;
};

struct ValidationReport {
  bool pass = true;
  std::vector<ClauseResult> clauses;
  void add(const std::string& name, bool ok, double margin,
           const std::string& note = "") {
    clauses.push_back({name, ok, margin, note});
    pass = pass && ok;
  }
};

// ---------------------------------------------------------------------------
// constructors

inline MFunction mfun_free() { return MFunction{}; }

// m(z) = w + sum_j w_j/(xi_j - w) over branch radius r > 0.  `validate=false`
// skips the class checks (used to build deliberate counterexamples).
inline MFunction mfun_from_sigma(double r,
                                 const std::vector<std::pair<double, double>>& masses,
                                 bool validate = true) {
  if (!(r > 0.0)) throw Error("mfun_from_sigma: branch radius must be positive");
  const double band = std::sqrt(2.0) * r;
  if (validate) {
    double normality = 0.0;
    for (std::size_t j = 0; j < masses.size(); ++j) {
      auto [xi, wj] = masses[j];
      if (!(std::abs(xi) < band))
        throw MassOutOfBand("xi = " + fmt17(xi) + " not inside (-sqrt2 r, sqrt2 r)");
      if (!(wj > 0.0)) throw MassOutOfBand("weight must be positive, got " + fmt17(wj));
      for (std::size_t k = 0; k < j; ++k)
        if (std::abs(masses[k].first - xi) <= 1e-12 * band)
          throw DuplicateMass("xi = " + fmt17(xi));
      normality += wj / (2.0 * r * r - xi * xi);
    }
    if (normality > 1.0 + 1e-12)
      throw NormalityViolated("sum w_j/(2r^2 - xi_j^2) = " + fmt17(normality));
  }
  // Q = prod (xi_j - w), P = w Q + sum_j w_j prod_{k != j} (xi_k - w)
  poly::Poly Qp{cplx(1.0)};
  for (auto& [xi, wj] : masses) Qp = poly::mul(Qp, {cplx(xi), cplx(-1.0)});
  poly::Poly Pp = poly::mul({cplx(0.0), cplx(1.0)}, Qp);
  for (std::size_t j = 0; j < masses.size(); ++j) {
    poly::Poly part{cplx(masses[j].second)};
    for (std::size_t k = 0; k < masses.size(); ++k)
      if (k != j) part = poly::mul(part, {cplx(masses[k].first), cplx(-1.0)});
    Pp = poly::add(Pp, part);
  }
  const cplx lead = Qp.back();
  for (auto& c : Pp) c /= lead;
  for (auto& c : Qp) c /= lead;
  MFunction m;
  m.branch_radius = r;
  m.P = std::move(Pp);
  m.Q = std::move(Qp);
  return m;
}

// The vacuum one-soliton m(z) = z - kappa^2/z: rational (branch radius 0,
// single mass at xi = 0 in w = z coordinates).  It belongs to the class over
// any radius >= kappa; the normality-gated constructor above cannot express
// it because its natural representation sits at r = 0.
inline MFunction mfun_soliton(double kappa) {
  if (!(kappa > 0.0)) throw Error("mfun_soliton: kappa must be positive");
  MFunction m;
  m.branch_radius = 0.0;
  m.P = {cplx(-kappa * kappa), cplx(0.0), cplx(1.0)};
  m.Q = {cplx(0.0), cplx(1.0)};
  return m;
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

inline cplx eval_base(const MFunction& m, cplx z) {
  const cplx w = w_of_z(z, m.branch_radius);
  const cplx q = poly::eval(m.Q, w);
  const cplx p = poly::eval(m.P, w);
  if (std::abs(q) == 0.0)
    throw DegenerateDenominator("base denominator vanished at z = " + fmt17(z));
  return p / q;
}

}  // namespace detail

// Value of the first `k` chain steps applied to the base, at z.  No branch
// guard here: the recursion itself must evaluate at real atom points.
inline cplx eval_chain_prefix(const MFunction& m, std::size_t k, cplx z) {
  if (k == 0) return detail::eval_base(m, z);
  const auto key = std::make_pair(k, std::make_pair(z.real(), z.imag()));
  {
    std::lock_guard<std::mutex> lock(m.memo->mu);
    auto it = m.memo->vals.find(key);
    if (it != m.memo->vals.end()) return it->second;
  }
  const cplx zeta = m.transform_chain[k - 1];
  const cplx a = eval_chain_prefix(m, k - 1, z);
  const cplx b = eval_chain_prefix(m, k - 1, zeta);
  if (std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)))
    throw DegenerateDenominator("m(z) - m(zeta) ~ 0 at z = " + fmt17(z) +
                                ", zeta = " + fmt17(zeta));
  const cplx v = (z * z - zeta * zeta) / (a - b) - b;
  {
    std::lock_guard<std::mutex> lock(m.memo->mu);
    m.memo->vals.emplace(key, v);  // idempotent: same inputs, same value
  }
  return v;
}

inline cplx eval(const MFunction& m, cplx z, double cross_tol = 1e-9) {
  if (dist_to_cross(z, m.branch_radius) <= cross_tol)
    throw OnBranchCross("z = " + fmt17(z) + " within " + fmt17(cross_tol) +
                        " of the branch cross");
  return eval_chain_prefix(m, m.transform_chain.size(), z);
}

// (m_e(lambda), m_o(lambda)) with m(z) = m_e(z^2) + z m_o(z^2).
inline std::pair<cplx, cplx> parity_eval(const MFunction& m, cplx lambda,
                                         double tol = 1e-9) {
  const double r2 = m.branch_radius * m.branch_radius;
  if (dist_to_real_segment(lambda, r2) <= tol)
    throw OnBranchInterval("lambda = " + fmt17(lambda) +
                           " on the branch interval [-r^2, r^2]");
  const cplx s = std::sqrt(lambda);
  const cplx a = eval(m, s, 0.0), b = eval(m, -s, 0.0);
  return {0.5 * (a + b), (a - b) / (2.0 * s)};
}

// ---------------------------------------------------------------------------
// transforms

inline MFunction d_transform(const MFunction& m, cplx zeta,
                             bool allow_axis = false) {
  const double r = m.branch_radius;
  if (!(std::abs(zeta) > r) || dist_to_cross(zeta, r) <= 1e-9)
    throw PointOnBranchCross("zeta = " + fmt17(zeta));
  if (!allow_axis) {
    const double scale = 1.0 + std::abs(zeta);
    if (std::abs(zeta.imag()) <= 1e-12 * scale ||
        std::abs(zeta.real()) <= 1e-12 * scale)
      throw PointOnBranchCross(
          "zeta = " + fmt17(zeta) +
          " lies on an axis; pass allow_axis to assert axis usage");
  }
  MFunction out = m;  // memo shared: prefix values coincide
  out.transform_chain.push_back(zeta);
  return out;
}

// d_{conj zeta} after d_zeta; requires zeta strictly off both axes.
inline MFunction dd_bar_transform(const MFunction& m, cplx zeta) {
  const double scale = 1.0 + std::abs(zeta);
  if (std::abs(zeta.imag()) <= 1e-12 * scale ||
      std::abs(zeta.real()) <= 1e-12 * scale)
    throw PointOnBranchCross("dd_bar requires zeta off both axes");
  return d_transform(d_transform(m, zeta), std::conj(zeta));
}

// Exact rational closure of the chain: repeatedly divide out the common
// factor (w - w_zeta) by synthetic division.  Used as an oracle for the
// memoized recursion; degrades for long chains as degrees grow.
inline MFunction rational_normal_form(const MFunction& m) {
  MFunction out;
  out.branch_radius = m.branch_radius;
  out.P = m.P;
  out.Q = m.Q;
  for (const cplx zeta : m.transform_chain) {
    const cplx wz = w_of_z(zeta, out.branch_radius);
    const cplx qv = poly::eval(out.Q, wz);
    if (std::abs(qv) == 0.0)
      throw DegenerateDenominator("closure hit a pole at zeta = " + fmt17(zeta));
    const cplx mz = poly::eval(out.P, wz) / qv;
    poly::Poly R = poly::add(out.P, out.Q, -mz);  // root at w = w_zeta
    cplx rem;
    poly::Poly Pt = poly::deflate(R, wz, &rem);
    poly::Poly newP = poly::add(poly::mul({wz, cplx(1.0)}, out.Q), Pt, -mz);
    out.P = std::move(newP);
    out.Q = std::move(Pt);
    const cplx lead = out.Q.back();
    if (std::abs(lead) == 0.0)
      throw DegenerateDenominator("closure lost its leading coefficient");
    for (auto& c : out.P) c /= lead;
    for (auto& c : out.Q) c /= lead;
  }
  return out;
}

inline cplx eval_rational(const MFunction& m, cplx z) {
  return detail::eval_base(rational_normal_form(m), z);
}

// ---------------------------------------------------------------------------
// Herglotz samplers (upper half-plane) and the D transform

struct HerglotzSampler {
  std::function<cplx(cplx)> f;
  bool irrational = true;  // has a nontrivial measure part
  cplx operator()(cplx lambda) const { return f(lambda); }
};

inline HerglotzSampler D_transform(const HerglotzSampler& h, cplx zeta) {
  if (zeta.imag() == 0.0) throw Error("D_transform: Im zeta must be nonzero");
  const cplx hz = h.f(zeta);
  auto base = h.f;
  HerglotzSampler out;
  out.irrational = h.irrational;
  out.f = [base, zeta, hz](cplx lambda) {
    const cplx v = base(lambda);
    if (std::abs(v - hz) <= 1e-12 * (1.0 + std::abs(v) + std::abs(hz)))
      throw DegenerateDenominator("h(lambda) - h(zeta) ~ 0");
    return (lambda - zeta) / (v - hz) - hz;
  };
  return out;
}

// ---------------------------------------------------------------------------
// class validation

// Samples the defining clauses of the class.  `class_radius` overrides the
// radius the membership is tested against (a function stored over a smaller
// branch radius can still be a member over a larger one, e.g. the soliton).
inline ValidationReport check_Mr(const MFunction& m, int sample_budget = 600,
                                 double class_radius = -1.0) {
  ValidationReport rep;
  const double r = class_radius >= 0.0 ? class_radius : m.branch_radius;
  const double r_eval = r > 0.0 ? r * (1.0 + 1e-3) : 1e-3;
  const double unit = std::max(r, 1.0);
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int n = std::max(sample_budget, 60);

  // (i) Herglotz-type sign and real symmetry off R u iR
  double worst_sign = 1e300, worst_sym = 0.0;
  for (int i = 0; i < n / 3; ++i) {
    const double rad = r_eval + 1e-3 + 4.0 * unit * uni(rng);
    const double th = 0.08 + (pi / 2 - 0.16) * uni(rng) + (i % 4) * pi / 2;
    const cplx z = rad * cplx(std::cos(th), std::sin(th));
    const cplx v = eval(m, z);
    worst_sign = std::min(worst_sign, v.imag() * z.imag());
    worst_sym = std::max(worst_sym, std::abs(std::conj(eval(m, std::conj(z))) - v) /
                                        (1.0 + std::abs(v)));
  }
  rep.add("herglotz_sign", worst_sign > 0.0, worst_sign,
          "min Im m * Im z over samples");
  rep.add("real_symmetry", worst_sym <= 1e-10, 1e-10 - worst_sym,
          "max |conj(m(conj z)) - m(z)| relative");

  // (ii) holomorphy proxy: the parity parts traverse a closed loop around
  // the branch interval continuously (a leftover cut outside [-r^2, r^2]
  // would show as an O(1) seam), plus m(r+) > m(-r+).
  {
    const double rho = 1.44 * r_eval * r_eval + 0.04 * unit * unit;
    const int nloop = std::max(n / 2, 64);
    double maxjump = 0.0, total = 0.0;
    cplx pe{}, po{};
    for (int k = 0; k <= nloop; ++k) {
      const double phi = 2.0 * pi * (k % nloop) / nloop + 1e-4;
      auto [me, mo] = parity_eval(m, rho * std::polar(1.0, phi));
      if (k > 0) {
        const double jump = std::abs(me - pe) + std::abs(mo - po);
        maxjump = std::max(maxjump, jump);
        total += jump;
      }
      pe = me;
      po = mo;
    }
    const double allowed = 8.0 * total / nloop + 1e-9;
    rep.add("parity_loop_continuity", maxjump <= allowed, allowed - maxjump,
            "max parity jump on a loop around the branch interval");
    const cplx mp = eval(m, cplx(r_eval)), mm = eval(m, cplx(-r_eval));
    rep.add("edge_order", mp.real() > mm.real(), mp.real() - mm.real(),
            "m(r+) - m(-r+)");
  }

  // (iii) asymptotics m(z) = z + O(1/z), no constant term
  {
    const cplx dir = std::polar(1.0, pi / 5.0);
    double c_prev = -1.0;
    bool ok = true;
    double worst = 0.0;
    for (double R : {1e3, 1e4, 1e5}) {
      const cplx z = R * unit * dir;
      const double c = std::abs(eval(m, z) - z) * std::abs(z);
      worst = std::max(worst, c);
      if (c_prev >= 0.0 && c > 1e-6 * unit && c_prev > 1e-6 * unit)
        ok = ok && (c / c_prev < 3.0 && c / c_prev > 1.0 / 3.0);
      c_prev = c;
    }
    rep.add("asymptotics", ok, ok ? 1.0 : -1.0,
            "|m(z)-z|*|z| stable over R = 1e3..1e5 (C ~ " + fmt17(worst) + ")");
  }

  // Corollary-type positivity on the real axis beyond the cross
  {
    double worst_deriv = 1e300, worst_odd = 1e300;
    for (int i = 0; i < n / 3; ++i) {
      const double x = r_eval + (0.02 + 5.0 * i / (n / 3.0)) * unit;
      const double h = 1e-5 * unit;
      const double md = (eval(m, cplx(x + h)).real() - eval(m, cplx(x - h)).real()) / (2 * h);
      const double od = (eval(m, cplx(x)).real() - eval(m, cplx(-x)).real()) / (2 * x);
      worst_deriv = std::min(worst_deriv, md);
      worst_odd = std::min(worst_odd, od);
    }
    rep.add("real_axis_increasing", worst_deriv > 0.0, worst_deriv, "min m'(x)");
    rep.add("odd_part_positive", worst_odd > 0.0, worst_odd,
            "min (m(x)-m(-x))/2x");
  }
  return rep;
}

// Jump of m across the imaginary axis above the cross: reflectionless
// m-functions are holomorphic there, so m(i xi + eps) - m(i xi - eps) = O(eps).
template <typename F>
inline ValidationReport check_reflectionless_fn(F&& f, double xi_lo,
                                                double xi_hi,
                                                double eps = 1e-6) {
  if (!(xi_lo < xi_hi)) throw Error("check_reflectionless: need xi_lo < xi_hi");
  ValidationReport rep;
  double max_jump = 0.0, scale = 1.0;
  const int n = 64;
  for (int k = 0; k < n; ++k) {
    const double xi = xi_lo + (xi_hi - xi_lo) * (k + 0.5) / n;
    const cplx right = f(cplx(eps, xi)), left = f(cplx(-eps, xi));
    max_jump = std::max(max_jump, std::abs(right - left));
    scale = std::max(scale, std::abs(right));
  }
  const double allowed = 10.0 * eps * scale;
  rep.add("imaginary_axis_jump", max_jump <= allowed, allowed - max_jump,
          "max |m(i xi + eps) - m(i xi - eps)| = " + fmt17(max_jump));
  return rep;
}

inline ValidationReport check_reflectionless(const MFunction& m, double xi_lo,
                                             double xi_hi, double eps = 1e-6) {
  if (!(xi_lo > m.branch_radius))
    throw Error("check_reflectionless: xi_lo must exceed the branch radius");
  return check_reflectionless_fn([&](cplx z) { return eval(m, z, 0.0); },
                                 xi_lo, xi_hi, eps);
}

// Short structural description used in provenance records.
inline std::string describe(const MFunction& m) {
  std::string s = "m{r=" + fmt17(m.branch_radius) + ";P=[";
  for (auto& c : m.P) s += fmt17(c) + ",";
  s += "];Q=[";
  for (auto& c : m.Q) s += fmt17(c) + ",";
  s += "];chain=[";
  for (auto& z : m.transform_chain) s += fmt17(z) + ",";
  return s + "]}";
}

}  // namespace kdvtau
