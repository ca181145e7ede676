#pragma once
// Tau-functions by two routes:
//   (1) the exact recursion over q-products,
//       tau(q_{z1}) = 1,
//       tau(q_{z1}..q_{zn}) / tau(q_{z1}..q_{z_{n-1}})
//         = prod_{k=1}^{n-1} [(d_{z1}..d_{z_{n-k-1}}m)(zn)
//                             - (d_{z1}..d_{z_{n-k-1}}m)(z_{n-k})] / (zn - z_{n-k}),
//   (2) the Fredholm contour determinant det(I + N_m(g)) with the kernel
//       M_g(z,l) = [ghat_o(z)(g m~)_e(l) + ghat_e(z)(g m~)_o(l)] / (l - z),
//       N_g(z,l) = (2 pi i)^{-1} Int_{C'} M_g(l',l) m_o(l')^{-1}/(l'-z) dl',
//       regularizer m~ = m - z.
// The Nystrom matrix is assembled in O(M^2) by partial fractions: the kernel
// is analytic (no diagonal singularity), and
//   1/((l'-z)(l-l')) = [1/(l'-z) + 1/(l-l')] / (l-z)
// turns the double sum into single sums S_k evaluated on the inner contour.

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "kdvtau/common.hpp"
#include "kdvtau/contour.hpp"
#include "kdvtau/errors.hpp"
#include "kdvtau/gamma.hpp"
#include "kdvtau/herglotz.hpp"

namespace kdvtau {

struct TauResult {
  double log_abs = 0.0;
  cplx phase{1.0, 0.0};
  std::string route = "recursion";
  double condition = 1.0;
  cplx value() const {
    if (log_abs == -std::numeric_limits<double>::infinity()) return 0.0;
    return std::exp(log_abs) * phase;
  }
};

namespace detail {

inline void accumulate(TauResult& t, cplx factor) {
  const double a = std::abs(factor);
  if (a == 0.0) {
    t.log_abs = -std::numeric_limits<double>::infinity();
    return;
  }
  t.log_abs += std::log(a);
  t.phase *= factor / a;
}

inline void check_recursion_points(const MFunction& m,
                                   const std::vector<cplx>& zetas) {
  const double r = m.branch_radius;
  for (std::size_t i = 0; i < zetas.size(); ++i) {
    if (!(std::abs(zetas[i]) > r) || dist_to_cross(zetas[i], r) <= 1e-9)
      throw BranchViolation("zeta = " + fmt17(zetas[i]) +
                            " inside or on the branch cross");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(zetas[i] - zetas[j]) <= 1e-10 * (1.0 + std::abs(zetas[i])))
        throw CoincidentPoints("zeta = " + fmt17(zetas[i]));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// route 1: recursion

inline TauResult tau_product(const MFunction& m, const std::vector<cplx>& zetas) {
  detail::check_recursion_points(m, zetas);
  TauResult t;
  t.route = "recursion";
  if (zetas.size() <= 1) return t;  // tau(q_zeta) = 1, tau(1) = 1
  MFunction mc = m;                 // carries the growing d-chain
  for (std::size_t k = 0; k + 1 < zetas.size(); ++k)
    mc = d_transform(mc, zetas[k], /*allow_axis=*/true);
  for (std::size_t n = 2; n <= zetas.size(); ++n) {
    for (std::size_t k = 1; k <= n - 1; ++k) {
      const std::size_t j = n - k - 1;  // chain-prefix length
      const cplx zn = zetas[n - 1], zk = zetas[n - k - 1];
      const cplx a = eval_chain_prefix(mc, j, zn);
      const cplx b = eval_chain_prefix(mc, j, zk);
      detail::accumulate(t, (a - b) / (zn - zk));
    }
  }
  return t;
}

// g = prod q_zeta * prod p_zeta': tau = tau(prod q * prod q_{zeta'}) /
// prod tau(r_{zeta'}), with tau(r_z) = tau(q_z q_{-z}).
inline TauResult tau_product_mixed(const MFunction& m,
                                   const std::vector<cplx>& q_zetas,
                                   const std::vector<cplx>& p_zetas) {
  for (cplx zp : p_zetas)
    for (cplx zq : q_zetas)
      if (std::abs(zp - zq) <= 1e-10 * (1.0 + std::abs(zp)) ||
          std::abs(zp + zq) <= 1e-10 * (1.0 + std::abs(zp)))
        throw CoincidentPoints("p-point +-" + fmt17(zp) + " meets q-point " +
                               fmt17(zq));
  std::vector<cplx> all = q_zetas;
  all.insert(all.end(), p_zetas.begin(), p_zetas.end());
  TauResult t = tau_product(m, all);
  for (cplx zp : p_zetas) {
    const TauResult r = tau_product(m, {zp, -zp});
    t.log_abs -= r.log_abs;
    t.phase /= r.phase;
  }
  return t;
}

// ---------------------------------------------------------------------------
// route 2: contour determinant

inline cplx kernel_M(const MFunction& m, const GammaElement& g, cplx z,
                     cplx lambda) {
  const double r2 = m.branch_radius * m.branch_radius;
  if (dist_to_real_segment(z, r2) <= 1e-9 ||
      dist_to_real_segment(lambda, r2) <= 1e-9)
    throw BranchViolation("kernel point on the branch interval");
  if (std::abs(lambda - z) <= 1e-12 * (1.0 + std::abs(lambda)))
    throw DiagonalHit("lambda = z = " + fmt17(z));
  const ParityParts gp = parity_parts(g, z);
  // parity parts of f = g * (m - id) at lambda
  const cplx s = std::sqrt(lambda);
  const cplx fp = eval(g, s) * (eval(m, s, 0.0) - s);
  const cplx fm = eval(g, -s) * (eval(m, -s, 0.0) + s);
  const cplx fe = 0.5 * (fp + fm), fo = (fp - fm) / (2.0 * s);
  return (gp.ghat_o * fe + gp.ghat_e * fo) / (lambda - z);
}

inline TauResult tau_det(const MFunction& m, const GammaElement& g,
                         const TauConfig& cfg) {
  validate_config(cfg);
  TauResult t;
  t.route = "determinant";
  if (!g.has_atoms() && !g.has_exp()) return t;  // tau(identity) = 1

  const int M = cfg.C.node_count, Mp = cfg.Cprime.node_count;

  // Pole-freedom bound: every atom must sit 5% beyond the outermost
  // evaluation point sqrt(lambda') of the outer contour.
  double sup_sq = 0.0;
  for (cplx lp : cfg.Cprime.nodes) sup_sq = std::max(sup_sq, std::sqrt(std::abs(lp)));
  for (const Atom& a : g.atoms)
    if (!(std::abs(a.zeta) > 1.05 * sup_sq))
      throw BranchViolation("atom |zeta| = " + fmt17(std::abs(a.zeta)) +
                            " inside the contour radius bound " +
                            fmt17(1.05 * sup_sq));

  // Outer contour data: c_l = w'_l / m_o(l'_l), P1 = ghat_o, P2 = ghat_e.
  std::vector<cplx> cl(Mp), P1(Mp), P2(Mp);
  for (int l = 0; l < Mp; ++l) {
    const cplx lp = cfg.Cprime.nodes[l];
    const auto [me, mo] = parity_eval(m, lp);
    (void)me;
    if (std::abs(mo) < 1e-8)
      throw ModdVanishes("|m_o| = " + fmt17(std::abs(mo)) + " at lambda' = " +
                         fmt17(lp));
    cl[l] = cfg.Cprime.weights[l] / mo;
    const ParityParts gp = parity_parts(g, lp);
    P1[l] = gp.ghat_o;
    P2[l] = gp.ghat_e;
  }

  // Inner contour data: Q1 = (g m~)_e, Q2 = (g m~)_o.
  std::vector<cplx> Q1(M), Q2(M);
  for (int j = 0; j < M; ++j) {
    const cplx s = std::sqrt(cfg.C.nodes[j]);
    const cplx fp = eval(g, s) * (eval(m, s, 0.0) - s);
    const cplx fm = eval(g, -s) * (eval(m, -s, 0.0) + s);
    Q1[j] = 0.5 * (fp + fm);
    Q2[j] = (fp - fm) / (2.0 * s);
  }

  // S_k(mu) = sum_l c_l P_k(l) / (l'_l - mu) and its mu-derivative.
  std::vector<cplx> S1(M), S2(M), dS1(M), dS2(M);
  for (int i = 0; i < M; ++i) {
    cplx s1 = 0, s2 = 0, d1 = 0, d2 = 0;
    const cplx mu = cfg.C.nodes[i];
    for (int l = 0; l < Mp; ++l) {
      const cplx den = cfg.Cprime.nodes[l] - mu;
      const cplx inv = 1.0 / den, inv2 = inv * inv;
      s1 += cl[l] * P1[l] * inv;
      s2 += cl[l] * P2[l] * inv;
      d1 += cl[l] * P1[l] * inv2;
      d2 += cl[l] * P2[l] * inv2;
    }
    S1[i] = s1;
    S2[i] = s2;
    dS1[i] = d1;
    dS2[i] = d2;
  }

  // K[i][j] = w_j (2 pi i)^{-2} [Q1_j (S1_i - S1_j) + Q2_j (S2_i - S2_j)]
  //           / (l_j - l_i),  diagonal by the analytic limit -S_k'.
  const cplx inv2pii2 = 1.0 / sq(2.0 * pi * iu);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      cplx ng;
      if (i == j)
        ng = -(Q1[i] * dS1[i] + Q2[i] * dS2[i]);
      else
        ng = (Q1[j] * (S1[i] - S1[j]) + Q2[j] * (S2[i] - S2[j])) /
             (cfg.C.nodes[j] - cfg.C.nodes[i]);
      A(i, j) += cfg.C.weights[j] * inv2pii2 * ng;
    }

  // Two-sided equilibration: the kernel's row/column scales carry the
  // e^{+-x sqrt(lambda)} dynamic range of g, which would otherwise dominate
  // the LU conditioning at large |x|. det(Dr A Dc) = det(A) prod dr prod dc
  // exactly, so the scalings are only bookkeeping in the log.
  double log_scale = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    for (int i = 0; i < M; ++i) {
      double rn = 0.0;
      for (int j = 0; j < M; ++j) rn = std::max(rn, std::abs(A(i, j)));
      if (rn > 0.0 && std::isfinite(rn)) {
        const double s = 1.0 / std::sqrt(rn);
        A.row(i) *= s;
        log_scale += std::log(s);
      }
    }
    for (int j = 0; j < M; ++j) {
      double cn = 0.0;
      for (int i = 0; i < M; ++i) cn = std::max(cn, std::abs(A(i, j)));
      if (cn > 0.0 && std::isfinite(cn)) {
        const double s = 1.0 / std::sqrt(cn);
        A.col(j) *= s;
        log_scale += std::log(s);
      }
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const auto& U = lu.matrixLU();
  double umax = 0.0, umin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < M; ++i) {
    const double a = std::abs(U(i, i));
    if (a == 0.0) {
      t.log_abs = -std::numeric_limits<double>::infinity();
      return t;
    }
    umax = std::max(umax, a);
    umin = std::min(umin, a);
    detail::accumulate(t, U(i, i));
  }
  detail::accumulate(t, cplx(double(lu.permutationP().determinant()), 0.0));
  t.log_abs -= log_scale;
  t.condition = umax / umin;
  if (t.condition > 1e12 && t.log_abs > std::log(1e-9))
    throw IllConditioned("LU diagonal ratio " + fmt17(t.condition));
  return t;
}

// ---------------------------------------------------------------------------
// dispatcher

inline TauResult tau_any(const MFunction& m, const GammaElement& g,
                         const TauConfig& cfg, bool cross_validate = false,
                         double* discrepancy = nullptr) {
  if (discrepancy) *discrepancy = 0.0;
  // Pure atom products with simple, pairwise-distinct points go to the
  // recursion; anything with an exponential or with multiplicities goes to
  // the determinant.
  bool recursion_ok = !g.has_exp();
  std::vector<cplx> qs, ps;
  if (recursion_ok) {
    for (const Atom& a : g.atoms) {
      if (a.mult != 1) {
        recursion_ok = false;
        break;
      }
      switch (a.kind) {
        case AtomKind::QPole: qs.push_back(a.zeta); break;
        case AtomKind::PZero: ps.push_back(a.zeta); break;
        case AtomKind::REven:
          qs.push_back(a.zeta);
          qs.push_back(-a.zeta);
          break;
      }
    }
  }
  if (recursion_ok) {
    TauResult t = tau_product_mixed(m, qs, ps);
    if (cross_validate) {
      const TauResult d = tau_det(m, g, cfg);
      const double gap = rel_err(t.value(), d.value());
      if (discrepancy) *discrepancy = gap;
      t.condition = std::max(t.condition, d.condition);
    }
    return t;
  }
  return tau_det(m, g, cfg);
}

// ---------------------------------------------------------------------------
// cocycle helpers: tau in the translated space g1 W_m
//
// For W' = q_eta W the prefactor obeys
//   1 + phi_{q_eta W}(z) = (1 + phi_W(z)) (m_W(z) - m_W(eta)) / (z - eta),
// so starting from W_m (phi = 0) a q-product g1 = q_{eta_1}..q_{eta_J} gives
//   1 + phi_{g1 W}(z) = prod_j (m_{j-1}(z) - m_{j-1}(eta_j)) / (z - eta_j)
// with m_j the d-chain prefixes, and tau_{g1 W}(g2) factors as
//   prod over q-atoms zeta of g2 of (1 + phi_{g1 W}(zeta)) * tau_{m'}(g2)
// for q-products, or rho_{g1 W}(e_x) * tau_{m'}(e_x) = e^{x a1} tau_{m'}(e_x)
// with a1 = lim z phi_{g1 W}(z) for the exponential direction.

inline cplx one_plus_phi_translated(const MFunction& m,
                                    const std::vector<cplx>& etas, cplx z) {
  MFunction mc = m;
  for (cplx e : etas) mc = d_transform(mc, e, /*allow_axis=*/true);
  cplx v = 1.0;
  for (std::size_t j = 0; j < etas.size(); ++j) {
    const cplx a = eval_chain_prefix(mc, j, z);
    const cplx b = eval_chain_prefix(mc, j, etas[j]);
    v *= (a - b) / (z - etas[j]);
  }
  return v;
}

// a1(g1 W_m) = sum_j (eta_j - m_{j-1}(eta_j)): the 1/z coefficient of
// log(1 + phi), obtained term by term from the factorization above.
inline cplx a1_translated(const MFunction& m, const std::vector<cplx>& etas) {
  MFunction mc = m;
  for (cplx e : etas) mc = d_transform(mc, e, /*allow_axis=*/true);
  cplx a1 = 0.0;
  for (std::size_t j = 0; j < etas.size(); ++j)
    a1 += etas[j] - eval_chain_prefix(mc, j, etas[j]);
  return a1;
}

// tau_{g1 W_m}(g2) for g1 a plain q-product and g2 either a q-product or a
// pure exponential e_x; used to exercise the cocycle identity
// tau_m(g1 g2) = tau_m(g1) * tau_{g1 W_m}(g2).
inline TauResult tau_translated(const MFunction& m,
                                const std::vector<cplx>& etas,
                                const GammaElement& g2, const TauConfig& cfg) {
  MFunction mc = m;
  for (cplx e : etas) mc = d_transform(mc, e, /*allow_axis=*/true);
  TauResult t;
  if (!g2.has_exp()) {
    std::vector<cplx> zetas;
    for (const Atom& a : g2.atoms) {
      if (a.kind != AtomKind::QPole || a.mult != 1)
        throw Error("tau_translated: g2 must be a plain q-product or e_x");
      zetas.push_back(a.zeta);
    }
    t = tau_product(mc, zetas);
    for (cplx z : zetas) detail::accumulate(t, one_plus_phi_translated(m, etas, z));
    return t;
  }
  if (g2.has_atoms() || g2.exp_part.size() != 1)
    throw Error("tau_translated: exponential g2 must be e_x");
  const double x = g2.exp_part[0];
  t = tau_det(mc, g2, cfg);
  detail::accumulate(t, std::exp(x * a1_translated(m, etas)));
  return t;
}

}  // namespace kdvtau
