#pragma once
// Fourier-truncation model of the Hardy-space picture: Toeplitz operators on
// modes 0..N, the two-component subspace model W_m with its A_W action,
// tau as a truncated determinant, the characteristic matrix (phi, psi), the
// multiplicative functional rho, the duality identity, and the trace bound.
//
// Conventions: the two-component model lives in the variable lambda = z^2 on
// the circle |lambda| = rho (rho = s^2 for a z-circle of radius s), where a
// scalar f(z) = f_e(lambda) + z f_o(lambda) becomes the pair (f_e, f_o).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "kdvtau/common.hpp"
#include "kdvtau/errors.hpp"
#include "kdvtau/gamma.hpp"
#include "kdvtau/herglotz.hpp"
#include "kdvtau/tau.hpp"

namespace kdvtau {

using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

struct FourierTruncation {
  double radius = 4.0;  // circle for symbol sampling (lambda-model: s^2)
  int n_modes = 128;    // cutoff N: modes 0..N for H+, -N..-1 for H-
  int samples = 1024;   // M-point trapezoid, M >= 8N
};

namespace detail {

// Coefficients of f(rho e^{i theta}) in the rotated variable mu = lambda/rho
// (raw M-point trapezoid values, |k| <= K). These are exactly the matrix
// entries of multiplication operators in the orthonormalized basis
// (lambda/rho)^k, so no rho-power ever touches floating-point noise. All
// operator algebra in this header runs in that basis; determinants, ranks,
// singular values and H+/H- splittings are unchanged by the rescaling.
inline std::vector<cplx> weighted_coeffs(const std::vector<cplx>& samples,
                                         int K) {
  const int M = int(samples.size());
  std::vector<cplx> coef(2 * K + 1);
  for (int k = -K; k <= K; ++k) {
    cplx acc = 0.0;
    for (int j = 0; j < M; ++j)
      acc += samples[j] * std::polar(1.0, -2.0 * pi * k * j / M);
    coef[k + K] = acc / double(M);
  }
  return coef;
}

// Plain Laurent coefficients a_k of a symbol on |lambda| = rho. The rho^{-k}
// rescaling amplifies quadrature noise by rho^{|k|} on the decaying side, so
// this is only for modest K or radii near 1 (the weighted form is used
// internally everywhere else).
inline std::vector<cplx> laurent_coeffs(const std::vector<cplx>& samples,
                                        int K, double rho) {
  std::vector<cplx> coef = weighted_coeffs(samples, K);
  for (int k = -K; k <= K; ++k) coef[k + K] *= std::pow(rho, -double(k));
  return coef;
}

inline std::vector<cplx> circle_nodes(double rho, int M) {
  std::vector<cplx> nodes(M);
  for (int j = 0; j < M; ++j) nodes[j] = std::polar(rho, 2.0 * pi * j / M);
  return nodes;
}

// T[j][k] = a_{j-k}, 0 <= j,k <= N, from a coefficient array indexed -K..K.
inline MatC toeplitz_from_coeffs(const std::vector<cplx>& coef, int N) {
  const int K = (int(coef.size()) - 1) / 2;
  MatC T = MatC::Zero(N + 1, N + 1);
  for (int j = 0; j <= N; ++j)
    for (int k = 0; k <= N; ++k)
      if (std::abs(j - k) <= K) T(j, k) = coef[j - k + K];
  return T;
}

inline TauResult det_log_scale(const MatC& IplusB, const std::string& route,
                               double condition) {
  Eigen::PartialPivLU<MatC> lu(IplusB);
  TauResult t;
  t.route = route;
  t.condition = condition;
  const auto& U = lu.matrixLU();
  for (Eigen::Index i = 0; i < U.rows(); ++i) accumulate(t, U(i, i));
  if (lu.permutationP().determinant() < 0) t.phase = -t.phase;
  return t;
}

// Default lambda-circle radius for the truncation model of a given m:
// the square of the working Hardy radius s = 2*sqrt(max(r^2, 1/4)).
inline double default_circle(const MFunction& m) {
  const double u = std::max(m.branch_radius * m.branch_radius, 0.25);
  return 4.0 * u;
}

}  // namespace detail

// Toeplitz matrix of a symbol sampled on |lambda| = rho (modes 0..N).
inline MatC toeplitz(const std::function<cplx(cplx)>& symbol, int N, double rho,
                     int M = 0) {
  if (M < 8 * N) M = 8 * N;
  if (M < 64) M = 64;
  std::vector<cplx> samples(M);
  const auto nodes = detail::circle_nodes(rho, M);
  for (int j = 0; j < M; ++j) samples[j] = symbol(nodes[j]);
  return detail::toeplitz_from_coeffs(detail::laurent_coeffs(samples, N, rho),
                                      N);
}

// tau_{W_m}(g) as the truncated odd-block determinant
//   det(I + (T(g^_o) T((gm)_e) + T(g^_e) T((gm)_o) - T(m_o)) T(m_o^{-1})),
// all Toeplitz matrices on lambda-modes 0..N, symbols on |lambda| = s^2.
inline TauResult tau_truncated(const MFunction& m, const GammaElement& g, int N,
                               double s = 0.0) {
  if (s <= 0.0) s = std::sqrt(detail::default_circle(m));
  for (const Atom& a : g.atoms)
    if (!(std::abs(a.zeta) > 1.02 * s))
      throw BranchViolation("atom at " + fmt17(a.zeta) +
                            " not outside the sampling circle |z| = " +
                            fmt17(s));
  const double rho = s * s;
  const int M = std::max(8 * N, 64);
  const auto nodes = detail::circle_nodes(rho, M);
  std::vector<cplx> s_hgo(M), s_hge(M), s_gme(M), s_gmo(M), s_mo(M);
  for (int j = 0; j < M; ++j) {
    const cplx lam = nodes[j];
    const auto [me, mo] = parity_eval(m, lam);
    const ParityParts gp = parity_parts(g, lam);
    s_hge[j] = gp.ghat_e;
    s_hgo[j] = gp.ghat_o;
    s_gme[j] = gp.g_e * me + lam * gp.g_o * mo;
    s_gmo[j] = gp.g_o * me + gp.g_e * mo;
    s_mo[j] = mo;
    if (std::abs(mo) < 1e-12)
      throw ModdVanishes("m_o vanishes on the sampling circle");
  }
  const MatC Thgo =
      detail::toeplitz_from_coeffs(detail::weighted_coeffs(s_hgo, N), N);
  const MatC Thge =
      detail::toeplitz_from_coeffs(detail::weighted_coeffs(s_hge, N), N);
  const MatC Tgme =
      detail::toeplitz_from_coeffs(detail::weighted_coeffs(s_gme, N), N);
  const MatC Tgmo =
      detail::toeplitz_from_coeffs(detail::weighted_coeffs(s_gmo, N), N);
  const MatC Tmo =
      detail::toeplitz_from_coeffs(detail::weighted_coeffs(s_mo, N), N);
  const MatC Tmoi = Tmo.partialPivLu().inverse();
  const double condition = Tmo.cwiseAbs().rowwise().sum().maxCoeff() *
                           Tmoi.cwiseAbs().rowwise().sum().maxCoeff();
  if (condition > 1e10)
    throw IllConditioned("T(m_o) condition estimate " + fmt17(condition));
  const MatC B = (Thgo * Tgme + Thge * Tgmo - Tmo) * Tmoi;
  return detail::det_log_scale(MatC::Identity(N + 1, N + 1) + B, "truncation",
                               condition);
}

// --------------------------------------------------------------------------
// two-component subspace model

struct SubspaceModel {
  int N = 0;
  double rho = 4.0;
  // A_W in coordinates: rows (j, c) with j = -1..-N (row index (-j-1) + (c)*N
  // for c in {0,1}), columns (k, c) with k = 0..N (index k + c*(N+1)).
  MatC A;
};

namespace detail {

inline int h_minus_row(int j, int comp, int N) { return (-j - 1) + comp * N; }
inline int h_plus_col(int k, int comp, int N) { return k + comp * (N + 1); }

// m_e, m_o lambda-Laurent coefficients for modes -K..K.
struct ModelSymbols {
  std::vector<cplx> me, mo;  // index k+K
  int K;
  double rho;
};

inline ModelSymbols model_symbols(const MFunction& m, int K, double rho,
                                  int M) {
  ModelSymbols sym;
  sym.K = K;
  sym.rho = rho;
  const auto nodes = circle_nodes(rho, M);
  std::vector<cplx> s_me(M), s_mo(M);
  for (int j = 0; j < M; ++j) {
    const auto [me, mo] = parity_eval(m, nodes[j]);
    if (std::abs(mo) < 1e-12)
      throw ModdVanishes("m_o vanishes on the sampling circle");
    s_me[j] = me;
    s_mo[j] = mo;
  }
  sym.me = weighted_coeffs(s_me, K);
  sym.mo = weighted_coeffs(s_mo, K);
  return sym;
}

}  // namespace detail

// Builds A_W for W = W_m: A_W u = Pi_m T(Pi_m)^{-1} u - u, restricted to H-.
// The block inverse of T(Pi_m) uses the triangular structure, so only the
// scalar T(m_o) is inverted.
inline SubspaceModel subspace_model(const MFunction& m, int N,
                                    double rho = 0.0) {
  SubspaceModel model;
  if (rho <= 0.0) rho = detail::default_circle(m);
  model.N = N;
  model.rho = rho;
  const int K = 2 * N;
  const auto sym = detail::model_symbols(m, K, rho, std::max(12 * K, 64));
  const MatC Tmo = detail::toeplitz_from_coeffs(sym.mo, N);
  const MatC Tmoi = Tmo.partialPivLu().inverse();
  // Rectangular convolution blocks L[h][i] = coef_{j-i} with j = -1-h.
  auto lower_block = [&](const std::vector<cplx>& coef) {
    MatC L = MatC::Zero(N, N + 1);
    for (int h = 0; h < N; ++h) {
      const int j = -1 - h;
      for (int i = 0; i <= N; ++i) L(h, i) = coef[j - i + K];
    }
    return L;
  };
  const MatC Bme = lower_block(sym.me) * Tmoi;  // component-1 rows
  const MatC Bmo = lower_block(sym.mo) * Tmoi;  // component-2 rows
  model.A = MatC::Zero(2 * N, 2 * (N + 1));
  // Columns (k, comp=0) vanish: (H+, 0) subset of W_m. Columns (k, comp=1):
  model.A.block(0, N + 1, N, N + 1) = Bme;
  model.A.block(N, N + 1, N, N + 1) = Bmo;
  return model;
}

namespace detail {

// Full-window (modes -N..N per component) multiplication operator for the
// scalar symbol g acting on pairs: G = [[g_e, lambda g_o], [g_o, g_e]].
inline MatC window_mult(const GammaElement& g, bool inverse, int N, double rho,
                        int M) {
  const int K = 2 * N;
  const auto nodes = circle_nodes(rho, M);
  std::vector<cplx> s_ge(M), s_go(M);
  for (int j = 0; j < M; ++j) {
    const ParityParts gp = parity_parts(g, nodes[j]);
    s_ge[j] = inverse ? gp.ghat_e : gp.g_e;
    s_go[j] = inverse ? gp.ghat_o : gp.g_o;
  }
  const auto ce = weighted_coeffs(s_ge, K);
  const auto co = weighted_coeffs(s_go, K);
  const int W = 2 * N + 1;
  MatC G = MatC::Zero(2 * W, 2 * W);
  for (int j = -N; j <= N; ++j)
    for (int k = -N; k <= N; ++k) {
      const int d = j - k;
      const cplx ge = ce[d + K], go = co[d + K];
      // lambda * g_o: shift by one mode, times rho in the weighted basis
      const cplx lgo = (d - 1 >= -K) ? rho * co[d - 1 + K] : cplx(0.0);
      G(j + N, k + N) = ge;
      G(j + N, k + N + W) = lgo;
      G(j + N + W, k + N) = go;
      G(j + N + W, k + N + W) = ge;
    }
  return G;
}

inline MatC window_pplus(int N) {
  const int W = 2 * N + 1;
  MatC P = MatC::Zero(2 * W, 2 * W);
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k <= N; ++k) P(k + N + c * W, k + N + c * W) = 1.0;
  return P;
}

inline MatC window_a_ext(const SubspaceModel& model) {
  const int N = model.N, W = 2 * N + 1;
  MatC A = MatC::Zero(2 * W, 2 * W);
  for (int c = 0; c < 2; ++c)
    for (int cc = 0; cc < 2; ++cc)
      for (int j = -N; j <= -1; ++j)
        for (int k = 0; k <= N; ++k)
          A(j + N + c * W, k + N + cc * W) =
              model.A(h_minus_row(j, c, N), h_plus_col(k, cc, N));
  return A;
}

}  // namespace detail

// R_W(g) = g^{-1} p+ g A_W on the truncation window (block form; the
// determinant of I + R equals the tau-function of the model).
inline MatC window_r_op(const SubspaceModel& model, const GammaElement& g) {
  const int N = model.N;
  const int M = std::max(8 * N, 64);
  const MatC G = detail::window_mult(g, false, N, model.rho, M);
  const MatC Gi = detail::window_mult(g, true, N, model.rho, M);
  return Gi * (detail::window_pplus(N) * (G * detail::window_a_ext(model)));
}

struct CharMatrix {
  // scalar H- coefficient lists: phi[k-1] is the z^{-k} coefficient
  std::vector<cplx> phi, psi;
  cplx a1() const { return phi.empty() ? cplx(0.0) : phi[0]; }
};

namespace detail {

// pair of weighted H- coefficient arrays -> scalar z^{-k} coefficient list.
// The rho^{|j|} unscaling makes deep coefficients individually noisy, but any
// evaluation outside the sampling circle damps exactly that factor back out,
// so Horner sums of these lists at |z| > s are stable.
inline std::vector<cplx> pair_to_scalar(const VecC& window, int N, double rho) {
  const int W = 2 * N + 1;
  std::vector<cplx> out(2 * N, 0.0);
  for (int j = -N; j <= -1; ++j) {
    const double unscale = std::pow(rho, -double(j));
    const cplx c1 = window(j + N) * unscale;      // comp 1: lambda^j -> z^{2j}
    const cplx c2 = window(j + N + W) * unscale;  // comp 2: z lambda^j -> z^{2j+1}
    const int k_even = -2 * j;            // z^{-k_even}
    const int k_odd = -(2 * j + 1);       // z^{-k_odd}
    if (k_even >= 1 && k_even <= 2 * N) out[k_even - 1] = c1;
    if (k_odd >= 1 && k_odd <= 2 * N) out[k_odd - 1] = c2;
  }
  return out;
}

}  // namespace detail

// phi_{gW} = A_{gW} e1 and psi_{gW} = A_{gW} e2.  The gW element with plus
// part u is g (I + A_W) x where x in H+ solves p+[g (I + A_W) x] = u, i.e.
// x = (I + R_W(g))^{-1} g^{-1} u with R_W(g) = g^{-1} p+ g A_W, and hence
// A_{gW} u = p- [ g A_W (I + R_W(g))^{-1} g^{-1} u ]
// (p-[g x] = 0 because every group element here is holomorphic on the disk).
inline CharMatrix char_matrix(const MFunction& m, const GammaElement& g, int N,
                              double rho = 0.0) {
  if (rho <= 0.0) rho = detail::default_circle(m);
  const SubspaceModel model = subspace_model(m, N, rho);
  const int M = std::max(8 * N, 64), W = 2 * N + 1;
  const MatC G = detail::window_mult(g, false, N, rho, M);
  const MatC Gi = detail::window_mult(g, true, N, rho, M);
  const MatC Aext = detail::window_a_ext(model);
  const MatC R = Gi * (detail::window_pplus(N) * (G * Aext));
  const MatC IR = MatC::Identity(2 * W, 2 * W) + R;
  Eigen::PartialPivLU<MatC> lu(IR);
  {  // tau(g) != 0 precondition
    double logdet = 0.0;
    const auto& U = lu.matrixLU();
    for (Eigen::Index i = 0; i < U.rows(); ++i)
      logdet += std::log(std::abs(U(i, i)));
    if (logdet < std::log(1e-12))
      throw TauZero("char_matrix: tau vanishes for this group element");
  }
  auto transform = [&](int comp) {
    VecC u = VecC::Zero(2 * W);
    u(N + comp * W) = 1.0;  // lambda^0 in the requested component
    VecC t = G * (Aext * lu.solve(Gi * u));
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k <= N; ++k) t(k + N + c * W) = 0.0;  // p- projection
    return detail::pair_to_scalar(t, N, rho);
  };
  CharMatrix out;
  out.phi = transform(0);
  out.psi = transform(1);
  return out;
}

// m_W(z) = (z + psi(z)) / (1 + phi(z)) + a1, a1 = z^{-1} coefficient of phi.
inline std::function<cplx(cplx)> m_from_subspace(const std::vector<cplx>& phi,
                                                 const std::vector<cplx>& psi) {
  return [phi, psi](cplx z) {
    auto h_minus = [](const std::vector<cplx>& c, cplx w) {
      cplx acc = 0.0;
      for (std::size_t i = c.size(); i-- > 0;) acc = (acc + c[i]) / w;
      return acc;
    };
    const cplx den = 1.0 + h_minus(phi, z);
    if (std::abs(den) < 1e-12)
      throw DivZero("1 + phi vanishes at z = " + fmt17(z));
    const cplx a1 = phi.empty() ? cplx(0.0) : phi[0];
    return (z + h_minus(psi, z)) / den + a1;
  };
}

// rho_W(e^h) = exp(sum_k k b_k h_k) with b_k the z^{-k} coefficients of
// log(1 + phi_W) on |z| = r_W; atoms enter through rho(q_zeta) = 1+phi(zeta).
inline cplx rho(const std::vector<cplx>& phi, const GammaElement& g,
                double r_W, int M = 2048) {
  auto phi_at = [&](cplx z) {
    cplx acc = 0.0;
    for (std::size_t i = phi.size(); i-- > 0;) acc = (acc + phi[i]) / z;
    return acc;
  };
  cplx log_rho = 0.0;
  if (g.has_exp()) {
    std::vector<cplx> logs(M);
    double prev_arg = 0.0;
    for (int j = 0; j < M; ++j) {
      const cplx z = std::polar(r_W, 2.0 * pi * j / M);
      const cplx v = 1.0 + phi_at(z);
      if (std::abs(v) < 1e-10)
        throw ZeroOnContour("1 + phi ~ 0 on |z| = " + fmt17(r_W));
      double arg = std::arg(v);
      if (j > 0) {  // continuous branch around the circle
        while (arg - prev_arg > pi) arg -= 2.0 * pi;
        while (arg - prev_arg < -pi) arg += 2.0 * pi;
      }
      prev_arg = arg;
      logs[j] = cplx(std::log(std::abs(v)), arg);
    }
    // h_k = 0 beyond the stored exponent coefficients, so the series is finite
    for (int k = 1; k <= int(g.exp_part.size()); ++k) {
      if (g.exp_part[k - 1] == 0.0) continue;
      cplx bk = 0.0;
      for (int j = 0; j < M; ++j)
        bk += logs[j] * std::polar(1.0, 2.0 * pi * k * j / M);
      bk *= std::pow(r_W, k) / double(M);
      log_rho += double(k) * bk * g.exp_part[k - 1];
    }
  }
  for (const Atom& a : g.atoms) {
    if (!(std::abs(a.zeta) > r_W))
      throw ZeroOnContour("atom inside the evaluation circle of rho");
    switch (a.kind) {
      case AtomKind::QPole:
        log_rho += double(a.mult) * std::log(1.0 + phi_at(a.zeta));
        break;
      case AtomKind::PZero:
        log_rho -= double(a.mult) * std::log(1.0 + phi_at(-a.zeta));
        break;
      case AtomKind::REven:
        log_rho += double(a.mult) * (std::log(1.0 + phi_at(a.zeta)) +
                                     std::log(1.0 + phi_at(-a.zeta)));
        break;
    }
  }
  return std::exp(log_rho);
}

// sup-norm of Pi_W(lambda) * transpose(conj(Pi_dual(conj lambda))) - I over
// samples outside the circle, with Pi_dual built from A_dual = -rho^{-2} J A* J.
// In the weighted basis the rho-powers of J and of the weighted adjoint cancel,
// leaving the dual coefficients as plain conjugates of A's mode (-1) rows.
inline double duality_check(const MFunction& m, int N, double rho = 0.0) {
  if (rho <= 0.0) rho = detail::default_circle(m);
  const SubspaceModel model = subspace_model(m, N, rho);
  // A rows (-1, c') against columns (k, c) give the dual pair coefficients.
  auto dual_eval = [&](int source_row_comp, cplx lam) {
    // returns the 2-vector (component c) of the dual column at lam
    cplx v[2] = {cplx(0.0), cplx(0.0)};
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k <= N; ++k) {
        const cplx a =
            model.A(detail::h_minus_row(-1, source_row_comp, N),
                    detail::h_plus_col(k, c, N));
        v[c] += -std::conj(a) * std::pow(lam / rho, -double(k) - 1.0);
      }
    return std::pair<cplx, cplx>(v[0], v[1]);
  };
  double worst = 0.0;
  for (double scale : {1.1, 1.25})
    for (int a = 0; a < 8; ++a) {
      const cplx lam = std::polar(scale * rho, 2.0 * pi * (a + 0.37) / 8);
      const auto [me, mo] = parity_eval(m, lam);
      Eigen::Matrix2cd Pi;
      Pi << 1.0, me, 0.0, mo;
      const auto [f1, f2] = dual_eval(0, std::conj(lam));
      const auto [p1, p2] = dual_eval(1, std::conj(lam));
      Eigen::Matrix2cd PiDual;
      PiDual << 1.0 + f1, p1, f2, 1.0 + p2;
      const Eigen::Matrix2cd res =
          Pi * PiDual.conjugate().transpose() - Eigen::Matrix2cd::Identity();
      worst = std::max(worst, res.cwiseAbs().maxCoeff());
    }
  return worst;
}

// --------------------------------------------------------------------------
// trace bound (scalar z-model)

struct TraceBoundReport {
  double lhs_trace = 0.0;   // trace norm of the truncated difference
  double rhs = 0.0;         // bound with weighted-L2 norms on the circle
  double rhs_sup = 0.0;     // same bound with sup norms (reported only)
  bool holds = false;
};

inline TraceBoundReport trace_bound_check(const GammaElement& g1,
                                          const GammaElement& g2, int N,
                                          double s = 2.0) {
  if (g1.has_atoms() || g2.has_atoms())
    throw AtomsPresent("trace_bound_check expects pure exponentials");
  const int M = std::max(8 * N, 256), W = 2 * N + 1, K = 2 * N;
  std::vector<cplx> nodes(M);
  for (int j = 0; j < M; ++j) nodes[j] = std::polar(s, 2.0 * pi * j / M);

  auto mult_op = [&](const GammaElement& g, bool inverse) {
    std::vector<cplx> smp(M);
    for (int j = 0; j < M; ++j)
      smp[j] = inverse ? eval_inv(g, nodes[j]) : eval(g, nodes[j]);
    // raw trapezoid coefficients = matrix in the orthonormalized basis
    const auto coef = detail::weighted_coeffs(smp, K);
    MatC A = MatC::Zero(W, W);
    for (int j = -N; j <= N; ++j)
      for (int k = -N; k <= N; ++k) A(j + N, k + N) = coef[j - k + K];
    return A;
  };
  MatC P = MatC::Zero(W, W);
  for (int k = 0; k <= N; ++k) P(k + N, k + N) = 1.0;
  const MatC Op = mult_op(g1, true) * P * mult_op(g1, false) -
                  mult_op(g2, true) * P * mult_op(g2, false);
  Eigen::BDCSVD<MatC> svd(Op);
  TraceBoundReport rep;
  rep.lhs_trace = svd.singularValues().sum();

  auto h_eval = [](const GammaElement& g, cplx z, int deriv) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < g.exp_part.size(); ++k) {
      const double p = double(k + 1);
      cplx term = g.exp_part[k];
      if (deriv == 0)
        term *= std::pow(z, p);
      else if (deriv == 1)
        term *= p * std::pow(z, p - 1);
      else
        term *= (p <= 1.0) ? cplx(0.0) : p * (p - 1.0) * std::pow(z, p - 2);
      acc += term;
    }
    return acc;
  };
  auto norms = [&](const std::function<cplx(cplx)>& f) {
    double l2 = 0.0, sup = 0.0;
    for (const cplx& z : nodes) {
      const double v = std::abs(f(z));
      l2 += v * v;
      sup = std::max(sup, v);
    }
    return std::pair<double, double>(std::sqrt(s * l2 / M), sup);
  };
  auto g_at = [&](const GammaElement& g, cplx z) { return eval(g, z); };
  auto gpp = [&](const GammaElement& g, cplx z) {
    const cplx h1 = h_eval(g, z, 1), h2 = h_eval(g, z, 2);
    return (h2 + h1 * h1) * g_at(g, z);
  };
  const auto n_di = norms(
      [&](cplx z) { return eval_inv(g1, z) - eval_inv(g2, z); });
  const auto n_g1m1 = norms([&](cplx z) { return g_at(g1, z) - 1.0; });
  const auto n_g1pp = norms([&](cplx z) { return gpp(g1, z); });
  const auto n_g2i = norms([&](cplx z) { return eval_inv(g2, z); });
  const auto n_dg = norms([&](cplx z) { return g_at(g1, z) - g_at(g2, z); });
  const auto n_dpp = norms([&](cplx z) { return gpp(g1, z) - gpp(g2, z); });
  const double s2 = s * s, c = 3.0 / std::sqrt(s);
  rep.rhs = c * (n_di.first * (n_g1m1.first + s2 * n_g1pp.first) +
                 n_g2i.first * (n_dg.first + s2 * n_dpp.first));
  rep.rhs_sup = c * (n_di.second * (n_g1m1.second + s2 * n_g1pp.second) +
                     n_g2i.second * (n_dg.second + s2 * n_dpp.second));
  rep.holds = rep.lhs_trace <= rep.rhs + 1e-12;
  return rep;
}

}  // namespace kdvtau
