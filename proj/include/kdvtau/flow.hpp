#pragma once
// The KdV flow on potentials through tau-functions:
//   q(x)      = -2 d^2/dx^2 log tau_m(e_x)
//   (K(g)q)(x) = -2 d^2/dx^2 log tau_m(g e_x)
// with e^{xz - 4tz^3} realizing the KdV time direction, plus Baker-Akhiezer
// functions, evolved m-functions, and residual diagnostics.

#include <cmath>
#include <string>
#include <vector>

#include "kdvtau/common.hpp"
#include "kdvtau/errors.hpp"
#include "kdvtau/gamma.hpp"
#include "kdvtau/herglotz.hpp"
#include "kdvtau/tau.hpp"

namespace kdvtau {

struct Provenance {
  std::string m_desc;
  std::uint64_t config_hash = 0;
  std::string convention = "kdv_minus4t";  // or "plus_t_z3", "translate"
};

struct FlowGrid {
  std::vector<double> x_nodes, t_nodes;
  // q_values[i][j] = q(x_i, t_j); pole_flags marks entries where tau ~ 0
  std::vector<std::vector<double>> q_values;
  std::vector<std::vector<char>> pole_flags;
  Provenance provenance;
};

namespace detail {

inline std::uint64_t hash_config(const MFunction& m, const TauConfig& cfg) {
  return fnv1a(describe(m) + "|a=" + fmt17(cfg.C.a) + ";b=" + fmt17(cfg.C.b) +
               ";a'=" + fmt17(cfg.Cprime.a) + ";b'=" + fmt17(cfg.Cprime.b) +
               ";M=" + std::to_string(cfg.C.node_count) +
               ";h=" + fmt17(cfg.fd_step) + ";r=" + fmt17(cfg.r) +
               ";s=" + fmt17(cfg.s));
}

// log tau_m(g * e_x); reality demands the phase be ~ +-1, and a vanishing
// tau is reported to the caller as a non-finite value.
inline double log_tau_line(const MFunction& m, const GammaElement& g, double x,
                           const TauConfig& cfg) {
  const TauResult t = tau_det(m, g * exp_line(x), cfg);
  if (!std::isfinite(t.log_abs)) return -std::numeric_limits<double>::infinity();
  // Reality tolerance tracks the LU conditioning: the accumulated diagonal
  // phase inherits the determinant's roundoff (measured: M-independent,
  // growing with the condition proxy), while a genuinely complex tau -- the
  // defect this gate exists for -- shows up at O(1).
  const double reality_tol = std::min(0.05, 1e-8 + 1e-11 * t.condition);
  if (std::abs(t.phase.imag()) > reality_tol)
    throw NotReal("tau phase = " + fmt17(t.phase) + " at x = " + fmt17(x));
  return t.log_abs;  // |tau|; a negative tau shows up as a pole crossing
}

// -2 * second difference of log tau at x (5-point, O(h^4)).
inline double q_point(const MFunction& m, const GammaElement& g, double x,
                      const TauConfig& cfg, double h, bool* pole) {
  double l[5];
  for (int k = -2; k <= 2; ++k) l[k + 2] = log_tau_line(m, g, x + k * h, cfg);
  *pole = false;
  for (double v : l)
    if (!std::isfinite(v) || v < -30.0) {
      *pole = true;
      return std::numeric_limits<double>::quiet_NaN();
    }
  const double d2 =
      (-l[0] + 16 * l[1] - 30 * l[2] + 16 * l[3] - l[4]) / (12 * h * h);
  return -2.0 * d2;
}

inline double q_point_rich(const MFunction& m, const GammaElement& g, double x,
                           const TauConfig& cfg, double h, bool* pole) {
  bool p1 = false, p2 = false;
  const double qh = q_point(m, g, x, cfg, h, &p1);
  const double qh2 = q_point(m, g, x, cfg, 0.5 * h, &p2);
  *pole = p1 || p2;
  if (*pole) return std::numeric_limits<double>::quiet_NaN();
  return (16.0 * qh2 - qh) / 15.0;  // cancels the O(h^4) term
}

}  // namespace detail

// (K(g)q)(x) on a grid of x-nodes, single time column.
inline FlowGrid flow_apply(const MFunction& m, const GammaElement& g,
                           const std::vector<double>& x_nodes,
                           const TauConfig& cfg, bool richardson = false) {
  if (!g.realness_flag) throw NotReal("flow_apply requires a real group element");
  FlowGrid grid;
  grid.x_nodes = x_nodes;
  grid.t_nodes = {0.0};
  grid.q_values.assign(x_nodes.size(), std::vector<double>(1, 0.0));
  grid.pole_flags.assign(x_nodes.size(), std::vector<char>(1, 0));
  grid.provenance = {describe(m), detail::hash_config(m, cfg), "translate"};
  for (std::size_t i = 0; i < x_nodes.size(); ++i) {
    bool pole = false;
    const double q =
        richardson
            ? detail::q_point_rich(m, g, x_nodes[i], cfg, cfg.fd_step, &pole)
            : detail::q_point(m, g, x_nodes[i], cfg, cfg.fd_step, &pole);
    grid.q_values[i][0] = q;
    grid.pole_flags[i][0] = pole ? 1 : 0;
  }
  return grid;
}

inline FlowGrid potential(const MFunction& m, const std::vector<double>& x_nodes,
                          const TauConfig& cfg, bool richardson = false) {
  return flow_apply(m, gamma_identity(), x_nodes, cfg, richardson);
}

// q(x_i, t_j) under g = e^{xz - 4 t_j z^3}.
inline FlowGrid kdv_evolve(const MFunction& m, const std::vector<double>& x_nodes,
                           const std::vector<double>& t_nodes,
                           const TauConfig& cfg, bool richardson = false) {
  FlowGrid grid;
  grid.x_nodes = x_nodes;
  grid.t_nodes = t_nodes;
  grid.q_values.assign(x_nodes.size(), std::vector<double>(t_nodes.size(), 0.0));
  grid.pole_flags.assign(x_nodes.size(), std::vector<char>(t_nodes.size(), 0));
  grid.provenance = {describe(m), detail::hash_config(m, cfg), "kdv_minus4t"};
  for (std::size_t j = 0; j < t_nodes.size(); ++j) {
    const FlowGrid col =
        flow_apply(m, exp_kdv(0.0, t_nodes[j]), x_nodes, cfg, richardson);
    for (std::size_t i = 0; i < x_nodes.size(); ++i) {
      grid.q_values[i][j] = col.q_values[i][0];
      grid.pole_flags[i][j] = col.pole_flags[i][0];
    }
  }
  return grid;
}

// f_W(x, zeta) = e^{-x zeta} tau_m(e_x q_zeta) / tau_m(e_x).
inline cplx baker_akhiezer(const MFunction& m, double x, cplx zeta,
                           const TauConfig& cfg) {
  double sup_sq = 0.0;
  for (cplx lp : cfg.Cprime.nodes)
    sup_sq = std::max(sup_sq, std::sqrt(std::abs(lp)));
  if (!(std::abs(zeta) > 1.05 * sup_sq))
    throw BranchViolation("baker_akhiezer: |zeta| inside the contour bound " +
                          fmt17(1.05 * sup_sq));
  const TauResult te = tau_det(m, exp_line(x), cfg);
  if (!std::isfinite(te.log_abs) || te.log_abs < -30.0)
    throw TauZero("tau_m(e_x) ~ 0 at x = " + fmt17(x));
  const TauResult tq = tau_det(m, exp_line(x) * q_atom(zeta), cfg);
  return std::exp(-x * zeta + (tq.log_abs - te.log_abs)) * tq.phase / te.phase;
}

// |(-f'' + q f + zeta^2 f)| / (|zeta^2| |f|) with stencil derivatives.
inline double schrodinger_residual(const MFunction& m, double x, cplx zeta,
                                   const TauConfig& cfg) {
  const double h = cfg.fd_step;
  cplx f[5];
  for (int k = -2; k <= 2; ++k) f[k + 2] = baker_akhiezer(m, x + k * h, zeta, cfg);
  const cplx fxx =
      (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
  bool pole = false;
  const double q = detail::q_point_rich(m, gamma_identity(), x, cfg, h, &pole);
  if (pole) throw TauZero("potential pole at x = " + fmt17(x));
  const cplx z2 = zeta * zeta;
  return std::abs(-fxx + q * f[2] + z2 * f[2]) / (std::abs(z2) * std::abs(f[2]));
}

// m_{e_x W}(zeta) by the contour-integral representation
//   m_W(zeta) = zeta + (2 pi i)^{-1} Int_{|w|=R}
//                 [tau_W(q_w) - tau_W(q_zeta q_w)/tau_W(q_zeta)] dw,
// with every tau_{e_x W} obtained from tau_m by the cocycle division.
inline cplx m_evolve(const MFunction& m, double x, cplx zeta, double R,
                     const TauConfig& cfg) {
  double sup_sq = 0.0;
  for (cplx lp : cfg.Cprime.nodes)
    sup_sq = std::max(sup_sq, std::sqrt(std::abs(lp)));
  if (!(R > 1.05 * sup_sq) || !(std::abs(zeta) > 1.05 * sup_sq))
    throw BranchViolation("m_evolve: R and |zeta| must exceed " +
                          fmt17(1.05 * sup_sq));
  const TauResult te = tau_det(m, exp_line(x), cfg);
  if (!std::isfinite(te.log_abs) || te.log_abs < -30.0)
    throw TauZero("tau_m(e_x) ~ 0 at x = " + fmt17(x));
  const cplx tau_e = te.value();
  const TauResult tz = tau_det(m, exp_line(x) * q_atom(zeta), cfg);
  const cplx tau_z = tz.value() / tau_e;  // tau_{e_x W}(q_zeta)
  if (std::abs(tau_z) < 1e-13) throw TauZero("tau_{e_x W}(q_zeta) ~ 0");

  auto integral = [&](double radius) {
    const int M = 48;
    cplx acc = 0.0;
    for (int k = 0; k < M; ++k) {
      const cplx w = radius * std::polar(1.0, 2.0 * pi * (k + 0.5) / M);
      const cplx tw = tau_det(m, exp_line(x) * q_atom(w), cfg).value() / tau_e;
      const cplx tzw =
          tau_det(m, exp_line(x) * q_atom(zeta) * q_atom(w), cfg).value() / tau_e;
      acc += w * (tw - tzw / tau_z);  // (1/2pi i) dw = w dtheta / 2pi
    }
    return acc / double(M);
  };
  const cplx v1 = integral(R), v2 = integral(1.12 * R);
  if (std::abs(v1 - v2) > 1e-6 * (1.0 + std::abs(zeta + v1)))
    throw NoConvergence("m_evolve radius study: " + fmt17(std::abs(v1 - v2)));
  return zeta + v1;
}

// First x-derivative of log tau (the a1 diagnostic of the Baker expansion).
inline double a1_diagnostic(const MFunction& m, double x, const TauConfig& cfg) {
  const double h = cfg.fd_step;
  double l[5];
  for (int k = -2; k <= 2; ++k)
    l[k + 2] = detail::log_tau_line(m, gamma_identity(), x + k * h, cfg);
  return (l[0] - 8 * l[1] + 8 * l[3] - l[4]) / (12 * h);
}

// Sup-norm PDE residual over interior grid nodes, by recorded convention:
//   kdv_minus4t: d_t u - 6 u u_x + u_xxx
//   plus_t_z3:   d_t q - (1/4) q_xxx + (3/2) q q_x
//   translate:   d_t q - q_x
inline double kdv_residual(const FlowGrid& grid) {
  const std::size_t nx = grid.x_nodes.size(), nt = grid.t_nodes.size();
  if (nx < 7 || nt < 3) throw GridTooCoarse("need >= 7 x-nodes and >= 3 t-nodes");
  const double hx = grid.x_nodes[1] - grid.x_nodes[0];
  const double ht = grid.t_nodes[1] - grid.t_nodes[0];
  for (std::size_t i = 1; i < nx; ++i)
    if (std::abs(grid.x_nodes[i] - grid.x_nodes[i - 1] - hx) > 1e-9 * std::abs(hx))
      throw GridTooCoarse("x-grid must be uniform");
  for (std::size_t j = 1; j < nt; ++j)
    if (std::abs(grid.t_nodes[j] - grid.t_nodes[j - 1] - ht) > 1e-9 * std::abs(ht))
      throw GridTooCoarse("t-grid must be uniform");

  const auto& u = grid.q_values;
  double sup = 0.0;
  for (std::size_t i = 3; i + 3 < nx; ++i)
    for (std::size_t j = 1; j + 1 < nt; ++j) {
      bool clean = true;
      for (int a = -3; a <= 3 && clean; ++a)
        for (int b = -1; b <= 1 && clean; ++b)
          clean = !grid.pole_flags[i + a][j + b];
      if (!clean) continue;
      const double ut = (u[i][j + 1] - u[i][j - 1]) / (2 * ht);
      const double ux = (u[i - 2][j] - 8 * u[i - 1][j] + 8 * u[i + 1][j] -
                         u[i + 2][j]) /
                        (12 * hx);
      const double uxxx = (u[i - 3][j] - 8 * u[i - 2][j] + 13 * u[i - 1][j] -
                           13 * u[i + 1][j] + 8 * u[i + 2][j] - u[i + 3][j]) /
                          (8 * hx * hx * hx);
      double res;
      if (grid.provenance.convention == "kdv_minus4t")
        res = ut - 6.0 * u[i][j] * ux + uxxx;
      else if (grid.provenance.convention == "plus_t_z3")
        res = ut - 0.25 * uxxx + 1.5 * u[i][j] * ux;
      else
        res = ut - ux;
      sup = std::max(sup, std::abs(res));
    }
  return sup;
}

// CSV serialization: header + one row per (x, t), 17 significant digits, LF.
inline std::string to_csv(const FlowGrid& grid) {
  std::string out = "x,t,q,pole_flag\n";
  for (std::size_t i = 0; i < grid.x_nodes.size(); ++i)
    for (std::size_t j = 0; j < grid.t_nodes.size(); ++j) {
      out += fmt17(grid.x_nodes[i]) + "," + fmt17(grid.t_nodes[j]) + "," +
             (grid.pole_flags[i][j] ? std::string("nan")
                                    : fmt17(grid.q_values[i][j])) +
             "," + (grid.pole_flags[i][j] ? "1" : "0") + "\n";
    }
  return out;
}

}  // namespace kdvtau
