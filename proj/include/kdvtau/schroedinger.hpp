#pragma once
// ODE-side oracle: Weyl functions m±(lambda) for a gridded potential by
// Riccati integration, half-line assembly of the full m, the reflectionless
// identity m+(xi+i0) = -conj(m-(xi+i0)), and a Dirichlet spectral floor.
// Closes the loop m -> q -> m independently of the tau-function machinery.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "common.hpp"
#include "errors.hpp"
#include "flow.hpp"

namespace kdvtau {

struct PotentialGrid {
  std::vector<double> x_nodes;  // uniform step, symmetric range [-L, L]
  std::vector<double> q_values;
  // tail behavior assumption: "decaying" (q -> 0) or "background" (q -> const)
  std::string tail_tag = "decaying";

  double dx() const {
    return x_nodes.size() > 1 ? x_nodes[1] - x_nodes[0] : 0.0;
  }
};

inline PotentialGrid potential_grid(const std::vector<double>& x_nodes,
                                    const std::vector<double>& q_values,
                                    const std::string& tail_tag = "decaying") {
  PotentialGrid g;
  g.x_nodes = x_nodes;
  g.q_values = q_values;
  g.tail_tag = tail_tag;
  if (g.x_nodes.size() != g.q_values.size() || g.x_nodes.size() < 8)
    throw GridTooCoarse("potential grid needs >= 8 matching nodes");
  const double h = g.dx();
  for (std::size_t i = 0; i + 1 < g.x_nodes.size(); ++i)
    if (std::abs(g.x_nodes[i + 1] - g.x_nodes[i] - h) > 1e-9 * (1.0 + std::abs(h)))
      throw GridTooCoarse("potential grid must be uniform");
  for (double v : g.q_values)
    if (!std::isfinite(v)) throw GridTooCoarse("non-finite potential value");
  return g;
}

// Single-t slice of a flow grid (column j), same data with flow provenance
// dropped; pole-flagged entries are rejected since the ODE needs finite q.
inline PotentialGrid potential_slice(const FlowGrid& flow, std::size_t t_index = 0,
                                     const std::string& tail_tag = "background") {
  std::vector<double> q(flow.x_nodes.size());
  for (std::size_t i = 0; i < flow.x_nodes.size(); ++i) {
    if (flow.pole_flags[i][t_index])
      throw BlowUp("flow grid has a tau zero inside the requested slice");
    q[i] = flow.q_values[i][t_index];
  }
  return potential_grid(flow.x_nodes, q, tail_tag);
}

// CSV: same schema as FlowGrid (x,t,q,pole_flag) with a single t slice.
inline std::string to_csv(const PotentialGrid& grid, double t = 0.0) {
  std::string out = "x,t,q,pole_flag\n";
  for (std::size_t i = 0; i < grid.x_nodes.size(); ++i)
    out += fmt17(grid.x_nodes[i]) + "," + fmt17(t) + "," +
           fmt17(grid.q_values[i]) + ",0\n";
  return out;
}

inline PotentialGrid potential_grid_from_csv(const std::string& csv,
                                             const std::string& tail_tag = "decaying") {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> xs, qs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    xs.push_back(std::stod(cell));
    std::getline(row, cell, ',');  // t, ignored
    std::getline(row, cell, ',');
    qs.push_back(std::stod(cell));
  }
  return potential_grid(xs, qs, tail_tag);
}

namespace detail {

// Flatness gate for the WKB initialization: the boundary condition
// u(+-L) = -+ sqrt(q(+-L) - lambda) is exact for a locally constant tail,
// so require the last stretch of the grid to be flat (not necessarily zero:
// the battery potentials tend to the background r^2).
inline void require_flat_tail(const PotentialGrid& q, int side) {
  const std::size_t n = q.x_nodes.size();
  const std::size_t win = std::max<std::size_t>(5, n / 20);
  double lo = 1e300, hi = -1e300;
  for (std::size_t k = 0; k < win; ++k) {
    const double v = side > 0 ? q.q_values[n - 1 - k] : q.q_values[k];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double edge = side > 0 ? q.q_values[n - 1] : q.q_values[0];
  if (hi - lo > 1e-4 * (1.0 + std::abs(edge)))
    throw TailNotFlat("potential not flat near x = " +
                      fmt17(side > 0 ? q.x_nodes[n - 1] : q.x_nodes[0]) +
                      " (spread " + fmt17(hi - lo) + ")");
}

// q(x_k + h/2) by a centered 4-point stencil so the RK4 midpoint stages keep
// their order; falls back to 3-point one-sided forms at the ends.
inline double q_mid(const std::vector<double>& q, std::size_t k, int dir) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(q.size());
  const std::ptrdiff_t a = static_cast<std::ptrdiff_t>(k);
  const std::ptrdiff_t b = a + dir;
  const std::ptrdiff_t am = a - dir, bp = b + dir;
  if (am >= 0 && am < n && bp >= 0 && bp < n)
    return (-q[am] + 9.0 * q[a] + 9.0 * q[b] - q[bp]) / 16.0;
  return 0.5 * (q[a] + q[b]);
}

struct WeylEndpoint {
  cplx u0;       // f'/f at x = 0
  bool riccati;  // true if the Riccati route finished without a pole
};

// Integrate toward x = 0 from the requested end. side = +1 starts at +L with
// u(+L) = -sqrt(q - lambda), side = -1 starts at -L with u(-L) = +sqrt(...);
// both give the L^2 solution on their half line (Re sqrt >= 0 branch).
inline WeylEndpoint integrate_weyl(const PotentialGrid& q, cplx lambda, int side) {
  const std::size_t n = q.x_nodes.size();
  const double h = q.dx();
  const int dir = -side;  // step direction in index space (toward 0)
  std::size_t k = side > 0 ? n - 1 : 0;
  const std::size_t mid = static_cast<std::size_t>(
      std::min_element(q.x_nodes.begin(), q.x_nodes.end(),
                       [](double x, double y) { return std::abs(x) < std::abs(y); }) -
      q.x_nodes.begin());

  const cplx root = std::sqrt(cplx(q.q_values[k], 0.0) - lambda);
  cplx u = (side > 0 ? -1.0 : 1.0) * (root.real() >= 0.0 ? root : -root);
  const double hs = dir * h;  // signed step

  bool ok = true;
  cplx ur = u;
  for (std::size_t k2 = k; k2 != mid; k2 += dir) {
    const double qa = q.q_values[k2];
    const double qm = q_mid(q.q_values, k2, dir);
    const double qb = q.q_values[k2 + dir];
    auto f = [&](double qq, cplx v) { return cplx(qq, 0.0) - lambda - v * v; };
    const cplx k1 = f(qa, ur);
    const cplx k2s = f(qm, ur + 0.5 * hs * k1);
    const cplx k3 = f(qm, ur + 0.5 * hs * k2s);
    const cplx k4 = f(qb, ur + hs * k3);
    ur += hs / 6.0 * (k1 + 2.0 * k2s + 2.0 * k3 + k4);
    if (!std::isfinite(ur.real()) || !std::isfinite(ur.imag()) ||
        std::abs(ur) > 1e6) {
      ok = false;
      break;
    }
  }
  if (ok) return {ur, true};

  // Riccati pole crossed: same ODE as the linear system (f, f') with
  // per-step renormalization, then u = f'/f.
  cplx fv = 1.0, fp = u;
  for (std::size_t k2 = k; k2 != mid; k2 += dir) {
    const double qa = q.q_values[k2];
    const double qm = q_mid(q.q_values, k2, dir);
    const double qb = q.q_values[k2 + dir];
    auto rhs = [&](double qq, cplx f_, cplx fp_) {
      return std::pair<cplx, cplx>(fp_, (cplx(qq, 0.0) - lambda) * f_);
    };
    auto [a1, b1] = rhs(qa, fv, fp);
    auto [a2, b2] = rhs(qm, fv + 0.5 * hs * a1, fp + 0.5 * hs * b1);
    auto [a3, b3] = rhs(qm, fv + 0.5 * hs * a2, fp + 0.5 * hs * b2);
    auto [a4, b4] = rhs(qb, fv + hs * a3, fp + hs * b3);
    fv += hs / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    fp += hs / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    const double scale = std::max(std::abs(fv), std::abs(fp));
    if (!std::isfinite(scale)) throw BlowUp("linear fallback overflowed");
    if (scale > 1e6) {
      fv /= scale;
      fp /= scale;
    }
  }
  if (std::abs(fv) < 1e-12 * std::abs(fp))
    throw BlowUp("f(0) vanishes: lambda is (numerically) a Dirichlet point");
  return {fp / fv, false};
}

}  // namespace detail

// m+(lambda) = f+'(0)/f+(0), m-(lambda) = -f-'(0)/f-(0) for the L^2 solutions
// on the respective half lines.
inline cplx riccati_weyl(const PotentialGrid& q, cplx lambda, int side) {
  if (side != 1 && side != -1) throw Error("riccati_weyl: side must be +-1");
  if (q.dx() > 0.05 + 1e-12)
    throw GridTooCoarse("riccati_weyl wants dx <= 0.05, got " + fmt17(q.dx()));
  detail::require_flat_tail(q, side);
  const detail::WeylEndpoint end = detail::integrate_weyl(q, lambda, side);
  return side > 0 ? end.u0 : -end.u0;
}

// Half-plane assembly: m(z) = -m+(-z^2) for Re z > 0, m-(-z^2) for Re z < 0.
inline cplx assemble_m(const PotentialGrid& q, cplx z) {
  if (z.real() == 0.0)
    throw PointOnBranchCross("assemble_m needs Re z != 0");
  const cplx lambda = -z * z;
  return z.real() > 0.0 ? -riccati_weyl(q, lambda, +1)
                        : riccati_weyl(q, lambda, -1);
}

struct ReflectionlessReport {
  double max_dev = 0.0;       // max |m+(xi+i eps) + conj(m-(xi+i eps))|
  double max_dev_half = 0.0;  // same at eps/2
  double eps = 0.0;
  std::size_t samples = 0;
  // deviation ~ C * eps for a reflectionless q, so halving eps should halve it
  double scaling() const {
    return max_dev_half > 0.0 ? max_dev / max_dev_half : 0.0;
  }
};

inline ReflectionlessReport reflectionless_check(const PotentialGrid& q,
                                                 double xi_lo, double xi_hi,
                                                 double eps,
                                                 std::size_t samples = 12) {
  if (!(xi_hi > xi_lo) || eps <= 0.0)
    throw Error("reflectionless_check: need xi_hi > xi_lo and eps > 0");
  ReflectionlessReport rep;
  rep.eps = eps;
  rep.samples = samples;
  for (std::size_t j = 0; j < samples; ++j) {
    const double xi =
        xi_lo + (xi_hi - xi_lo) * (samples == 1 ? 0.5 : double(j) / double(samples - 1));
    for (double e : {eps, 0.5 * eps}) {
      const cplx lam(xi, e);
      const cplx mp = riccati_weyl(q, lam, +1);
      const cplx mm = riccati_weyl(q, lam, -1);
      const double dev = std::abs(mp + std::conj(mm));
      if (e == eps)
        rep.max_dev = std::max(rep.max_dev, dev);
      else
        rep.max_dev_half = std::max(rep.max_dev_half, dev);
    }
  }
  return rep;
}

// Smallest eigenvalue of the Dirichlet second-difference discretization of
// -d^2/dx^2 + q on the grid's interval.
inline double spectral_floor(const PotentialGrid& q) {
  const std::size_t n = q.x_nodes.size();
  if (n < 3) throw GridTooCoarse("spectral_floor needs >= 3 nodes");
  const double h = q.dx();
  const Eigen::Index m = static_cast<Eigen::Index>(n) - 2;  // interior nodes
  Eigen::VectorXd diag(m), sub(std::max<Eigen::Index>(m - 1, 0));
  for (Eigen::Index i = 0; i < m; ++i)
    diag(i) = 2.0 / (h * h) + q.q_values[static_cast<std::size_t>(i) + 1];
  for (Eigen::Index i = 0; i + 1 < m; ++i) sub(i) = -1.0 / (h * h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Richardson extrapolation in dx: the second-difference eigenvalue error is
// O(h^2), so combine the full grid with its every-other-node coarsening.
inline double spectral_floor_richardson(const PotentialGrid& q) {
  const double fine = spectral_floor(q);
  std::vector<double> xs, qs;
  for (std::size_t i = 0; i < q.x_nodes.size(); i += 2) {
    xs.push_back(q.x_nodes[i]);
    qs.push_back(q.q_values[i]);
  }
  const double coarse = spectral_floor(potential_grid(xs, qs, q.tail_tag));
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace kdvtau
