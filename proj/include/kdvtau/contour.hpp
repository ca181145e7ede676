#pragma once
// Elliptic quadrature contours in the lambda-plane (trapezoidal rule on a
// periodic parametrization: spectrally accurate for analytic integrands).

#include <vector>

#include "kdvtau/common.hpp"
#include "kdvtau/errors.hpp"

namespace kdvtau {

struct Contour {
  cplx center{0.0, 0.0};
  double a = 1.0, b = 1.0;  // semi-axes
  int node_count = 128;
  std::vector<cplx> nodes;    // center + a cos th + i b sin th
  std::vector<cplx> weights;  // dlambda/dtheta * (2 pi / M)
};

inline Contour make_ellipse(double a, double b, int M, cplx center = 0.0) {
  if (!(a > 0.0) || !(b > 0.0) || M < 8)
    throw Error("make_ellipse: need positive semi-axes and M >= 8");
  Contour c;
  c.center = center;
  c.a = a;
  c.b = b;
  c.node_count = M;
  c.nodes.resize(M);
  c.weights.resize(M);
  for (int j = 0; j < M; ++j) {
    const double th = 2.0 * pi * j / M;
    c.nodes[j] = center + cplx(a * std::cos(th), b * std::sin(th));
    c.weights[j] = cplx(-a * std::sin(th), b * std::cos(th)) * (2.0 * pi / M);
  }
  return c;
}

// (1/2pi i) * sum w_j f(lambda_j): discrete Cauchy-type integral.
template <typename F>
inline cplx contour_integral(const Contour& c, F&& f) {
  cplx s = 0.0;
  for (int j = 0; j < c.node_count; ++j) s += c.weights[j] * f(c.nodes[j]);
  return s / (2.0 * pi * iu);
}

struct TauConfig {
  double r = 1.0;       // branch radius the geometry is sized for
  double s = 2.0;       // Hardy radius: contours stay inside |lambda| < s^2
  Contour C, Cprime;    // inner and outer contour
  double fd_step = 1e-2;
  std::string delta = "z";  // regularizer choice: m~ = m - delta
};

// Default geometry: C encloses [-r^2, r^2] with 50% margin, C' with 125%,
// both inside |lambda| < s^2 = 4 u where u = max(r^2, 1/4).
inline TauConfig default_tau_config(double r, int M = 128) {
  const double u = std::max(r * r, 0.25);
  TauConfig cfg;
  cfg.r = r;
  cfg.s = 2.0 * std::sqrt(u);
  cfg.C = make_ellipse(1.5 * u, 0.75 * u, M);
  cfg.Cprime = make_ellipse(2.25 * u, 1.5 * u, M);
  return cfg;
}

inline void validate_config(const TauConfig& cfg) {
  if (!(cfg.C.a < cfg.Cprime.a && cfg.C.b < cfg.Cprime.b))
    throw Error("TauConfig: C must lie strictly inside C'");
  const double s2 = cfg.s * cfg.s;
  if (!(cfg.Cprime.a < s2 && cfg.Cprime.b < s2))
    throw Error("TauConfig: contours must stay inside |lambda| < s^2");
  if (!(cfg.C.a > cfg.r * cfg.r))
    throw Error("TauConfig: C must enclose [-r^2, r^2]");
}

}  // namespace kdvtau
