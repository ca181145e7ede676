#include <cstdio>
#include "kdvtau/flow.hpp"
using namespace kdvtau;

int main() {
  MFunction m = mfun_from_sigma(1.0, {{0.0, 0.5}});
  TauConfig cfg = default_tau_config(1.0);

  // m_evolve at x = 0 must reproduce m itself.
  cplx z(3.0, 1.0);
  cplx me = m_evolve(m, 0.0, z, 6.0, cfg);
  cplx md = eval(m, z);
  std::printf("m_evolve x=0: %.3e\n", std::abs(me - md));

  // m_evolve at x = 0.4 vs -f'/f from Baker-Akhiezer stencil.
  double x = 0.4, h = 1e-3;
  cplx fp = baker_akhiezer(m, x + h, z, cfg), fm = baker_akhiezer(m, x - h, z, cfg),
       f0 = baker_akhiezer(m, x, z, cfg);
  cplx mfd = -(fp - fm) / (2 * h) / f0;
  cplx mev = m_evolve(m, x, z, 6.0, cfg);
  std::printf("m_evolve x=0.4 vs -f'/f: %.3e\n", std::abs(mev - mfd));

  // Schroedinger residual at a couple of points.
  std::printf("schrod res: %.3e %.3e\n", schrodinger_residual(m, 0.3, z, cfg),
              schrodinger_residual(mfun_free(), 0.3, z, cfg));

  // Translation residual: q(x,t) = q(x + t).
  std::vector<double> xs, ts;
  for (int i = 0; i < 9; ++i) xs.push_back(-0.4 + 0.1 * i);
  for (int j = 0; j < 3; ++j) ts.push_back(0.05 * j);
  FlowGrid g;
  g.x_nodes = xs; g.t_nodes = ts;
  g.q_values.assign(xs.size(), std::vector<double>(ts.size()));
  g.pole_flags.assign(xs.size(), std::vector<char>(ts.size(), 0));
  g.provenance.convention = "translate";
  for (std::size_t j = 0; j < ts.size(); ++j) {
    FlowGrid col = flow_apply(m, exp_line(ts[j]), xs, cfg, true);
    for (std::size_t i = 0; i < xs.size(); ++i) g.q_values[i][j] = col.q_values[i][0];
  }
  std::printf("translate residual: %.3e\n", kdv_residual(g));

  // KdV residual for the soliton, kdv_minus4t convention.
  MFunction sol = mfun_soliton(1.0);
  TauConfig scfg = default_tau_config(1.05);
  FlowGrid kg = kdv_evolve(sol, xs, ts, scfg, true);
  std::printf("kdv residual (soliton): %.3e\n", kdv_residual(kg));
  double q00 = kg.q_values[4][0];
  std::printf("soliton q(0,0) = %.12g (want -2)\n", q00);

  // a1 diagnostic: for soliton tau = cosh(x), a1(0.4) = tanh(0.4).
  std::printf("a1: %.3e\n", std::abs(a1_diagnostic(sol, 0.4, scfg) - std::tanh(0.4)));
  std::puts(to_csv(potential(m, {0.0, 0.5}, cfg)).c_str());
  return 0;
}
