// smoke test for grassmann.hpp — deleted before commit
#include <cstdio>
#include "kdvtau/grassmann.hpp"

using namespace kdvtau;

static MFunction one_mass() { return mfun_from_sigma(1.0, {{0.0, 0.5}}); }
static MFunction two_mass() {
  return mfun_from_sigma(1.0, {{1.0, 0.15}, {-1.0, 0.15}});
}

int main() {
  // --- toeplitz sanity
  {
    MatC T1 = toeplitz([](cplx) { return cplx(1.0); }, 8, 2.0);
    MatC Tz = toeplitz([](cplx z) { return z; }, 8, 2.0);
    printf("T(1)-I       : %.3e\n",
           (T1 - MatC::Identity(9, 9)).cwiseAbs().maxCoeff());
    double sub = 0;
    for (int j = 1; j <= 8; ++j) sub = std::max(sub, std::abs(Tz(j, j - 1) - 1.0));
    printf("T(z) shift   : %.3e (off %3e)\n", sub,
           Tz.cwiseAbs().sum() - 8.0);
  }

  // --- tau_truncated: free m -> 1 for all g
  {
    MFunction fr = mfun_free();
    GammaElement g = q_atom(3.0) * q_atom(4.0);
    TauResult t = tau_truncated(fr, g, 32);
    printf("free tau     : %.3e (vs 1)\n", std::abs(t.value() - 1.0));
    GammaElement ex = exp_line(0.7);
    TauResult t2 = tau_truncated(fr, ex, 32);
    printf("free tau e_x : %.3e (vs 1)\n", std::abs(t2.value() - 1.0));
  }

  // --- route equivalence: tau_truncated vs tau_det, battery x 3 products
  {
    std::vector<std::pair<const char*, MFunction>> battery = {
        {"one ", one_mass()}, {"two ", two_mass()}};
    std::vector<std::pair<const char*, GammaElement>> gs;
    gs.push_back({"q3q4   ", q_atom(3.0) * q_atom(4.0)});
    gs.push_back({"q3q4iq5", (q_atom(3.0) * q_atom(cplx(0, 4)) *
                                       q_atom(5.0))});
    gs.push_back({"qc pair", q_atom(cplx(3, 1)) * q_atom(cplx(3, -1))});
    gs.push_back({"e_x    ", exp_line(0.6)});
    for (auto& [mn, m] : battery)
      for (auto& [gn, g] : gs) {
        TauConfig cfg = default_tau_config(m.branch_radius, 128);
        TauResult td = tau_det(m, g, cfg);
        for (int N : {64, 128, 256}) {
          TauResult tt = tau_truncated(m, g, N);
          printf("%s %s N=%3d : rel %.3e  (det=%.6f%+.6fi)\n", mn, gn, N,
                 std::abs(tt.value() - td.value()) / std::abs(td.value()),
                 td.value().real(), td.value().imag());
        }
      }
  }

  // --- char_matrix g=1: phi = 0, psi = m - z
  {
    MFunction m = one_mass();
    CharMatrix cm = char_matrix(m, gamma_identity(), 48);
    double phimax = 0;
    for (cplx c : cm.phi) phimax = std::max(phimax, std::abs(c));
    auto mw = m_from_subspace(cm.phi, cm.psi);
    double dm = 0;
    for (cplx z : {cplx(3, 0), cplx(2, 2), cplx(0, 4), cplx(-3, 1)})
      dm = std::max(dm, std::abs(mw(z) - eval(m, z)));
    printf("phi(W_m)=0   : %.3e ; m_from_subspace vs m: %.3e\n", phimax, dm);
  }

  // --- char_matrix g=q_zeta: 1+phi_{gW}(w) = (m(zeta)-m(w))/(zeta-w) (Eq.47 shape)
  {
    MFunction m = one_mass();
    const cplx zeta = 3.0;
    CharMatrix cm = char_matrix(m, q_atom(zeta), 64);
    auto phi_at = [&](cplx z) {
      cplx acc = 0.0;
      for (std::size_t i = cm.phi.size(); i-- > 0;) acc = (acc + cm.phi[i]) / z;
      return acc;
    };
    double worst = 0;
    for (cplx w : {cplx(4, 0), cplx(3, 3), cplx(0, 5), cplx(-4, 1)}) {
      cplx lhs = 1.0 + phi_at(w);
      cplx rhs = (eval(m, zeta) - eval(m, w)) / (zeta - w);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    printf("Eq47 q3 gW   : %.3e\n", worst);
    // m_from_subspace of the transformed space vs d_transform
    MFunction md = d_transform(m, zeta, true);
    auto mw = m_from_subspace(cm.phi, cm.psi);
    double dm = 0;
    for (cplx z : {cplx(4, 0), cplx(2, 2), cplx(0, 5)})
      dm = std::max(dm, std::abs(mw(z) - eval(md, z)));
    printf("m_gW vs dformr: %.3e\n", dm);
    // rho(q_omega) = 1 + phi(omega), and factorization tau_W(g2)=rho*tau_{m'}
    const cplx om = cplx(0, 4);
    cplx r1 = rho(cm.phi, q_atom(om), 2.5);
    printf("rho(q) vs 1+phi: %.3e\n", std::abs(r1 - (1.0 + phi_at(om))));
    // exp part multiplicativity: rho(e_a)rho(e_b) = rho(e_{a+b})
    cplx ra = rho(cm.phi, exp_line(0.3), 2.5);
    cplx rb = rho(cm.phi, exp_line(0.5), 2.5);
    cplx rab = rho(cm.phi, exp_line(0.8), 2.5);
    printf("rho mult     : %.3e\n", std::abs(ra * rb - rab));
  }

  // --- cocycle in truncation + rank-one R for q_zeta
  {
    MFunction m = two_mass();
    const int N = 48;
    const double rho_c = detail::default_circle(m);
    SubspaceModel model = subspace_model(m, N, rho_c);
    MatC R = window_r_op(model, q_atom(cplx(3, 1)));
    Eigen::BDCSVD<MatC> svd(R);
    printf("rank-one s2  : %.3e (s1=%.3e)\n", svd.singularValues()(1),
           svd.singularValues()(0));
    const int W = 2 * N + 1;
    MatC IR = MatC::Identity(2 * W, 2 * W) + R;
    cplx det = IR.partialPivLu().determinant();
    printf("det vs tau   : %.3e\n",
           std::abs(det - tau_truncated(m, q_atom(cplx(3, 1)), N).value()));
  }

  // --- duality: one-mass, tight circle, N sweep
  {
    for (auto& [nm, m] : std::vector<std::pair<const char*, MFunction>>{
             {"one", one_mass()}, {"two", two_mass()}}) {
      printf("duality %s tight : ", nm);
      for (int N : {64, 128, 256})
        printf("N=%3d %.3e  ", N, duality_check(m, N, 1.02));
      printf("\n");
      printf("duality %s deflt : ", nm);
      for (int N : {32, 64})
        printf("N=%3d %.3e  ", N, duality_check(m, N));
      printf("\n");
    }
    printf("duality free : %.3e\n", duality_check(mfun_free(), 32));
  }

  // --- criterion 9 sweep: || T_N(m_o)^{-1} - T_N(m_o^{-1}) ||_inf
  {
    for (double c : {1.0103, 1.013, 1.02, 1.05}) {
      printf("c9 rho=%.4f :", c);
      for (auto& [nm, m] : std::vector<std::pair<const char*, MFunction>>{
               {"one", one_mass()}, {"two", two_mass()}}) {
        printf(" [%s]", nm);
        for (int N : {64, 128, 256}) {
          auto mo = [&](cplx lam) { return parity_eval(m, lam).second; };
          auto moi = [&](cplx lam) { return 1.0 / parity_eval(m, lam).second; };
          MatC A = toeplitz(mo, N, c);
          MatC B = toeplitz(moi, N, c);
          MatC D = A.partialPivLu().inverse() - B;
          double norm = D.cwiseAbs().rowwise().sum().maxCoeff();
          printf(" %.3e", norm);
        }
      }
      printf("\n");
    }
  }

  // --- trace bound
  {
    auto rep = trace_bound_check(exp_line(0.1), gamma_identity(), 64, 2.0);
    printf("trace e(.1z) : lhs %.6e rhs %.6e sup %.6e holds %d\n",
           rep.lhs_trace, rep.rhs, rep.rhs_sup, rep.holds);
    auto rep2 = trace_bound_check(exp_kdv(0.3, 0.02), exp_line(0.25),
                                  64, 2.0);
    printf("trace kdv    : lhs %.6e rhs %.6e sup %.6e holds %d\n",
           rep2.lhs_trace, rep2.rhs, rep2.rhs_sup, rep2.holds);
    auto rep3 = trace_bound_check(exp_line(0.1), exp_line(0.1), 48, 2.0);
    printf("trace equal  : lhs %.6e rhs %.6e\n", rep3.lhs_trace, rep3.rhs);
  }
  return 0;
}
