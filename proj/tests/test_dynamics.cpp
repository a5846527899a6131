#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vorwave/dynamics.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace vorwave;
namespace dyn = vorwave::dynamics;
namespace dsp = vorwave::dispersion;

static WavePhysics phys()
{
    return {1.0, 1.0, 0.5, WavePhysics::infinity()};
}

TEST_CASE("equilibrium is a fixed point; mean of deta vanishes identically")
{
    WavePhysics p = phys();
    DnoConfig cfg;
    State s(16);
    State xs = dyn::vector_field(p, s, cfg);
    CHECK(xs.eta.l2_norm() == doctest::Approx(0.0));
    CHECK(xs.psi.l2_norm() == doctest::Approx(0.0));

    std::mt19937 rng(3);
    State r{test::random_field(16, 1e-2, rng, 5), test::random_field(16, 1e-2, rng, 5)};
    State xr = dyn::vector_field(p, r, cfg);
    CHECK(xr.eta.mean() == 0.0);
}

TEST_CASE("vector field linearization matches the flat linear system")
{
    WavePhysics p = phys();
    DnoConfig cfg;
    std::mt19937 rng(5);
    State u{test::random_field(16, 1.0, rng, 5), test::random_field(16, 1.0, rng, 5)};

    // X(eps u) = eps L u + O(eps^2); L written through the Wahlen system
    double prev = 1e300;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        State ue{eps * u.eta, eps * u.psi};
        State xs = dyn::vector_field(p, ue, cfg);
        WahlenState w = dyn::wahlen_forward(p, ue);
        WahlenState lw = dyn::linear_flat_apply(p, w);
        RealField lpsi = lw.zeta + 0.5 * p.gamma * dx_inverse(lw.eta);
        double rel = ((xs.eta - lw.eta).l2_norm() + (xs.psi - lpsi).l2_norm()) / eps;
        CHECK(rel < 10.0 * eps);
        CHECK(rel < prev);
        prev = rel;
    }
}

TEST_CASE("Hamiltonian at the equilibrium and its symmetries")
{
    WavePhysics p = phys();
    DnoConfig cfg;
    State s(16);
    CHECK(dyn::hamiltonian(p, s, cfg) == doctest::Approx(p.kappa * two_pi).epsilon(1e-14));

    std::mt19937 rng(7);
    State r{test::random_field(16, 1e-2, rng, 5), test::random_field(16, 1e-2, rng, 5)};
    double h = dyn::hamiltonian(p, r, cfg);

    State t{translate(r.eta, 0.7), translate(r.psi, 0.7)};
    CHECK(dyn::hamiltonian(p, t, cfg) == doctest::Approx(h).epsilon(1e-10));

    State sv = dyn::involution(r);
    CHECK(dyn::hamiltonian(p, sv, cfg) == doctest::Approx(h).epsilon(1e-10));
}

TEST_CASE("translation equivariance of the vector field")
{
    WavePhysics p = phys();
    DnoConfig cfg;
    std::mt19937 rng(11);
    State r{test::random_field(16, 1e-2, rng, 5), test::random_field(16, 1e-2, rng, 5)};
    double sshift = 0.37;
    State xr = dyn::vector_field(p, r, cfg);
    State tr{translate(r.eta, sshift), translate(r.psi, sshift)};
    State xtr = dyn::vector_field(p, tr, cfg);
    CHECK((translate(xr.eta, sshift) - xtr.eta).l2_norm() < 1e-10);
    CHECK((translate(xr.psi, sshift) - xtr.psi).l2_norm() < 1e-10);
}

TEST_CASE("Wahlen maps invert each other and reduce to identity at gamma = 0")
{
    WavePhysics p = phys();
    std::mt19937 rng(13);
    State s{test::random_field(12, 1.0, rng), test::random_field(12, 1.0, rng)};
    State back = dyn::wahlen_backward(p, dyn::wahlen_forward(p, s));
    CHECK((back.eta - s.eta).l2_norm() < 1e-14);
    CHECK((back.psi - s.psi).l2_norm() < 1e-14);

    WavePhysics q = phys();
    q.gamma = 0.0;
    WahlenState w = dyn::wahlen_forward(q, s);
    CHECK((w.zeta - s.psi).l2_norm() == doctest::Approx(0.0));
}

TEST_CASE("single linear mode evolves with frequency Omega_j")
{
    WavePhysics p = phys();
    int j = 1;
    int n = 8;
    std::vector<cplx> z(static_cast<size_t>(2 * n + 1), cplx(0.0));
    z[static_cast<size_t>(j + n)] = cplx(0.7, -0.2);
    WahlenState w = dyn::diag_to_wahlen(p, z, n);

    double T = two_pi / dsp::big_omega_j(p, j);
    WahlenState wt = dyn::linear_flat_evolve(p, w, T);
    CHECK((wt.eta - w.eta).l2_norm() < 1e-12);
    CHECK((wt.zeta - w.zeta).l2_norm() < 1e-12);

    WahlenState wq = dyn::linear_flat_evolve(p, w, T / 4.0);
    auto zq = dyn::wahlen_to_diag(p, wq);
    cplx expected = z[static_cast<size_t>(j + n)] * std::exp(cplx(0.0, -two_pi / 4.0));
    CHECK(std::abs(zq[static_cast<size_t>(j + n)] - expected) < 1e-12);

    // V_{n,sigma} invariance: J Omega_W leaks nothing into other modes
    WahlenState lw = dyn::linear_flat_apply(p, w);
    auto zl = dyn::wahlen_to_diag(p, lw);
    double leak = 0.0;
    for (int k = -n; k <= n; ++k)
        if (k != j) leak += std::abs(zl[static_cast<size_t>(k + n)]);
    CHECK(leak < 1e-12);

    WavePhysics q = phys();
    q.gamma = 0.0;
    CHECK(dsp::big_omega_j(q, -3) == doctest::Approx(dsp::big_omega_j(q, 3)));
}

TEST_CASE("linear-regime trajectory matches the exact linear flow")
{
    WavePhysics p = phys();
    int n = 16;

    // single excited mode: no quadratic feedback onto itself, the phase is
    // clean to O(amplitude^2) relative
    {
        WahlenState w0(n);
        w0.eta.set_cos(1, 1e-6);
        State s0 = dyn::wahlen_backward(p, w0);
        double T = two_pi / dsp::big_omega_j(p, 1);
        dyn::IntegrateConfig cfg;
        cfg.dt = T / 4000.0;
        cfg.t_end = T;
        auto traj = dyn::integrate(p, s0, cfg);
        double tT = traj.times.back();
        auto z0 = dyn::wahlen_to_diag(p, w0);
        auto zT = dyn::wahlen_to_diag(p, dyn::wahlen_forward(p, traj.states.back()));
        for (int j : {1, -1}) {
            cplx a = z0[static_cast<size_t>(j + n)];
            cplx expect = a * std::exp(cplx(0.0, -dsp::big_omega_j(p, j) * tT));
            CHECK(std::abs(zT[static_cast<size_t>(j + n)] - expect) / std::abs(a) < 1e-8);
        }
    }

    // superposition: quadratic interactions feed excited modes at O(amp^2)
    // absolute, so the comparison with the linear flow is absolute
    {
        WahlenState w0(n);
        w0.eta.set_cos(1, 1e-6);
        w0.eta.set_cos(2, 0.5e-6);
        w0.zeta.set_sin(1, 0.3e-6);
        State s0 = dyn::wahlen_backward(p, w0);
        double T = two_pi / dsp::big_omega_j(p, 1);
        dyn::IntegrateConfig cfg;
        cfg.dt = T / 4000.0;
        cfg.t_end = T;
        auto traj = dyn::integrate(p, s0, cfg);
        WahlenState wT = dyn::linear_flat_evolve(p, w0, traj.times.back());
        State lin = dyn::wahlen_backward(p, wT);
        double err = (traj.states.back().eta - lin.eta).l2_norm() +
                     (traj.states.back().psi - lin.psi).l2_norm();
        CHECK(err < 1e-8);
    }
}

TEST_CASE("conservation over several periods at small amplitude")
{
    WavePhysics p = phys();
    int n = 32;
    WahlenState w0(n);
    w0.eta.set_cos(1, 1e-3);
    w0.eta.set_cos(3, 0.3e-3);
    w0.zeta.set_sin(2, 0.5e-3);
    State s0 = dyn::wahlen_backward(p, w0);

    double T = two_pi / dsp::big_omega_j(p, 1);
    dyn::IntegrateConfig cfg;
    cfg.dt = T / 3000.0;
    cfg.t_end = 3.0 * T;
    cfg.checkpoint_stride = 500;
    auto traj = dyn::integrate(p, s0, cfg);
    CHECK_FALSE(traj.report.blew_up);
    CHECK(traj.report.h_drift < 1e-8);
    CHECK(traj.report.mom_drift < 1e-10);
    CHECK(traj.report.eta_mean_max == 0.0);
}

TEST_CASE("reversibility of the flow for reversible data")
{
    WavePhysics p = phys();
    int n = 16;
    State s0(n);
    s0.eta.set_cos(1, 1e-3);
    s0.eta.set_cos(2, 0.4e-3);
    s0.psi.set_sin(1, 0.6e-3);  // eta even, psi odd

    double T = two_pi / dsp::big_omega_j(p, 1);
    dyn::IntegrateConfig cfg;
    cfg.dt = T / 2000.0;
    cfg.t_end = T;
    cfg.checkpoint_stride = 200;
    double defect = dyn::reversibility_defect(p, s0, cfg);
    CHECK(defect < 1e-8);
}

TEST_CASE("lawson integrator agrees with plain rk4")
{
    WavePhysics p = phys();
    int n = 16;
    State s0(n);
    s0.eta.set_cos(1, 1e-3);
    s0.psi.set_sin(1, 0.5e-3);

    dyn::IntegrateConfig a;
    a.dt = 1e-3;
    a.t_end = 2.0;
    a.scheme = dyn::Scheme::rk4;
    dyn::IntegrateConfig b = a;
    b.scheme = dyn::Scheme::rk4_lawson;
    auto ta = dyn::integrate(p, s0, a);
    auto tb = dyn::integrate(p, s0, b);
    double d = (ta.states.back().eta - tb.states.back().eta).l2_norm() +
               (ta.states.back().psi - tb.states.back().psi).l2_norm();
    CHECK(d < 1e-10);
}

TEST_CASE("implicit midpoint conserves energy on long runs")
{
    WavePhysics p = phys();
    int n = 8;
    State s0(n);
    s0.eta.set_cos(1, 5e-3);
    s0.psi.set_sin(1, 2e-3);

    dyn::IntegrateConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 20.0;
    cfg.scheme = dyn::Scheme::implicit_midpoint;
    cfg.checkpoint_stride = 100;
    auto traj = dyn::integrate(p, s0, cfg);
    CHECK(traj.report.h_drift < 1e-9);
}

TEST_CASE("CFL guard raises without the auto stiffness switch")
{
    WavePhysics p = phys();
    State s0(64);
    s0.eta.set_cos(1, 1e-4);
    dyn::IntegrateConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 1.0;
    cfg.auto_stiff = false;
    CHECK_THROWS(dyn::integrate(p, s0, cfg));
}
