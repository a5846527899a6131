#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vorwave/dno.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace vorwave;

static WavePhysics deep()
{
    return {1.0, 1.0, 0.0, WavePhysics::infinity()};
}

TEST_CASE("flat operator: multiplier, composed form, kills constants")
{
    WavePhysics p = deep();
    RealField psi(16);
    psi.set_cos(5, 1.0);
    RealField g = dno::g0_apply(p, psi);
    RealField expect(16);
    expect.set_cos(5, 5.0);
    CHECK((g - expect).l2_norm() < 1e-14);

    RealField one(16);
    one.set_coeff(0, 2.5);
    CHECK(dno::g0_apply(p, one).l2_norm() == doctest::Approx(0.0));

    // composed form d_x H T(h) equals the direct symbol, h = 1, all |j| <= 64
    WavePhysics q{1.0, 1.0, 0.0, 1.0};
    for (int j = 1; j <= 64; ++j) {
        RealField f(64);
        f.set_cos(j, 1.0);
        RealField direct = dno::g0_apply(q, f);
        RealField composed = dx(hilbert(apply_multiplier(
            [&q](int k) {
                return k == 0 ? cplx(0.0)
                              : cplx(std::abs(q.depth * k) > 20.0 ? 1.0 : std::tanh(q.depth * std::abs(k)));
            },
            f)));
        CHECK((direct - composed).l2_norm() < 1e-12);
    }
}

TEST_CASE("eta = 0 reduces to the flat operator")
{
    WavePhysics p = deep();
    std::mt19937 rng(41);
    RealField psi = test::random_field(16, 1.0, rng);
    RealField eta(16);
    DnoConfig cfg;
    CHECK((dno::g_eta_apply(p, eta, psi, cfg) - dno::g0_apply(p, psi)).l2_norm() < 1e-14);
}

TEST_CASE("G(eta)[1] = 0 and zero mean output")
{
    for (double depth : {1.5, WavePhysics::infinity()}) {
        WavePhysics p{1.0, 1.0, 0.0, depth};
        std::mt19937 rng(43);
        RealField eta = test::random_field(16, 1e-2, rng);
        RealField one(16);
        one.set_coeff(0, 1.0);
        DnoConfig cfg;
        CHECK(dno::g_eta_apply(p, eta, one, cfg).l2_norm() < 1e-14);

        RealField psi = test::random_field(16, 1.0, rng);
        RealField g = dno::g_eta_apply(p, eta, psi, cfg);
        CHECK(std::abs(g.mean()) == 0.0);
    }
}

TEST_CASE("reversal covariance G(eta^v)[psi^v] = (G(eta)psi)^v")
{
    for (double depth : {2.0, WavePhysics::infinity()}) {
        WavePhysics p{1.0, 1.0, 0.0, depth};
        std::mt19937 rng(47);
        RealField eta = test::random_field(16, 1e-2, rng);
        RealField psi = test::random_field(16, 1.0, rng);
        DnoConfig cfg;
        RealField lhs = dno::g_eta_apply(p, reflect(eta), reflect(psi), cfg);
        RealField rhs = reflect(dno::g_eta_apply(p, eta, psi, cfg));
        CHECK((lhs - rhs).l2_norm() / rhs.l2_norm() < 1e-10);
    }
}

TEST_CASE("translation covariance")
{
    WavePhysics p{1.0, 1.0, 0.0, 1.0};
    std::mt19937 rng(53);
    RealField eta = test::random_field(16, 1e-2, rng);
    RealField psi = test::random_field(16, 1.0, rng);
    DnoConfig cfg;
    double s = two_pi / 7.0;
    RealField lhs = translate(dno::g_eta_apply(p, eta, psi, cfg), s);
    RealField rhs = dno::g_eta_apply(p, translate(eta, s), translate(psi, s), cfg);
    CHECK((lhs - rhs).l2_norm() / rhs.l2_norm() < 1e-10);
}

TEST_CASE("self-adjointness on zero-mean pairs")
{
    for (double depth : {1.0, WavePhysics::infinity()}) {
        WavePhysics p{1.0, 1.0, 0.0, depth};
        std::mt19937 rng(59);
        // band-limited data: the adjoint identity holds exactly below the
        // dealiasing cutoff, test fields stay well inside it
        RealField eta = test::random_field(32, 1e-2, rng, 6);
        RealField u = test::random_field(32, 1.0, rng, 6);
        RealField v = test::random_field(32, 1.0, rng, 6);
        DnoConfig cfg;
        cfg.taylor_order = 5;
        double a = l2_inner(dno::g_eta_apply(p, eta, u, cfg), v);
        double b = l2_inner(u, dno::g_eta_apply(p, eta, v, cfg));
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("shape derivative identity")
{
    for (double depth : {2.0, WavePhysics::infinity()}) {
        WavePhysics p{1.0, 1.0, 0.0, depth};
        std::mt19937 rng(61);
        RealField eta = test::random_field(32, 1e-2, rng, 6);
        RealField etahat = test::random_field(32, 1.0, rng, 6);
        RealField psi = test::random_field(32, 1.0, rng, 6);
        DnoConfig cfg;
        cfg.taylor_order = 4;
        auto chk = dno::shape_derivative_check(p, eta, etahat, psi, cfg, 1e-5);
        CHECK(chk.err < 1e-6);
    }
}

TEST_CASE("shape-derivative residual decreases with taylor order")
{
    WavePhysics p = deep();
    std::mt19937 rng(67);
    RealField eta = test::random_field(32, 8e-2, rng, 4);
    RealField etahat = test::random_field(32, 1.0, rng, 4);
    RealField psi = test::random_field(32, 1.0, rng, 4);
    double prev = 1e9;
    for (int K : {1, 3, 5}) {
        DnoConfig cfg;
        cfg.taylor_order = K;
        auto chk = dno::shape_derivative_check(p, eta, etahat, psi, cfg, 1e-5);
        CHECK(chk.err < prev);
        prev = chk.err;
    }
}

TEST_CASE("B and V trace fields")
{
    WavePhysics p = deep();
    std::mt19937 rng(71);
    DnoConfig cfg;

    // eta = 0: B = G(0) psi, V = psi_x
    RealField psi = test::random_field(16, 1.0, rng);
    RealField eta0(16);
    auto bv = dno::bv_fields(p, eta0, psi, cfg);
    CHECK((bv.B - dno::g0_apply(p, psi)).l2_norm() < 1e-13);
    CHECK((bv.V - dx(psi)).l2_norm() < 1e-13);

    // psi = const: B = 0, V = 0
    RealField c(16);
    c.set_coeff(0, 3.0);
    RealField eta = test::random_field(16, 1e-2, rng);
    auto bv2 = dno::bv_fields(p, eta, c, cfg);
    CHECK(bv2.B.l2_norm() < 1e-13);
    CHECK(bv2.V.l2_norm() < 1e-13);
}

TEST_CASE("parity: eta even, psi odd gives B odd, Vtilde even")
{
    WavePhysics p{1.0, 1.0, 0.8, 1.0};
    std::mt19937 rng(73);
    RealField eta = test::random_even_field(16, 1e-2, rng);
    RealField psi = test::random_odd_field(16, 1.0, rng);
    DnoConfig cfg;
    auto bv = dno::bv_fields(p, eta, psi, cfg);
    // B odd in x: B + reflect(B) = 0
    CHECK((bv.B + reflect(bv.B)).l2_norm() / std::max(bv.B.l2_norm(), 1e-300) < 1e-10);
    CHECK((bv.Vtilde - reflect(bv.Vtilde)).l2_norm() / std::max(bv.Vtilde.l2_norm(), 1e-300) <
          1e-10);
}

TEST_CASE("norm guard rejects steep surfaces")
{
    WavePhysics p = deep();
    RealField eta(8);
    eta.set_cos(1, 0.5);  // slope 0.5 > 0.3
    RealField psi(8);
    psi.set_cos(1, 1.0);
    DnoConfig cfg;
    CHECK_THROWS(dno::g_eta_apply(p, eta, psi, cfg));
    cfg.taylor_order = 9;  // beyond max_taylor
    RealField small(8);
    CHECK_THROWS(dno::g_eta_apply(p, small, psi, cfg));
}
