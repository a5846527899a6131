#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vorwave/dispersion.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace vorwave;
namespace dsp = vorwave::dispersion;

TEST_CASE("flat DN symbol")
{
    WavePhysics deep{1.0, 1.0, 0.0, WavePhysics::infinity()};
    CHECK(dsp::g0_symbol_int(deep, 3) == doctest::Approx(3.0));
    CHECK(dsp::g0_symbol_int(deep, -3) == doctest::Approx(3.0));

    WavePhysics shallow{1.0, 1.0, 0.0, 1.0};
    CHECK(dsp::g0_symbol_int(shallow, 2) == doctest::Approx(2.0 * std::tanh(2.0)).epsilon(1e-15));
    CHECK(dsp::g0_symbol_int(shallow, -2) == dsp::g0_symbol_int(shallow, 2));
    CHECK_THROWS(dsp::g0_symbol_int(shallow, 0));

    // saturation for large h*j agrees with |j|
    WavePhysics dd{1.0, 1.0, 0.0, 50.0};
    CHECK(dsp::g0_symbol_int(dd, 40) == doctest::Approx(40.0));
}

TEST_CASE("M_j evenness and explicit value")
{
    WavePhysics p{1.0, 1.0, 0.7, 2.0};
    for (int j : {1, 2, 5, 17, 64}) CHECK(dsp::mj_coeff(p, j) == doctest::Approx(dsp::mj_coeff(p, -j)));

    // infinite depth, gamma = 0, g = 1, kappa = 1, j = 1: M_1 = (1/2)^{1/4}
    WavePhysics q{1.0, 1.0, 0.0, WavePhysics::infinity()};
    CHECK(dsp::mj_coeff(q, 1) == doctest::Approx(std::pow(0.5, 0.25)).epsilon(1e-15));
}

TEST_CASE("P coefficients: gamma = 0 gives P_{-n} = -P_n")
{
    WavePhysics p{2.3, 0.9, 0.0, 1.7};
    for (int n : {1, 2, 7}) CHECK(dsp::pj_coeff(p, n, -1) == doctest::Approx(-dsp::pj_coeff(p, n, 1)));
}

TEST_CASE("Omega values and vorticity asymmetry")
{
    // gamma=0, infinite depth, g=1, kappa chosen so kappa + 1 = 4 -> Omega_1 = 2
    WavePhysics p{1.0, 3.0, 0.0, WavePhysics::infinity()};
    CHECK(dsp::big_omega_j(p, 1) == doctest::Approx(2.0).epsilon(1e-15));

    // Omega_j - Omega_{-j} = gamma G_j(0)/j
    WavePhysics q{9.81, 0.5, 1.3, 2.0};
    for (int j : {1, 3, 10, 40}) {
        double lhs = dsp::big_omega_j(q, j) - dsp::big_omega_j(q, -j);
        double rhs = q.gamma * dsp::g0_symbol_int(q, j) / j;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    }

    // high-precision scalar evaluation at h=2, kappa=0.5, g=9.81, gamma=1, j=3
    WavePhysics r{9.81, 0.5, 1.0, 2.0};
    double G = 3.0 * std::tanh(6.0);
    double om = std::sqrt(0.5 * G * 9.0 + 9.81 * G + 0.25 * G * G / 9.0);
    CHECK(dsp::omega_j(r, 3) == doctest::Approx(om).epsilon(1e-15));
    CHECK(dsp::big_omega_j(r, 3) == doctest::Approx(om + 0.5 * G / 3.0).epsilon(1e-15));
}

TEST_CASE("lambda: zero mode, evenness, monotonicity, bound")
{
    WavePhysics p{9.81, 0.8, -0.9, 3.0};
    CHECK(dsp::lambda_j(p, 0) == doctest::Approx(1.0 / (2.0 * 0.8)).epsilon(1e-15));
    for (int j : {1, 2, 9}) CHECK(dsp::lambda_j(p, j) == doctest::Approx(dsp::lambda_j(p, -j)));
    for (int j = 1; j < 200; ++j) CHECK(dsp::lambda_j(p, j + 1) > dsp::lambda_j(p, j));
    for (int j = 1; j <= 200; ++j) CHECK(dsp::lambda_j(p, j) < dsp::lambda_j(p, 0));
}

TEST_CASE("closed-form kappa derivatives vs finite differences")
{
    WavePhysics base{9.81, 1.0, 0.6, 1.5};
    for (int j : {0, 1, 5, 33, 64}) {
        auto om = [&](double kap) {
            WavePhysics q = base;
            q.kappa = kap;
            return dsp::omega_tilde_j(q, j);
        };
        for (int n = 1; n <= 3; ++n) {
            double h = n == 1 ? 1e-6 : (n == 2 ? 1e-4 : 1e-3);
            double fd = test::central_diff(om, base.kappa, n, h);
            double cf = dsp::omega_kappa_derivative(base, j, n);
            CHECK(cf == doctest::Approx(fd).epsilon(1e-5));
        }
        // d_kappa lambda = -2 lambda^2
        auto lam = [&](double kap) {
            WavePhysics q = base;
            q.kappa = kap;
            return dsp::lambda_j(q, j);
        };
        double fdl = test::central_diff(lam, base.kappa, 1, 1e-6);
        double lamv = dsp::lambda_j(base, j);
        CHECK(fdl == doctest::Approx(-2.0 * lamv * lamv).epsilon(1e-6));
    }
}

TEST_CASE("asymptotic remainder")
{
    // g = 0, gamma = 0, infinite depth: omega_j = sqrt(kappa)|j|^{3/2} exactly, c_j = 0
    WavePhysics p{1e-300, 2.0, 0.0, WavePhysics::infinity()};
    CHECK(std::abs(dsp::asymptotic_remainder(p, 7)) < 1e-10);

    // uniform boundedness of c_j / sqrt(kappa) over a scan
    for (double kap : {0.5, 2.0}) {
        WavePhysics q{9.81, kap, 1.0, 1.0};
        double bound = 0.0;
        for (int j = 1; j <= 512; ++j)
            bound = std::max(bound, std::abs(dsp::asymptotic_remainder(q, j)) / std::sqrt(kap));
        CHECK(bound < 20.0);  // frozen from the scan; the point is no growth in j
        // compare tail values: c_j settles to gG/(2 sqrt(kappa |j|^3))-type smallness
        CHECK(std::abs(dsp::asymptotic_remainder(q, 512)) <
              std::abs(dsp::asymptotic_remainder(q, 1)) + 20.0);
    }

    // scalar oracle from the closed expression in the asymptotics lemma
    WavePhysics r{1.0, 1.0, 0.0, 1.0};
    int j = 1;
    double G = std::tanh(1.0);
    double aj = 1.0;
    double num = r.kappa * aj * (G - aj) + r.g * G / aj * (1.0 + 0.25 * r.gamma * r.gamma * G / (r.g * aj * aj));
    double den = 1.0 + std::sqrt(1.0 + (G - aj) / aj +
                                 r.g * G / (r.kappa * aj * aj * aj) *
                                     (1.0 + 0.25 * r.gamma * r.gamma * G / (r.g * aj * aj)));
    CHECK(dsp::asymptotic_remainder(r, j) == doctest::Approx(num / den).epsilon(1e-12));
}
