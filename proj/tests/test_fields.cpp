#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vorwave/fields.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace vorwave;

TEST_CASE("multiplier identity and Hilbert transform on single modes")
{
    RealField f(8);
    f.set_cos(1, 1.0);  // cos(x)

    auto id = apply_multiplier([](int) { return cplx(1.0); }, f);
    CHECK((id - f).l2_norm() == doctest::Approx(0.0));

    // H cos = sin
    RealField s(8);
    s.set_sin(1, 1.0);
    CHECK((hilbert(f) - s).l2_norm() < 1e-15);

    // H(1) = 0
    RealField one(8);
    one.set_coeff(0, 1.0);
    CHECK(hilbert(one).l2_norm() == doctest::Approx(0.0));

    // H^2 = -(Id - pi_0)
    std::mt19937 rng(7);
    RealField g = test::random_field(8, 1.0, rng);
    g.set_coeff(0, 0.37);
    RealField h2 = hilbert(hilbert(g));
    RealField expect = mean_project(g) - g;
    CHECK((h2 - expect).l2_norm() < 1e-14);
}

TEST_CASE("dx, dx_inverse, mean projector")
{
    RealField f(8);
    f.set_cos(3, 1.0);
    RealField d = dx(f);
    RealField expect(8);
    expect.set_sin(3, -3.0);
    CHECK((d - expect).l2_norm() < 1e-14);

    std::mt19937 rng(11);
    RealField g = test::random_field(8, 2.0, rng);
    g.set_coeff(0, -1.2);
    // dx_inverse(dx(g)) = g - mean
    CHECK((dx_inverse(dx(g)) - (g - mean_project(g))).l2_norm() < 1e-14);
    // sign check of dx_inverse: dx_inverse(sin) = -cos... composed with dx gives identity
    RealField sn(8);
    sn.set_sin(1, 1.0);
    CHECK((dx(dx_inverse(sn)) - sn).l2_norm() < 1e-15);
}

TEST_CASE("product matches convolution oracle and analytic case")
{
    RealField c(4);
    c.set_cos(1, 1.0);
    RealField sq = field_product(c, c);  // cos^2 = 1/2 + cos(2x)/2
    CHECK(sq.coeff(0).real() == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(sq.coeff(2).real() == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(std::abs(sq.coeff(1)) < 1e-14);

    std::mt19937 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        RealField f = test::random_field(4, 1.0, rng);
        RealField g = test::random_field(4, 1.0, rng);
        f.set_coeff(0, 0.3);
        g.set_coeff(0, -0.1);
        RealField fg = field_product(f, g);
        RealField oracle = test::convolve_oracle(f, g);
        CHECK((fg - oracle).l2_norm() < 1e-12);
    }
}

TEST_CASE("conjugate symmetry preserved by operations")
{
    std::mt19937 rng(23);
    RealField f = test::random_field(12, 1.0, rng);
    RealField g = test::random_field(12, 0.5, rng);
    CHECK(f.conj_symmetry_defect() < 1e-15);
    CHECK(field_product(f, g).conj_symmetry_defect() < 1e-13);
    CHECK(dx(f).conj_symmetry_defect() < 1e-15);
    CHECK(hilbert(f).conj_symmetry_defect() < 1e-15);
    CHECK(pointwise(f, [](double x) { return std::sin(x) + x * x; }).conj_symmetry_defect() <
          1e-13);
}

TEST_CASE("grid round trip and translation")
{
    std::mt19937 rng(5);
    RealField f = test::random_field(10, 1.0, rng);
    auto v = f.grid_values(64);
    RealField f2 = RealField::from_grid(v, 10);
    CHECK((f - f2).l2_norm() < 1e-13);

    // translate then evaluate equals evaluate shifted
    RealField t = translate(f, 0.37);
    auto tv = t.grid_values(64);
    // compare a few points by direct evaluation
    for (int k : {0, 5, 17}) {
        double x = two_pi * k / 64.0;
        double direct = 0.0;
        for (int j = -10; j <= 10; ++j)
            direct += (f.coeff(j) * std::exp(cplx(0.0, j * (x + 0.37)))).real();
        CHECK(tv[static_cast<size_t>(k)] == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("torus field: traveling embed/extract and shift identity")
{
    // U(psi) = cos(psi_1), jvec = (2): u(phi, x) = cos(phi_1 - 2x)
    TravelingProfile U({2}, 3);
    U.set_coeff({1}, cplx(0.5, 0.0));
    TorusField u = traveling_embed(U, 4);
    CHECK(u.coeff({1}, -2) == cplx(0.5, 0.0));
    CHECK(u.coeff({-1}, 2) == cplx(0.5, 0.0));
    CHECK(traveling_defect(u, {2}) == doctest::Approx(0.0));

    TravelingProfile back = traveling_extract(u, {2});
    CHECK(std::abs(back.coeff({1}) - cplx(0.5, 0.0)) < 1e-15);

    // round trip on a random traveling profile
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    TravelingProfile P({1, 2}, 2);
    for (int l1 = -2; l1 <= 2; ++l1)
        for (int l2 = -2; l2 <= 2; ++l2)
            if (l1 != 0 || l2 != 0) P.set_coeff({l1, l2}, cplx(d(rng), d(rng)));
    TorusField w = traveling_embed(P, 8);
    TravelingProfile Q = traveling_extract(w, {1, 2});
    double diff = 0.0;
    for (int le = 0; le < P.n_ell(); ++le) diff += std::abs(P.coeff_flat(le) - Q.coeff_flat(le));
    CHECK(diff < 1e-14);

    // shifted field u(phi - jvec*s, .) equals tau_s u (traveling characterization)
    double s = 0.37;
    TorusField lhs = shift_phi(w, {1.0 * s, 2.0 * s});
    TorusField rhs = translate_x(w, s);
    CHECK((lhs - rhs).l2_norm() < 1e-13);
}

TEST_CASE("torus product against analytic case and dealiasing")
{
    // (cos(phi - x))^2 = 1/2 + cos(2 phi - 2x)/2
    TravelingProfile U({1}, 2);
    U.set_coeff({1}, cplx(0.5, 0.0));
    TorusField u = traveling_embed(U, 4);
    TorusField sq = field_product(u, u);
    CHECK(sq.coeff({0}, 0).real() == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(sq.coeff({2}, -2).real() == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(conj_symmetry_defect(sq) < 1e-13);
    // product of traveling waves is traveling
    CHECK(traveling_defect(sq, {1}) < 1e-13);
}

TEST_CASE("projections split modes and commute with translations")
{
    SiteSelection sites({1, 2}, {1, -1});  // S = {1, -2}
    CHECK(sites.sites() == std::vector<int>{1, -2});

    std::mt19937 rng(29);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    TorusField u(2, 2, 4);
    for (int le = 0; le < u.n_ell(); ++le)
        for (int j = 0; j <= 4; ++j) u.set_coeff_flat(le, j, cplx(d(rng), d(rng)));

    TorusField t = project_tangential(u, sites);
    TorusField n = project_normal(u, sites);
    for (int le = 0; le < u.n_ell(); ++le)
        for (int j = -4; j <= 4; ++j) {
            if (j == 1 || j == -2) {
                CHECK(std::abs(t.coeff_flat(le, j) - u.coeff_flat(le, j)) < 1e-15);
                CHECK(std::abs(n.coeff_flat(le, j)) == 0.0);
            } else if (j != 0) {
                CHECK(std::abs(n.coeff_flat(le, j) - u.coeff_flat(le, j)) < 1e-15);
                CHECK(std::abs(t.coeff_flat(le, j)) == 0.0);
            }
        }
    // tangential + normal + mean-column = identity
    TorusField meancol(2, 2, 4);
    for (int le = 0; le < u.n_ell(); ++le) meancol.set_coeff_flat(le, 0, u.coeff_flat(le, 0));
    CHECK((t + n + meancol - u).l2_norm() < 1e-14);

    // projections commute with tau_s
    double s = 0.5;
    CHECK((project_tangential(translate_x(u, s), sites) - translate_x(t, s)).l2_norm() < 1e-13);
    CHECK((project_normal(translate_x(u, s), sites) - translate_x(n, s)).l2_norm() < 1e-13);
}

TEST_CASE("omega_dphi_inverse is a right inverse away from resonances")
{
    std::vector<double> omega = {1.0, 1.61803398874989};
    TorusField f(2, 3, 2);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int le = 0; le < f.n_ell(); ++le)
        for (int j = 0; j <= 2; ++j) f.set_coeff_flat(le, j, cplx(d(rng), d(rng)));
    // zero phi-average
    f -= phi_average(f);

    SmallDivisorReport rep;
    TorusField g = omega_dphi_inverse(omega, f, 1e-3, 2.0, &rep);
    CHECK_FALSE(rep.cutoff_active);
    CHECK((omega_dphi(omega, g) - f).l2_norm() < 1e-12);
}

TEST_CASE("x-diffeomorphism composition and inversion")
{
    // beta(phi, x) = 0.1 sin(x) independent of phi
    TorusField beta(1, 2, 6);
    beta.set_coeff({0}, 1, cplx(0.0, -0.05));  // 0.1 sin(x)
    double res = 0.0;
    TorusField breve = invert_diffeo(beta, &res);
    CHECK(res < 1e-12);

    // B^{-1} B = Id on a smooth field
    TorusField u(1, 2, 6);
    u.set_coeff({1}, -1, cplx(0.25, 0.0));
    u.set_coeff({0}, 2, cplx(0.1, 0.05));
    TorusField v = compose_x_diffeo(u, beta);       // u(phi, x + beta)
    TorusField w = compose_x_diffeo(v, breve);      // should recover u up to truncation
    CHECK((w - u).l2_norm() < 2e-3);                // truncation-limited round trip
}

TEST_CASE("angle reparametrization round trip")
{
    std::vector<double> omega = {1.0};
    TorusField p(1, 4, 0);
    p.set_coeff({1}, 0, cplx(0.0, -0.01));  // 0.02 sin(phi)
    double res = 0.0;
    TorusField pb = invert_phi_shift(p, omega, &res);
    CHECK(res < 1e-13);
    // P^{-1} P h = h up to truncation
    TorusField h(1, 4, 2);
    h.set_coeff({1}, 1, cplx(0.3, -0.2));
    TorusField ph = compose_phi_shift(h, omega, p);
    TorusField back = compose_phi_shift(ph, omega, pb);
    CHECK((back - h).l2_norm() < 2e-4);
}

TEST_CASE("parity defects")
{
    TorusField even(1, 2, 2);
    even.set_coeff({1}, -1, cplx(0.5, 0.0));  // cos(phi - x): even(phi,x)
    CHECK(even_defect(even) < 1e-15);
    CHECK(odd_defect(even) == doctest::Approx(1.0));

    TorusField odd(1, 2, 2);
    odd.set_coeff({1}, -1, cplx(0.0, -0.5));  // sin(phi - x): odd(phi,x)
    CHECK(odd_defect(odd) < 1e-15);
}
