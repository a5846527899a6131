#include "vorwave/dynamics.hpp"

#include "vorwave/fft.hpp"

#include <algorithm>
#include <cmath>

namespace vorwave {
namespace dynamics {

WahlenState wahlen_forward(const WavePhysics& p, const State& s)
{
    return {s.eta, s.psi - 0.5 * p.gamma * dx_inverse(s.eta)};
}

State wahlen_backward(const WavePhysics& p, const WahlenState& w)
{
    return {w.eta, w.zeta + 0.5 * p.gamma * dx_inverse(w.eta)};
}

State involution(const State& s) { return {reflect(s.eta), -1.0 * reflect(s.psi)}; }
WahlenState involution(const WahlenState& w) { return {reflect(w.eta), -1.0 * reflect(w.zeta)}; }

State vector_field(const WavePhysics& p, const State& s, const DnoConfig& cfg)
{
    const RealField& eta = s.eta;
    const RealField& psi = s.psi;
    RealField G = dno::g_eta_apply(p, eta, psi, cfg);
    RealField etax = dx(eta);
    RealField psix = dx(psi);

    // eta_t = G(eta) psi + gamma eta eta_x, written as gamma/2 (eta^2)_x so the
    // mean mode vanishes identically
    RealField deta = G + 0.5 * p.gamma * dx(field_product(eta, eta));

    // psi_t = -g eta - psi_x^2/2 + (eta_x psi_x + G)^2 / (2(1+eta_x^2))
    //         + kappa (eta_x / sqrt(1+eta_x^2))_x + gamma eta psi_x + gamma dx^{-1} G
    RealField num = field_product(etax, psix) + G;
    RealField quot = pointwise2(num, etax,
                                [](double n, double ex) { return n * n / (2.0 * (1.0 + ex * ex)); });
    RealField capillary = dx(pointwise(etax, [](double ex) { return ex / std::sqrt(1.0 + ex * ex); }));
    RealField dpsi = -p.g * eta - 0.5 * field_product(psix, psix) + quot +
                     p.kappa * capillary + p.gamma * field_product(eta, psix) +
                     p.gamma * dx_inverse(G);
    dpsi.set_coeff(0, 0.0);
    return {deta, dpsi};
}

double hamiltonian(const WavePhysics& p, const State& s, const DnoConfig& cfg)
{
    const RealField& eta = s.eta;
    const RealField& psi = s.psi;
    RealField G = dno::g_eta_apply(p, eta, psi, cfg);
    double kinetic = 0.5 * l2_inner(psi, G);
    double potential = 0.5 * p.g * l2_inner(eta, eta);
    RealField etax = dx(eta);
    RealField root = pointwise(etax, [](double ex) { return std::sqrt(1.0 + ex * ex); });
    double surface = p.kappa * two_pi * root.mean();
    RealField eta2 = field_product(eta, eta);
    double vort = 0.5 * p.gamma *
                  (-l2_inner(dx(psi), eta2) + p.gamma / 3.0 * l2_inner(eta2, eta));
    return kinetic + potential + surface + vort;
}

double momentum(const WavePhysics& p, const State& s)
{
    WahlenState w = wahlen_forward(p, s);
    return l2_inner(w.zeta, dx(w.eta));
}

WahlenState linear_flat_apply(const WavePhysics& p, const WahlenState& w)
{
    RealField g0eta = dno::g0_apply(p, w.eta);
    RealField g0zeta = dno::g0_apply(p, w.zeta);
    double hg = 0.5 * p.gamma;
    RealField deta = hg * dx_inverse(g0eta) + g0zeta;
    // dx^{-1} and G(0) commute as multipliers
    RealField dzeta = p.kappa * dx(dx(w.eta)) - p.g * w.eta +
                      hg * hg * dx_inverse(dx_inverse(g0eta)) + hg * dx_inverse(g0zeta);
    return {deta, dzeta};
}

std::vector<cplx> wahlen_to_diag(const WavePhysics& p, const WahlenState& w)
{
    int n = w.eta.n_modes();
    std::vector<cplx> z(static_cast<size_t>(2 * n + 1), cplx(0.0));
    for (int j = -n; j <= n; ++j) {
        if (j == 0) continue;
        double M = dispersion::mj_coeff(p, j);
        z[static_cast<size_t>(j + n)] =
            (w.eta.coeff(j) / M + cplx(0.0, 1.0) * M * w.zeta.coeff(j)) / std::sqrt(2.0);
    }
    return z;
}

WahlenState diag_to_wahlen(const WavePhysics& p, const std::vector<cplx>& z, int n_modes)
{
    WahlenState w(n_modes);
    int n = n_modes;
    for (int j = 1; j <= n; ++j) {
        double M = dispersion::mj_coeff(p, j);
        cplx zj = z[static_cast<size_t>(j + n)];
        cplx zmjc = std::conj(z[static_cast<size_t>(-j + n)]);
        // eta_j = M (z_j + conj(z_{-j}))/sqrt(2); zeta_j = -i (z_j - conj(z_{-j}))/(M sqrt(2))
        w.eta.set_coeff(j, M * (zj + zmjc) / std::sqrt(2.0));
        w.zeta.set_coeff(j, cplx(0.0, -1.0) * (zj - zmjc) / (M * std::sqrt(2.0)));
    }
    return w;
}

WahlenState linear_flat_evolve(const WavePhysics& p, const WahlenState& w, double t)
{
    int n = w.eta.n_modes();
    auto z = wahlen_to_diag(p, w);
    for (int j = -n; j <= n; ++j) {
        if (j == 0) continue;
        double Om = dispersion::big_omega_j(p, j);
        z[static_cast<size_t>(j + n)] *= std::exp(cplx(0.0, -Om * t));
    }
    return diag_to_wahlen(p, z, n);
}

namespace {

double max_frequency(const WavePhysics& p, int n_modes)
{
    double m = 0.0;
    for (int j : {n_modes, -n_modes, 1, -1})
        m = std::max(m, std::abs(dispersion::big_omega_j(p, j)));
    return m;
}

double sup_coeff(const State& s)
{
    double m = 0.0;
    for (int j = -s.eta.n_modes(); j <= s.eta.n_modes(); ++j)
        m = std::max({m, std::abs(s.eta.coeff(j)), std::abs(s.psi.coeff(j))});
    return m;
}

State axpy(const State& a, double h, const State& b)
{
    return {a.eta + h * b.eta, a.psi + h * b.psi};
}

State rk4_step(const WavePhysics& p, const State& y, double h, const DnoConfig& cfg)
{
    State k1 = vector_field(p, y, cfg);
    State k2 = vector_field(p, axpy(y, 0.5 * h, k1), cfg);
    State k3 = vector_field(p, axpy(y, 0.5 * h, k2), cfg);
    State k4 = vector_field(p, axpy(y, h, k3), cfg);
    RealField eta = y.eta + (h / 6.0) * (k1.eta + 2.0 * k2.eta + 2.0 * k3.eta + k4.eta);
    RealField psi = y.psi + (h / 6.0) * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
    psi.set_coeff(0, 0.0);
    return {eta, psi};
}

State midpoint_step(const WavePhysics& p, const State& y, double h, const DnoConfig& cfg)
{
    State ynew = axpy(y, h, vector_field(p, y, cfg));
    for (int it = 0; it < 100; ++it) {
        State mid{0.5 * (y.eta + ynew.eta), 0.5 * (y.psi + ynew.psi)};
        State next = axpy(y, h, vector_field(p, mid, cfg));
        next.psi.set_coeff(0, 0.0);
        double diff = (next.eta - ynew.eta).l2_norm() + (next.psi - ynew.psi).l2_norm();
        ynew = next;
        if (diff < 1e-14) break;
    }
    return ynew;
}

// Lawson RK4 in the diagonal complex coordinates of the flat linear part.
struct LawsonStepper {
    const WavePhysics& p;
    const DnoConfig& cfg;
    int n;
    std::vector<double> Om;

    LawsonStepper(const WavePhysics& pp, const DnoConfig& c, int n_modes)
        : p(pp), cfg(c), n(n_modes), Om(static_cast<size_t>(2 * n_modes + 1), 0.0)
    {
        for (int j = -n; j <= n; ++j)
            if (j != 0) Om[static_cast<size_t>(j + n)] = dispersion::big_omega_j(p, j);
    }

    std::vector<cplx> nonlinear(const std::vector<cplx>& z) const
    {
        WahlenState w = diag_to_wahlen(p, z, n);
        State s = wahlen_backward(p, w);
        State xs = vector_field(p, s, cfg);
        WahlenState xw{xs.eta, xs.psi - 0.5 * p.gamma * dx_inverse(xs.eta)};
        WahlenState lin = linear_flat_apply(p, w);
        WahlenState nl{xw.eta - lin.eta, xw.zeta - lin.zeta};
        return wahlen_to_diag(p, nl);
    }

    void phase(std::vector<cplx>& z, double t) const
    {
        for (int j = -n; j <= n; ++j)
            z[static_cast<size_t>(j + n)] *= std::exp(cplx(0.0, -Om[static_cast<size_t>(j + n)] * t));
    }

    std::vector<cplx> shifted_nonlinear(std::vector<cplx> v, double tau) const
    {
        phase(v, tau);
        auto k = nonlinear(v);
        phase(k, -tau);
        return k;
    }

    std::vector<cplx> step(const std::vector<cplx>& z, double h) const
    {
        auto add = [](const std::vector<cplx>& a, double c, const std::vector<cplx>& b) {
            std::vector<cplx> r(a);
            for (size_t i = 0; i < r.size(); ++i) r[i] += c * b[i];
            return r;
        };
        auto k1 = shifted_nonlinear(z, 0.0);
        auto k2 = shifted_nonlinear(add(z, 0.5 * h, k1), 0.5 * h);
        auto k3 = shifted_nonlinear(add(z, 0.5 * h, k2), 0.5 * h);
        auto k4 = shifted_nonlinear(add(z, h, k3), h);
        std::vector<cplx> v(z);
        for (size_t i = 0; i < v.size(); ++i)
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        phase(v, h);
        return v;
    }
};

} // namespace

Trajectory integrate(const WavePhysics& p, const State& s0, const IntegrateConfig& cfg)
{
    if (cfg.dt == 0.0 || cfg.dt * cfg.t_end < 0.0)
        throw std::invalid_argument("integrate: dt and t_end must share their sign");
    int n = s0.eta.n_modes();
    double om_max = max_frequency(p, n);
    Scheme scheme = cfg.scheme;
    if (scheme != Scheme::rk4_lawson && std::abs(cfg.dt) * om_max > cfg.cfl_limit) {
        if (cfg.auto_stiff) scheme = Scheme::rk4_lawson;
        else throw std::runtime_error("integrate: capillary CFL violated, dt*Omega_max = " +
                                      std::to_string(std::abs(cfg.dt) * om_max));
    }

    Trajectory out;
    out.report.scheme_used = scheme;
    DnoConfig dcfg = cfg.dno;

    State y = s0;
    y.psi.set_coeff(0, 0.0);
    out.report.h0 = hamiltonian(p, y, dcfg);
    out.report.mom0 = momentum(p, y);
    double hscale = std::max(std::abs(out.report.h0), 1e-300);

    long nsteps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
    if (std::abs(static_cast<double>(nsteps) * cfg.dt) < std::abs(cfg.t_end) * (1.0 - 1e-12))
        ++nsteps;
    LawsonStepper lawson(p, dcfg, n);
    std::vector<cplx> z;
    if (scheme == Scheme::rk4_lawson) z = wahlen_to_diag(p, wahlen_forward(p, y));

    auto monitor = [&](double t, const State& s) {
        out.report.h_drift = std::max(out.report.h_drift,
                                      std::abs(hamiltonian(p, s, dcfg) - out.report.h0) / hscale);
        out.report.mom_drift =
            std::max(out.report.mom_drift, std::abs(momentum(p, s) - out.report.mom0));
        out.report.eta_mean_max = std::max(out.report.eta_mean_max, std::abs(s.eta.mean()));
        if (cfg.store_trajectory) {
            out.times.push_back(t);
            out.states.push_back(s);
        }
    };
    monitor(0.0, y);

    for (long k = 0; k < nsteps; ++k) {
        double h = cfg.dt;
        switch (scheme) {
            case Scheme::rk4: y = rk4_step(p, y, h, dcfg); break;
            case Scheme::implicit_midpoint: y = midpoint_step(p, y, h, dcfg); break;
            case Scheme::rk4_lawson: {
                z = lawson.step(z, h);
                WahlenState w = diag_to_wahlen(p, z, n);
                y = wahlen_backward(p, w);
                break;
            }
        }
        out.report.steps++;
        if (sup_coeff(y) > cfg.blowup_threshold) {
            out.report.blew_up = true;
            break;
        }
        if ((k + 1) % cfg.checkpoint_stride == 0 || k + 1 == nsteps)
            monitor(static_cast<double>(k + 1) * cfg.dt, y);
    }
    if (!cfg.store_trajectory) {
        out.times.push_back(static_cast<double>(out.report.steps) * cfg.dt);
        out.states.push_back(y);
    }
    return out;
}

double reversibility_defect(const WavePhysics& p, const State& s0, const IntegrateConfig& cfg)
{
    // u(-t) by genuine backward integration, compared with S u(t)
    IntegrateConfig c = cfg;
    c.store_trajectory = true;
    Trajectory fwd = integrate(p, s0, c);
    c.dt = -cfg.dt;
    c.t_end = -cfg.t_end;
    Trajectory bwd = integrate(p, s0, c);

    double worst = 0.0;
    size_t m = std::min(fwd.states.size(), bwd.states.size());
    for (size_t k = 0; k < m; ++k) {
        State su = involution(fwd.states[k]);
        double d = (bwd.states[k].eta - su.eta).l2_norm() + (bwd.states[k].psi - su.psi).l2_norm();
        worst = std::max(worst, d);
    }
    return worst;
}

} // namespace dynamics
} // namespace vorwave
