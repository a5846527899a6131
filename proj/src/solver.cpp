#include "vorwave/solver.hpp"

#include "vorwave/fft.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace vorwave {
namespace solver {

namespace {

const double sqrt2 = std::sqrt(2.0);
const double sqrt_pi = std::sqrt(3.14159265358979323846);

std::vector<double> grid_angle(int nu, int mphi, size_t g)
{
    std::vector<double> phi(static_cast<size_t>(nu));
    size_t rem = g;
    for (int k = nu - 1; k >= 0; --k) {
        phi[static_cast<size_t>(k)] =
            two_pi * static_cast<double>(rem % static_cast<size_t>(mphi)) / mphi;
        rem /= static_cast<size_t>(mphi);
    }
    return phi;
}

// kills the tangential complex modes z_j, j in S (and the mean column) of a
// Wahlen pair; local in (ell, j)
void pair_project_normal(TorusField& eta, TorusField& zeta, const SiteSelection& sites,
                         const WavePhysics& p)
{
    int n = eta.n_modes();
    for (int le = 0; le < eta.n_ell(); ++le) {
        for (int j = -n; j <= n; ++j) {
            if (j == 0) {
                eta.set_coeff_raw(le, 0, cplx(0.0));
                zeta.set_coeff_raw(le, 0, cplx(0.0));
                continue;
            }
            bool kill_z = sites.contains(j);
            bool kill_y = sites.contains(-j);
            if (!kill_z && !kill_y) continue;
            double M = dispersion::mj_coeff(p, j);
            cplx a = eta.coeff_flat(le, j), b = zeta.coeff_flat(le, j);
            cplx z = (a / M + cplx(0.0, 1.0) * M * b) / sqrt2;
            cplx y = (a / M - cplx(0.0, 1.0) * M * b) / sqrt2;
            if (kill_z) z = 0.0;
            if (kill_y) y = 0.0;
            eta.set_coeff_raw(le, j, M * (z + y) / sqrt2);
            zeta.set_coeff_raw(le, j, cplx(0.0, -1.0) * (z - y) / (M * sqrt2));
        }
    }
}

} // namespace

TorusEmbedding::TorusEmbedding(SiteSelection s, WavePhysics p, int nphi, int nmodes)
    : sites(std::move(s)),
      physics(p),
      n_phi(nphi),
      n_modes(nmodes),
      w_eta(sites.nu(), nphi, nmodes),
      w_zeta(sites.nu(), nphi, nmodes)
{
    int nv = sites.nu();
    for (int a = 0; a < nv; ++a) {
        Theta.emplace_back(nv, nphi, 0);
        I.emplace_back(nv, nphi, 0);
    }
    omega.assign(static_cast<size_t>(nv), 0.0);
    alpha.assign(static_cast<size_t>(nv), 0.0);
    xi.assign(static_cast<size_t>(nv), 1.0);
}

double TorusEmbedding::constraint_defect() const
{
    double d = 0.0;
    for (int a = 0; a < nu(); ++a) {
        d = std::max(d, odd_phi_defect(Theta[static_cast<size_t>(a)]));
        d = std::max(d, even_phi_defect(I[static_cast<size_t>(a)]));
        // traveling: angle components supported on jvec . ell = 0
        double off = 0.0, tot = 0.0;
        const TorusField& th = Theta[static_cast<size_t>(a)];
        const TorusField& If = I[static_cast<size_t>(a)];
        for (int le = 0; le < th.n_ell(); ++le) {
            auto e = th.ell_of(le);
            int dotv = 0;
            for (int k = 0; k < nu(); ++k)
                dotv += sites.jvec()[static_cast<size_t>(k)] * e[static_cast<size_t>(k)];
            double m = std::norm(th.coeff_flat(le, 0)) + std::norm(If.coeff_flat(le, 0));
            tot += m;
            if (dotv != 0) off += m;
        }
        if (tot > 0.0) d = std::max(d, std::sqrt(off / tot));
    }
    d = std::max(d, traveling_defect(w_eta, sites.jvec()));
    d = std::max(d, traveling_defect(w_zeta, sites.jvec()));
    if (w_eta.l2_norm() > 0.0) d = std::max(d, even_defect(w_eta));
    if (w_zeta.l2_norm() > 0.0) d = std::max(d, odd_defect(w_zeta));
    return d;
}

TorusEmbedding linear_seed(const WavePhysics& p, const SiteSelection& sites,
                           const std::vector<double>& xi, double epsilon, int n_phi,
                           int n_modes)
{
    for (int s : sites.sites())
        if (std::abs(s) > n_modes)
            throw std::invalid_argument("linear_seed: site exceeds n_modes");
    TorusEmbedding emb(sites, p, n_phi, n_modes);
    emb.xi = xi;
    emb.epsilon = epsilon;
    emb.omega = dispersion::frequency_vector(p, sites.sites());
    emb.alpha = emb.omega;
    return emb;
}

WahlenState action_angle_map(const TorusEmbedding& emb, const std::vector<double>& phi)
{
    int n = emb.n_modes;
    WahlenState out(n);
    // tangential part: (1/sqrt(pi)) sum_a sqrt(I_a + xi_a) (M cos(theta_a - j x),
    //                                                       -M^{-1} sin(theta_a - j x))
    for (int a = 0; a < emb.nu(); ++a) {
        double th = phi[static_cast<size_t>(a)];
        double Ia = 0.0;
        const TorusField& Th = emb.Theta[static_cast<size_t>(a)];
        const TorusField& If = emb.I[static_cast<size_t>(a)];
        for (int le = 0; le < Th.n_ell(); ++le) {
            auto e = Th.ell_of(le);
            double ph = 0.0;
            for (int k = 0; k < emb.nu(); ++k)
                ph += e[static_cast<size_t>(k)] * phi[static_cast<size_t>(k)];
            cplx rot = std::exp(cplx(0.0, ph));
            th += (Th.coeff_flat(le, 0) * rot).real();
            Ia += (If.coeff_flat(le, 0) * rot).real();
        }
        double amp = Ia + emb.xi[static_cast<size_t>(a)];
        if (std::abs(Ia) >= emb.xi[static_cast<size_t>(a)] || amp <= 0.0)
            throw std::runtime_error("action_angle_map: action outside |I| < xi");
        int j = emb.sites.sites()[static_cast<size_t>(a)];
        double M = dispersion::mj_coeff(emb.physics, j);
        double r = std::sqrt(amp) / sqrt_pi;
        cplx eith = std::exp(cplx(0.0, -th));
        out.eta.set_coeff(j, out.eta.coeff(j) + M * r * 0.5 * eith);
        out.zeta.set_coeff(j, out.zeta.coeff(j) + cplx(0.0, -0.5) * r / M * eith);
    }
    // normal slice w(phi, .)
    RealField etaw(n), zetaw(n);
    for (int le = 0; le < emb.w_eta.n_ell(); ++le) {
        auto e = emb.w_eta.ell_of(le);
        double ph = 0.0;
        for (int k = 0; k < emb.nu(); ++k)
            ph += e[static_cast<size_t>(k)] * phi[static_cast<size_t>(k)];
        cplx rot = std::exp(cplx(0.0, ph));
        for (int j = 1; j <= n; ++j) {
            etaw.set_coeff(j, etaw.coeff(j) + rot * emb.w_eta.coeff_flat(le, j));
            zetaw.set_coeff(j, zetaw.coeff(j) + rot * emb.w_zeta.coeff_flat(le, j));
        }
    }
    out.eta += etaw;
    out.zeta += zetaw;
    return out;
}

FVariation::FVariation(int nu, int n_phi, int n_modes)
    : Fw_eta(nu, n_phi, n_modes), Fw_zeta(nu, n_phi, n_modes)
{
    for (int a = 0; a < nu; ++a) {
        F_Theta.emplace_back(nu, n_phi, 0);
        F_I.emplace_back(nu, n_phi, 0);
    }
}

double FVariation::norm() const
{
    double s = 0.0;
    for (const auto& f : F_Theta) s += f.l2_norm() * f.l2_norm();
    for (const auto& f : F_I) s += f.l2_norm() * f.l2_norm();
    s += Fw_eta.l2_norm() * Fw_eta.l2_norm();
    s += Fw_zeta.l2_norm() * Fw_zeta.l2_norm();
    return std::sqrt(s);
}

FVariation residual_F(const TorusEmbedding& emb, const DnoConfig& cfg)
{
    const WavePhysics& p = emb.physics;
    int nu = emb.nu();
    int n = emb.n_modes;
    int P = emb.n_phi;
    int mphi = fft::next_fast_size(3 * P + 1);
    size_t ngrid = 1;
    for (int k = 0; k < nu; ++k) ngrid *= static_cast<size_t>(mphi);
    int nj = 2 * n + 1;

    FVariation F(nu, P, n);
    std::vector<double> Omega = dispersion::frequency_vector(p, emb.sites.sites());

    std::vector<std::vector<cplx>> thp, Ip;
    for (int a = 0; a < nu; ++a) {
        thp.push_back(phi_grid_columns(emb.Theta[static_cast<size_t>(a)], mphi));
        Ip.push_back(phi_grid_columns(emb.I[static_cast<size_t>(a)], mphi));
    }
    std::vector<cplx> wcols_eta = phi_grid_columns(emb.w_eta, mphi);
    std::vector<cplx> wcols_zeta = phi_grid_columns(emb.w_zeta, mphi);

    std::vector<double> Mj(static_cast<size_t>(nu));
    for (int a = 0; a < nu; ++a)
        Mj[static_cast<size_t>(a)] =
            dispersion::mj_coeff(p, emb.sites.sites()[static_cast<size_t>(a)]);

    bool linear = emb.epsilon == 0.0;

    std::vector<cplx> dIH(ngrid * static_cast<size_t>(nu), cplx(0.0));
    std::vector<cplx> dThH(ngrid * static_cast<size_t>(nu), cplx(0.0));
    std::vector<cplx> Xw_eta(ngrid * static_cast<size_t>(nj), cplx(0.0));
    std::vector<cplx> Xw_zeta(ngrid * static_cast<size_t>(nj), cplx(0.0));

    for (size_t g = 0; g < ngrid; ++g) {
        std::vector<double> phi = grid_angle(nu, mphi, g);
        RealField weta(n), wzeta(n);
        for (int j = 0; j <= n; ++j) {
            cplx a = wcols_eta[g * static_cast<size_t>(nj) + static_cast<size_t>(j + n)];
            cplx am = wcols_eta[g * static_cast<size_t>(nj) + static_cast<size_t>(-j + n)];
            weta.set_coeff(j, 0.5 * (a + std::conj(am)));
            cplx b = wcols_zeta[g * static_cast<size_t>(nj) + static_cast<size_t>(j + n)];
            cplx bm = wcols_zeta[g * static_cast<size_t>(nj) + static_cast<size_t>(-j + n)];
            wzeta.set_coeff(j, 0.5 * (b + std::conj(bm)));
        }

        if (linear) {
            WahlenState lw = dynamics::linear_flat_apply(p, {weta, wzeta});
            for (int j = -n; j <= n; ++j) {
                Xw_eta[g * static_cast<size_t>(nj) + static_cast<size_t>(j + n)] = lw.eta.coeff(j);
                Xw_zeta[g * static_cast<size_t>(nj) + static_cast<size_t>(j + n)] = lw.zeta.coeff(j);
            }
            for (int a = 0; a < nu; ++a)
                dIH[g * static_cast<size_t>(nu) + static_cast<size_t>(a)] = Omega[static_cast<size_t>(a)];
            continue;
        }

        std::vector<double> th(static_cast<size_t>(nu)), amp(static_cast<size_t>(nu));
        WahlenState u{weta, wzeta};
        for (int a = 0; a < nu; ++a) {
            double Ia = Ip[static_cast<size_t>(a)][g].real();
            th[static_cast<size_t>(a)] = phi[static_cast<size_t>(a)] + thp[static_cast<size_t>(a)][g].real();
            amp[static_cast<size_t>(a)] = Ia + emb.xi[static_cast<size_t>(a)];
            if (amp[static_cast<size_t>(a)] <= 0.0 ||
                std::abs(Ia) >= emb.xi[static_cast<size_t>(a)])
                throw std::runtime_error("residual_F: action outside |I| < xi");
            int j = emb.sites.sites()[static_cast<size_t>(a)];
            double M = Mj[static_cast<size_t>(a)];
            double r = std::sqrt(amp[static_cast<size_t>(a)]) / sqrt_pi;
            cplx eith = std::exp(cplx(0.0, -th[static_cast<size_t>(a)]));
            u.eta.set_coeff(j, u.eta.coeff(j) + M * r * 0.5 * eith);
            u.zeta.set_coeff(j, u.zeta.coeff(j) + cplx(0.0, -0.5) * r / M * eith);
        }

        // L2 gradient of the Wahlen Hamiltonian through the full vector field
        RealField se = emb.epsilon * u.eta;
        RealField sp = emb.epsilon * u.zeta + 0.5 * p.gamma * dx_inverse(se);
        State X = dynamics::vector_field(p, {se, sp}, cfg);
        RealField XW1 = X.eta;
        RealField XW2 = X.psi - 0.5 * p.gamma * dx_inverse(X.eta);
        double inv_eps = 1.0 / emb.epsilon;
        RealField grad_eta = -inv_eps * XW2;
        RealField grad_zeta = inv_eps * XW1;

        for (int a = 0; a < nu; ++a) {
            int j = emb.sites.sites()[static_cast<size_t>(a)];
            double M = Mj[static_cast<size_t>(a)];
            double r = std::sqrt(amp[static_cast<size_t>(a)]) / sqrt_pi;
            cplx eith = std::exp(cplx(0.0, -th[static_cast<size_t>(a)]));
            RealField dIe(n), dIz(n), dTe(n), dTz(n);
            double rI = 0.5 / (sqrt_pi * std::sqrt(amp[static_cast<size_t>(a)]));
            dIe.set_coeff(j, M * rI * 0.5 * eith);
            dIz.set_coeff(j, cplx(0.0, -0.5) * rI / M * eith);
            dTe.set_coeff(j, M * r * cplx(0.0, -0.5) * eith);
            dTz.set_coeff(j, -0.5 * r / M * eith);
            dIH[g * static_cast<size_t>(nu) + static_cast<size_t>(a)] =
                l2_inner(grad_eta, dIe) + l2_inner(grad_zeta, dIz);
            dThH[g * static_cast<size_t>(nu) + static_cast<size_t>(a)] =
                l2_inner(grad_eta, dTe) + l2_inner(grad_zeta, dTz);
        }

        for (int j = -n; j <= n; ++j) {
            Xw_eta[g * static_cast<size_t>(nj) + static_cast<size_t>(j + n)] = inv_eps * XW1.coeff(j);
            Xw_zeta[g * static_cast<size_t>(nj) + static_cast<size_t>(j + n)] = inv_eps * XW2.coeff(j);
        }
    }

    for (int a = 0; a < nu; ++a) {
        std::vector<cplx> da(ngrid), dt(ngrid);
        for (size_t g = 0; g < ngrid; ++g) {
            da[g] = dIH[g * static_cast<size_t>(nu) + static_cast<size_t>(a)];
            dt[g] = dThH[g * static_cast<size_t>(nu) + static_cast<size_t>(a)];
        }
        TorusField dIHf = columns_to_field(da, nu, P, 0, mphi);
        TorusField dThHf = columns_to_field(dt, nu, P, 0, mphi);
        TorusField ft = omega_dphi(emb.omega, emb.Theta[static_cast<size_t>(a)]) - dIHf;
        std::vector<int> zero(static_cast<size_t>(nu), 0);
        ft.set_coeff(zero, 0,
                     ft.coeff(zero, 0) + emb.omega[static_cast<size_t>(a)] -
                         emb.alpha[static_cast<size_t>(a)] + Omega[static_cast<size_t>(a)]);
        F.F_Theta[static_cast<size_t>(a)] = ft;
        F.F_I[static_cast<size_t>(a)] =
            omega_dphi(emb.omega, emb.I[static_cast<size_t>(a)]) + dThHf;
    }

    TorusField Xe = columns_to_field(Xw_eta, nu, P, n, mphi);
    TorusField Xz = columns_to_field(Xw_zeta, nu, P, n, mphi);
    pair_project_normal(Xe, Xz, emb.sites, p);
    F.Fw_eta = omega_dphi(emb.omega, emb.w_eta) - Xe;
    F.Fw_zeta = omega_dphi(emb.omega, emb.w_zeta) - Xz;
    return F;
}

// ---------------------------------------------------------------------------
// reduced coordinates: the reversible-traveling subspace is parameterized by
//   Im Theta_{a,ell} on a half lattice of {jvec.ell = 0},
//   Re I_{a,ell} on the same half lattice (mean pinned to zero),
//   real diagonal coordinates z_{ell,j} on the traveling normal support,
//   plus omega (solution formulation) or alpha (hypothetical conjugation).

namespace {

struct ReducedBasis {
    int nu, P, N;
    std::vector<int> tang_half;
    int le_zero = 0;
    std::vector<std::pair<int, int>> wsite;
    std::vector<size_t> wmirror;  // index of the site (-ell, -j) in wsite
    bool solve_omega = true;
    size_t n_param = 0;

    ReducedBasis(const TorusEmbedding& emb, bool solve_om)
        : nu(emb.nu()), P(emb.n_phi), N(emb.n_modes), solve_omega(solve_om)
    {
        TorusField probe(nu, P, 0);
        std::vector<int> zero(static_cast<size_t>(nu), 0);
        le_zero = probe.ell_index(zero);
        const auto& jv = emb.sites.jvec();
        for (int le = 0; le < probe.n_ell(); ++le) {
            auto e = probe.ell_of(le);
            int dotv = 0;
            bool positive = false, nonzero = false;
            for (int k = 0; k < nu; ++k) {
                dotv += jv[static_cast<size_t>(k)] * e[static_cast<size_t>(k)];
                if (!nonzero && e[static_cast<size_t>(k)] != 0) {
                    nonzero = true;
                    positive = e[static_cast<size_t>(k)] > 0;
                }
            }
            if (!nonzero) continue;
            if (dotv == 0 && positive) tang_half.push_back(le);
            if (dotv != 0) {
                int j = -dotv;
                if (std::abs(j) <= N && emb.sites.is_normal_site(j)) wsite.emplace_back(le, j);
            }
        }
        // mirror table
        wmirror.assign(wsite.size(), 0);
        TorusField wprobe(nu, P, N);
        for (size_t i = 0; i < wsite.size(); ++i) {
            auto e = wprobe.ell_of(wsite[i].first);
            std::vector<int> me(e.size());
            for (size_t k = 0; k < e.size(); ++k) me[k] = -e[k];
            int mle = wprobe.ell_index(me);
            for (size_t r = 0; r < wsite.size(); ++r)
                if (wsite[r].first == mle && wsite[r].second == -wsite[i].second) {
                    wmirror[i] = r;
                    break;
                }
        }
        n_param = static_cast<size_t>(nu) * tang_half.size() * 2 + wsite.size() +
                  static_cast<size_t>(nu);
    }

    Eigen::VectorXd pack(const TorusEmbedding& emb) const
    {
        Eigen::VectorXd x(static_cast<long>(n_param));
        long q = 0;
        for (int a = 0; a < nu; ++a)
            for (int le : tang_half)
                x[q++] = emb.Theta[static_cast<size_t>(a)].coeff_flat(le, 0).imag();
        for (int a = 0; a < nu; ++a)
            for (int le : tang_half)
                x[q++] = emb.I[static_cast<size_t>(a)].coeff_flat(le, 0).real();
        for (auto [le, j] : wsite) {
            double M = dispersion::mj_coeff(emb.physics, j);
            cplx z = (emb.w_eta.coeff_flat(le, j) / M +
                      cplx(0.0, 1.0) * M * emb.w_zeta.coeff_flat(le, j)) /
                     sqrt2;
            x[q++] = z.real();
        }
        for (int a = 0; a < nu; ++a)
            x[q++] = solve_omega ? emb.omega[static_cast<size_t>(a)]
                                 : emb.alpha[static_cast<size_t>(a)];
        return x;
    }

    void unpack(const Eigen::VectorXd& x, TorusEmbedding& emb) const
    {
        long q = 0;
        TorusField probe(nu, P, 0);
        auto mirror_of = [&](int le) {
            auto e = probe.ell_of(le);
            std::vector<int> me(e.size());
            for (size_t k = 0; k < e.size(); ++k) me[k] = -e[k];
            return probe.ell_index(me);
        };
        for (int a = 0; a < nu; ++a) {
            TorusField th(nu, P, 0);
            for (int le : tang_half) {
                double t = x[q++];
                th.set_coeff_raw(le, 0, cplx(0.0, t));
                th.set_coeff_raw(mirror_of(le), 0, cplx(0.0, -t));
            }
            emb.Theta[static_cast<size_t>(a)] = th;
        }
        for (int a = 0; a < nu; ++a) {
            TorusField If(nu, P, 0);
            for (int le : tang_half) {
                double c = x[q++];
                If.set_coeff_raw(le, 0, cplx(c, 0.0));
                If.set_coeff_raw(mirror_of(le), 0, cplx(c, 0.0));
            }
            emb.I[static_cast<size_t>(a)] = If;
        }
        std::vector<double> zval(wsite.size());
        for (size_t i = 0; i < wsite.size(); ++i) zval[i] = x[q++];
        TorusField we(nu, P, N), wz(nu, P, N);
        for (size_t i = 0; i < wsite.size(); ++i) {
            auto [le, j] = wsite[i];
            double zm = zval[wmirror[i]];
            double M = dispersion::mj_coeff(emb.physics, j);
            we.set_coeff_raw(le, j, cplx(M * (zval[i] + zm) / sqrt2, 0.0));
            wz.set_coeff_raw(le, j, cplx(0.0, -(zval[i] - zm) / (M * sqrt2)));
        }
        emb.w_eta = we;
        emb.w_zeta = wz;
        for (int a = 0; a < nu; ++a) {
            if (solve_omega) emb.omega[static_cast<size_t>(a)] = x[q++];
            else emb.alpha[static_cast<size_t>(a)] = x[q++];
        }
    }

    Eigen::VectorXd pack_residual(const FVariation& F, const WavePhysics& p) const
    {
        Eigen::VectorXd r(static_cast<long>(n_param));
        long q = 0;
        for (int a = 0; a < nu; ++a) {
            for (int le : tang_half)
                r[q++] = F.F_Theta[static_cast<size_t>(a)].coeff_flat(le, 0).real();
            r[q++] = F.F_Theta[static_cast<size_t>(a)].coeff_flat(le_zero, 0).real();
        }
        for (int a = 0; a < nu; ++a)
            for (int le : tang_half)
                r[q++] = F.F_I[static_cast<size_t>(a)].coeff_flat(le, 0).imag();
        for (auto [le, j] : wsite) {
            double M = dispersion::mj_coeff(p, j);
            cplx v = (F.Fw_eta.coeff_flat(le, j) / M +
                      cplx(0.0, 1.0) * M * F.Fw_zeta.coeff_flat(le, j)) /
                     sqrt2;
            r[q++] = v.imag();
        }
        return r;
    }
};

} // namespace

SolveReport newton_solve(TorusEmbedding& emb, const SolveConfig& cfg)
{
    SolveReport rep;
    if (cfg.check_margins) {
        auto dio =
            nonres::diophantine_margin(emb.omega, cfg.nonres_cfg.ell_max, cfg.nonres_cfg.tau);
        rep.diophantine_margin = dio.worst_margin / cfg.nonres_cfg.upsilon;
        nonres::FrequencyModel model;
        model.physics = emb.physics;
        double worst = std::numeric_limits<double>::infinity();
        for (auto cls : {nonres::MelnikovClass::first, nonres::MelnikovClass::second_minus,
                         nonres::MelnikovClass::second_plus}) {
            for (const auto& t : nonres::momentum_tuples(emb.sites, cls, cfg.nonres_cfg))
                worst = std::min(worst, nonres::melnikov_margin(model, emb.sites, emb.omega,
                                                                cls, t, cfg.nonres_cfg));
        }
        rep.worst_melnikov_margin = std::isfinite(worst) ? worst : 0.0;
        if (rep.diophantine_margin < cfg.margin_threshold) {
            rep.refusal = "diophantine margin " + std::to_string(rep.diophantine_margin) +
                          " below threshold";
            return rep;
        }
        if (std::isfinite(worst) && worst < cfg.margin_threshold) {
            rep.refusal =
                "melnikov margin " + std::to_string(worst) + " below threshold";
            return rep;
        }
    }

    if (cfg.solve_omega)
        emb.alpha = dispersion::frequency_vector(emb.physics, emb.sites.sites());

    ReducedBasis basis(emb, cfg.solve_omega);
    auto eval = [&](const Eigen::VectorXd& x) {
        TorusEmbedding e = emb;
        basis.unpack(x, e);
        FVariation F = residual_F(e, cfg.dno);
        return basis.pack_residual(F, emb.physics);
    };

    Eigen::VectorXd x = basis.pack(emb);
    Eigen::VectorXd r = eval(x);
    double rn = r.norm();
    rep.residual_history.push_back(rn);

    long m = static_cast<long>(basis.n_param);
    for (int it = 0; it < cfg.max_iter && rn > cfg.tol; ++it) {
        Eigen::MatrixXd J(m, m);
        std::atomic<long> col{0};
        auto worker = [&]() {
            for (;;) {
                long c = col.fetch_add(1);
                if (c >= m) break;
                double h = cfg.fd_step * std::max(1.0, std::abs(x[c]));
                Eigen::VectorXd xp = x, xm = x;
                xp[c] += h;
                xm[c] -= h;
                J.col(c) = (eval(xp) - eval(xm)) / (2.0 * h);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < std::max(1, cfg.n_threads); ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();

        Eigen::VectorXd delta = J.partialPivLu().solve(r);
        double t = 1.0;
        Eigen::VectorXd xn = x, rnew = r;
        double rnn = rn;
        while (t >= cfg.damping_min) {
            xn = x - t * delta;
            rnew = eval(xn);
            rnn = rnew.norm();
            if (rnn < (1.0 - 0.25 * t) * rn || rnn < cfg.tol) break;
            t *= 0.5;
        }
        rep.step_norms.push_back(t * delta.norm());
        if (rnn >= rn) break;  // no decrease at maximal damping
        x = xn;
        r = rnew;
        rn = rnn;
        rep.residual_history.push_back(rn);
        rep.iterations = it + 1;
    }

    basis.unpack(x, emb);
    rep.final_residual = rn;
    rep.converged = rn <= 10.0 * cfg.tol;
    rep.freq_shift.resize(static_cast<size_t>(emb.nu()));
    for (int a = 0; a < emb.nu(); ++a)
        rep.freq_shift[static_cast<size_t>(a)] =
            emb.alpha[static_cast<size_t>(a)] - emb.omega[static_cast<size_t>(a)];
    rep.constraint_defect = emb.constraint_defect();
    return rep;
}

std::vector<std::pair<TorusEmbedding, SolveReport>> continuation(const TorusEmbedding& emb0,
                                                                 const SolveConfig& cfg,
                                                                 double s, int steps)
{
    std::vector<std::pair<TorusEmbedding, SolveReport>> out;
    TorusEmbedding emb = emb0;
    for (int k = 0; k < steps; ++k) {
        if (k > 0) {
            for (auto& v : emb.xi) v *= s;
            for (auto& f : emb.Theta) f *= s;
            for (auto& f : emb.I) f *= s;
            emb.w_eta *= s;
            emb.w_zeta *= s;
        }
        SolveReport rep = newton_solve(emb, cfg);
        out.emplace_back(emb, rep);
        if (!rep.converged) break;
    }
    return out;
}

ValidationReport validate_solution(const TorusEmbedding& emb, const DnoConfig& cfg,
                                   double n_periods, double dt_factor)
{
    ValidationReport vr;
    const WavePhysics& p = emb.physics;

    double xin = 0.0;
    for (double v : emb.xi) xin += v;
    xin = std::sqrt(xin);
    int mphi = fft::next_fast_size(3 * emb.n_phi + 1);
    size_t ngrid = 1;
    for (int k = 0; k < emb.nu(); ++k) ngrid *= static_cast<size_t>(mphi);

    TorusEmbedding seed = emb;
    for (auto& f : seed.Theta) f *= 0.0;
    for (auto& f : seed.I) f *= 0.0;
    seed.w_eta *= 0.0;
    seed.w_zeta *= 0.0;

    double sup_r = 0.0;
    for (size_t g = 0; g < ngrid; ++g) {
        auto phi = grid_angle(emb.nu(), mphi, g);
        WahlenState full = action_angle_map(emb, phi);
        WahlenState lin = action_angle_map(seed, phi);
        double d = (full.eta - lin.eta).l2_norm() + (full.zeta - lin.zeta).l2_norm();
        sup_r = std::max(sup_r, d);
    }
    vr.correction_ratio = sup_r / std::max(xin, 1e-300);

    double om1 = std::abs(emb.omega[0]);
    double T = n_periods * two_pi / om1;
    vr.t_end = T;
    WahlenState w0 =
        action_angle_map(emb, std::vector<double>(static_cast<size_t>(emb.nu()), 0.0));
    State s0 = dynamics::wahlen_backward(p, {emb.epsilon * w0.eta, emb.epsilon * w0.zeta});

    dynamics::IntegrateConfig icfg;
    icfg.dno = cfg;
    icfg.t_end = T;
    double om_max = std::abs(dispersion::big_omega_j(p, emb.n_modes));
    icfg.dt = std::min(dt_factor * two_pi / om1, 2.0 / om_max);
    icfg.store_trajectory = true;
    icfg.checkpoint_stride = std::max(1, static_cast<int>(T / icfg.dt) / 32);
    auto traj = dynamics::integrate(p, s0, icfg);
    vr.flow = traj.report;

    for (size_t k = 0; k < traj.states.size(); ++k) {
        double t = traj.times[k];
        std::vector<double> phi(static_cast<size_t>(emb.nu()));
        for (int a = 0; a < emb.nu(); ++a)
            phi[static_cast<size_t>(a)] = emb.omega[static_cast<size_t>(a)] * t;
        WahlenState wt = action_angle_map(emb, phi);
        State st = dynamics::wahlen_backward(p, {emb.epsilon * wt.eta, emb.epsilon * wt.zeta});
        double d = (traj.states[k].eta - st.eta).l2_norm() +
                   (traj.states[k].psi - st.psi).l2_norm();
        vr.max_deviation = std::max(vr.max_deviation, d);
    }
    return vr;
}

IsotropyReport isotropy_check(const TorusEmbedding& emb)
{
    IsotropyReport rep;
    int nu = emb.nu();
    int mphi = fft::next_fast_size(3 * emb.n_phi + 1);

    // a_k(phi) = -([d_phi theta]^T I)_k + 1/2 (J_angle^{-1} w, d_{phi_k} w)_{L2_x}
    std::vector<TorusField> ak;
    for (int k = 0; k < nu; ++k) {
        TorusField acc(nu, emb.n_phi, 0);
        for (int a = 0; a < nu; ++a) {
            TorusField dth = apply_multiplier(
                [&](const std::vector<int>& ell, int) {
                    return cplx(0.0, ell[static_cast<size_t>(k)]);
                },
                emb.Theta[static_cast<size_t>(a)]);
            if (a == k) {
                TorusField one(nu, emb.n_phi, 0);
                std::vector<int> zero(static_cast<size_t>(nu), 0);
                one.set_coeff(zero, 0, 1.0);
                dth += one;
            }
            acc -= field_product(dth, emb.I[static_cast<size_t>(a)]);
        }
        TorusField dwe = apply_multiplier(
            [&](const std::vector<int>& ell, int) {
                return cplx(0.0, ell[static_cast<size_t>(k)]);
            },
            emb.w_eta);
        TorusField dwz = apply_multiplier(
            [&](const std::vector<int>& ell, int) {
                return cplx(0.0, ell[static_cast<size_t>(k)]);
            },
            emb.w_zeta);
        TorusField je = -1.0 * emb.w_zeta;
        TorusField jz = emb.w_eta;
        pair_project_normal(je, jz, emb.sites, emb.physics);
        auto cols_je = phi_grid_columns(je, mphi);
        auto cols_jz = phi_grid_columns(jz, mphi);
        auto cols_de = phi_grid_columns(dwe, mphi);
        auto cols_dz = phi_grid_columns(dwz, mphi);
        int nj = 2 * emb.n_modes + 1;
        size_t ngrid = cols_je.size() / static_cast<size_t>(nj);
        std::vector<cplx> vals(ngrid, cplx(0.0));
        for (size_t g = 0; g < ngrid; ++g) {
            cplx s(0.0);
            for (int j = -emb.n_modes; j <= emb.n_modes; ++j) {
                size_t idx = g * static_cast<size_t>(nj) + static_cast<size_t>(j + emb.n_modes);
                s += cols_je[idx] * std::conj(cols_de[idx]) +
                     cols_jz[idx] * std::conj(cols_dz[idx]);
            }
            vals[g] = 0.5 * two_pi * s.real();
        }
        acc += columns_to_field(vals, nu, emb.n_phi, 0, mphi);
        ak.push_back(acc);
    }

    for (int k = 0; k < nu; ++k)
        for (int j = k + 1; j < nu; ++j) {
            TorusField A = apply_multiplier(
                               [&](const std::vector<int>& ell, int) {
                                   return cplx(0.0, ell[static_cast<size_t>(k)]);
                               },
                               ak[static_cast<size_t>(j)]) -
                           apply_multiplier(
                               [&](const std::vector<int>& ell, int) {
                                   return cplx(0.0, ell[static_cast<size_t>(j)]);
                               },
                               ak[static_cast<size_t>(k)]);
            rep.max_Akj = std::max(rep.max_Akj, A.sup_norm());
            rep.correction_norm = std::max(rep.correction_norm, A.l2_norm());
        }
    return rep;
}

} // namespace solver
} // namespace vorwave
