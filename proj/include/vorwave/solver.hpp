#ifndef VORWAVE_SOLVER_HPP
#define VORWAVE_SOLVER_HPP

#include "vorwave/dynamics.hpp"
#include "vorwave/nonres.hpp"

#include <string>

namespace vorwave {
namespace solver {

// Truncated reversible traveling torus embedding in action-angle-normal
// variables. Theta and I are x-independent angle fields (one per tangential
// site); w = (w_eta, w_zeta) is the normal component in Wahlen variables,
// supported on the traveling lattice j + jvec.ell = 0 with j in S_0^c.
// The physical field is u = epsilon * A(theta(phi), I(phi), w(phi)).
struct TorusEmbedding {
    SiteSelection sites;
    WavePhysics physics;
    int n_phi;
    int n_modes;
    std::vector<TorusField> Theta;  // nu entries, n_modes = 0
    std::vector<TorusField> I;      // nu entries, n_modes = 0
    TorusField w_eta, w_zeta;
    std::vector<double> omega;
    std::vector<double> alpha;
    std::vector<double> xi;
    double epsilon = 0.0;

    TorusEmbedding(SiteSelection s, WavePhysics p, int nphi, int nmodes);
    int nu() const { return sites.nu(); }

    // relative defects of the reversible/traveling constraints
    double constraint_defect() const;
};

// Seed at the linear solution: Theta = I = w = 0, omega = alpha = Omega(kappa).
TorusEmbedding linear_seed(const WavePhysics& p, const SiteSelection& sites,
                           const std::vector<double>& xi, double epsilon, int n_phi,
                           int n_modes);

// A(theta, I, w) at one angle: the M_j-weighted cosine/sine tangential part
// plus the normal slice; Wahlen variables, unscaled by epsilon.
WahlenState action_angle_map(const TorusEmbedding& emb, const std::vector<double>& phi);

// Traveling variation F(i, alpha) = omega . d_phi i - X_{H_alpha}(i).
struct FVariation {
    std::vector<TorusField> F_Theta, F_I;  // angle components
    TorusField Fw_eta, Fw_zeta;            // normal component (Wahlen pair)
    FVariation(int nu, int n_phi, int n_modes);
    double norm() const;
};
FVariation residual_F(const TorusEmbedding& emb, const DnoConfig& cfg);

struct SolveConfig {
    double tol = 1e-11;
    int max_iter = 25;
    double fd_step = 1e-7;
    bool solve_omega = true;  // true: alpha fixed at Omega(kappa), omega unknown;
                              // false: omega fixed, counterterm alpha unknown
    int n_threads = 4;
    DnoConfig dno;
    bool check_margins = true;
    nonres::NonresConfig nonres_cfg;
    double margin_threshold = 1.0;
    double damping_min = 1.0 / 64.0;
};

struct SolveReport {
    std::vector<double> residual_history;
    std::vector<double> step_norms;
    double final_residual = 0.0;
    std::vector<double> freq_shift;  // alpha - omega
    double constraint_defect = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string refusal;  // non-empty when the resonance pre-check refused to solve
    double worst_melnikov_margin = 0.0;
    double diophantine_margin = 0.0;
};

SolveReport newton_solve(TorusEmbedding& emb, const SolveConfig& cfg);

// Amplitude continuation: solves at xi, then s*xi, s^2*xi, ... warm-started.
std::vector<std::pair<TorusEmbedding, SolveReport>> continuation(
    const TorusEmbedding& emb0, const SolveConfig& cfg, double s, int steps);

struct ValidationReport {
    double max_deviation = 0.0;    // L2 distance flow vs torus over the run
    double correction_ratio = 0.0; // sup_phi ||eps A(i) - eps A(phi,0,0)|| / (eps sqrt|xi|)
    double t_end = 0.0;
    dynamics::InvariantReport flow;
};
ValidationReport validate_solution(const TorusEmbedding& emb, const DnoConfig& cfg,
                                   double n_periods, double dt_factor = 1e-3);

// isotropy diagnostic: the pullback 2-form components A_{kj} of the embedded
// torus and the corrected action I_delta (optional post-processing)
struct IsotropyReport {
    double max_Akj = 0.0;          // sup norm over components and angles
    double correction_norm = 0.0;  // ||I_delta - I||
};
IsotropyReport isotropy_check(const TorusEmbedding& emb);

} // namespace solver
} // namespace vorwave

#endif
