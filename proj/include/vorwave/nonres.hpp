#ifndef VORWAVE_NONRES_HPP
#define VORWAVE_NONRES_HPP

#include "vorwave/dispersion.hpp"
#include "vorwave/fields.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vorwave {
namespace nonres {

struct NonresConfig {
    double upsilon = 1e-2;
    double tau = 2.5;
    int m0 = 4;              // highest kappa-derivative order used by the scans
    int ell_max = 6;
    int j_cutoff = 32;
    double kappa1 = 0.5;
    double kappa2 = 2.0;
    int kappa_grid = 2000;   // fine grid resolution over [kappa1, kappa2]
    double cutoff_C = 10.0;  // momentum-family a-priori cutoff constant
    void validate(int nu) const;
};

// First-Melnikov frequency corrections mu_j = m32 Omega_j(kappa) + m1 j + m12 |j|^{1/2} + r_j.
struct FrequencyModel {
    double m32 = 1.0;
    double m1 = 0.0;
    double m12 = 0.0;
    WavePhysics physics;
    std::function<double(int)> r;  // optional residual table, defaults to 0

    double mu(int j) const;
    // kappa-derivative of mu_j of order n >= 1 (the constants are frozen)
    double mu_derivative(int j, int n) const;
};

enum class MelnikovClass { zeroth, first, second_minus, second_plus };
std::string class_name(MelnikovClass c);

struct Tuple {
    std::vector<int> ell;
    int j = 0;
    int jp = 0;
};

// min over 0 < |ell|_inf <= ell_max of |omega.ell| <ell>^tau; omega is
// Diophantine at level upsilon iff worst_margin >= upsilon.
struct DiophantineReport {
    double worst_margin = 0.0;
    std::vector<int> worst_ell;
};
DiophantineReport diophantine_margin(const std::vector<double>& omega, int ell_max, double tau);

// Admissible tuples of one Melnikov family: momentum constraint, j, j' in
// S_0^c, and the a-priori restrictions |j|^{3/2} <= C<ell> (first),
// ||j|^{3/2} - |j'|^{3/2}| <= C<ell> (second-), |j|^{3/2} + |j'|^{3/2} <= C<ell>
// (second+).
std::vector<Tuple> momentum_tuples(const SiteSelection& sites, MelnikovClass cls,
                                   const NonresConfig& cfg);

// LHS/RHS of one Melnikov condition; >= 1 means the condition holds.
double melnikov_margin(const FrequencyModel& model, const SiteSelection& sites,
                       const std::vector<double>& omega, MelnikovClass cls, const Tuple& t,
                       const NonresConfig& cfg);

// Transversality: min over the kappa grid of
//   max_{0<=n<=m0} |d^n_kappa f(kappa)| / <ell>,
// f = Omega.ell (+ Omega_j) (+- Omega_j'). With a model, the perturbed
// combination Omega_eps.ell + mu_j +- mu_j' is scanned instead.
struct TransversalityResult {
    double bound = 0.0;        // numerical lower bound rho0-hat
    double argmin_kappa = 0.0;
    Tuple worst;               // tuple realizing the bound (family scans)
    long tuples_scanned = 0;
};
TransversalityResult transversality_scan_tuple(const WavePhysics& base,
                                               const SiteSelection& sites,
                                               const NonresConfig& cfg, MelnikovClass cls,
                                               const Tuple& t,
                                               const FrequencyModel* model = nullptr);
TransversalityResult transversality_scan_family(const WavePhysics& base,
                                                const SiteSelection& sites,
                                                const NonresConfig& cfg, MelnikovClass cls,
                                                const FrequencyModel* model = nullptr,
                                                int n_threads = 1);

// Numerical measure of the excluded kappa sets, deterministic grid sweep with
// local refinement around sign changes (resolution = cfg.kappa_grid cells).
struct ResonantSetEstimate {
    double measure_R0 = 0.0;
    double measure_RI = 0.0;
    double measure_RII = 0.0;
    double measure_QII = 0.0;
    double total = 0.0;  // measure of the union
    double kappa1 = 0.0, kappa2 = 0.0;
    long grid = 0;
    double step = 0.0;
    double upsilon = 0.0, tau = 0.0;
    int ell_max = 0, j_cutoff = 0;
    double epsilon = 0.0;
    long tuples[4] = {0, 0, 0, 0};
    bool guard_ok = true;       // grid resolves the narrowest threshold width
    double min_width = 0.0;     // estimated narrowest excluded width
    std::vector<std::pair<double, double>> excluded_intervals;  // union, merged
};
ResonantSetEstimate measure_estimate(const std::function<FrequencyModel(double)>& model_at,
                                     const SiteSelection& sites, const NonresConfig& cfg,
                                     double epsilon, int n_threads = 1,
                                     bool strict_guard = false);

} // namespace nonres
} // namespace vorwave

#endif
