#ifndef VORWAVE_DISPERSION_HPP
#define VORWAVE_DISPERSION_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vorwave {

// Physical parameters of the water-wave problem. depth = infinity() selects
// deep water.
struct WavePhysics {
    double g = 9.81;       // gravity
    double kappa = 1.0;    // surface tension
    double gamma = 0.0;    // constant vorticity
    double depth = infinity();

    static constexpr double infinity() { return std::numeric_limits<double>::infinity(); }
    bool finite_depth() const { return std::isfinite(depth); }
    void validate() const
    {
        if (g <= 0.0) throw std::invalid_argument("WavePhysics: g must be > 0");
        if (kappa <= 0.0) throw std::invalid_argument("WavePhysics: kappa must be > 0");
        if (depth <= 0.0) throw std::invalid_argument("WavePhysics: depth must be > 0");
    }
};

namespace dispersion {

// Symbol of the flat Dirichlet-Neumann operator: j tanh(h j), or |j| in deep
// water. Defined for real wave numbers so it can seed multipliers; strictly
// positive for xi != 0 and even.
double g0_symbol(const WavePhysics& p, double xi);
double g0_symbol_int(const WavePhysics& p, int j);  // rejects j = 0

// M_j = ( G_j(0) / (kappa j^2 + g + gamma^2 G_j(0)/(4 j^2)) )^{1/4}, even in j.
double mj_coeff(const WavePhysics& p, int j);
// P_{sign*n} = (gamma/2) M_n/n + sign/M_n, n >= 1.
double pj_coeff(const WavePhysics& p, int n, int sign);

// omega_j = sqrt( kappa G j^2 + g G + (gamma G/(2j))^2 ), even in j.
double omega_j(const WavePhysics& p, int j);
// Omega_j = omega_j + (gamma/2) G_j(0)/j, not even for gamma != 0.
double big_omega_j(const WavePhysics& p, int j);

// omega-tilde: omega_j for j != 0 and sqrt(kappa) at j = 0.
double omega_tilde_j(const WavePhysics& p, int j);

// lambda_j = G j^2 / (2 (kappa G j^2 + g G + (gamma G /(2j))^2)); lambda_0 = 1/(2 kappa).
double lambda_j(const WavePhysics& p, int j, bool include_zero = true);

// Closed-form kappa-derivative of omega-tilde of order n >= 1:
//   d^n omega~_j = c~_n lambda_j^n omega~_j, c~_n = prod_{k=1..n} (3 - 2k).
double omega_kappa_derivative(const WavePhysics& p, int j, int n);
double ctilde(int n);

// Remainder of the asymptotic expansion omega_j = sqrt(kappa)|j|^{3/2} + c_j/(sqrt(kappa)|j|^{1/2}).
double asymptotic_remainder(const WavePhysics& p, int j);

// Tangential frequency vector (Omega_{sigma_a n_a})_a.
std::vector<double> frequency_vector(const WavePhysics& p, const std::vector<int>& sites);

} // namespace dispersion
} // namespace vorwave

#endif
