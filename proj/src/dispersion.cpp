#include "vorwave/dispersion.hpp"

#include <cmath>

namespace vorwave {
namespace dispersion {

double g0_symbol(const WavePhysics& p, double xi)
{
    if (!p.finite_depth()) return std::abs(xi);
    double hx = p.depth * xi;
    // tanh saturates in double precision well before |hx| = 20
    if (std::abs(hx) > 20.0) return std::abs(xi);
    return xi * std::tanh(hx);
}

double g0_symbol_int(const WavePhysics& p, int j)
{
    if (j == 0) throw std::invalid_argument("g0_symbol: j = 0");
    return g0_symbol(p, static_cast<double>(j));
}

double mj_coeff(const WavePhysics& p, int j)
{
    if (j == 0) throw std::invalid_argument("mj_coeff: j = 0");
    double G = g0_symbol_int(p, j);
    double jj = static_cast<double>(j) * j;
    double den = p.kappa * jj + p.g + 0.25 * p.gamma * p.gamma * G / jj;
    return std::pow(G / den, 0.25);
}

double pj_coeff(const WavePhysics& p, int n, int sign)
{
    if (n < 1) throw std::invalid_argument("pj_coeff: n must be >= 1");
    double M = mj_coeff(p, n);
    return 0.5 * p.gamma * M / n + sign / M;
}

double omega_j(const WavePhysics& p, int j)
{
    if (j == 0) throw std::invalid_argument("omega_j: j = 0");
    double G = g0_symbol_int(p, j);
    double jj = static_cast<double>(j) * j;
    double vort = 0.5 * p.gamma * G / j;
    return std::sqrt(p.kappa * G * jj + p.g * G + vort * vort);
}

double big_omega_j(const WavePhysics& p, int j)
{
    double G = g0_symbol_int(p, j);
    return omega_j(p, j) + 0.5 * p.gamma * G / j;
}

double omega_tilde_j(const WavePhysics& p, int j)
{
    return j == 0 ? std::sqrt(p.kappa) : omega_j(p, j);
}

double lambda_j(const WavePhysics& p, int j, bool include_zero)
{
    if (j == 0) {
        if (!include_zero) throw std::invalid_argument("lambda_j: j = 0 not permitted");
        return 0.5 / p.kappa;
    }
    double G = g0_symbol_int(p, j);
    double jj = static_cast<double>(j) * j;
    double vort = 0.5 * p.gamma * G / j;
    return G * jj / (2.0 * (p.kappa * G * jj + p.g * G + vort * vort));
}

double ctilde(int n)
{
    double c = 1.0;
    for (int k = 1; k <= n; ++k) c *= 3.0 - 2.0 * k;
    return c;
}

double omega_kappa_derivative(const WavePhysics& p, int j, int n)
{
    if (n < 1) throw std::invalid_argument("omega_kappa_derivative: n must be >= 1");
    double lam = lambda_j(p, j, true);
    return ctilde(n) * std::pow(lam, n) * omega_tilde_j(p, j);
}

double asymptotic_remainder(const WavePhysics& p, int j)
{
    if (j == 0) throw std::invalid_argument("asymptotic_remainder: j = 0");
    double aj = std::abs(static_cast<double>(j));
    double sk = std::sqrt(p.kappa);
    return (omega_j(p, j) - sk * std::pow(aj, 1.5)) * sk * std::sqrt(aj);
}

std::vector<double> frequency_vector(const WavePhysics& p, const std::vector<int>& sites)
{
    std::vector<double> w(sites.size());
    for (size_t a = 0; a < sites.size(); ++a) w[a] = big_omega_j(p, sites[a]);
    return w;
}

} // namespace dispersion
} // namespace vorwave
