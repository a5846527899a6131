#ifndef VORWAVE_TEST_ORACLES_HPP
#define VORWAVE_TEST_ORACLES_HPP

#include "vorwave/fields.hpp"

#include <random>

namespace vorwave {
namespace test {

// O(N^2) coefficient convolution, independent of the FFT product path.
inline RealField convolve_oracle(const RealField& f, const RealField& g)
{
    int n = f.n_modes();
    RealField h(n);
    for (int j = -n; j <= n; ++j) {
        cplx s(0.0);
        for (int k = -n; k <= n; ++k) {
            int m = j - k;
            if (std::abs(m) <= n) s += f.coeff(k) * g.coeff(m);
        }
        if (j >= 0) h.set_coeff(j, s);
    }
    return h;
}

inline RealField random_field(int n_modes, double amplitude, std::mt19937& rng,
                              int max_mode = -1)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    if (max_mode < 0) max_mode = n_modes;
    RealField f(n_modes);
    for (int j = 1; j <= std::min(max_mode, n_modes); ++j) {
        double decay = 1.0 / (1.0 + j * j);
        f.set_coeff(j, amplitude * decay * cplx(u(rng), u(rng)));
    }
    return f;
}

// random zero-mean even (cosine) field, useful for reversible data
inline RealField random_even_field(int n_modes, double amplitude, std::mt19937& rng,
                                   int max_mode = -1)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    if (max_mode < 0) max_mode = n_modes;
    RealField f(n_modes);
    for (int j = 1; j <= std::min(max_mode, n_modes); ++j)
        f.set_cos(j, amplitude * u(rng) / (1.0 + j * j));
    return f;
}

inline RealField random_odd_field(int n_modes, double amplitude, std::mt19937& rng,
                                  int max_mode = -1)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    if (max_mode < 0) max_mode = n_modes;
    RealField f(n_modes);
    for (int j = 1; j <= std::min(max_mode, n_modes); ++j)
        f.set_sin(j, amplitude * u(rng) / (1.0 + j * j));
    return f;
}

// central finite difference of a scalar function
template <typename F>
double central_diff(F&& f, double x, int order, double h)
{
    switch (order) {
        case 1: return (f(x + h) - f(x - h)) / (2 * h);
        case 2: return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
        case 3: return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
        default: throw std::invalid_argument("central_diff: order not supported");
    }
}

} // namespace test
} // namespace vorwave

#endif
