#ifndef VORWAVE_DNO_HPP
#define VORWAVE_DNO_HPP

#include "vorwave/dispersion.hpp"
#include "vorwave/fields.hpp"

namespace vorwave {

// Truncated Taylor expansion of the Dirichlet-Neumann operator G(eta) around
// the flat surface, built from the flat-strip harmonic extension. Each Taylor
// term is generated recursively from the flat multiplier; the expansion is
// validated against the shape-derivative identity.
struct DnoConfig {
    int taylor_order = 4;
    int max_taylor = 6;
    double max_slope = 0.3;  // guard on max |eta_x|
};

namespace dno {

// Flat operator: multiplier D tanh(h D) (finite depth) or |D|; zero mean output.
RealField g0_apply(const WavePhysics& p, const RealField& psi);

// Truncated G(eta) psi. Throws on slope-guard violation or taylor_order > max.
RealField g_eta_apply(const WavePhysics& p, const RealField& eta, const RealField& psi,
                      const DnoConfig& cfg);

struct BVFields {
    RealField B;       // (G(eta) psi + eta_x psi_x)/(1 + eta_x^2)
    RealField V;       // psi_x - B eta_x
    RealField Vtilde;  // V - gamma eta
};
BVFields bv_fields(const WavePhysics& p, const RealField& eta, const RealField& psi,
                   const DnoConfig& cfg);

struct ShapeDerivativeCheck {
    RealField lhs;  // centered difference of G along etahat
    RealField rhs;  // -G(eta)(B etahat) - d_x(V etahat)
    double err;     // relative L2 discrepancy
};
ShapeDerivativeCheck shape_derivative_check(const WavePhysics& p, const RealField& eta,
                                            const RealField& etahat, const RealField& psi,
                                            const DnoConfig& cfg, double fd_step = 1e-5);

// Column-wise application on torus fields (x-operator, phi as parameter).
TorusField g_eta_apply(const WavePhysics& p, const TorusField& eta, const TorusField& psi,
                       const DnoConfig& cfg);
struct TorusBV {
    TorusField B, V, Vtilde;
};
TorusBV bv_fields(const WavePhysics& p, const TorusField& eta, const TorusField& psi,
                  const DnoConfig& cfg);

} // namespace dno
} // namespace vorwave

#endif
