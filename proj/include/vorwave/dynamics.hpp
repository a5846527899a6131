#ifndef VORWAVE_DYNAMICS_HPP
#define VORWAVE_DYNAMICS_HPP

#include "vorwave/dno.hpp"

#include <optional>
#include <vector>

namespace vorwave {

// (eta, psi) with zero-mean eta; psi is the zero-mean representative of its
// class (the dynamics is invariant under psi -> psi + const).
struct State {
    RealField eta, psi;
    State(RealField e, RealField p) : eta(std::move(e)), psi(std::move(p)) {}
    explicit State(int n_modes) : eta(n_modes), psi(n_modes) {}
};

// Wahlen variables: zeta = psi - (gamma/2) dx^{-1} eta.
struct WahlenState {
    RealField eta, zeta;
    WahlenState(RealField e, RealField z) : eta(std::move(e)), zeta(std::move(z)) {}
    explicit WahlenState(int n_modes) : eta(n_modes), zeta(n_modes) {}
};

namespace dynamics {

WahlenState wahlen_forward(const WavePhysics& p, const State& s);
State wahlen_backward(const WavePhysics& p, const WahlenState& w);

// Right-hand side of the water-wave system; deta has exactly zero mean, the
// mean of dpsi is projected out (quotient representative).
State vector_field(const WavePhysics& p, const State& s, const DnoConfig& cfg);

double hamiltonian(const WavePhysics& p, const State& s, const DnoConfig& cfg);
// horizontal momentum in Wahlen variables
double momentum(const WavePhysics& p, const State& s);

// involution S(eta, psi) = (eta(-x), -psi(-x))
State involution(const State& s);
WahlenState involution(const WahlenState& w);

// linearized flat system J Omega_W applied to (eta, zeta)
WahlenState linear_flat_apply(const WavePhysics& p, const WahlenState& w);
// exact flow of the flat linear system over time t (diagonal complex modes)
WahlenState linear_flat_evolve(const WavePhysics& p, const WahlenState& w, double t);

// complex diagonalizing coordinates: z_j = (M_j^{-1} eta_j + i M_j zeta_j)/sqrt(2),
// j != 0 (mean modes dropped); inverse restores a real pair.
std::vector<cplx> wahlen_to_diag(const WavePhysics& p, const WahlenState& w);
WahlenState diag_to_wahlen(const WavePhysics& p, const std::vector<cplx>& z, int n_modes);

enum class Scheme { rk4, rk4_lawson, implicit_midpoint };

struct IntegrateConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    DnoConfig dno;
    Scheme scheme = Scheme::rk4;
    bool auto_stiff = true;      // switch rk4 -> rk4_lawson when dt*Omega_max > limit
    double cfl_limit = 2.5;
    int checkpoint_stride = 16;  // monitor/or store every k-th step
    bool store_trajectory = false;
    double blowup_threshold = 1e6;
};

struct InvariantReport {
    double h0 = 0.0;
    double h_drift = 0.0;         // max |H(t)-H(0)| / max(|H(0)|, eps)
    double mom0 = 0.0;
    double mom_drift = 0.0;       // max |M(t)-M(0)| (absolute)
    double eta_mean_max = 0.0;    // max |mean eta|
    double reversibility_defect = -1.0;  // set by the reversibility check
    int steps = 0;
    bool blew_up = false;
    Scheme scheme_used = Scheme::rk4;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;   // filled when store_trajectory
    InvariantReport report;
};

// fixed-step integration; throws on CFL violation (unless Lawson) and flags blow-up
Trajectory integrate(const WavePhysics& p, const State& s0, const IntegrateConfig& cfg);

// forward/backward run comparing u(-t) with S u(t); returns max defect
double reversibility_defect(const WavePhysics& p, const State& s0, const IntegrateConfig& cfg);

} // namespace dynamics
} // namespace vorwave

#endif
