#include "vorwave/dno.hpp"

#include <cmath>

namespace vorwave {
namespace dno {

namespace {

// Expansion operators from the flat-strip harmonic extension. With
// tau(j) = tanh(h j) (sign(j) in deep water), the trace of the extension basis
// satisfies cosh(j(y+h))/cosh(jh) = sum_k (eta j)^k/k! tau(j)^{k mod 2} at
// y = eta, which yields the multipliers
//   A_k : symbol j^k tau(j)^{k mod 2}     (A_0 = Id, A_1 = G(0))
// and the normal/tangential surface derivatives use B_k = A_{k+1} and
// d_x A_k.
cplx a_symbol(const WavePhysics& p, int k, int j)
{
    if (k == 0) return cplx(1.0);
    if (j == 0) return cplx(0.0);
    double tau = p.finite_depth()
                     ? (std::abs(p.depth * j) > 20.0 ? (j > 0 ? 1.0 : -1.0)
                                                     : std::tanh(p.depth * j))
                     : (j > 0 ? 1.0 : -1.0);
    double v = std::pow(static_cast<double>(j), k);
    if (k % 2 == 1) v *= tau;
    return cplx(v);
}

RealField apply_ak(const WavePhysics& p, int k, const RealField& f)
{
    return apply_multiplier([&p, k](int j) { return a_symbol(p, k, j); }, f);
}

void check_guard(const RealField& eta, const DnoConfig& cfg)
{
    if (cfg.taylor_order < 0 || cfg.taylor_order > cfg.max_taylor)
        throw std::invalid_argument("dno: taylor_order out of range");
    double slope = dx(eta).sup_norm();
    if (slope > cfg.max_slope)
        throw std::runtime_error("dno: slope guard violated, max|eta_x| = " +
                                 std::to_string(slope));
}

} // namespace

RealField g0_apply(const WavePhysics& p, const RealField& psi)
{
    return apply_multiplier(
        [&p](int j) { return j == 0 ? cplx(0.0) : cplx(dispersion::g0_symbol_int(p, j)); }, psi);
}

RealField g_eta_apply(const WavePhysics& p, const RealField& eta, const RealField& psi,
                      const DnoConfig& cfg)
{
    check_guard(eta, cfg);
    int K = cfg.taylor_order;
    int n = psi.n_modes();

    // eta^k / k!
    std::vector<RealField> etapow;
    etapow.reserve(static_cast<size_t>(K) + 1);
    RealField one(n);
    one.set_coeff(0, 1.0);
    etapow.push_back(one);
    for (int k = 1; k <= K; ++k)
        etapow.push_back((1.0 / k) * field_product(etapow.back(), eta));

    // potential coefficients order by order: a^{(r)} = -sum_{k=1..r} eta^k/k! A_k a^{(r-k)}
    std::vector<RealField> a;
    a.reserve(static_cast<size_t>(K) + 1);
    a.push_back(psi);
    for (int r = 1; r <= K; ++r) {
        RealField acc(n);
        for (int k = 1; k <= r; ++k)
            acc += field_product(etapow[static_cast<size_t>(k)],
                                 apply_ak(p, k, a[static_cast<size_t>(r - k)]));
        acc *= -1.0;
        a.push_back(acc);
    }

    RealField etax = dx(eta);
    RealField out(n);
    // Phi_y at the surface: sum_{k+m<=K} eta^k/k! A_{k+1} a^{(m)}
    for (int k = 0; k <= K; ++k)
        for (int m = 0; k + m <= K; ++m)
            out += field_product(etapow[static_cast<size_t>(k)],
                                 apply_ak(p, k + 1, a[static_cast<size_t>(m)]));
    // -eta_x Phi_x at the surface: one power of eta from eta_x
    for (int k = 0; k + 1 <= K; ++k)
        for (int m = 0; k + m + 1 <= K; ++m)
            out -= field_product(
                etax, field_product(etapow[static_cast<size_t>(k)],
                                    dx(apply_ak(p, k, a[static_cast<size_t>(m)]))));
    // G(eta) maps onto zero-average functions
    out.set_coeff(0, 0.0);
    return out;
}

BVFields bv_fields(const WavePhysics& p, const RealField& eta, const RealField& psi,
                   const DnoConfig& cfg)
{
    RealField G = g_eta_apply(p, eta, psi, cfg);
    RealField etax = dx(eta);
    RealField psix = dx(psi);
    RealField num = G + field_product(etax, psix);
    RealField B = pointwise2(num, etax, [](double nv, double ex) { return nv / (1.0 + ex * ex); });
    RealField V = psix - field_product(B, etax);
    RealField Vt = V - p.gamma * eta;
    return {B, V, Vt};
}

ShapeDerivativeCheck shape_derivative_check(const WavePhysics& p, const RealField& eta,
                                            const RealField& etahat, const RealField& psi,
                                            const DnoConfig& cfg, double fd_step)
{
    RealField ep = eta + fd_step * etahat;
    RealField em = eta - fd_step * etahat;
    RealField lhs = (1.0 / (2.0 * fd_step)) * (g_eta_apply(p, ep, psi, cfg) -
                                               g_eta_apply(p, em, psi, cfg));
    BVFields bv = bv_fields(p, eta, psi, cfg);
    RealField rhs = -1.0 * g_eta_apply(p, eta, field_product(bv.B, etahat), cfg) -
                    dx(field_product(bv.V, etahat));
    double scale = std::max(rhs.l2_norm(), 1e-300);
    double err = (lhs - rhs).l2_norm() / scale;
    return {lhs, rhs, err};
}

TorusField g_eta_apply(const WavePhysics& p, const TorusField& eta, const TorusField& psi,
                       const DnoConfig& cfg)
{
    auto out = torus_columnwise({&eta, &psi}, 1, [&](const std::vector<RealField>& c) {
        return std::vector<RealField>{g_eta_apply(p, c[0], c[1], cfg)};
    });
    return out[0];
}

TorusBV bv_fields(const WavePhysics& p, const TorusField& eta, const TorusField& psi,
                  const DnoConfig& cfg)
{
    auto out = torus_columnwise({&eta, &psi}, 3, [&](const std::vector<RealField>& c) {
        BVFields bv = bv_fields(p, c[0], c[1], cfg);
        return std::vector<RealField>{bv.B, bv.V, bv.Vtilde};
    });
    return {out[0], out[1], out[2]};
}

} // namespace dno
} // namespace vorwave
