#include "vorwave/fields.hpp"

#include "vorwave/fft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace vorwave {

double smooth_cutoff(double x)
{
    double a = std::abs(x);
    if (a <= 1.0 / 3.0) return 0.0;
    if (a >= 2.0 / 3.0) return 1.0;
    auto bump = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    double t = 3.0 * a - 1.0;  // in (0,1)
    double f1 = bump(t), f2 = bump(1.0 - t);
    return f1 / (f1 + f2);
}

// ---------------------------------------------------------------------------
// SiteSelection

SiteSelection::SiteSelection(std::vector<int> moduli, std::vector<int> signs)
{
    if (moduli.empty() || moduli.size() != signs.size())
        throw std::invalid_argument("SiteSelection: moduli/signs size mismatch");
    for (size_t a = 0; a < moduli.size(); ++a) {
        if (moduli[a] < 1) throw std::invalid_argument("SiteSelection: moduli must be >= 1");
        if (a > 0 && moduli[a] <= moduli[a - 1])
            throw std::invalid_argument("SiteSelection: moduli must be strictly increasing");
        if (signs[a] != 1 && signs[a] != -1)
            throw std::invalid_argument("SiteSelection: signs must be +-1");
    }
    moduli_ = std::move(moduli);
    signs_ = std::move(signs);
    sites_.resize(moduli_.size());
    for (size_t a = 0; a < moduli_.size(); ++a) sites_[a] = signs_[a] * moduli_[a];
}

SiteSelection SiteSelection::unchecked(std::vector<int> moduli, std::vector<int> signs)
{
    SiteSelection s;
    s.moduli_ = std::move(moduli);
    s.signs_ = std::move(signs);
    s.sites_.resize(s.moduli_.size());
    for (size_t a = 0; a < s.moduli_.size(); ++a) s.sites_[a] = s.signs_[a] * s.moduli_[a];
    return s;
}

bool SiteSelection::contains(int j) const
{
    return std::find(sites_.begin(), sites_.end(), j) != sites_.end();
}

bool SiteSelection::is_normal_site(int j) const { return j != 0 && !contains(j); }

// ---------------------------------------------------------------------------
// RealField

RealField::RealField(int n_modes) : n_(n_modes)
{
    if (n_modes < 0) throw std::invalid_argument("RealField: negative cutoff");
    c_.assign(static_cast<size_t>(2 * n_modes + 1), cplx(0.0, 0.0));
}

void RealField::set_coeff(int j, cplx v)
{
    if (std::abs(j) > n_) throw std::out_of_range("RealField::set_coeff: |j| > n_modes");
    if (j == 0) v = cplx(v.real(), 0.0);
    c_[static_cast<size_t>(j + n_)] = v;
    c_[static_cast<size_t>(-j + n_)] = std::conj(v);
}

void RealField::set_cos(int j, double amp)
{
    if (j == 0) { set_coeff(0, amp); return; }
    set_coeff(j, cplx(amp / 2.0, 0.0));
}

void RealField::set_sin(int j, double amp)
{
    // sin(jx) = (e^{ijx} - e^{-ijx})/(2i)
    if (j == 0) return;
    set_coeff(j, cplx(0.0, -amp / 2.0));
}

std::vector<double> RealField::grid_values(int m) const
{
    if (m == 0) m = fft::next_fast_size(3 * n_ + 1);
    if (m < 2 * n_ + 1) throw std::invalid_argument("RealField::grid_values: grid too small");
    std::vector<cplx> buf(static_cast<size_t>(m), cplx(0.0));
    for (int j = -n_; j <= n_; ++j) buf[static_cast<size_t>((j % m + m) % m)] = coeff(j);
    fft::backward(buf);
    std::vector<double> out(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) out[static_cast<size_t>(k)] = buf[static_cast<size_t>(k)].real();
    return out;
}

RealField RealField::from_grid(const std::vector<double>& values, int n_modes)
{
    int m = static_cast<int>(values.size());
    if (m < 2 * n_modes + 1) throw std::invalid_argument("RealField::from_grid: grid too small");
    std::vector<cplx> buf(values.begin(), values.end());
    fft::forward(buf);
    RealField f(n_modes);
    for (int j = 0; j <= n_modes; ++j) {
        cplx cj = buf[static_cast<size_t>((j % m + m) % m)];
        cplx cmj = buf[static_cast<size_t>(((-j) % m + m) % m)];
        f.set_coeff(j, 0.5 * (cj + std::conj(cmj)));
    }
    return f;
}

double RealField::l2_norm() const
{
    double s = 0.0;
    for (const auto& z : c_) s += std::norm(z);
    return std::sqrt(two_pi * s);
}

double RealField::sup_norm() const
{
    auto v = grid_values();
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double RealField::conj_symmetry_defect() const
{
    double d = 0.0, s = 0.0;
    for (int j = -n_; j <= n_; ++j) {
        d += std::norm(coeff(j) - std::conj(coeff(-j)));
        s += std::norm(coeff(j));
    }
    return s > 0.0 ? std::sqrt(d / s) : std::sqrt(d);
}

RealField& RealField::operator+=(const RealField& o)
{
    if (o.n_ != n_) throw std::invalid_argument("RealField: cutoff mismatch");
    for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

RealField& RealField::operator-=(const RealField& o)
{
    if (o.n_ != n_) throw std::invalid_argument("RealField: cutoff mismatch");
    for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

RealField& RealField::operator*=(double s)
{
    for (auto& z : c_) z *= s;
    return *this;
}

RealField operator+(RealField a, const RealField& b) { a += b; return a; }
RealField operator-(RealField a, const RealField& b) { a -= b; return a; }
RealField operator*(double s, RealField a) { a *= s; return a; }

RealField apply_multiplier(const std::function<cplx(int)>& sym, const RealField& f)
{
    RealField g(f.n_);
    for (int j = -f.n_; j <= f.n_; ++j)
        g.c_[static_cast<size_t>(j + f.n_)] = sym(j) * f.coeff(j);
    return g;
}

RealField dx(const RealField& f)
{
    return apply_multiplier([](int j) { return cplx(0.0, j); }, f);
}

RealField dx_inverse(const RealField& f)
{
    return apply_multiplier([](int j) { return j == 0 ? cplx(0.0) : cplx(0.0, -1.0 / j); }, f);
}

RealField hilbert(const RealField& f)
{
    return apply_multiplier(
        [](int j) { return j == 0 ? cplx(0.0) : cplx(0.0, j > 0 ? -1.0 : 1.0); }, f);
}

RealField mean_project(const RealField& f)
{
    return apply_multiplier([](int j) { return j == 0 ? cplx(1.0) : cplx(0.0); }, f);
}

RealField field_product(const RealField& f, const RealField& g)
{
    if (f.n_ != g.n_) throw std::invalid_argument("field_product: cutoff mismatch");
    int m = fft::next_fast_size(3 * f.n_ + 1);
    auto fv = f.grid_values(m);
    auto gv = g.grid_values(m);
    for (int k = 0; k < m; ++k) fv[static_cast<size_t>(k)] *= gv[static_cast<size_t>(k)];
    return RealField::from_grid(fv, f.n_);
}

RealField pointwise(const RealField& f, const std::function<double(double)>& fn)
{
    int m = fft::next_fast_size(3 * f.n_modes() + 1);
    auto v = f.grid_values(m);
    for (auto& x : v) x = fn(x);
    return RealField::from_grid(v, f.n_modes());
}

RealField pointwise2(const RealField& f, const RealField& g,
                     const std::function<double(double, double)>& fn)
{
    if (f.n_modes() != g.n_modes()) throw std::invalid_argument("pointwise2: cutoff mismatch");
    int m = fft::next_fast_size(3 * f.n_modes() + 1);
    auto fv = f.grid_values(m);
    auto gv = g.grid_values(m);
    for (int k = 0; k < m; ++k)
        fv[static_cast<size_t>(k)] = fn(fv[static_cast<size_t>(k)], gv[static_cast<size_t>(k)]);
    return RealField::from_grid(fv, f.n_modes());
}

double l2_inner(const RealField& f, const RealField& g)
{
    int n = std::min(f.n_modes(), g.n_modes());
    double s = 0.0;
    for (int j = -n; j <= n; ++j) s += (f.coeff(j) * std::conj(g.coeff(j))).real();
    return two_pi * s;
}

RealField translate(const RealField& f, double s)
{
    return apply_multiplier([s](int j) { return std::exp(cplx(0.0, j * s)); }, f);
}

RealField reflect(const RealField& f)
{
    RealField g(f.n_modes());
    for (int j = -f.n_modes(); j <= f.n_modes(); ++j) g.set_coeff(j, f.coeff(-j));
    return g;
}

// ---------------------------------------------------------------------------
// TorusField

TorusField::TorusField(int nu, int n_phi, int n_modes) : nu_(nu), p_(n_phi), n_(n_modes)
{
    if (nu < 1 || n_phi < 0 || n_modes < 0) throw std::invalid_argument("TorusField: bad sizes");
    n_ell_ = 1;
    for (int k = 0; k < nu; ++k) n_ell_ *= 2 * n_phi + 1;
    c_.assign(static_cast<size_t>(n_ell_) * (2 * n_modes + 1), cplx(0.0));
}

size_t TorusField::index(const std::vector<int>& ell, int j) const
{
    if (static_cast<int>(ell.size()) != nu_) throw std::invalid_argument("TorusField: bad ell");
    int le = 0;
    for (int k = 0; k < nu_; ++k) {
        if (std::abs(ell[static_cast<size_t>(k)]) > p_) throw std::out_of_range("TorusField: |ell| > n_phi");
        le = le * (2 * p_ + 1) + (ell[static_cast<size_t>(k)] + p_);
    }
    if (std::abs(j) > n_) throw std::out_of_range("TorusField: |j| > n_modes");
    return flat(le, j);
}

int TorusField::ell_index(const std::vector<int>& ell) const
{
    int le = 0;
    for (int k = 0; k < nu_; ++k) le = le * (2 * p_ + 1) + (ell[static_cast<size_t>(k)] + p_);
    return le;
}

std::vector<int> TorusField::ell_of(int le) const
{
    std::vector<int> ell(static_cast<size_t>(nu_));
    for (int k = nu_ - 1; k >= 0; --k) {
        ell[static_cast<size_t>(k)] = le % (2 * p_ + 1) - p_;
        le /= 2 * p_ + 1;
    }
    return ell;
}

void TorusField::set_coeff(const std::vector<int>& ell, int j, cplx v)
{
    bool center = j == 0;
    for (int e : ell) center = center && e == 0;
    if (center) v = cplx(v.real(), 0.0);
    c_[index(ell, j)] = v;
    std::vector<int> mell(ell.size());
    for (size_t k = 0; k < ell.size(); ++k) mell[k] = -ell[k];
    c_[index(mell, -j)] = std::conj(v);
}

void TorusField::set_coeff_flat(int le, int j, cplx v)
{
    set_coeff(ell_of(le), j, v);
}

double TorusField::mean() const
{
    std::vector<int> zero(static_cast<size_t>(nu_), 0);
    return coeff(zero, 0).real();
}

double TorusField::l2_norm() const
{
    double s = 0.0;
    for (const auto& z : c_) s += std::norm(z);
    double vol = 1.0;
    for (int k = 0; k <= nu_; ++k) vol *= two_pi;
    return std::sqrt(vol * s);
}

int TorusField::default_mphi() const { return fft::next_fast_size(3 * p_ + 1); }
int TorusField::default_mx() const { return fft::next_fast_size(3 * n_ + 1); }

std::vector<double> TorusField::grid_values(int mphi, int mx) const
{
    if (mphi == 0) mphi = default_mphi();
    if (mx == 0) mx = default_mx();
    if (mphi < 2 * p_ + 1 || mx < 2 * n_ + 1)
        throw std::invalid_argument("TorusField::grid_values: grid too small");
    std::vector<int> dims(static_cast<size_t>(nu_), mphi);
    dims.push_back(mx);
    size_t total = 1;
    for (int d : dims) total *= static_cast<size_t>(d);
    std::vector<cplx> buf(total, cplx(0.0));
    for (int le = 0; le < n_ell_; ++le) {
        auto e = ell_of(le);
        size_t base = 0;
        for (int k = 0; k < nu_; ++k)
            base = base * static_cast<size_t>(mphi) +
                   static_cast<size_t>((e[static_cast<size_t>(k)] % mphi + mphi) % mphi);
        base *= static_cast<size_t>(mx);
        for (int j = -n_; j <= n_; ++j)
            buf[base + static_cast<size_t>((j % mx + mx) % mx)] = coeff_flat(le, j);
    }
    fft::backward_nd(buf, dims);
    std::vector<double> out(total);
    for (size_t k = 0; k < total; ++k) out[k] = buf[k].real();
    return out;
}

TorusField TorusField::from_grid(const std::vector<double>& v, int nu, int n_phi, int n_modes,
                                 int mphi, int mx)
{
    std::vector<int> dims(static_cast<size_t>(nu), mphi);
    dims.push_back(mx);
    size_t total = 1;
    for (int d : dims) total *= static_cast<size_t>(d);
    if (v.size() != total) throw std::invalid_argument("TorusField::from_grid: size mismatch");
    std::vector<cplx> buf(v.begin(), v.end());
    fft::forward_nd(buf, dims);
    TorusField f(nu, n_phi, n_modes);
    for (int le = 0; le < f.n_ell_; ++le) {
        auto e = f.ell_of(le);
        size_t base = 0;
        for (int k = 0; k < nu; ++k)
            base = base * static_cast<size_t>(mphi) +
                   static_cast<size_t>((e[static_cast<size_t>(k)] % mphi + mphi) % mphi);
        base *= static_cast<size_t>(mx);
        for (int j = -n_modes; j <= n_modes; ++j)
            f.c_[f.flat(le, j)] = buf[base + static_cast<size_t>((j % mx + mx) % mx)];
    }
    // symmetrize to kill round-off asymmetry
    TorusField g = f;
    for (int le = 0; le < f.n_ell_; ++le) {
        auto e = f.ell_of(le);
        std::vector<int> me(e.size());
        for (size_t k = 0; k < e.size(); ++k) me[k] = -e[k];
        int mle = f.ell_index(me);
        for (int j = -n_modes; j <= n_modes; ++j)
            g.c_[g.flat(le, j)] =
                0.5 * (f.c_[f.flat(le, j)] + std::conj(f.c_[f.flat(mle, -j)]));
    }
    return g;
}

TorusField& TorusField::operator+=(const TorusField& o)
{
    if (o.c_.size() != c_.size()) throw std::invalid_argument("TorusField: size mismatch");
    for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

TorusField& TorusField::operator-=(const TorusField& o)
{
    if (o.c_.size() != c_.size()) throw std::invalid_argument("TorusField: size mismatch");
    for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

TorusField& TorusField::operator*=(double s)
{
    for (auto& z : c_) z *= s;
    return *this;
}

TorusField operator+(TorusField a, const TorusField& b) { a += b; return a; }
TorusField operator-(TorusField a, const TorusField& b) { a -= b; return a; }
TorusField operator*(double s, TorusField a) { a *= s; return a; }

double TorusField::sup_norm() const
{
    auto v = grid_values();
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

TorusField apply_multiplier(const std::function<cplx(const std::vector<int>&, int)>& sym,
                            const TorusField& f)
{
    TorusField g(f.nu(), f.n_phi(), f.n_modes());
    for (int le = 0; le < f.n_ell(); ++le) {
        auto e = f.ell_of(le);
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j) {
            cplx v = f.coeff_flat(le, j);
            if (v != cplx(0.0)) v *= sym(e, j);
            g.set_coeff(e, j, v);
        }
    }
    return g;
}

namespace {
struct RawAccess {
    static void set(TorusField& f, int le, int j, cplx v) { f.set_coeff_raw(le, j, v); }
};
} // namespace

TorusField dx(const TorusField& f)
{
    TorusField g(f.nu(), f.n_phi(), f.n_modes());
    for (int le = 0; le < f.n_ell(); ++le)
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j)
            RawAccess::set(g, le, j, cplx(0.0, j) * f.coeff_flat(le, j));
    return g;
}

TorusField dx_inverse(const TorusField& f)
{
    TorusField g(f.nu(), f.n_phi(), f.n_modes());
    for (int le = 0; le < f.n_ell(); ++le)
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j)
            RawAccess::set(g, le, j,
                           j == 0 ? cplx(0.0) : cplx(0.0, -1.0 / j) * f.coeff_flat(le, j));
    return g;
}

TorusField omega_dphi(const std::vector<double>& omega, const TorusField& f)
{
    TorusField g(f.nu(), f.n_phi(), f.n_modes());
    for (int le = 0; le < f.n_ell(); ++le) {
        auto e = f.ell_of(le);
        double wl = 0.0;
        for (int k = 0; k < f.nu(); ++k) wl += omega[static_cast<size_t>(k)] * e[static_cast<size_t>(k)];
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j)
            RawAccess::set(g, le, j, cplx(0.0, wl) * f.coeff_flat(le, j));
    }
    return g;
}

TorusField omega_dphi_inverse(const std::vector<double>& omega, const TorusField& f,
                              double upsilon, double tau, SmallDivisorReport* rep)
{
    TorusField g(f.nu(), f.n_phi(), f.n_modes());
    SmallDivisorReport local;
    local.worst_margin = std::numeric_limits<double>::infinity();
    for (int le = 0; le < f.n_ell(); ++le) {
        auto e = f.ell_of(le);
        double wl = 0.0, lsup = 0.0, l2 = 0.0;
        for (int k = 0; k < f.nu(); ++k) {
            double ek = e[static_cast<size_t>(k)];
            wl += omega[static_cast<size_t>(k)] * ek;
            lsup = std::max(lsup, std::abs(ek));
            l2 += ek * ek;
        }
        bool zero_ell = lsup == 0.0;
        double bra = std::max(1.0, std::sqrt(l2));  // <ell>
        double chi = zero_ell ? 0.0
                              : smooth_cutoff(wl / upsilon * std::pow(bra, tau));
        if (!zero_ell) {
            double margin = std::abs(wl) * std::pow(bra, tau) / upsilon;
            if (margin < local.worst_margin) {
                local.worst_margin = margin;
                local.worst_ell = e;
            }
            if (chi < 1.0) {
                bool has_energy = false;
                for (int j = -f.n_modes(); j <= f.n_modes(); ++j)
                    if (std::abs(f.coeff_flat(le, j)) > 0.0) { has_energy = true; break; }
                if (has_energy) local.cutoff_active = true;
            }
        }
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j) {
            cplx v = f.coeff_flat(le, j);
            cplx out = (zero_ell || chi == 0.0) ? cplx(0.0) : chi / cplx(0.0, wl) * v;
            RawAccess::set(g, le, j, out);
        }
    }
    if (rep) *rep = local;
    return g;
}

TorusField field_product(const TorusField& f, const TorusField& g)
{
    if (f.nu() != g.nu() || f.n_phi() != g.n_phi() || f.n_modes() != g.n_modes())
        throw std::invalid_argument("field_product: cutoff mismatch");
    int mphi = f.default_mphi(), mx = f.default_mx();
    auto fv = f.grid_values(mphi, mx);
    auto gv = g.grid_values(mphi, mx);
    for (size_t k = 0; k < fv.size(); ++k) fv[k] *= gv[k];
    return TorusField::from_grid(fv, f.nu(), f.n_phi(), f.n_modes(), mphi, mx);
}

TorusField pointwise(const TorusField& f, const std::function<double(double)>& fn)
{
    int mphi = f.default_mphi(), mx = f.default_mx();
    auto v = f.grid_values(mphi, mx);
    for (auto& x : v) x = fn(x);
    return TorusField::from_grid(v, f.nu(), f.n_phi(), f.n_modes(), mphi, mx);
}

double l2_inner(const TorusField& f, const TorusField& g)
{
    if (f.nu() != g.nu() || f.n_phi() != g.n_phi() || f.n_modes() != g.n_modes())
        throw std::invalid_argument("l2_inner: cutoff mismatch");
    double s = 0.0;
    for (int le = 0; le < f.n_ell(); ++le)
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j)
            s += (f.coeff_flat(le, j) * std::conj(g.coeff_flat(le, j))).real();
    double vol = 1.0;
    for (int k = 0; k <= f.nu(); ++k) vol *= two_pi;
    return vol * s;
}

TorusField x_average(const TorusField& f)
{
    TorusField g(f.nu(), f.n_phi(), f.n_modes());
    for (int le = 0; le < f.n_ell(); ++le) RawAccess::set(g, le, 0, f.coeff_flat(le, 0));
    return g;
}

TorusField phi_average(const TorusField& f)
{
    TorusField g(f.nu(), f.n_phi(), f.n_modes());
    std::vector<int> zero(static_cast<size_t>(f.nu()), 0);
    int le0 = f.ell_index(zero);
    for (int j = -f.n_modes(); j <= f.n_modes(); ++j)
        RawAccess::set(g, le0, j, f.coeff_flat(le0, j));
    return g;
}

TorusField shift_phi(const TorusField& f, const std::vector<double>& dphi)
{
    TorusField g(f.nu(), f.n_phi(), f.n_modes());
    for (int le = 0; le < f.n_ell(); ++le) {
        auto e = f.ell_of(le);
        double ph = 0.0;
        for (int k = 0; k < f.nu(); ++k) ph += e[static_cast<size_t>(k)] * dphi[static_cast<size_t>(k)];
        cplx rot = std::exp(cplx(0.0, -ph));
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j)
            RawAccess::set(g, le, j, rot * f.coeff_flat(le, j));
    }
    return g;
}

TorusField translate_x(const TorusField& f, double s)
{
    TorusField g(f.nu(), f.n_phi(), f.n_modes());
    for (int le = 0; le < f.n_ell(); ++le)
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j)
            RawAccess::set(g, le, j, std::exp(cplx(0.0, j * s)) * f.coeff_flat(le, j));
    return g;
}

namespace {

// hybrid representation: x-mode coefficients u_j on the phi grid
// layout: [phi grid point][j + n]
struct Hybrid {
    int nu, p, n, mphi;
    size_t ngrid;
    std::vector<cplx> data;  // ngrid * (2n+1)
};

Hybrid to_hybrid(const TorusField& f, int mphi)
{
    Hybrid h;
    h.nu = f.nu();
    h.p = f.n_phi();
    h.n = f.n_modes();
    h.mphi = mphi;
    h.ngrid = 1;
    for (int k = 0; k < h.nu; ++k) h.ngrid *= static_cast<size_t>(mphi);
    int nj = 2 * h.n + 1;
    h.data.assign(h.ngrid * static_cast<size_t>(nj), cplx(0.0));
    std::vector<int> dims(static_cast<size_t>(h.nu), mphi);
    std::vector<cplx> buf(h.ngrid);
    for (int j = -h.n; j <= h.n; ++j) {
        std::fill(buf.begin(), buf.end(), cplx(0.0));
        for (int le = 0; le < f.n_ell(); ++le) {
            auto e = f.ell_of(le);
            size_t idx = 0;
            for (int k = 0; k < h.nu; ++k)
                idx = idx * static_cast<size_t>(mphi) +
                      static_cast<size_t>((e[static_cast<size_t>(k)] % mphi + mphi) % mphi);
            buf[idx] += f.coeff_flat(le, j);
        }
        fft::backward_nd(buf, dims);
        for (size_t g = 0; g < h.ngrid; ++g) h.data[g * static_cast<size_t>(nj) + static_cast<size_t>(j + h.n)] = buf[g];
    }
    return h;
}

TorusField from_hybrid(const Hybrid& h)
{
    TorusField f(h.nu, h.p, h.n);
    std::vector<int> dims(static_cast<size_t>(h.nu), h.mphi);
    int nj = 2 * h.n + 1;
    std::vector<cplx> buf(h.ngrid);
    TorusField tmp(h.nu, h.p, h.n);
    for (int j = -h.n; j <= h.n; ++j) {
        for (size_t g = 0; g < h.ngrid; ++g) buf[g] = h.data[g * static_cast<size_t>(nj) + static_cast<size_t>(j + h.n)];
        fft::forward_nd(buf, dims);
        for (int le = 0; le < f.n_ell(); ++le) {
            auto e = f.ell_of(le);
            size_t idx = 0;
            for (int k = 0; k < h.nu; ++k)
                idx = idx * static_cast<size_t>(h.mphi) +
                      static_cast<size_t>((e[static_cast<size_t>(k)] % h.mphi + h.mphi) % h.mphi);
            tmp.set_coeff_raw(le, j, buf[idx]);
        }
    }
    // restore exact conjugate symmetry
    TorusField out(h.nu, h.p, h.n);
    for (int le = 0; le < out.n_ell(); ++le) {
        auto e = out.ell_of(le);
        std::vector<int> me(e.size());
        for (size_t k = 0; k < e.size(); ++k) me[k] = -e[k];
        int mle = out.ell_index(me);
        for (int j = -h.n; j <= h.n; ++j)
            RawAccess::set(out, le, j,
                           0.5 * (tmp.coeff_flat(le, j) + std::conj(tmp.coeff_flat(mle, -j))));
    }
    return out;
}

// evaluate the x-trig polynomial with coefficients row[0..2n] at point x
double eval_row(const cplx* row, int n, double x)
{
    // real field: u(x) = c_0 + 2 Re sum_{j>0} c_j e^{ijx}
    double s = row[n].real();
    cplx e = std::exp(cplx(0.0, x));
    cplx p = e;
    for (int j = 1; j <= n; ++j) {
        s += 2.0 * (row[n + j] * p).real();
        p *= e;
    }
    return s;
}

} // namespace

TorusField translate_x_by(const TorusField& f, const TorusField& rho)
{
    int mphi = f.default_mphi();
    Hybrid h = to_hybrid(f, mphi);
    Hybrid hr = to_hybrid(rho, mphi);
    int nj = 2 * h.n + 1;
    int njr = 2 * hr.n + 1;
    for (size_t g = 0; g < h.ngrid; ++g) {
        double r = hr.data[g * static_cast<size_t>(njr) + static_cast<size_t>(hr.n)].real();
        for (int j = -h.n; j <= h.n; ++j)
            h.data[g * static_cast<size_t>(nj) + static_cast<size_t>(j + h.n)] *=
                std::exp(cplx(0.0, -j * r));
    }
    return from_hybrid(h);
}

TorusField compose_x_diffeo(const TorusField& u, const TorusField& beta)
{
    if (u.nu() != beta.nu() || u.n_phi() != beta.n_phi())
        throw std::invalid_argument("compose_x_diffeo: cutoff mismatch");
    int mphi = u.default_mphi();
    int mx = fft::next_fast_size(3 * std::max(u.n_modes(), beta.n_modes()) + 1);
    Hybrid hu = to_hybrid(u, mphi);
    Hybrid hb = to_hybrid(beta, mphi);
    int nju = 2 * hu.n + 1;
    // output values on the (phi, x) grid
    std::vector<double> vals(hu.ngrid * static_cast<size_t>(mx));
    for (size_t g = 0; g < hu.ngrid; ++g) {
        const cplx* urow = &hu.data[g * static_cast<size_t>(nju)];
        const cplx* brow = &hb.data[g * static_cast<size_t>(2 * hb.n + 1)];
        for (int k = 0; k < mx; ++k) {
            double x = two_pi * k / mx;
            double b = eval_row(brow, hb.n, x);
            vals[g * static_cast<size_t>(mx) + static_cast<size_t>(k)] = eval_row(urow, hu.n, x + b);
        }
    }
    return TorusField::from_grid(vals, u.nu(), u.n_phi(), u.n_modes(), mphi, mx);
}

TorusField invert_diffeo(const TorusField& beta, double* residual)
{
    int mphi = beta.default_mphi();
    int mx = fft::next_fast_size(3 * beta.n_modes() + 1);
    Hybrid hb = to_hybrid(beta, mphi);
    int njb = 2 * hb.n + 1;
    std::vector<double> vals(hb.ngrid * static_cast<size_t>(mx));
    double worst = 0.0;
    for (size_t g = 0; g < hb.ngrid; ++g) {
        const cplx* brow = &hb.data[g * static_cast<size_t>(njb)];
        for (int k = 0; k < mx; ++k) {
            double y = two_pi * k / mx;
            // solve s + beta(phi, y + s) = 0 for s = breve(phi, y)
            double s = -eval_row(brow, hb.n, y);
            for (int it = 0; it < 50; ++it) {
                double r = s + eval_row(brow, hb.n, y + s);
                if (std::abs(r) < 1e-15) break;
                // derivative 1 + beta_x
                double h = 1e-6;
                double dp = (eval_row(brow, hb.n, y + s + h) - eval_row(brow, hb.n, y + s - h)) / (2 * h);
                s -= r / (1.0 + dp);
            }
            worst = std::max(worst, std::abs(s + eval_row(brow, hb.n, y + s)));
            vals[g * static_cast<size_t>(mx) + static_cast<size_t>(k)] = s;
        }
    }
    if (residual) *residual = worst;
    return TorusField::from_grid(vals, beta.nu(), beta.n_phi(), beta.n_modes(), mphi, mx);
}

namespace {

// evaluate an x-independent field at an arbitrary angle
double eval_angle_field(const TorusField& f, const std::vector<double>& phi)
{
    double s = 0.0;
    for (int le = 0; le < f.n_ell(); ++le) {
        auto e = f.ell_of(le);
        double ph = 0.0;
        for (int k = 0; k < f.nu(); ++k) ph += e[static_cast<size_t>(k)] * phi[static_cast<size_t>(k)];
        s += (f.coeff_flat(le, 0) * std::exp(cplx(0.0, ph))).real();
    }
    return s;
}

} // namespace

TorusField compose_phi_shift(const TorusField& u, const std::vector<double>& omega,
                             const TorusField& p)
{
    int mphi = u.default_mphi();
    size_t ngrid = 1;
    for (int k = 0; k < u.nu(); ++k) ngrid *= static_cast<size_t>(mphi);
    int nj = 2 * u.n_modes() + 1;
    Hybrid out;
    out.nu = u.nu();
    out.p = u.n_phi();
    out.n = u.n_modes();
    out.mphi = mphi;
    out.ngrid = ngrid;
    out.data.assign(ngrid * static_cast<size_t>(nj), cplx(0.0));
    // grid angles
    std::vector<double> phi(static_cast<size_t>(u.nu()));
    for (size_t g = 0; g < ngrid; ++g) {
        size_t rem = g;
        for (int k = u.nu() - 1; k >= 0; --k) {
            phi[static_cast<size_t>(k)] = two_pi * static_cast<double>(rem % static_cast<size_t>(mphi)) / mphi;
            rem /= static_cast<size_t>(mphi);
        }
        double pv = eval_angle_field(p, phi);
        std::vector<double> target(phi);
        for (int k = 0; k < u.nu(); ++k) target[static_cast<size_t>(k)] += omega[static_cast<size_t>(k)] * pv;
        // evaluate u_j(target) by direct sum over ell
        for (int le = 0; le < u.n_ell(); ++le) {
            auto e = u.ell_of(le);
            double ph = 0.0;
            for (int k = 0; k < u.nu(); ++k) ph += e[static_cast<size_t>(k)] * target[static_cast<size_t>(k)];
            cplx rot = std::exp(cplx(0.0, ph));
            for (int j = -u.n_modes(); j <= u.n_modes(); ++j)
                out.data[g * static_cast<size_t>(nj) + static_cast<size_t>(j + u.n_modes())] +=
                    rot * u.coeff_flat(le, j);
        }
    }
    return from_hybrid(out);
}

TorusField invert_phi_shift(const TorusField& p, const std::vector<double>& omega,
                            double* residual)
{
    int mphi = p.default_mphi();
    size_t ngrid = 1;
    for (int k = 0; k < p.nu(); ++k) ngrid *= static_cast<size_t>(mphi);
    std::vector<double> vals(ngrid);
    std::vector<double> phi(static_cast<size_t>(p.nu()));
    double worst = 0.0;
    for (size_t g = 0; g < ngrid; ++g) {
        size_t rem = g;
        for (int k = p.nu() - 1; k >= 0; --k) {
            phi[static_cast<size_t>(k)] = two_pi * static_cast<double>(rem % static_cast<size_t>(mphi)) / mphi;
            rem /= static_cast<size_t>(mphi);
        }
        // solve s + p(theta + omega s) = 0 for s = breve_p(theta)
        double s = -eval_angle_field(p, phi);
        std::vector<double> arg(phi);
        for (int it = 0; it < 100; ++it) {
            for (int k = 0; k < p.nu(); ++k) arg[static_cast<size_t>(k)] = phi[static_cast<size_t>(k)] + omega[static_cast<size_t>(k)] * s;
            double r = s + eval_angle_field(p, arg);
            if (std::abs(r) < 1e-15) break;
            s -= r;  // fixed point; p is O(eps^2), contraction is excellent
        }
        for (int k = 0; k < p.nu(); ++k) arg[static_cast<size_t>(k)] = phi[static_cast<size_t>(k)] + omega[static_cast<size_t>(k)] * s;
        worst = std::max(worst, std::abs(s + eval_angle_field(p, arg)));
        vals[g] = s;
    }
    if (residual) *residual = worst;
    // x-independent field
    Hybrid h;
    h.nu = p.nu();
    h.p = p.n_phi();
    h.n = 0;
    h.mphi = mphi;
    h.ngrid = ngrid;
    h.data.assign(ngrid, cplx(0.0));
    for (size_t g = 0; g < ngrid; ++g) h.data[g] = vals[g];
    TorusField res = from_hybrid(h);
    if (p.n_modes() == 0) return res;
    // widen to p's x-cutoff
    TorusField wide(p.nu(), p.n_phi(), p.n_modes());
    for (int le = 0; le < res.n_ell(); ++le) wide.set_coeff_raw(le, 0, res.coeff_flat(le, 0));
    return wide;
}

namespace {

double parity_defect_impl(const TorusField& f, double sign_phi, double sign_x, double flip)
{
    // compares u_{ell,j} with flip * u_{sign pattern applied}
    double d = 0.0, s = 0.0;
    for (int le = 0; le < f.n_ell(); ++le) {
        auto e = f.ell_of(le);
        std::vector<int> te(e.size());
        for (size_t k = 0; k < e.size(); ++k)
            te[k] = sign_phi < 0 ? -e[k] : e[k];
        int tle = f.ell_index(te);
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j) {
            int tj = sign_x < 0 ? -j : j;
            cplx a = f.coeff_flat(le, j);
            cplx b = flip * f.coeff_flat(tle, tj);
            d += std::norm(a - b);
            s += std::norm(a);
        }
    }
    return s > 0.0 ? std::sqrt(d / (4.0 * s)) : 0.0;
}

} // namespace

double even_defect(const TorusField& f) { return parity_defect_impl(f, -1, -1, 1.0); }
double odd_defect(const TorusField& f) { return parity_defect_impl(f, -1, -1, -1.0); }
double even_phi_defect(const TorusField& f) { return parity_defect_impl(f, -1, 1, 1.0); }
double odd_phi_defect(const TorusField& f) { return parity_defect_impl(f, -1, 1, -1.0); }

double conj_symmetry_defect(const TorusField& f)
{
    double d = 0.0, s = 0.0;
    for (int le = 0; le < f.n_ell(); ++le) {
        auto e = f.ell_of(le);
        std::vector<int> me(e.size());
        for (size_t k = 0; k < e.size(); ++k) me[k] = -e[k];
        int mle = f.ell_index(me);
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j) {
            cplx a = f.coeff_flat(le, j);
            d += std::norm(a - std::conj(f.coeff_flat(mle, -j)));
            s += std::norm(a);
        }
    }
    return s > 0.0 ? std::sqrt(d / s) : std::sqrt(d);
}

double traveling_defect(const TorusField& f, const std::vector<int>& jvec)
{
    double off = 0.0, s = 0.0;
    for (int le = 0; le < f.n_ell(); ++le) {
        auto e = f.ell_of(le);
        int dot = 0;
        for (int k = 0; k < f.nu(); ++k) dot += jvec[static_cast<size_t>(k)] * e[static_cast<size_t>(k)];
        for (int j = -f.n_modes(); j <= f.n_modes(); ++j) {
            double a = std::norm(f.coeff_flat(le, j));
            s += a;
            if (j + dot != 0) off += a;
        }
    }
    return s > 0.0 ? std::sqrt(off / s) : 0.0;
}

// ---------------------------------------------------------------------------
// TravelingProfile

TravelingProfile::TravelingProfile(std::vector<int> jvec, int n_phi)
    : jvec_(std::move(jvec)), p_(n_phi)
{
    n_ell_ = 1;
    for (size_t k = 0; k < jvec_.size(); ++k) n_ell_ *= 2 * p_ + 1;
    c_.assign(static_cast<size_t>(n_ell_), cplx(0.0));
}

cplx TravelingProfile::coeff(const std::vector<int>& ell) const
{
    int le = 0;
    for (size_t k = 0; k < jvec_.size(); ++k) {
        if (std::abs(ell[k]) > p_) throw std::out_of_range("TravelingProfile: |ell| > n_phi");
        le = le * (2 * p_ + 1) + (ell[k] + p_);
    }
    return c_[static_cast<size_t>(le)];
}

void TravelingProfile::set_coeff(const std::vector<int>& ell, cplx v)
{
    int le = 0, mle = 0;
    for (size_t k = 0; k < jvec_.size(); ++k) {
        if (std::abs(ell[k]) > p_) throw std::out_of_range("TravelingProfile: |ell| > n_phi");
        le = le * (2 * p_ + 1) + (ell[k] + p_);
        mle = mle * (2 * p_ + 1) + (-ell[k] + p_);
    }
    c_[static_cast<size_t>(le)] = v;
    c_[static_cast<size_t>(mle)] = std::conj(v);
}

std::vector<int> TravelingProfile::ell_of(int le) const
{
    std::vector<int> ell(jvec_.size());
    for (int k = static_cast<int>(jvec_.size()) - 1; k >= 0; --k) {
        ell[static_cast<size_t>(k)] = le % (2 * p_ + 1) - p_;
        le /= 2 * p_ + 1;
    }
    return ell;
}

TorusField traveling_embed(const TravelingProfile& p, int n_modes)
{
    TorusField u(p.nu(), p.n_phi(), n_modes);
    for (int le = 0; le < p.n_ell(); ++le) {
        cplx v = p.coeff_flat(le);
        if (v == cplx(0.0)) continue;
        auto e = p.ell_of(le);
        int dot = 0;
        for (int k = 0; k < p.nu(); ++k) dot += p.jvec()[static_cast<size_t>(k)] * e[static_cast<size_t>(k)];
        if (std::abs(dot) > n_modes)
            throw std::invalid_argument("traveling_embed: |jvec.ell| exceeds n_modes");
        u.set_coeff(e, -dot, v);
    }
    return u;
}

TravelingProfile traveling_extract(const TorusField& u, const std::vector<int>& jvec, double tol)
{
    double defect = traveling_defect(u, jvec);
    if (defect > tol)
        throw std::runtime_error("traveling_extract: non-traveling energy fraction " +
                                 std::to_string(defect));
    TravelingProfile p(jvec, u.n_phi());
    for (int le = 0; le < u.n_ell(); ++le) {
        auto e = u.ell_of(le);
        int dot = 0;
        for (int k = 0; k < u.nu(); ++k) dot += jvec[static_cast<size_t>(k)] * e[static_cast<size_t>(k)];
        if (std::abs(dot) <= u.n_modes()) p.set_coeff(e, u.coeff_flat(le, -dot));
    }
    return p;
}

TorusField project_tangential(const TorusField& u, const SiteSelection& sites)
{
    TorusField g(u.nu(), u.n_phi(), u.n_modes());
    for (int le = 0; le < u.n_ell(); ++le)
        for (int j = -u.n_modes(); j <= u.n_modes(); ++j)
            if (sites.contains(j)) RawAccess::set(g, le, j, u.coeff_flat(le, j));
    return g;
}

TorusField project_normal(const TorusField& u, const SiteSelection& sites)
{
    TorusField g(u.nu(), u.n_phi(), u.n_modes());
    for (int le = 0; le < u.n_ell(); ++le)
        for (int j = -u.n_modes(); j <= u.n_modes(); ++j)
            if (sites.is_normal_site(j)) RawAccess::set(g, le, j, u.coeff_flat(le, j));
    return g;
}

std::vector<cplx> phi_grid_columns(const TorusField& f, int mphi)
{
    return to_hybrid(f, mphi).data;
}

TorusField columns_to_field(const std::vector<cplx>& data, int nu, int n_phi, int n_modes,
                            int mphi)
{
    Hybrid h;
    h.nu = nu;
    h.p = n_phi;
    h.n = n_modes;
    h.mphi = mphi;
    h.ngrid = 1;
    for (int k = 0; k < nu; ++k) h.ngrid *= static_cast<size_t>(mphi);
    if (data.size() != h.ngrid * static_cast<size_t>(2 * n_modes + 1))
        throw std::invalid_argument("columns_to_field: size mismatch");
    h.data = data;
    return from_hybrid(h);
}

std::vector<TorusField> torus_columnwise(
    const std::vector<const TorusField*>& in, int n_out,
    const std::function<std::vector<RealField>(const std::vector<RealField>&)>& fn)
{
    if (in.empty()) throw std::invalid_argument("torus_columnwise: no inputs");
    int nu = in[0]->nu(), p = in[0]->n_phi(), n = in[0]->n_modes();
    for (auto* f : in)
        if (f->nu() != nu || f->n_phi() != p || f->n_modes() != n)
            throw std::invalid_argument("torus_columnwise: cutoff mismatch");
    int mphi = in[0]->default_mphi();
    std::vector<Hybrid> hin;
    hin.reserve(in.size());
    for (auto* f : in) hin.push_back(to_hybrid(*f, mphi));
    std::vector<Hybrid> hout(static_cast<size_t>(n_out));
    for (auto& h : hout) {
        h.nu = nu; h.p = p; h.n = n; h.mphi = mphi; h.ngrid = hin[0].ngrid;
        h.data.assign(h.ngrid * static_cast<size_t>(2 * n + 1), cplx(0.0));
    }
    int nj = 2 * n + 1;
    std::vector<RealField> cols(in.size(), RealField(n));
    for (size_t g = 0; g < hin[0].ngrid; ++g) {
        for (size_t q = 0; q < in.size(); ++q) {
            RealField col(n);
            const cplx* row = &hin[q].data[g * static_cast<size_t>(nj)];
            for (int j = 0; j <= n; ++j)
                col.set_coeff(j, 0.5 * (row[n + j] + std::conj(row[n - j])));
            cols[q] = col;
        }
        auto res = fn(cols);
        if (static_cast<int>(res.size()) != n_out)
            throw std::runtime_error("torus_columnwise: wrong output arity");
        for (int q = 0; q < n_out; ++q) {
            cplx* row = &hout[static_cast<size_t>(q)].data[g * static_cast<size_t>(nj)];
            for (int j = -n; j <= n; ++j) row[n + j] = res[static_cast<size_t>(q)].coeff(j);
        }
    }
    std::vector<TorusField> out;
    out.reserve(static_cast<size_t>(n_out));
    for (auto& h : hout) out.push_back(from_hybrid(h));
    return out;
}

} // namespace vorwave
