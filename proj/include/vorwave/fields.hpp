#ifndef VORWAVE_FIELDS_HPP
#define VORWAVE_FIELDS_HPP

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace vorwave {

using cplx = std::complex<double>;

constexpr double two_pi = 6.283185307179586476925286766559;

// Smooth even cut-off: 0 for |x| <= 1/3, 1 for |x| >= 2/3, C-infinity in between.
double smooth_cutoff(double x);

// Tangential site selection: strictly increasing moduli n̄_1 < ... < n̄_ν with
// signs σ_a, signed sites j̄_a = σ_a n̄_a and wave vector jvec = (j̄_1,...,j̄_ν).
class SiteSelection {
public:
    SiteSelection(std::vector<int> moduli, std::vector<int> signs);
    // Permits repeated moduli (used by resonance diagnostics only).
    static SiteSelection unchecked(std::vector<int> moduli, std::vector<int> signs);

    int nu() const { return static_cast<int>(sites_.size()); }
    const std::vector<int>& moduli() const { return moduli_; }
    const std::vector<int>& signs() const { return signs_; }
    const std::vector<int>& sites() const { return sites_; }   // signed sites S
    const std::vector<int>& jvec() const { return sites_; }    // ȷ⃗ = (σ_a n̄_a)
    bool contains(int j) const;       // j in S
    bool is_normal_site(int j) const; // j in S_0^c = Z \ (S ∪ {0})

private:
    SiteSelection() = default;
    std::vector<int> moduli_, signs_, sites_;
};

// Real 2π-periodic function of x stored as Fourier coefficients u_j, |j| <= n_modes,
// with u_{-j} = conj(u_j) enforced by all mutators.
class RealField {
public:
    explicit RealField(int n_modes);

    int n_modes() const { return n_; }
    cplx coeff(int j) const { return c_[static_cast<size_t>(j + n_)]; }
    // Sets u_j and u_{-j} = conj(v) together.
    void set_coeff(int j, cplx v);
    void set_cos(int j, double amp);  // += not; assigns amp*cos(jx) at mode j
    void set_sin(int j, double amp);

    double mean() const { return c_[static_cast<size_t>(n_)].real(); }

    // Grid values on m uniform points x_k = 2π k/m (m >= 2n+1; 0 picks default).
    std::vector<double> grid_values(int m = 0) const;
    static RealField from_grid(const std::vector<double>& values, int n_modes);

    double l2_norm() const;   // sqrt(∫ u^2 dx) = sqrt(2π Σ |u_j|^2)
    double sup_norm() const;  // max over dealiased grid
    double conj_symmetry_defect() const;

    RealField& operator+=(const RealField& o);
    RealField& operator-=(const RealField& o);
    RealField& operator*=(double s);

private:
    int n_;
    std::vector<cplx> c_;
    friend RealField apply_multiplier(const std::function<cplx(int)>&, const RealField&);
    friend RealField field_product(const RealField&, const RealField&);
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(double s, RealField a);

// Mode-wise multiplier Op(sym): u_j -> sym(j) u_j. For a real output sym must
// satisfy sym(-j) = conj(sym(j)); the mean mode is handled by sym(0).
RealField apply_multiplier(const std::function<cplx(int)>& sym, const RealField& f);

RealField dx(const RealField& f);
RealField dx_inverse(const RealField& f);  // zeroes the mean mode
RealField hilbert(const RealField& f);     // -i sign(j), H(1) = 0
RealField mean_project(const RealField& f);

// Pointwise product with 3/2-rule zero padding, truncated back to the common cutoff.
RealField field_product(const RealField& f, const RealField& g);

// Pointwise map evaluated on the dealiased grid and re-truncated.
RealField pointwise(const RealField& f, const std::function<double(double)>& fn);
RealField pointwise2(const RealField& f, const RealField& g,
                     const std::function<double(double, double)>& fn);

double l2_inner(const RealField& f, const RealField& g);  // ∫ f g dx
RealField translate(const RealField& f, double s);        // u(x) -> u(x+s)
RealField reflect(const RealField& f);                    // u(x) -> u(-x)

// Real function on T^ν_φ × T_x stored as coefficients u_{ℓ,j}, |ℓ|_∞ <= n_phi,
// |j| <= n_modes, with u_{-ℓ,-j} = conj(u_{ℓ,j}).
class TorusField {
public:
    TorusField(int nu, int n_phi, int n_modes);

    int nu() const { return nu_; }
    int n_phi() const { return p_; }
    int n_modes() const { return n_; }
    size_t size() const { return c_.size(); }
    int n_ell() const { return n_ell_; }  // (2 n_phi + 1)^ν

    cplx coeff(const std::vector<int>& ell, int j) const { return c_[index(ell, j)]; }
    void set_coeff(const std::vector<int>& ell, int j, cplx v);  // keeps conjugate pair

    // Linear (flattened) access used by the generic loops below; ell_of unpacks.
    cplx coeff_flat(int le, int j) const { return c_[flat(le, j)]; }
    void set_coeff_flat(int le, int j, cplx v);
    // Writes a single entry without touching the conjugate partner. Used by
    // operations that fill every entry themselves and by the mode projections,
    // whose output is one-sided by definition.
    void set_coeff_raw(int le, int j, cplx v) { c_[flat(le, j)] = v; }
    std::vector<int> ell_of(int le) const;
    int ell_index(const std::vector<int>& ell) const;

    double mean() const;  // (ℓ,j) = 0 mode
    double l2_norm() const;
    double sup_norm() const;

    std::vector<double> grid_values(int mphi = 0, int mx = 0) const;
    static TorusField from_grid(const std::vector<double>& v, int nu, int n_phi, int n_modes,
                                int mphi, int mx);

    TorusField& operator+=(const TorusField& o);
    TorusField& operator-=(const TorusField& o);
    TorusField& operator*=(double s);

    // Default dealiased grid sizes.
    int default_mphi() const;
    int default_mx() const;

private:
    int nu_, p_, n_, n_ell_;
    std::vector<cplx> c_;
    size_t index(const std::vector<int>& ell, int j) const;
    size_t flat(int le, int j) const { return static_cast<size_t>(le) * (2 * n_ + 1) + (j + n_); }
};

TorusField operator+(TorusField a, const TorusField& b);
TorusField operator-(TorusField a, const TorusField& b);
TorusField operator*(double s, TorusField a);

// (ℓ,j)-multiplier. sym(-ℓ,-j) = conj(sym(ℓ,j)) required for real output.
TorusField apply_multiplier(const std::function<cplx(const std::vector<int>&, int)>& sym,
                            const TorusField& f);

TorusField dx(const TorusField& f);
TorusField dx_inverse(const TorusField& f);
TorusField omega_dphi(const std::vector<double>& omega, const TorusField& f);

// Extended inverse (ω·∂_φ)^{-1}_ext with the smooth cut-off χ(ω·ℓ υ^{-1}⟨ℓ⟩^τ).
// cutoff_active (optional) reports whether any retained mode had χ < 1 and the
// worst divisor margin min |ω·ℓ| ⟨ℓ⟩^τ / υ over nonzero modes.
struct SmallDivisorReport {
    bool cutoff_active = false;
    double worst_margin = 0.0;        // min |ω·ℓ| ⟨ℓ⟩^τ / υ over ℓ ≠ 0 present
    std::vector<int> worst_ell;
};
TorusField omega_dphi_inverse(const std::vector<double>& omega, const TorusField& f,
                              double upsilon, double tau, SmallDivisorReport* rep = nullptr);

TorusField field_product(const TorusField& f, const TorusField& g);
TorusField pointwise(const TorusField& f, const std::function<double(double)>& fn);

double l2_inner(const TorusField& f, const TorusField& g);  // ∫∫ f g dφ dx

// x-average ⟨u⟩_x as a field constant in x; phi_average ⟨u⟩_φ constant in φ.
TorusField x_average(const TorusField& f);
TorusField phi_average(const TorusField& f);

// u(φ,x) -> u(φ - jvec ς, x) and u(φ, x+ς).
TorusField shift_phi(const TorusField& f, const std::vector<double>& dphi);
TorusField translate_x(const TorusField& f, double s);
// x-translation by a φ-dependent amount: u(φ, x - rho(φ)) with rho given by an
// x-independent field.
TorusField translate_x_by(const TorusField& f, const TorusField& rho);

// Composition with the x-diffeomorphism y = x + beta(φ,x):
//   direct:  (B u)(φ,x)  = u(φ, x + beta(φ,x))
//   inverse: (B^{-1}u)(φ,y) = u(φ, y + breve(φ,y)),  breve from invert_diffeo.
TorusField compose_x_diffeo(const TorusField& u, const TorusField& beta);
// Solves y + breve + beta(φ, y+breve) = y pointwise by Newton; returns breve and
// (optionally) the max fixed-point residual.
TorusField invert_diffeo(const TorusField& beta, double* residual = nullptr);

// Composition with the angle reparametrization ϑ = φ + ω p(φ):
//   (P h)(φ,x) = h(φ + ω p(φ), x),  (P^{-1} h)(ϑ,x) = h(ϑ + ω p̆(ϑ), x).
TorusField compose_phi_shift(const TorusField& u, const std::vector<double>& omega,
                             const TorusField& p);
// p̆ with ϑ = φ + ω p(φ) <=> φ = ϑ + ω p̆(ϑ); scalar Newton along the ω direction.
TorusField invert_phi_shift(const TorusField& p, const std::vector<double>& omega,
                            double* residual = nullptr);

// Parities under (φ,x) -> (-φ,-x); relative L2 defects.
double even_defect(const TorusField& f);      // u(-φ,-x) = u(φ,x)
double odd_defect(const TorusField& f);       // u(-φ,-x) = -u(φ,x)
double even_phi_defect(const TorusField& f);  // u(-φ,x) = u(φ,x)
double odd_phi_defect(const TorusField& f);
double conj_symmetry_defect(const TorusField& f);
double traveling_defect(const TorusField& f, const std::vector<int>& jvec);

// Traveling profile U(ψ) with u(φ,x) = U(φ - jvec·x), stored by angle modes U_ℓ.
class TravelingProfile {
public:
    TravelingProfile(std::vector<int> jvec, int n_phi);
    int nu() const { return static_cast<int>(jvec_.size()); }
    int n_phi() const { return p_; }
    const std::vector<int>& jvec() const { return jvec_; }
    cplx coeff(const std::vector<int>& ell) const;
    void set_coeff(const std::vector<int>& ell, cplx v);
    int n_ell() const { return n_ell_; }
    cplx coeff_flat(int le) const { return c_[static_cast<size_t>(le)]; }
    std::vector<int> ell_of(int le) const;

private:
    std::vector<int> jvec_;
    int p_, n_ell_;
    std::vector<cplx> c_;
};

// U_ℓ placed at (ℓ, j = -jvec·ℓ); modes with |jvec·ℓ| > n_modes are rejected.
TorusField traveling_embed(const TravelingProfile& p, int n_modes);
// Fails if the non-traveling energy fraction exceeds tol.
TravelingProfile traveling_extract(const TorusField& u, const std::vector<int>& jvec,
                                   double tol = 1e-10);

// L2 split of the spatial modes: tangential keeps columns j in S, normal keeps
// j in S_0^c; the j = 0 column is kept by neither (mean handled separately).
TorusField project_tangential(const TorusField& u, const SiteSelection& sites);
TorusField project_normal(const TorusField& u, const SiteSelection& sites);

// Applies an x-column operation at every φ grid point: fn maps the input
// columns (one RealField per input) to n_out output columns. All inputs must
// share (nu, n_phi, n_modes).
std::vector<TorusField> torus_columnwise(
    const std::vector<const TorusField*>& in, int n_out,
    const std::function<std::vector<RealField>(const std::vector<RealField>&)>& fn);

// x-mode columns on the φ grid (mphi points per angle, row-major over angles):
// layout [g * (2 n_modes + 1) + (j + n_modes)]; columns_to_field inverts.
std::vector<cplx> phi_grid_columns(const TorusField& f, int mphi);
TorusField columns_to_field(const std::vector<cplx>& data, int nu, int n_phi, int n_modes,
                            int mphi);

} // namespace vorwave

#endif
