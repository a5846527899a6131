#include "vorwave/nonres.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace vorwave {
namespace nonres {

namespace {

double bracket(const std::vector<int>& ell)
{
    double s = 0.0;
    for (int e : ell) s += static_cast<double>(e) * e;
    return std::max(1.0, std::sqrt(s));
}

bool is_zero(const std::vector<int>& ell)
{
    for (int e : ell)
        if (e != 0) return false;
    return true;
}

int dot(const std::vector<int>& a, const std::vector<int>& b)
{
    int s = 0;
    for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

// iterate the box |ell|_inf <= L in Z^nu
template <typename F>
void for_each_ell(int nu, int L, F&& fn)
{
    std::vector<int> ell(static_cast<size_t>(nu), -L);
    for (;;) {
        fn(ell);
        int k = nu - 1;
        while (k >= 0) {
            if (++ell[static_cast<size_t>(k)] <= L) break;
            ell[static_cast<size_t>(k)] = -L;
            --k;
        }
        if (k < 0) break;
    }
}

double pow32(int j) { return std::pow(std::abs(static_cast<double>(j)), 1.5); }

} // namespace

void NonresConfig::validate(int nu) const
{
    if (upsilon <= 0.0 || upsilon >= 1.0) throw std::invalid_argument("nonres: upsilon in (0,1)");
    if (tau <= nu - 1) throw std::invalid_argument("nonres: tau must exceed nu - 1");
    if (m0 < 1 || ell_max < 1 || j_cutoff < 1 || kappa_grid < 2)
        throw std::invalid_argument("nonres: positive cutoffs required");
    if (!(kappa1 > 0.0 && kappa2 > kappa1)) throw std::invalid_argument("nonres: bad kappa range");
}

double FrequencyModel::mu(int j) const
{
    double v = m32 * dispersion::big_omega_j(physics, j) + m1 * j +
               m12 * std::sqrt(std::abs(static_cast<double>(j)));
    if (r) v += r(j);
    return v;
}

double FrequencyModel::mu_derivative(int j, int n) const
{
    return m32 * dispersion::omega_kappa_derivative(physics, j, n);
}

std::string class_name(MelnikovClass c)
{
    switch (c) {
        case MelnikovClass::zeroth: return "R0";
        case MelnikovClass::first: return "RI";
        case MelnikovClass::second_minus: return "RII";
        case MelnikovClass::second_plus: return "QII";
    }
    return "?";
}

DiophantineReport diophantine_margin(const std::vector<double>& omega, int ell_max, double tau)
{
    DiophantineReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for_each_ell(static_cast<int>(omega.size()), ell_max, [&](const std::vector<int>& ell) {
        if (is_zero(ell)) return;
        double wl = 0.0;
        for (size_t k = 0; k < omega.size(); ++k) wl += omega[k] * ell[k];
        double margin = std::abs(wl) * std::pow(bracket(ell), tau);
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_ell = ell;
        }
    });
    return rep;
}

std::vector<Tuple> momentum_tuples(const SiteSelection& sites, MelnikovClass cls,
                                   const NonresConfig& cfg)
{
    std::vector<Tuple> out;
    const auto& jv = sites.jvec();
    int nu = sites.nu();
    for_each_ell(nu, cfg.ell_max, [&](const std::vector<int>& ell) {
        double C = cfg.cutoff_C * bracket(ell);
        switch (cls) {
            case MelnikovClass::zeroth: {
                if (!is_zero(ell)) out.push_back({ell, 0, 0});
                break;
            }
            case MelnikovClass::first: {
                int j = -dot(jv, ell);
                if (!sites.is_normal_site(j) || std::abs(j) > cfg.j_cutoff) break;
                if (pow32(j) > C) break;
                out.push_back({ell, j, 0});
                break;
            }
            case MelnikovClass::second_minus: {
                for (int j = -cfg.j_cutoff; j <= cfg.j_cutoff; ++j) {
                    int jp = j + dot(jv, ell);
                    if (!sites.is_normal_site(j) || !sites.is_normal_site(jp)) continue;
                    if (std::abs(jp) > cfg.j_cutoff) continue;
                    if (j == jp) continue;  // R^{II}_{l,j,j} is contained in R^{(0)}_l
                    if (std::abs(pow32(j) - pow32(jp)) > C) continue;
                    out.push_back({ell, j, jp});
                }
                break;
            }
            case MelnikovClass::second_plus: {
                for (int j = -cfg.j_cutoff; j <= cfg.j_cutoff; ++j) {
                    int jp = -dot(jv, ell) - j;
                    if (!sites.is_normal_site(j) || !sites.is_normal_site(jp)) continue;
                    if (std::abs(jp) > cfg.j_cutoff) continue;
                    if (pow32(j) + pow32(jp) > C) continue;
                    out.push_back({ell, j, jp});
                }
                break;
            }
        }
    });
    return out;
}

namespace {

// weight on the right-hand side of the Melnikov condition, without upsilon
double rhs_weight(MelnikovClass cls, const Tuple& t, double tau)
{
    double br = std::pow(bracket(t.ell), -tau);
    switch (cls) {
        case MelnikovClass::zeroth: return 8.0 * br;
        case MelnikovClass::first: return 4.0 * pow32(t.j) * br;
        case MelnikovClass::second_minus:
            return 4.0 * std::max(1.0, std::abs(pow32(t.j) - pow32(t.jp))) * br;
        case MelnikovClass::second_plus: return 4.0 * (pow32(t.j) + pow32(t.jp)) * br;
    }
    return 1.0;
}

// n-th kappa derivative (n = 0 is the value) of the frequency combination
double combination(const WavePhysics& p, const SiteSelection& sites, MelnikovClass cls,
                   const Tuple& t, int n, const FrequencyModel* model,
                   const std::vector<double>* omega_override)
{
    auto dOm = [&](int j) {
        return n == 0 ? dispersion::big_omega_j(p, j)
                      : dispersion::omega_kappa_derivative(p, j, n);
    };
    double s = 0.0;
    const auto& S = sites.sites();
    for (size_t a = 0; a < S.size(); ++a) {
        double base = (omega_override && n == 0) ? (*omega_override)[a] : dOm(S[a]);
        s += t.ell[a] * base;
    }
    auto mu_or_Om = [&](int j) {
        if (model) return n == 0 ? model->mu(j) : model->mu_derivative(j, n);
        return dOm(j);
    };
    if (cls == MelnikovClass::first) s += mu_or_Om(t.j);
    if (cls == MelnikovClass::second_minus) s += mu_or_Om(t.j) - mu_or_Om(t.jp);
    if (cls == MelnikovClass::second_plus) s += mu_or_Om(t.j) + mu_or_Om(t.jp);
    return s;
}

} // namespace

double melnikov_margin(const FrequencyModel& model, const SiteSelection& sites,
                       const std::vector<double>& omega, MelnikovClass cls, const Tuple& t,
                       const NonresConfig& cfg)
{
    if (cls == MelnikovClass::zeroth && is_zero(t.ell))
        throw std::invalid_argument("melnikov_margin: ell = 0 excluded in the zeroth class");
    double s = 0.0;
    for (size_t a = 0; a < omega.size(); ++a) s += omega[a] * t.ell[a];
    if (cls == MelnikovClass::first) s += model.mu(t.j);
    if (cls == MelnikovClass::second_minus) s += model.mu(t.j) - model.mu(t.jp);
    if (cls == MelnikovClass::second_plus) s += model.mu(t.j) + model.mu(t.jp);
    return std::abs(s) / (cfg.upsilon * rhs_weight(cls, t, cfg.tau));
}

TransversalityResult transversality_scan_tuple(const WavePhysics& base,
                                               const SiteSelection& sites,
                                               const NonresConfig& cfg, MelnikovClass cls,
                                               const Tuple& t, const FrequencyModel* model)
{
    TransversalityResult res;
    res.bound = std::numeric_limits<double>::infinity();
    res.worst = t;
    res.tuples_scanned = 1;
    double br = bracket(t.ell);
    for (int i = 0; i < cfg.kappa_grid; ++i) {
        double kap = cfg.kappa1 + (cfg.kappa2 - cfg.kappa1) * (i + 0.5) / cfg.kappa_grid;
        WavePhysics p = base;
        p.kappa = kap;
        FrequencyModel m;
        if (model) {
            m = *model;
            m.physics = p;
        }
        double best = 0.0;
        for (int n = 0; n <= cfg.m0; ++n)
            best = std::max(best,
                            std::abs(combination(p, sites, cls, t, n, model ? &m : nullptr,
                                                 nullptr)));
        best /= br;
        if (best < res.bound) {
            res.bound = best;
            res.argmin_kappa = kap;
        }
    }
    return res;
}

TransversalityResult transversality_scan_family(const WavePhysics& base,
                                                const SiteSelection& sites,
                                                const NonresConfig& cfg, MelnikovClass cls,
                                                const FrequencyModel* model, int n_threads)
{
    auto tuples = momentum_tuples(sites, cls, cfg);
    TransversalityResult res;
    res.bound = std::numeric_limits<double>::infinity();
    res.tuples_scanned = static_cast<long>(tuples.size());
    if (tuples.empty()) {
        res.bound = 0.0;
        return res;
    }

    std::mutex mtx;
    std::atomic<size_t> next{0};
    int nt = std::max(1, n_threads);
    auto worker = [&]() {
        TransversalityResult local;
        local.bound = std::numeric_limits<double>::infinity();
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tuples.size()) break;
            auto r = transversality_scan_tuple(base, sites, cfg, cls, tuples[i], model);
            if (r.bound < local.bound) {
                local.bound = r.bound;
                local.argmin_kappa = r.argmin_kappa;
                local.worst = tuples[i];
            }
        }
        std::lock_guard<std::mutex> lock(mtx);
        if (local.bound < res.bound) {
            res.bound = local.bound;
            res.argmin_kappa = local.argmin_kappa;
            res.worst = local.worst;
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return res;
}

namespace {

struct Mask {
    std::vector<uint64_t> bits;
    explicit Mask(long n) : bits(static_cast<size_t>((n + 63) / 64), 0) {}
    void set(long i) { bits[static_cast<size_t>(i >> 6)] |= (uint64_t{1} << (i & 63)); }
    void or_with(const Mask& o)
    {
        for (size_t k = 0; k < bits.size(); ++k) bits[k] |= o.bits[k];
    }
    long count() const
    {
        long c = 0;
        for (uint64_t w : bits) c += __builtin_popcountll(w);
        return c;
    }
};

} // namespace

ResonantSetEstimate measure_estimate(const std::function<FrequencyModel(double)>& model_at,
                                     const SiteSelection& sites, const NonresConfig& cfg,
                                     double epsilon, int n_threads, bool strict_guard)
{
    cfg.validate(sites.nu());
    ResonantSetEstimate est;
    est.kappa1 = cfg.kappa1;
    est.kappa2 = cfg.kappa2;
    est.grid = cfg.kappa_grid;
    est.upsilon = cfg.upsilon;
    est.tau = cfg.tau;
    est.ell_max = cfg.ell_max;
    est.j_cutoff = cfg.j_cutoff;
    est.epsilon = epsilon;
    long Nf = cfg.kappa_grid;
    double step = (cfg.kappa2 - cfg.kappa1) / static_cast<double>(Nf);
    est.step = step;

    // tabulate the model and the tangential frequencies on the fine grid
    std::vector<double> kap(static_cast<size_t>(Nf));
    std::vector<double> m32(static_cast<size_t>(Nf)), m1(static_cast<size_t>(Nf)),
        m12(static_cast<size_t>(Nf));
    std::vector<std::function<double(int)>> rtab(static_cast<size_t>(Nf));
    int nu = sites.nu();
    std::vector<double> omtab(static_cast<size_t>(Nf) * static_cast<size_t>(nu));
    WavePhysics phys0;
    for (long i = 0; i < Nf; ++i) {
        double k = cfg.kappa1 + (i + 0.5) * step;
        kap[static_cast<size_t>(i)] = k;
        FrequencyModel m = model_at(k);
        if (i == 0) phys0 = m.physics;
        m32[static_cast<size_t>(i)] = m.m32;
        m1[static_cast<size_t>(i)] = m.m1;
        m12[static_cast<size_t>(i)] = m.m12;
        rtab[static_cast<size_t>(i)] = m.r;
        for (int a = 0; a < nu; ++a)
            omtab[static_cast<size_t>(i) * nu + static_cast<size_t>(a)] =
                m.m32 * dispersion::big_omega_j(m.physics, sites.sites()[static_cast<size_t>(a)]);
    }
    // NOTE: the perturbed tangential vector is m32 * Omega(kappa); the solved
    // frequency correction r_eps, when known, is folded in by the caller
    // through model_at (see the CLI driver).

    auto mu_at = [&](long i, int j) {
        WavePhysics p = phys0;
        p.kappa = kap[static_cast<size_t>(i)];
        double v = m32[static_cast<size_t>(i)] * dispersion::big_omega_j(p, j) +
                   m1[static_cast<size_t>(i)] * j +
                   m12[static_cast<size_t>(i)] * std::sqrt(std::abs(static_cast<double>(j)));
        if (rtab[static_cast<size_t>(i)]) v += rtab[static_cast<size_t>(i)](j);
        return v;
    };
    auto f_at = [&](long i, MelnikovClass cls, const Tuple& t) {
        double s = 0.0;
        for (int a = 0; a < nu; ++a)
            s += t.ell[static_cast<size_t>(a)] *
                 omtab[static_cast<size_t>(i) * nu + static_cast<size_t>(a)];
        if (cls == MelnikovClass::first) s += mu_at(i, t.j);
        if (cls == MelnikovClass::second_minus) s += mu_at(i, t.j) - mu_at(i, t.jp);
        if (cls == MelnikovClass::second_plus) s += mu_at(i, t.j) + mu_at(i, t.jp);
        return s;
    };

    const MelnikovClass classes[4] = {MelnikovClass::zeroth, MelnikovClass::first,
                                      MelnikovClass::second_minus, MelnikovClass::second_plus};
    Mask masks[4] = {Mask(Nf), Mask(Nf), Mask(Nf), Mask(Nf)};
    double min_width = std::numeric_limits<double>::infinity();
    bool guard_ok = true;

    long coarse_target = 4096;
    long stride = std::max<long>(1, Nf / coarse_target);

    std::mutex mtx;
    for (int ci = 0; ci < 4; ++ci) {
        MelnikovClass cls = classes[ci];
        auto tuples = momentum_tuples(sites, cls, cfg);
        est.tuples[ci] = static_cast<long>(tuples.size());
        std::atomic<size_t> next{0};
        auto worker = [&]() {
            Mask local(Nf);
            double local_minw = std::numeric_limits<double>::infinity();
            bool local_guard = true;
            for (;;) {
                size_t ti = next.fetch_add(1);
                if (ti >= tuples.size()) break;
                const Tuple& t = tuples[ti];
                double thr = cfg.upsilon * rhs_weight(cls, t, cfg.tau);
                // coarse pass: sample and estimate the Lipschitz constant
                double lip = 0.0;
                double fprev = f_at(0, cls, t);
                std::vector<double> fs;
                fs.reserve(static_cast<size_t>(Nf / stride + 2));
                fs.push_back(fprev);
                for (long i = stride; i < Nf; i += stride) {
                    double fi = f_at(i, cls, t);
                    lip = std::max(lip, std::abs(fi - fprev) / (stride * step));
                    fs.push_back(fi);
                    fprev = fi;
                }
                lip = 3.0 * lip + 1e-12;
                double width = 2.0 * thr / lip;
                local_minw = std::min(local_minw, width);
                if (width < 2.0 * step) local_guard = false;
                // refine candidate spans
                double safety = thr + lip * (stride * step);
                size_t idx = 0;
                for (long i0 = 0; i0 < Nf; i0 += stride, ++idx) {
                    double fa = fs[idx];
                    double fb = idx + 1 < fs.size() ? fs[idx + 1] : fa;
                    if (std::min(std::abs(fa), std::abs(fb)) > safety && fa * fb > 0.0) continue;
                    long hi = std::min(Nf, i0 + stride + 1);
                    for (long i = i0; i < hi; ++i)
                        if (std::abs(f_at(i, cls, t)) < thr) local.set(i);
                }
            }
            std::lock_guard<std::mutex> lock(mtx);
            masks[ci].or_with(local);
            min_width = std::min(min_width, local_minw);
            guard_ok = guard_ok && local_guard;
        };
        std::vector<std::thread> pool;
        for (int k = 0; k < std::max(1, n_threads); ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    est.min_width = std::isfinite(min_width) ? min_width : 0.0;
    est.guard_ok = guard_ok;
    if (!guard_ok && strict_guard)
        throw std::runtime_error("measure_estimate: grid too coarse for the requested upsilon "
                                 "(narrowest width " + std::to_string(min_width) + ")");

    est.measure_R0 = masks[0].count() * step;
    est.measure_RI = masks[1].count() * step;
    est.measure_RII = masks[2].count() * step;
    est.measure_QII = masks[3].count() * step;
    Mask uni(Nf);
    for (int ci = 0; ci < 4; ++ci) uni.or_with(masks[ci]);
    est.total = uni.count() * step;

    // merged excluded intervals of the union
    long i = 0;
    while (i < Nf) {
        bool on = (uni.bits[static_cast<size_t>(i >> 6)] >> (i & 63)) & 1;
        if (!on) {
            ++i;
            continue;
        }
        long j = i;
        while (j < Nf && ((uni.bits[static_cast<size_t>(j >> 6)] >> (j & 63)) & 1)) ++j;
        est.excluded_intervals.emplace_back(cfg.kappa1 + i * step, cfg.kappa1 + j * step);
        i = j;
    }
    return est;
}

} // namespace nonres
} // namespace vorwave
