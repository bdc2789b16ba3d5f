#include "rfseries/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "rfseries/errors.hpp"
#include "rfseries/parallel.hpp"
#include "rfseries/zeta.hpp"

namespace rfs {

void TruncationParams::validate() const {
    if (prime_cutoff < 1 || sum_cutoff < 1 || series_qmax < 1 || exponent_cap < 1)
        throw std::invalid_argument("TruncationParams: cutoffs must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("TruncationParams: tol must be positive");
}

const char* method_name(CoeffTable::Method m) {
    switch (m) {
        case CoeffTable::Method::euler_product: return "euler_product";
        case CoeffTable::Method::double_sum: return "double_sum";
        case CoeffTable::Method::closed_form: return "closed_form";
    }
    return "unknown";
}

namespace {

i64 next_pow2(i64 n) {
    i64 b = 1024;
    while (b < n) b <<= 1;
    return b;
}

}  // namespace

const SieveTables& shared_sieve(i64 limit) {
    static std::mutex mu;
    static std::map<i64, std::unique_ptr<SieveTables>> pool;
    i64 bucket = next_pow2(limit);
    std::lock_guard<std::mutex> lk(mu);
    auto it = pool.lower_bound(bucket);
    if (it != pool.end()) return *it->second;
    auto [pos, ok] = pool.emplace(bucket, std::make_unique<SieveTables>(bucket));
    return *pos->second;
}

namespace {

constexpr double kShellEps = 4e-17;

int effective_cap(const MultFn2d& F, const TruncationParams& params) {
    return std::min(params.exponent_cap, F.exponent_cap());
}

struct LocalSum {
    double value = 0.0;
    bool stabilized = true;
    double last_shell = 0.0;
};

// sum over e1 >= s1, e2 >= s2 of (f*mu)(p^{e1},p^{e2}) / p^{e1+e2},
// in increasing shells of e1+e2, truncated at the exponent cap.
LocalSum local_sum2(const MultFn2d& F, i64 p, int s1, int s2, int cap) {
    LocalSum out;
    double acc = 0.0;
    double scale = 0.0;
    int quiet = 0;
    double pw = std::pow(static_cast<double>(p), -static_cast<double>(s1 + s2));
    const double invp = 1.0 / static_cast<double>(p);
    for (int t = s1 + s2; t <= 2 * cap; ++t) {
        double shell = 0.0;
        int lo = std::max(s1, t - cap);
        int hi = std::min(cap, t - s2);
        for (int e1 = lo; e1 <= hi; ++e1) shell += F.local(p, e1, t - e1);
        shell *= pw;
        acc += shell;
        scale = std::max({scale, std::fabs(acc), std::fabs(shell)});
        out.last_shell = shell;
        // Structurally zero shells (off-diagonal gaps) are not
        // convergence evidence; only quiet shells after mass count.
        if (scale > 0.0 && std::fabs(shell) <= kShellEps * scale) {
            if (++quiet >= 2) { out.value = acc; return out; }
        } else {
            quiet = 0;
        }
        pw *= invp;
    }
    out.value = acc;
    out.stabilized =
        std::fabs(out.last_shell) <= 1e-12 * std::max(scale, 1e-300);
    return out;
}

// One-variable analogue: sum over e >= start of local(p,e) / p^{w e}.
LocalSum local_sum1(const ArithFn1d& g, i64 p, int start, int cap, int weight) {
    LocalSum out;
    double acc = 0.0;
    double scale = 0.0;
    int quiet = 0;
    double pw = std::pow(static_cast<double>(p), -static_cast<double>(weight * start));
    const double step = std::pow(static_cast<double>(p), -static_cast<double>(weight));
    for (int e = start; e <= cap; ++e) {
        double shell = g.local(p, e) * pw;
        acc += shell;
        scale = std::max({scale, std::fabs(acc), std::fabs(shell)});
        out.last_shell = shell;
        if (scale > 0.0 && std::fabs(shell) <= kShellEps * scale) {
            if (++quiet >= 2) { out.value = acc; return out; }
        } else {
            quiet = 0;
        }
        pw *= step;
    }
    out.value = acc;
    out.stabilized =
        std::fabs(out.last_shell) <= 1e-12 * std::max(scale, 1e-300);
    return out;
}

// ---------------------------------------------------------------------
// Smooth completion of Euler products over the primes beyond the cutoff.
// The factor deviations t_p = F_p - 1 are sampled at four widely spread
// primes and fitted as c2/p^2 + c3/p^3. Two independent 2x2 solves must
// agree, otherwise the deviations oscillate (a character-like factor)
// and the tail is left alone: cancellation already makes it negligible.
// ---------------------------------------------------------------------

struct TailFit {
    bool applied = false;
    double log_correction = 0.0;
};

TailFit fit_prime_tail(const SieveTables& sv, i64 P, double pz2_partial, double pz3_partial,
                       const std::function<double(i64)>& factor_at) {
    TailFit out;
    const auto& primes = sv.primes();
    auto largest_leq = [&](i64 x) -> i64 {
        auto it = std::upper_bound(primes.begin(), primes.end(), static_cast<std::int32_t>(std::min(x, P)));
        if (it == primes.begin()) return 0;
        return *std::prev(it);
    };
    i64 targets[4] = {std::max<i64>(1000, P / 1000), std::max<i64>(2000, P / 100), P / 10, P};
    std::vector<i64> ps;
    for (i64 t : targets) {
        i64 p = largest_leq(t);
        if (p > 2 && (ps.empty() || ps.back() != p)) ps.push_back(p);
    }
    if (ps.size() != 4) return out;

    double tail2 = std::max(0.0, prime_zeta(2.0) - pz2_partial);
    double tail3 = std::max(0.0, prime_zeta(3.0) - pz3_partial);
    if (tail2 <= 0.0 && tail3 <= 0.0) return out;

    double y[4];
    for (int i = 0; i < 4; ++i) {
        double t = factor_at(ps[i]) - 1.0;
        if (!std::isfinite(t)) return out;
        y[i] = t * static_cast<double>(ps[i]) * static_cast<double>(ps[i]);
    }
    auto solve2 = [&](int a, int b, double& c2, double& c3) {
        double ia = 1.0 / static_cast<double>(ps[a]);
        double ib = 1.0 / static_cast<double>(ps[b]);
        c3 = (y[a] - y[b]) / (ia - ib);
        c2 = y[a] - c3 * ia;
    };
    double c2a, c3a, c2b, c3b;
    solve2(0, 2, c2a, c3a);
    solve2(1, 3, c2b, c3b);
    const double slack2 = 1e-12 / std::max(tail2, 1e-300);
    const double slack3 = 1e-12 / std::max(tail3, 1e-300);
    auto agree = [](double a, double b, double slack) {
        return std::fabs(a - b) <= 0.2 * (std::fabs(a) + std::fabs(b)) + slack;
    };
    if (!agree(c2a, c2b, slack2) || !agree(c3a, c3b, slack3)) return out;
    out.applied = true;
    out.log_correction = 0.5 * (c2a + c2b) * tail2 + 0.5 * (c3a + c3b) * tail3;
    return out;
}

MeanResult euler_product_over_primes(const SieveTables& sv, i64 P,
                                     const std::function<double(i64)>& factor_at) {
    MeanResult res;
    double prod = 1.0;
    double last_dev = 0.0;
    double pz2 = 0.0, pz3 = 0.0;
    bool zero = false;
    for (std::int32_t p : sv.primes()) {
        if (p > P) break;
        double f = factor_at(p);
        prod *= f;
        last_dev = std::fabs(f - 1.0);
        double ip = 1.0 / static_cast<double>(p);
        pz2 += ip * ip;
        pz3 += ip * ip * ip;
        if (f == 0.0) zero = true;
    }
    res.value = prod;
    res.error_proxy = last_dev;
    if (!zero && prod != 0.0) {
        TailFit fit = fit_prime_tail(sv, P, pz2, pz3, factor_at);
        if (fit.applied) {
            res.value = prod * std::exp(fit.log_correction);
            res.tail_corrected = true;
            res.tail_correction = fit.log_correction;
        }
    }
    return res;
}

// ---------------------------------------------------------------------
// Per-family derived tables for the double-sum fast paths, keyed by the
// function's shared state and invalidated when it dies.
// ---------------------------------------------------------------------

struct DepthOneTables {
    std::vector<double> alpha, beta, gamma, tminus;  // indexed by prime p
    bool decoupled_ok = true;
};

struct FamilyCache {
    std::mutex mu;
    std::weak_ptr<const void> owner;
    std::map<i64, std::shared_ptr<const std::vector<double>>> diag;  // by kmax bucket
    std::map<i64, std::shared_ptr<const DepthOneTables>> depth;      // by X bucket
};

FamilyCache& family_cache(const MultFn2d& F) {
    static std::mutex mu;
    static std::map<const void*, std::unique_ptr<FamilyCache>> pool;
    std::shared_ptr<const void> handle = F.state_handle();
    std::lock_guard<std::mutex> lk(mu);
    auto& slot = pool[handle.get()];
    if (!slot || slot->owner.expired() || slot->owner.lock() != handle) {
        slot = std::make_unique<FamilyCache>();
        slot->owner = handle;
    }
    return *slot;
}

// Values (f*mu)(k,k) for k = 1..kmax via the smallest-prime-factor sieve.
std::shared_ptr<const std::vector<double>> diagonal_values(const MultFn2d& F, i64 kmax,
                                                           int cap) {
    FamilyCache& cache = family_cache(F);
    i64 bucket = next_pow2(kmax);
    {
        std::lock_guard<std::mutex> lk(cache.mu);
        auto it = cache.diag.lower_bound(bucket);
        if (it != cache.diag.end()) return it->second;
    }
    const SieveTables& sv = shared_sieve(bucket);
    auto w = std::make_shared<std::vector<double>>(static_cast<size_t>(bucket) + 1, 0.0);
    std::vector<std::int32_t> expo(static_cast<size_t>(bucket) + 1, 0);
    std::vector<std::int64_t> ppart(static_cast<size_t>(bucket) + 1, 1);
    (*w)[1] = 1.0;
    for (i64 k = 2; k <= bucket; ++k) {
        i64 p = sv.smallest_factor(k);
        i64 m = k / p;
        int e;
        i64 pe;
        if (m % p == 0) {
            e = expo[static_cast<size_t>(m)] + 1;
            pe = ppart[static_cast<size_t>(m)] * p;
        } else {
            e = 1;
            pe = p;
        }
        expo[static_cast<size_t>(k)] = e;
        ppart[static_cast<size_t>(k)] = pe;
        i64 rest = k / pe;
        (*w)[static_cast<size_t>(k)] =
            (*w)[static_cast<size_t>(rest)] *
            (e <= cap ? F.local(p, e, e) : 0.0);
    }
    std::lock_guard<std::mutex> lk(cache.mu);
    return cache.diag.emplace(bucket, std::move(w)).first->second;
}

std::shared_ptr<const DepthOneTables> depth_one_tables(const MultFn2d& F, i64 xmax) {
    FamilyCache& cache = family_cache(F);
    i64 bucket = next_pow2(xmax);
    {
        std::lock_guard<std::mutex> lk(cache.mu);
        auto it = cache.depth.lower_bound(bucket);
        if (it != cache.depth.end()) return it->second;
    }
    const SieveTables& sv = shared_sieve(bucket);
    auto t = std::make_shared<DepthOneTables>();
    t->alpha.assign(static_cast<size_t>(bucket) + 1, 0.0);
    t->beta.assign(static_cast<size_t>(bucket) + 1, 0.0);
    t->gamma.assign(static_cast<size_t>(bucket) + 1, 0.0);
    t->tminus.assign(static_cast<size_t>(bucket) + 1, -1.0);
    for (std::int32_t p : sv.primes()) {
        if (p > bucket) break;
        double a = F.local(p, 1, 0);
        double b = F.local(p, 0, 1);
        double g = F.local(p, 1, 1);
        t->alpha[static_cast<size_t>(p)] = a;
        t->beta[static_cast<size_t>(p)] = b;
        t->gamma[static_cast<size_t>(p)] = g;
        if (g != 0.0 && (a == 0.0 || b == 0.0)) t->decoupled_ok = false;
        t->tminus[static_cast<size_t>(p)] = (a != 0.0 && b != 0.0) ? g / (a * b) - 1.0 : -1.0;
    }
    std::lock_guard<std::mutex> lk(cache.mu);
    return cache.depth.emplace(bucket, std::move(t)).first->second;
}

// ---------------------------------------------------------------------
// Double-sum rectangle partial sums at the gauge cutoffs.
// ---------------------------------------------------------------------

std::array<i64, 4> gauge_cutoffs(i64 M) {
    return {M / 8, M / 4, M / 2, M};
}

// Diagonal grids: terms need m1 q1 = m2 q2 = lcm(q1,q2) * t.
std::array<double, 4> rect_diagonal(const MultFn2d& F, i64 q1, i64 q2,
                                    const std::array<i64, 4>& cuts, int cap) {
    i64 L = lcm_i64(q1, q2);
    i64 minq = std::min(q1, q2);
    std::array<i64, 4> tmax;
    for (int i = 0; i < 4; ++i) tmax[i] = cuts[i] * minq / L;
    std::array<double, 4> S{};
    if (tmax[3] < 1) return S;
    auto w = diagonal_values(F, L * tmax[3], cap);
    double acc = 0.0;
    i64 t = 0;
    for (int i = 0; i < 4; ++i) {
        for (++t; t <= tmax[i]; ++t) {
            double k = static_cast<double>(L) * static_cast<double>(t);
            acc += (*w)[static_cast<size_t>(L * t)] / (k * k);
        }
        --t;
        S[i] = acc;
    }
    return S;
}

// Depth-one grids (support only at exponents 0/1): the rectangle sum
// decouples over gcd divisors,
//   S = sum_d t(d) WA(d) WB(d),
// where WA(d) sums w_A = prod_{p|A} alpha_p / A over squarefree A = m1 q1
// divisible by d, and t(d) = prod_{p|d} (gamma_p/(alpha_p beta_p) - 1).
class DepthOneSummer {
public:
    DepthOneSummer(const MultFn2d& F, i64 q1, i64 q2, i64 M, int cap)
        : q1_(q1), q2_(q2),
          dmax_(std::min(M * q1, M * q2)),
          sv_(shared_sieve(std::max<i64>(M * std::max(q1, q2), 2))),
          tables_(depth_one_tables(F, std::max<i64>(M * std::max(q1, q2), 2))) {
        (void)cap;
        wa_.assign(static_cast<size_t>(dmax_) + 1, 0.0);
        wb_.assign(static_cast<size_t>(dmax_) + 1, 0.0);
    }

    bool usable() const { return tables_->decoupled_ok; }

    double rectangle(i64 cutoff) {
        touched_a_.clear();
        touched_b_.clear();
        side(cutoff, q1_, tables_->alpha, wa_, touched_a_);
        side(cutoff, q2_, tables_->beta, wb_, touched_b_);
        double S = 0.0;
        for (i64 d : touched_a_) {
            double a = wa_[static_cast<size_t>(d)];
            double b = wb_[static_cast<size_t>(d)];
            if (b == 0.0) continue;
            S += tfactor(d) * a * b;
        }
        for (i64 d : touched_a_) wa_[static_cast<size_t>(d)] = 0.0;
        for (i64 d : touched_b_) wb_[static_cast<size_t>(d)] = 0.0;
        return S;
    }

private:
    void side(i64 cutoff, i64 q, const std::vector<double>& loc, std::vector<double>& acc,
              std::vector<i64>& touched) {
        i64 pbuf[16];
        for (i64 m = 1; m <= cutoff; ++m) {
            i64 A = m * q;
            if (!sv_.squarefree(A)) continue;
            double w = 1.0 / static_cast<double>(A);
            int np = 0;
            i64 x = A;
            while (x > 1) {
                i64 p = sv_.smallest_factor(x);
                pbuf[np++] = p;
                w *= loc[static_cast<size_t>(p)];
                x /= p;
            }
            if (w == 0.0) continue;
            i64 divs[64];
            int nd = 1;
            divs[0] = 1;
            for (int i = 0; i < np; ++i)
                for (int j = 0, m0 = nd; j < m0; ++j) divs[nd++] = divs[j] * pbuf[i];
            for (int i = 0; i < nd; ++i) {
                i64 d = divs[i];
                if (d > dmax_) continue;
                if (acc[static_cast<size_t>(d)] == 0.0) touched.push_back(d);
                acc[static_cast<size_t>(d)] += w;
            }
        }
        std::sort(touched.begin(), touched.end());
    }

    double tfactor(i64 d) const {
        double t = 1.0;
        i64 x = d;
        while (x > 1) {
            i64 p = sv_.smallest_factor(x);
            t *= tables_->tminus[static_cast<size_t>(p)];
            while (x % p == 0) x /= p;
        }
        return t;
    }

    i64 q1_, q2_, dmax_;
    const SieveTables& sv_;
    std::shared_ptr<const DepthOneTables> tables_;
    std::vector<double> wa_, wb_;
    std::vector<i64> touched_a_, touched_b_;
};

double fmu_sieved(const MultFn2d& F, i64 a, i64 b, const SieveTables& sv) {
    Factorization fa = sv.factorize(a);
    Factorization fb = sv.factorize(b);
    double out = 1.0;
    size_t i = 0, j = 0;
    while (i < fa.factors.size() || j < fb.factors.size()) {
        i64 p1 = i < fa.factors.size() ? fa.factors[i].first : 0;
        i64 p2 = j < fb.factors.size() ? fb.factors[j].first : 0;
        if (p2 == 0 || (p1 != 0 && p1 < p2)) {
            out *= F.local(p1, fa.factors[i].second, 0);
            ++i;
        } else if (p1 == 0 || p2 < p1) {
            out *= F.local(p2, 0, fb.factors[j].second);
            ++j;
        } else {
            out *= F.local(p1, fa.factors[i].second, fb.factors[j].second);
            ++i;
            ++j;
        }
        if (out == 0.0) return 0.0;
    }
    return out;
}

// Generic grids: plain shells in max(m1, m2). Cost grows with the full
// rectangle; intended for unstructured functions at modest cutoffs.
std::array<double, 4> rect_generic(const MultFn2d& F, i64 q1, i64 q2,
                                   const std::array<i64, 4>& cuts) {
    const SieveTables& sv = shared_sieve(std::max<i64>(cuts[3] * std::max(q1, q2), 2));
    std::array<double, 4> S{};
    double acc = 0.0;
    i64 t = 0;
    for (int i = 0; i < 4; ++i) {
        for (++t; t <= cuts[i]; ++t) {
            i64 a = t * q1;
            for (i64 m2 = 1; m2 <= t; ++m2) {
                double v = fmu_sieved(F, a, m2 * q2, sv);
                if (v != 0.0) acc += v / (static_cast<double>(a) * static_cast<double>(m2 * q2));
            }
            i64 b = t * q2;
            for (i64 m1 = 1; m1 < t; ++m1) {
                double v = fmu_sieved(F, m1 * q1, b, sv);
                if (v != 0.0) acc += v / (static_cast<double>(m1 * q1) * static_cast<double>(b));
            }
        }
        --t;
        S[i] = acc;
    }
    return S;
}

void finish_double_sum(DoubleSumResult& r, bool have_gauge) {
    r.raw_partial = r.checkpoints[3];
    r.value = r.raw_partial;
    if (!have_gauge) {
        r.error_estimate = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    double d1 = r.checkpoints[1] - r.checkpoints[0];
    double d2 = r.checkpoints[2] - r.checkpoints[1];
    double d3 = r.checkpoints[3] - r.checkpoints[2];
    r.error_estimate = std::fabs(d3);
    // Divergence signal: the gauge fails to shrink across the doublings
    // (log-divergent sums give near-equal increments) while staying a
    // significant fraction of the accumulated value. Oscillation wobble
    // sits many orders below that.
    bool not_shrinking = std::fabs(d3) >= 0.99 * std::fabs(d2) &&
                         std::fabs(d2) >= 0.99 * std::fabs(d1) && std::fabs(d3) > 0.0;
    bool significant =
        std::fabs(d3) > 1e-3 * std::max(std::fabs(r.checkpoints[3]), 1e-9);
    if (not_shrinking && significant)
        throw convergence_error("coeff_double_sum: Cauchy gauge fails to shrink across "
                                "doublings; the series is suspected divergent");
    if (d1 != 0.0 && d2 != 0.0) {
        double R1 = d2 / d1;
        double R2 = d3 / d2;
        bool regular = R1 >= 0.05 && R1 <= 0.8 && R2 >= 0.05 && R2 <= 0.8 &&
                       std::fabs(R1 - R2) <= 0.25 * std::max(R1, R2);
        if (regular) {
            r.value = r.checkpoints[3] + d3 * R2 / (1.0 - R2);
            r.extrapolated = true;
        }
    }
}

}  // namespace

MeanResult mean_value_report(const MultFn2d& F, const TruncationParams& params) {
    params.validate();
    const SieveTables& sv = shared_sieve(params.prime_cutoff);
    int cap = effective_cap(F, params);
    auto factor_at = [&](i64 p) {
        LocalSum ls = local_sum2(F, p, 0, 0, cap);
        if (!ls.stabilized)
            throw convergence_error("mean_value: local factor at p = " + std::to_string(p) +
                                    " did not stabilize within the exponent cap");
        return ls.value;
    };
    return euler_product_over_primes(sv, params.prime_cutoff, factor_at);
}

double mean_value(const MultFn2d& F, const TruncationParams& params) {
    return mean_value_report(F, params).value;
}

DoubleSumResult coeff_double_sum(const MultFn2d& F, i64 q1, i64 q2,
                                 const TruncationParams& params) {
    params.validate();
    if (q1 < 1 || q2 < 1) throw std::invalid_argument("coeff_double_sum: q1, q2 must be positive");
    const i64 M = params.sum_cutoff;
    const int cap = effective_cap(F, params);
    DoubleSumResult r;
    bool have_gauge = M >= 8;
    std::array<i64, 4> cuts = have_gauge ? gauge_cutoffs(M) : std::array<i64, 4>{M, M, M, M};

    switch (F.shape()) {
        case GridShape::diagonal:
            r.checkpoints = rect_diagonal(F, q1, q2, cuts, cap);
            break;
        case GridShape::depth_one: {
            DepthOneSummer summer(F, q1, q2, M, cap);
            if (summer.usable()) {
                for (int i = 0; i < 4; ++i) r.checkpoints[i] = summer.rectangle(cuts[i]);
            } else {
                r.checkpoints = rect_generic(F, q1, q2, cuts);
            }
            break;
        }
        case GridShape::generic:
            r.checkpoints = rect_generic(F, q1, q2, cuts);
            break;
    }
    finish_double_sum(r, have_gauge);
    return r;
}

double coeff_euler_product(const MultFn2d& F, i64 q1, i64 q2, const TruncationParams& params,
                           std::optional<double> mean_hint) {
    params.validate();
    if (q1 < 1 || q2 < 1)
        throw std::invalid_argument("coeff_euler_product: q1, q2 must be positive");
    double mean = mean_hint ? *mean_hint : mean_value(F, params);
    i64 L = lcm_i64(q1, q2);
    if (L == 1) return mean;
    if (std::fabs(mean) <= params.tol)
        throw mean_zero_error("coeff_euler_product: mean value is numerically zero; "
                              "the Euler-product formula does not apply, use the double sum");
    const int cap = effective_cap(F, params);
    double out = mean;
    for (auto& [p, e] : factorize(L).factors) {
        int s1 = 0, s2 = 0;
        for (i64 x = q1; x % p == 0; x /= p) ++s1;
        for (i64 x = q2; x % p == 0; x /= p) ++s2;
        LocalSum num = local_sum2(F, p, s1, s2, cap);
        LocalSum den = local_sum2(F, p, 0, 0, cap);
        if (!num.stabilized || !den.stabilized)
            throw convergence_error("coeff_euler_product: local sums at p = " + std::to_string(p) +
                                    " did not stabilize within the exponent cap");
        if (std::fabs(den.value) < 1e-300)
            throw convergence_error("coeff_euler_product: vanishing denominator local factor at p = " +
                                    std::to_string(p));
        out *= num.value / den.value;
    }
    return out;
}

double coeff_gcd_family(const ArithFn1d& g, i64 q1, i64 q2, const TruncationParams& params,
                        std::optional<double> mean_hint) {
    params.validate();
    if (q1 < 1 || q2 < 1)
        throw std::invalid_argument("coeff_gcd_family: q1, q2 must be positive");
    if (!g.multiplicative)
        throw std::invalid_argument("coeff_gcd_family: g must be multiplicative");
    const int cap = params.exponent_cap;
    double mean;
    if (mean_hint) {
        mean = *mean_hint;
    } else {
        const SieveTables& sv = shared_sieve(params.prime_cutoff);
        auto factor_at = [&](i64 p) {
            LocalSum ls = local_sum1(g, p, 1, cap, 2);
            if (!ls.stabilized)
                throw convergence_error("coeff_gcd_family: local factor at p = " +
                                        std::to_string(p) + " did not stabilize");
            return 1.0 + ls.value;
        };
        mean = euler_product_over_primes(sv, params.prime_cutoff, factor_at).value;
    }
    i64 L = lcm_i64(q1, q2);
    if (L == 1) return mean;
    if (std::fabs(mean) <= params.tol)
        throw mean_zero_error("coeff_gcd_family: mean value is numerically zero; "
                              "the Euler-product formula does not apply, use the double sum");
    double out = mean;
    for (auto& [p, e] : factorize(L).factors) {
        int s1 = 0, s2 = 0;
        for (i64 x = q1; x % p == 0; x /= p) ++s1;
        for (i64 x = q2; x % p == 0; x /= p) ++s2;
        int start = std::max(s1, s2);
        LocalSum num = local_sum1(g, p, start, cap, 2);
        LocalSum den = local_sum1(g, p, 1, cap, 2);
        if (!num.stabilized || !den.stabilized)
            throw convergence_error("coeff_gcd_family: local sums at p = " + std::to_string(p) +
                                    " did not stabilize within the exponent cap");
        double full = 1.0 + den.value;
        if (std::fabs(full) < 1e-300)
            throw convergence_error("coeff_gcd_family: vanishing denominator local factor at p = " +
                                    std::to_string(p));
        out *= num.value / full;
    }
    return out;
}

double delange1_coeff(const ArithFn1d& g, i64 q, const TruncationParams& params) {
    params.validate();
    if (q < 1) throw std::invalid_argument("delange1_coeff: q must be positive");
    const int cap = params.exponent_cap;

    if (g.multiplicative) {
        const SieveTables& sv = shared_sieve(params.prime_cutoff);
        Factorization fq = factorize(q);
        for (auto& [p, e] : fq.factors)
            if (p > params.prime_cutoff)
                throw std::invalid_argument("delange1_coeff: q has a prime factor beyond prime_cutoff");
        auto coprime_factor = [&](i64 p) {
            if (q % p == 0) return 1.0;
            LocalSum ls = local_sum1(g, p, 1, cap, 1);
            if (!ls.stabilized)
                throw convergence_error("delange1_coeff: local factor at p = " + std::to_string(p) +
                                        " did not stabilize");
            return 1.0 + ls.value;
        };
        MeanResult base = euler_product_over_primes(sv, params.prime_cutoff, coprime_factor);
        double out = base.value;
        for (auto& [p, e] : fq.factors) {
            LocalSum tail = local_sum1(g, p, e, cap, 1);
            if (!tail.stabilized)
                throw convergence_error("delange1_coeff: local tail at p = " + std::to_string(p) +
                                        " did not stabilize");
            out *= tail.value;
        }
        return out;
    }

    // Non-multiplicative fallback: a_q = sum_m (f*mu)(qm) / (qm).
    const i64 M = params.sum_cutoff;
    auto fmu1 = [&](i64 n) {
        double out = 0.0;
        for (i64 d : divisors(n)) {
            int m = mobius(n / d);
            if (m != 0) out += static_cast<double>(m) * g.eval(d);
        }
        return out;
    };
    DoubleSumResult r;
    bool have_gauge = M >= 8;
    std::array<i64, 4> cuts = have_gauge ? gauge_cutoffs(M) : std::array<i64, 4>{M, M, M, M};
    double acc = 0.0;
    i64 m = 0;
    for (int i = 0; i < 4; ++i) {
        for (++m; m <= cuts[i]; ++m) acc += fmu1(q * m) / static_cast<double>(q * m);
        --m;
        r.checkpoints[i] = acc;
    }
    finish_double_sum(r, have_gauge);
    return r.value;
}

ConditionReport condition_check(const MultFn2d& F, const TruncationParams& params) {
    params.validate();
    const SieveTables& sv = shared_sieve(params.prime_cutoff);
    const int cap = effective_cap(F, params);
    ConditionReport rep;
    double total = 0.0;
    bool cap_hit = false;
    i64 next_checkpoint = 10;
    for (std::int32_t p : sv.primes()) {
        if (p > params.prime_cutoff) break;
        while (p > next_checkpoint) {
            rep.checkpoints.emplace_back(next_checkpoint, total);
            next_checkpoint *= 10;
        }
        double acc = 0.0, scale = 0.0;
        int quiet = 0;
        double pw = 1.0 / static_cast<double>(p);
        const double invp = pw;
        for (int t = 1; t <= 2 * cap; ++t) {
            double shell = 0.0;
            int lo = std::max(0, t - cap);
            int hi = std::min(cap, t);
            for (int e1 = lo; e1 <= hi; ++e1) shell += std::fabs(F.local(p, e1, t - e1));
            shell *= pw;
            acc += shell;
            scale = std::max({scale, acc, shell});
            if (scale > 0.0 && shell <= kShellEps * scale) {
                if (++quiet >= 2) break;
            } else {
                quiet = 0;
                if (t == 2 * cap && shell > 1e-12 * std::max(scale, 1e-300)) cap_hit = true;
            }
            pw *= invp;
        }
        total += acc;
    }
    rep.checkpoints.emplace_back(params.prime_cutoff, total);
    rep.total = total;

    // Growth heuristic over the last two full decades.
    rep.verdict = ConditionVerdict::stabilizing;
    size_t n = rep.checkpoints.size();
    if (n >= 3) {
        double inc_prev = rep.checkpoints[n - 2].second - rep.checkpoints[n - 3].second;
        double inc_last = rep.checkpoints[n - 1].second - rep.checkpoints[n - 2].second;
        if (inc_last > 0.6 * inc_prev + 1e-12 * (1.0 + total))
            rep.verdict = ConditionVerdict::suspect;
    }
    if (cap_hit) {
        rep.verdict = ConditionVerdict::suspect;
        rep.note = "some local sums hit the exponent cap with non-negligible terms";
    }
    return rep;
}

CoeffTable build_coeff_table(const MultFn2d& F, i64 qmax, CoeffTable::Method method,
                             const TruncationParams& params, const ClosedCoeffFn* closed_form,
                             int threads) {
    params.validate();
    if (qmax < 1) throw std::invalid_argument("build_coeff_table: qmax must be >= 1");
    if (method == CoeffTable::Method::closed_form && closed_form == nullptr)
        throw std::invalid_argument("build_coeff_table: closed_form method requires a closed-form function");

    CoeffTable table;
    table.qmax = qmax;
    table.method = method;
    size_t n = static_cast<size_t>(qmax) * static_cast<size_t>(qmax);
    table.values.assign(n, 0.0);
    table.errors.assign(n, 0.0);
    table.failed.assign(n, 0);

    std::optional<MeanResult> mean;
    if (method == CoeffTable::Method::euler_product) {
        mean = mean_value_report(F, params);
        if (std::fabs(mean->value) <= params.tol && qmax > 1) {
            // The Euler-product rewrite assumes a nonzero mean.
            method = CoeffTable::Method::double_sum;
            table.method = method;
        }
    }

    parallel_for(qmax, threads, [&](i64 row) {
        i64 q1 = row + 1;
        for (i64 q2 = 1; q2 <= qmax; ++q2) {
            size_t idx = static_cast<size_t>(row * qmax + (q2 - 1));
            try {
                switch (method) {
                    case CoeffTable::Method::euler_product: {
                        double v = coeff_euler_product(F, q1, q2, params, mean->value);
                        table.values[idx] = v;
                        table.errors[idx] = std::fabs(v) * mean->error_proxy;
                        break;
                    }
                    case CoeffTable::Method::double_sum: {
                        DoubleSumResult r = coeff_double_sum(F, q1, q2, params);
                        table.values[idx] = r.value;
                        table.errors[idx] = r.error_estimate;
                        break;
                    }
                    case CoeffTable::Method::closed_form: {
                        double v = (*closed_form)(q1, q2);
                        table.values[idx] = v;
                        table.errors[idx] = std::fabs(v) * 1e-12;
                        break;
                    }
                }
            } catch (const std::exception&) {
                table.values[idx] = std::numeric_limits<double>::quiet_NaN();
                table.errors[idx] = std::numeric_limits<double>::infinity();
                table.failed[idx] = 1;
            }
        }
    });
    table.mean = table.at(1, 1);
    return table;
}

}  // namespace rfs
