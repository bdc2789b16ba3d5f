#include "rfseries/arith.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfs {

i64 checked_mul(i64 a, i64 b) {
    i64 out;
    if (__builtin_mul_overflow(a, b, &out))
        throw std::overflow_error("integer multiplication overflow");
    return out;
}

i64 checked_pow(i64 base, int exp) {
    if (exp < 0) throw std::invalid_argument("checked_pow: negative exponent");
    i64 out = 1;
    for (int i = 0; i < exp; ++i) out = checked_mul(out, base);
    return out;
}

namespace {

// Primes below 2^16 cover trial division for any 64-bit input.
const std::vector<std::int32_t>& small_primes() {
    static const std::vector<std::int32_t> table = [] {
        constexpr int kLimit = 1 << 16;
        std::vector<bool> comp(kLimit, false);
        std::vector<std::int32_t> ps;
        for (int i = 2; i < kLimit; ++i) {
            if (comp[i]) continue;
            ps.push_back(i);
            for (long long j = static_cast<long long>(i) * i; j < kLimit; j += i)
                comp[static_cast<size_t>(j)] = true;
        }
        return ps;
    }();
    return table;
}

}  // namespace

Factorization factorize(i64 n) {
    if (n < 1) throw std::invalid_argument("factorize: n must be positive");
    Factorization f;
    f.value = n;
    for (std::int32_t p : small_primes()) {
        if (static_cast<i64>(p) * p > n) break;
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            f.factors.emplace_back(p, e);
        }
    }
    if (n > 1) {
        // n is now prime or has no factor below 2^16; trial division by
        // 6k+-1 finishes anything a 64-bit caller can hand us.
        i64 d = 65537;
        while (d * d <= n) {
            if (n % d == 0) {
                int e = 0;
                while (n % d == 0) { n /= d; ++e; }
                f.factors.emplace_back(d, e);
            }
            d += 2;
        }
        if (n > 1) f.factors.emplace_back(n, 1);
    }
    return f;
}

int mobius(i64 n) {
    Factorization f = factorize(n);
    for (auto& [p, e] : f.factors)
        if (e > 1) return 0;
    return (f.factors.size() % 2 == 0) ? 1 : -1;
}

i64 euler_phi(i64 n) {
    Factorization f = factorize(n);
    i64 out = n;
    for (auto& [p, e] : f.factors) out = out / p * (p - 1);
    return out;
}

int omega(i64 n) {
    return static_cast<int>(factorize(n).factors.size());
}

i64 phi_s_int(i64 n, int s) {
    if (n < 1) throw std::invalid_argument("phi_s: n must be positive");
    if (s < 0) throw std::invalid_argument("phi_s_int: s must be non-negative");
    Factorization f = factorize(n);
    if (s == 0) return f.factors.empty() ? 1 : 0;
    i64 out = 1;
    for (auto& [p, e] : f.factors) {
        i64 ps = checked_pow(p, s);
        out = checked_mul(out, checked_pow(ps, e - 1));
        out = checked_mul(out, ps - 1);
    }
    return out;
}

double phi_s(i64 n, double s) {
    if (n < 1) throw std::invalid_argument("phi_s: n must be positive");
    double r = std::round(s);
    if (r == s && r >= 0 && r <= 62) {
        // Exact integer path while the value fits; callers that must not
        // fall back use phi_s_int directly.
        try {
            return static_cast<double>(phi_s_int(n, static_cast<int>(r)));
        } catch (const std::overflow_error&) {
        }
        if (r == 0) return n == 1 ? 1.0 : 0.0;
    }
    Factorization f = factorize(n);
    double out = std::pow(static_cast<double>(n), s);
    for (auto& [p, e] : f.factors)
        out *= 1.0 - std::pow(static_cast<double>(p), -s);
    return out;
}

i64 phi_tilde(i64 n) {
    if (n < 1) throw std::invalid_argument("phi_tilde: n must be positive");
    Factorization f = factorize(n);
    i64 out = 1;
    for (auto& [p, e] : f.factors)
        out = checked_mul(out, checked_mul(p, p) + p - 1);
    return out;
}

i64 sigma_s_int(i64 n, int s) {
    if (n < 1) throw std::invalid_argument("sigma_s: n must be positive");
    if (s < 0) throw std::invalid_argument("sigma_s_int: s must be non-negative");
    Factorization f = factorize(n);
    i64 out = 1;
    for (auto& [p, e] : f.factors) {
        if (s == 0) {
            out = checked_mul(out, e + 1);
        } else {
            i64 ps = checked_pow(p, s);
            i64 geom = 1, term = 1;
            for (int j = 0; j < e; ++j) {
                term = checked_mul(term, ps);
                geom += term;
            }
            out = checked_mul(out, geom);
        }
    }
    return out;
}

double sigma_s(i64 n, double s) {
    if (n < 1) throw std::invalid_argument("sigma_s: n must be positive");
    double r = std::round(s);
    if (r == s && r >= 0 && r <= 62) {
        try {
            return static_cast<double>(sigma_s_int(n, static_cast<int>(r)));
        } catch (const std::overflow_error&) {
        }
    }
    Factorization f = factorize(n);
    double out = 1.0;
    for (auto& [p, e] : f.factors) {
        double geom = 1.0;
        for (int j = 1; j <= e; ++j)
            geom += std::pow(static_cast<double>(p), s * j);
        out *= geom;
    }
    return out;
}

i64 r2(i64 n) {
    if (n < 1) throw std::invalid_argument("r2: n must be positive");
    Factorization f = factorize(n);
    i64 quarter = 1;
    for (auto& [p, e] : f.factors) {
        if (p == 2) continue;              // r(2^e)/4 = 1
        if (p % 4 == 1) {
            quarter = checked_mul(quarter, e + 1);
        } else {
            if (e % 2 == 1) return 0;      // odd power of p = 3 (mod 4)
        }
    }
    return 4 * quarter;
}

int chi4(i64 n) {
    if (n < 1) throw std::invalid_argument("chi4: n must be positive");
    if (n % 2 == 0) return 0;
    return (n % 4 == 1) ? 1 : -1;
}

SieveTables::SieveTables(i64 limit, i64 max_limit) : limit_(limit) {
    if (limit < 1) throw std::invalid_argument("build_sieve: limit must be positive");
    if (limit > max_limit)
        throw std::length_error("build_sieve: limit exceeds the configured memory cap");
    size_t n = static_cast<size_t>(limit) + 1;
    spf_.assign(n, 0);
    mu_.assign(n, 0);
    phi_.assign(n, 0);
    mu_[1 % n] = 1;
    if (limit >= 1) { spf_[1] = 1; mu_[1] = 1; phi_[1] = 1; }

    // Linear sieve: fills smallest prime factor, mu and phi in one pass.
    for (i64 i = 2; i <= limit; ++i) {
        if (spf_[static_cast<size_t>(i)] == 0) {
            spf_[static_cast<size_t>(i)] = static_cast<std::int32_t>(i);
            mu_[static_cast<size_t>(i)] = -1;
            phi_[static_cast<size_t>(i)] = i - 1;
            primes_.push_back(static_cast<std::int32_t>(i));
        }
        for (std::int32_t p : primes_) {
            i64 ip = i * p;
            if (p > spf_[static_cast<size_t>(i)] || ip > limit) break;
            spf_[static_cast<size_t>(ip)] = p;
            if (i % p == 0) {
                mu_[static_cast<size_t>(ip)] = 0;
                phi_[static_cast<size_t>(ip)] = phi_[static_cast<size_t>(i)] * p;
            } else {
                mu_[static_cast<size_t>(ip)] = static_cast<std::int8_t>(-mu_[static_cast<size_t>(i)]);
                phi_[static_cast<size_t>(ip)] = phi_[static_cast<size_t>(i)] * (p - 1);
            }
        }
    }
}

Factorization SieveTables::factorize(i64 n) const {
    if (n < 1 || n > limit_) throw std::invalid_argument("SieveTables::factorize: out of range");
    Factorization f;
    f.value = n;
    while (n > 1) {
        i64 p = spf_[static_cast<size_t>(n)];
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        f.factors.emplace_back(p, e);
    }
    return f;
}

std::vector<i64> SieveTables::divisors(i64 n) const {
    Factorization f = factorize(n);
    std::vector<i64> ds{1};
    for (auto& [p, e] : f.factors) {
        size_t m = ds.size();
        i64 pk = 1;
        for (int j = 1; j <= e; ++j) {
            pk *= p;
            for (size_t i = 0; i < m; ++i) ds.push_back(ds[i] * pk);
        }
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

SieveTables build_sieve(i64 limit, i64 max_limit) {
    return SieveTables(limit, max_limit);
}

std::vector<i64> divisors(i64 n) {
    Factorization f = factorize(n);
    std::vector<i64> ds{1};
    for (auto& [p, e] : f.factors) {
        size_t m = ds.size();
        i64 pk = 1;
        for (int j = 1; j <= e; ++j) {
            pk *= p;
            for (size_t i = 0; i < m; ++i) ds.push_back(ds[i] * pk);
        }
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

}  // namespace rfs
