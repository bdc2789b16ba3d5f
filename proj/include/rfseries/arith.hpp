#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace rfs {

using i64 = std::int64_t;

// Checked 64-bit arithmetic: every multiplicative helper in this module
// throws std::overflow_error instead of wrapping.
i64 checked_mul(i64 a, i64 b);
i64 checked_pow(i64 base, int exp);

// Prime-power decomposition of a positive integer.
// factors are (p, e) with p strictly increasing and e >= 1;
// the factorization of 1 is the empty list.
struct Factorization {
    i64 value = 1;
    std::vector<std::pair<i64, int>> factors;
};

Factorization factorize(i64 n);

// Mobius function: 0 on non-squarefree n, otherwise (-1)^omega(n).
int mobius(i64 n);

// Euler's totient.
i64 euler_phi(i64 n);

// Number of distinct prime divisors; omega(1) = 0.
int omega(i64 n);

// phi_s(n) = n^s * prod_{p|n} (1 - 1/p^s).
// Exact integer arithmetic when s is a non-negative integer and the
// value fits in 64 bits, floating point otherwise. phi_s_int never
// falls back; it throws std::overflow_error instead.
double phi_s(i64 n, double s);
i64 phi_s_int(i64 n, int s);

// prod_{p|n} (p^2 + p - 1); depends only on the radical of n.
i64 phi_tilde(i64 n);

// sigma_s(n) = sum_{d|n} d^s; s = 0 gives the divisor count tau(n).
double sigma_s(i64 n, double s);
i64 sigma_s_int(i64 n, int s);

// Number of representations n = A^2 + B^2 over ordered integer pairs
// (signs counted). Evaluated multiplicatively from the prime-power
// table of r(n)/4.
i64 r2(i64 n);

// Non-principal character mod 4: 0 on evens, (-1)^((n-1)/2) on odds.
int chi4(i64 n);

// Batch tables up to a limit. Immutable after construction and safe to
// share across threads.
class SieveTables {
public:
    // Throws std::invalid_argument for limit < 1 and std::length_error
    // when limit exceeds max_limit.
    explicit SieveTables(i64 limit, i64 max_limit = kDefaultMaxLimit);

    static constexpr i64 kDefaultMaxLimit = 50'000'000;

    i64 limit() const { return limit_; }
    const std::vector<std::int32_t>& primes() const { return primes_; }

    std::int32_t smallest_factor(i64 n) const { return spf_[static_cast<size_t>(n)]; }
    int mobius(i64 n) const { return mu_[static_cast<size_t>(n)]; }
    i64 phi(i64 n) const { return phi_[static_cast<size_t>(n)]; }
    bool squarefree(i64 n) const { return mu_[static_cast<size_t>(n)] != 0; }

    Factorization factorize(i64 n) const;
    std::vector<i64> divisors(i64 n) const;

private:
    i64 limit_;
    std::vector<std::int32_t> spf_;
    std::vector<std::int8_t> mu_;
    std::vector<std::int64_t> phi_;
    std::vector<std::int32_t> primes_;
};

SieveTables build_sieve(i64 limit, i64 max_limit = SieveTables::kDefaultMaxLimit);

// Divisor list of n in increasing order.
std::vector<i64> divisors(i64 n);

inline i64 gcd_i64(i64 a, i64 b) { return std::gcd(a, b); }
inline i64 lcm_i64(i64 a, i64 b) { return checked_mul(a / std::gcd(a, b), b); }

}  // namespace rfs
