#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rfseries/arith.hpp"
#include "rfseries/dirichlet2.hpp"

namespace rfs {

using MultFn2d = MultFn2<double>;
using ArithFn1d = ArithFn1<double>;

struct TruncationParams {
    i64 prime_cutoff = 1'000'000;   // Euler products run over primes <= this
    i64 sum_cutoff = 10'000;        // double sums run over m1, m2 <= this
    i64 series_qmax = 2048;         // truncation of RF series evaluation
    int exponent_cap = 40;          // local grid exponent cap
    double tol = 1e-9;

    void validate() const;
};

struct MeanResult {
    double value = 0.0;
    double error_proxy = 0.0;   // |last included Euler factor - 1|
    bool tail_corrected = false;
    double tail_correction = 0.0;  // applied to log of the product
};

// Mean value M(f) as the Euler product of local grid sums over primes
// <= prime_cutoff. When the factors decay smoothly the product is
// completed with a fitted c2/p^2 + c3/p^3 prime tail; oscillating
// factors are left uncorrected (their tails cancel).
MeanResult mean_value_report(const MultFn2d& F, const TruncationParams& params);
double mean_value(const MultFn2d& F, const TruncationParams& params);

struct DoubleSumResult {
    double value = 0.0;          // rectangle sum, tail-extrapolated when regular
    double error_estimate = 0.0; // |S(M) - S(M/2)|
    double raw_partial = 0.0;    // plain rectangle sum at M
    bool extrapolated = false;
    std::array<double, 4> checkpoints{};  // S at M/8, M/4, M/2, M
};

// a_{q1,q2} as the truncated double sum of (f*mu)(m1 q1, m2 q2) /
// (m1 q1 m2 q2) over m1, m2 <= sum_cutoff. Throws convergence_error
// when the Cauchy gauge grows across three doublings.
DoubleSumResult coeff_double_sum(const MultFn2d& F, i64 q1, i64 q2,
                                 const TruncationParams& params);

// a_{q1,q2} = M(f) * prod_{p | lcm} (tail local sum / full local sum).
// Throws mean_zero_error when |M(f)| <= tol and lcm > 1.
double coeff_euler_product(const MultFn2d& F, i64 q1, i64 q2,
                           const TruncationParams& params,
                           std::optional<double> mean_hint = std::nullopt);

// Same formula specialized to f(n1,n2) = g(gcd(n1,n2)) with local sums
// indexed by e >= max(nu_p(q1), nu_p(q2)) and weight p^{-2e}.
double coeff_gcd_family(const ArithFn1d& g, i64 q1, i64 q2,
                        const TruncationParams& params,
                        std::optional<double> mean_hint = std::nullopt);

// One-variable coefficient a_q: Euler product for multiplicative g,
// truncated double-sum fallback otherwise.
double delange1_coeff(const ArithFn1d& g, i64 q, const TruncationParams& params);

enum class ConditionVerdict { stabilizing, suspect };

struct ConditionReport {
    std::vector<std::pair<i64, double>> checkpoints;  // (prime cutoff, partial sum)
    double total = 0.0;
    ConditionVerdict verdict = ConditionVerdict::stabilizing;
    std::string note;
};

// Partial sums of sum_p sum_{e1+e2>=1} |(f*mu)(p^{e1},p^{e2})| / p^{e1+e2}
// with a growth verdict. Heuristic diagnostic, not a convergence proof.
ConditionReport condition_check(const MultFn2d& F, const TruncationParams& params);

struct CoeffTable {
    enum class Method { euler_product, double_sum, closed_form };

    i64 qmax = 1;
    Method method = Method::euler_product;
    double mean = 0.0;                  // stored at entry (1,1)
    std::vector<double> values;         // row-major, (q1-1)*qmax + (q2-1)
    std::vector<double> errors;
    std::vector<std::uint8_t> failed;

    double at(i64 q1, i64 q2) const {
        return values[static_cast<size_t>((q1 - 1) * qmax + (q2 - 1))];
    }
    double error_at(i64 q1, i64 q2) const {
        return errors[static_cast<size_t>((q1 - 1) * qmax + (q2 - 1))];
    }
    bool failed_at(i64 q1, i64 q2) const {
        return failed[static_cast<size_t>((q1 - 1) * qmax + (q2 - 1))] != 0;
    }
};

using ClosedCoeffFn = std::function<double(i64, i64)>;

// Populate a coefficient grid with the chosen method. closed_form
// requires a closed-form callable. If the mean value vanishes the
// euler_product method falls back to double_sum for the whole table.
CoeffTable build_coeff_table(const MultFn2d& F, i64 qmax, CoeffTable::Method method,
                             const TruncationParams& params,
                             const ClosedCoeffFn* closed_form = nullptr,
                             int threads = 1);

const char* method_name(CoeffTable::Method m);

// Shared prime/mu/phi tables, grown on demand. Read-only after build.
const SieveTables& shared_sieve(i64 limit);

}  // namespace rfs
