#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rfseries/catalog.hpp"
#include "rfseries/engine.hpp"
#include "rfseries/ramanujan.hpp"

namespace rfs {

// First checkpoint of every convergence report; later checkpoints double.
inline constexpr i64 kCheckpointBase = 256;

struct Checkpoint {
    i64 qmax = 0;
    double partial = 0.0;
    double abs_error = 0.0;
};

struct ConvergenceReport {
    std::string family;
    i64 n1 = 1;
    i64 n2 = 0;  // 0 for one-variable families
    double direct = 0.0;
    std::vector<Checkpoint> checkpoints;  // increasing qmax
    double tail_bound = 0.0;              // rigorous, at the final checkpoint
    bool bracketed = false;               // |direct - final partial| <= tail_bound
    bool error_decayed = false;           // final |error| <= first |error| (1e-12 ties)
};

// Truncated RF series sum_{q1,q2 <= Q} a_{q1,q2} c_{q1}(n1) c_{q2}(n2),
// accumulated in increasing max(q1,q2) shells (deterministic order).
double partial_sum(const CoeffTable& coeffs, i64 n1, i64 n2, i64 Q);
double partial_sum(const ClosedCoeffFn& coeffs, i64 n1, i64 n2, i64 Q);

// One-variable truncation sum_{q <= Q} a_q c_q(n).
double partial_sum1(const std::function<double(i64)>& coeff, i64 n, i64 Q);

// sigma_1(n1) sigma_1(n2) times the family's rigorous coefficient tail
// beyond Q. Throws when the family carries no tail estimator.
double tail_bound(const Family& fam, i64 Q, i64 n1, i64 n2 = 1);

// Prepared state for evaluating one family at many points: the
// coefficient grid up to series_qmax (closed form unless a table
// override is supplied) plus shared sieves. evaluate() is thread-safe.
class SeriesContext {
public:
    SeriesContext(Family fam, const TruncationParams& params,
                  const CoeffTable* table_override = nullptr, int threads = 1);

    ConvergenceReport evaluate(i64 n1, i64 n2 = 1) const;
    const Family& family() const { return fam_; }
    i64 qmax() const { return qmax_; }

private:
    Family fam_;
    TruncationParams params_;
    i64 qmax_;
    std::vector<i64> checkpoints_;
    std::vector<double> grid_;    // arity 2: row-major coefficients
    std::vector<double> grid_t_;  // arity 2: transpose
    std::vector<double> coeff1_;  // arity 1
};

ConvergenceReport evaluate_with_report(const Family& fam, i64 n1, i64 n2,
                                       const TruncationParams& params);

struct VerifyResult {
    bool pass = false;
    std::vector<ConvergenceReport> reports;
};

// Reports for all n1,n2 <= nmax (n <= nmax for one-variable families).
// Passes iff every report is bracketed with non-increasing error.
VerifyResult verify_family(const Family& fam, i64 nmax, const TruncationParams& params,
                           int threads = 1, const CoeffTable* table_override = nullptr);

}  // namespace rfs
