#include "rfseries/series.hpp"

#include <cmath>
#include <stdexcept>

#include "rfseries/errors.hpp"
#include "rfseries/parallel.hpp"

namespace rfs {

namespace {

std::vector<i64> checkpoint_list(i64 qmax) {
    std::vector<i64> qs;
    for (i64 q = kCheckpointBase; q < qmax; q *= 2) qs.push_back(q);
    qs.push_back(qmax);
    return qs;
}

std::vector<double> row_as_double(const CsumRow& row) {
    std::vector<double> out(row.values.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(row.values[i]);
    return out;
}

bool decayed(double first, double last) {
    return last <= first || (last <= 1e-12 && first <= 1e-12);
}

}  // namespace

double partial_sum(const CoeffTable& coeffs, i64 n1, i64 n2, i64 Q) {
    if (Q < 1) throw std::invalid_argument("partial_sum: Q must be >= 1");
    if (Q > coeffs.qmax)
        throw std::invalid_argument("partial_sum: coefficients available only up to qmax = " +
                                    std::to_string(coeffs.qmax));
    const SieveTables& sv = shared_sieve(Q);
    CsumRow r1 = csum_row(Q, n1, &sv);
    CsumRow r2 = csum_row(Q, n2, &sv);
    double S = 0.0;
    for (i64 t = 1; t <= Q; ++t) {
        double c1t = static_cast<double>(r1.at(t));
        for (i64 q2 = 1; q2 <= t; ++q2)
            S += coeffs.at(t, q2) * c1t * static_cast<double>(r2.at(q2));
        double c2t = static_cast<double>(r2.at(t));
        for (i64 q1 = 1; q1 < t; ++q1)
            S += coeffs.at(q1, t) * static_cast<double>(r1.at(q1)) * c2t;
    }
    return S;
}

double partial_sum(const ClosedCoeffFn& coeffs, i64 n1, i64 n2, i64 Q) {
    if (Q < 1) throw std::invalid_argument("partial_sum: Q must be >= 1");
    if (!coeffs) throw std::invalid_argument("partial_sum: missing coefficient function");
    const SieveTables& sv = shared_sieve(Q);
    CsumRow r1 = csum_row(Q, n1, &sv);
    CsumRow r2 = csum_row(Q, n2, &sv);
    double S = 0.0;
    for (i64 t = 1; t <= Q; ++t) {
        double c1t = static_cast<double>(r1.at(t));
        for (i64 q2 = 1; q2 <= t; ++q2)
            S += coeffs(t, q2) * c1t * static_cast<double>(r2.at(q2));
        double c2t = static_cast<double>(r2.at(t));
        for (i64 q1 = 1; q1 < t; ++q1)
            S += coeffs(q1, t) * static_cast<double>(r1.at(q1)) * c2t;
    }
    return S;
}

double partial_sum1(const std::function<double(i64)>& coeff, i64 n, i64 Q) {
    if (Q < 1) throw std::invalid_argument("partial_sum1: Q must be >= 1");
    if (!coeff) throw std::invalid_argument("partial_sum1: missing coefficient function");
    const SieveTables& sv = shared_sieve(Q);
    CsumRow row = csum_row(Q, n, &sv);
    double S = 0.0;
    for (i64 q = 1; q <= Q; ++q) S += coeff(q) * static_cast<double>(row.at(q));
    return S;
}

double tail_bound(const Family& fam, i64 Q, i64 n1, i64 n2) {
    if (!fam.coeff_abs_tail)
        throw unsupported_family_error("tail_bound: family '" + fam.name +
                                       "' has no tail estimator");
    if (Q < 1 || n1 < 1 || n2 < 1) throw std::invalid_argument("tail_bound: positive arguments required");
    // |c_q(n)| <= sigma_1(n), so the series tail is bounded by the
    // coefficient tail scaled by sigma_1 of each argument.
    double scale = static_cast<double>(sigma_s_int(n1, 1));
    if (fam.arity == 2) scale *= static_cast<double>(sigma_s_int(n2, 1));
    return scale * fam.coeff_abs_tail(Q);
}

SeriesContext::SeriesContext(Family fam, const TruncationParams& params,
                             const CoeffTable* table_override, int threads)
    : fam_(std::move(fam)), params_(params), qmax_(params.series_qmax) {
    params.validate();
    if (table_override) {
        if (table_override->qmax < qmax_) qmax_ = table_override->qmax;
    }
    checkpoints_ = checkpoint_list(qmax_);
    if (fam_.arity == 1) {
        if (!fam_.closed_coeff1)
            throw unsupported_family_error("SeriesContext: family '" + fam_.name +
                                           "' has no one-variable coefficients");
        coeff1_.resize(static_cast<size_t>(qmax_));
        for (i64 q = 1; q <= qmax_; ++q)
            coeff1_[static_cast<size_t>(q - 1)] = fam_.closed_coeff1(q);
        return;
    }
    if (!table_override && !fam_.closed_coeff2)
        throw unsupported_family_error("SeriesContext: family '" + fam_.name +
                                       "' has no closed-form coefficients");
    size_t n = static_cast<size_t>(qmax_) * static_cast<size_t>(qmax_);
    grid_.assign(n, 0.0);
    grid_t_.assign(n, 0.0);
    parallel_for(qmax_, threads, [&](i64 row) {
        i64 q1 = row + 1;
        for (i64 q2 = 1; q2 <= qmax_; ++q2) {
            double v = table_override ? table_override->at(q1, q2) : fam_.closed_coeff2(q1, q2);
            grid_[static_cast<size_t>(row * qmax_ + (q2 - 1))] = v;
            grid_t_[static_cast<size_t>((q2 - 1) * qmax_ + row)] = v;
        }
    });
    shared_sieve(qmax_);  // built eagerly so evaluate() never races on growth
}

ConvergenceReport SeriesContext::evaluate(i64 n1, i64 n2) const {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("evaluate: n must be positive");
    ConvergenceReport rep;
    rep.family = fam_.name;
    rep.n1 = n1;
    rep.n2 = fam_.arity == 2 ? n2 : 0;

    const SieveTables& sv = shared_sieve(qmax_);
    std::vector<double> partials;
    if (fam_.arity == 1) {
        rep.direct = fam_.direct1(n1);
        std::vector<double> c = row_as_double(csum_row(qmax_, n1, &sv));
        double S = 0.0;
        size_t k = 0;
        for (i64 q = 1; q <= qmax_; ++q) {
            S += coeff1_[static_cast<size_t>(q - 1)] * c[static_cast<size_t>(q - 1)];
            if (k < checkpoints_.size() && q == checkpoints_[k]) {
                partials.push_back(S);
                ++k;
            }
        }
        rep.tail_bound = tail_bound(fam_, qmax_, n1);
    } else {
        rep.direct = fam_.direct2(n1, n2);
        std::vector<double> c1 = row_as_double(csum_row(qmax_, n1, &sv));
        std::vector<double> c2 = row_as_double(csum_row(qmax_, n2, &sv));
        double S = 0.0;
        size_t k = 0;
        for (i64 t = 1; t <= qmax_; ++t) {
            const double* row = &grid_[static_cast<size_t>((t - 1) * qmax_)];
            double racc = 0.0;
            for (i64 q2 = 0; q2 < t; ++q2) racc += row[q2] * c2[static_cast<size_t>(q2)];
            S += racc * c1[static_cast<size_t>(t - 1)];
            const double* col = &grid_t_[static_cast<size_t>((t - 1) * qmax_)];
            double cacc = 0.0;
            for (i64 q1 = 0; q1 + 1 < t; ++q1) cacc += col[q1] * c1[static_cast<size_t>(q1)];
            S += cacc * c2[static_cast<size_t>(t - 1)];
            if (k < checkpoints_.size() && t == checkpoints_[k]) {
                partials.push_back(S);
                ++k;
            }
        }
        rep.tail_bound = tail_bound(fam_, qmax_, n1, n2);
    }
    for (size_t i = 0; i < partials.size(); ++i)
        rep.checkpoints.push_back({checkpoints_[i], partials[i], std::fabs(rep.direct - partials[i])});
    rep.bracketed = rep.checkpoints.back().abs_error <= rep.tail_bound;
    rep.error_decayed =
        decayed(rep.checkpoints.front().abs_error, rep.checkpoints.back().abs_error);
    return rep;
}

ConvergenceReport evaluate_with_report(const Family& fam, i64 n1, i64 n2,
                                       const TruncationParams& params) {
    SeriesContext ctx(fam, params);
    return ctx.evaluate(n1, n2);
}

VerifyResult verify_family(const Family& fam, i64 nmax, const TruncationParams& params,
                           int threads, const CoeffTable* table_override) {
    if (nmax < 1) throw std::invalid_argument("verify_family: nmax must be >= 1");
    SeriesContext ctx(fam, params, table_override, threads);
    VerifyResult out;
    if (fam.arity == 1) {
        out.reports.resize(static_cast<size_t>(nmax));
        parallel_for(nmax, threads,
                     [&](i64 i) { out.reports[static_cast<size_t>(i)] = ctx.evaluate(i + 1); });
    } else {
        out.reports.resize(static_cast<size_t>(nmax) * static_cast<size_t>(nmax));
        parallel_for(nmax * nmax, threads, [&](i64 i) {
            i64 n1 = i / nmax + 1;
            i64 n2 = i % nmax + 1;
            out.reports[static_cast<size_t>(i)] = ctx.evaluate(n1, n2);
        });
    }
    out.pass = true;
    for (const auto& r : out.reports)
        if (!r.bracketed || !r.error_decayed) out.pass = false;
    return out;
}

}  // namespace rfs
