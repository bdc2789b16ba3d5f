#include "rfseries/ramanujan.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "rfseries/errors.hpp"

namespace rfs {

i64 csum(i64 q, i64 n) {
    if (q < 1 || n < 1) throw std::invalid_argument("csum: q and n must be positive");
    i64 g = std::gcd(q, n);
    i64 out = 0;
    for (i64 d : divisors(g)) out += mobius(q / d) * d;
    return out;
}

i64 csum_exponential(i64 q, i64 n) {
    if (q < 1 || n < 1) throw std::invalid_argument("csum_exponential: q and n must be positive");
    long double re = 0.0L, im = 0.0L;
    const long double w = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(n % q) /
                          static_cast<long double>(q);
    for (i64 a = 1; a <= q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        re += std::cos(w * static_cast<long double>(a));
        im += std::sin(w * static_cast<long double>(a));
    }
    if (std::fabs(static_cast<double>(im)) > 1e-9 * static_cast<double>(q))
        throw convergence_error("csum_exponential: imaginary residue exceeds tolerance");
    return llround(static_cast<double>(re));
}

CsumRow csum_row(i64 qmax, i64 n, const SieveTables* tables) {
    if (qmax < 1 || n < 1) throw std::invalid_argument("csum_row: qmax and n must be positive");
    CsumRow row;
    row.n = n;
    row.qmax = qmax;
    row.values.assign(static_cast<size_t>(qmax), 0);

    std::optional<SieveTables> local;
    if (!tables || tables->limit() < qmax) local.emplace(qmax);
    const SieveTables& sv = local ? *local : *tables;

    // c_q(n) = sum over d | n, d | q of mu(q/d) d: one multiples pass
    // per divisor class of n.
    for (i64 d : divisors(n)) {
        if (d > qmax) continue;
        for (i64 q = d; q <= qmax; q += d)
            row.values[static_cast<size_t>(q - 1)] += sv.mobius(q / d) * d;
    }
    return row;
}

i64 eps(i64 k, i64 n) {
    if (k < 1 || n < 1) throw std::invalid_argument("eps: k and n must be positive");
    return (n % k == 0) ? k : 0;
}

}  // namespace rfs
