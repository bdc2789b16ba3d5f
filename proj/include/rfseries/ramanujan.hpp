#pragma once

#include <vector>

#include "rfseries/arith.hpp"

namespace rfs {

// Row of Ramanujan sums c_q(n) for q = 1..qmax at fixed n.
// values[q-1] holds c_q(n); every entry is an exact integer.
struct CsumRow {
    i64 n = 1;
    i64 qmax = 1;
    std::vector<i64> values;

    i64 at(i64 q) const { return values[static_cast<size_t>(q - 1)]; }
};

// c_q(n) = sum_{d | (q,n)} mu(q/d) * d, exact integer arithmetic.
i64 csum(i64 q, i64 n);

// c_q(n) as the character sum over residues coprime to q. Test oracle
// for csum: rounds the real part and throws convergence_error when the
// imaginary residue exceeds 1e-9 * q.
i64 csum_exponential(i64 q, i64 n);

// Batch row via one mu-weighted multiples pass per divisor of n.
// Pass shared tables (limit >= qmax) to amortize the mu sieve.
CsumRow csum_row(i64 qmax, i64 n, const SieveTables* tables = nullptr);

// eps_k(n) = k if k | n, else 0.
i64 eps(i64 k, i64 n);

}  // namespace rfs
