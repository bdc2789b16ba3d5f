#pragma once

namespace rfs {

// Riemann zeta for real s > 1 by direct summation with an
// integral-plus-endpoint tail completion; about 1e-13 accurate for
// s >= 1.05 and exact to double precision for large s.
double zeta(double s);

// Catalan's constant via the alternating series sum (-1)^k/(2k+1)^2.
double catalan_constant();

// Prime zeta P(s) = sum_p p^{-s} for s > 1.
double prime_zeta(double s);

// Rigorous upper bound on sum_{n > x} n^{-s} for s > 1.
double zeta_tail_upper(double s, double x);

// Rigorous upper bound on sum_{q > x} tau(q) q^{-s} for s > 1.
double tau_tail_upper(double s, double x);

}  // namespace rfs
