#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rfseries/dirichlet2.hpp"
#include "rfseries/engine.hpp"
#include "rfseries/rational.hpp"

namespace rfs {

// A built-in function family: direct evaluator, local (f*mu) grid,
// closed-form coefficients and mean value, and a rigorous bound on the
// absolute coefficient tail used by the series evaluator.
struct Family {
    std::string name;
    std::string description;
    int arity = 2;
    std::optional<double> s;

    // Two-variable families.
    MultFn2d fn2;
    std::optional<MultFn2<Rat>> fn2_exact;  // present when the values are rational
    ClosedCoeffFn closed_coeff2;
    std::optional<ArithFn1d> gcd_g;  // g when f(n1,n2) = g(gcd(n1,n2))

    // One-variable families.
    std::function<double(i64)> direct1;
    std::function<double(i64)> closed_coeff1;

    double mean_closed = 0.0;  // closed-form M(f); equals closed coeff at (1,1)
    double mean_engine = 0.0;  // Euler-product M(f) from the engine

    // Upper bound on sum of |a| over max(q1,q2) > Q (arity 2) or q > Q
    // (arity 1).
    std::function<double(i64)> coeff_abs_tail;

    double direct2(i64 n1, i64 n2) const { return fn2.eval(n1, n2); }
};

// Construct a catalog family by name. Parameterized families accept s
// (sigma_gcd, phi_gcd: s > -1, default 1; sigma1: s > 0, default 1).
// Unknown names throw std::invalid_argument; the display-only entries
// (tau1, r1) throw unsupported_family_error.
Family family(const std::string& name, std::optional<double> s = std::nullopt,
              const TruncationParams& params = TruncationParams{});

// Names of the evaluable families, in the order `verify all` runs them.
const std::vector<std::string>& family_names();

// Display-only entries whose coefficient series are not absolutely
// convergent. Listed for documentation; family() rejects them.
struct DisplayOnlyFamily {
    std::string name;
    std::string description;
};
const std::vector<DisplayOnlyFamily>& display_only_families();

}  // namespace rfs
