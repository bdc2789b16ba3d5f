#include <doctest.h>

#include <cmath>

#include "rfseries/catalog.hpp"
#include "rfseries/errors.hpp"
#include "rfseries/zeta.hpp"

using namespace rfs;

namespace {

const TruncationParams kParams{};

struct NamedFamily {
    std::string name;
    std::optional<double> s;
};

std::vector<NamedFamily> two_var_instances() {
    return {{"phi_product", {}}, {"custom_32", {}}, {"sigma_gcd", 1.0}, {"tau_gcd", {}},
            {"phi_gcd", 1.0},    {"delta_gcd", {}}, {"r_gcd", {}}};
}

}  // namespace

TEST_CASE("closed-form mean equals the closed-form coefficient at (1,1)") {
    for (const auto& nf : two_var_instances()) {
        Family fam = family(nf.name, nf.s, kParams);
        CAPTURE(fam.name);
        CHECK(fam.closed_coeff2(1, 1) == doctest::Approx(fam.mean_closed).epsilon(1e-14));
        CHECK(fam.mean_engine == doctest::Approx(fam.mean_closed).epsilon(1e-9));
    }
    for (const char* name : {"sigma1", "phi1"}) {
        Family fam = family(name, std::nullopt, kParams);
        CHECK(fam.closed_coeff1(1) == doctest::Approx(fam.mean_closed).epsilon(1e-14));
    }
}

TEST_CASE("grid-derived evaluator equals the direct evaluator") {
    for (const auto& nf : two_var_instances()) {
        Family fam = family(nf.name, nf.s, kParams);
        CAPTURE(fam.name);
        REQUIRE(fam.fn2_exact.has_value());
        for (i64 n1 = 1; n1 <= 100; ++n1)
            for (i64 n2 = 1; n2 <= 100; ++n2) {
                Rat grid = mult2_eval(*fam.fn2_exact, n1, n2);
                Rat direct = fam.fn2_exact->eval(n1, n2);
                CHECK(grid == direct);
            }
        // the double grid agrees within float tolerance
        for (i64 n1 = 1; n1 <= 40; ++n1)
            for (i64 n2 = 1; n2 <= 40; ++n2) {
                double grid = mult2_eval(fam.fn2, n1, n2);
                double direct = fam.direct2(n1, n2);
                CHECK(grid == doctest::Approx(direct).epsilon(1e-12));
            }
    }
    // a non-integral parameter has no exact grid but the float grid holds
    Family fam = family("sigma_gcd", 0.5, kParams);
    CHECK(!fam.fn2_exact.has_value());
    for (i64 n1 = 1; n1 <= 60; ++n1)
        for (i64 n2 = 1; n2 <= 60; ++n2)
            CHECK(mult2_eval(fam.fn2, n1, n2) ==
                  doctest::Approx(fam.direct2(n1, n2)).epsilon(1e-12));
}

TEST_CASE("closed-form coefficient spot values") {
    Family sig = family("sigma_gcd", 1.0, kParams);
    CHECK(sig.closed_coeff2(2, 4) == doctest::Approx(zeta(3.0) / 64.0).epsilon(1e-14));

    Family phi = family("phi_gcd", 1.0, kParams);
    CHECK(phi.closed_coeff2(4, 1) == 0.0);
    CHECK(phi.closed_coeff2(2, 2) ==
          doctest::Approx(-1.0 / (7.0 * zeta(3.0))).epsilon(1e-13));

    Family r = family("r_gcd", std::nullopt, kParams);
    CHECK(r.closed_coeff2(2, 4) == 0.0);
    CHECK(r.closed_coeff2(2, 1) == 0.0);
    CHECK(r.closed_coeff2(8, 8) == 0.0);

    Family pp = family("phi_product", std::nullopt, kParams);
    CHECK(pp.closed_coeff2(2, 1) == doctest::Approx(-pp.mean_closed / 5.0).epsilon(1e-14));
    CHECK(pp.closed_coeff2(2, 2) == doctest::Approx(pp.mean_closed / 5.0).epsilon(1e-14));

    Family c32 = family("custom_32", std::nullopt, kParams);
    CHECK(c32.closed_coeff2(2, 1) == doctest::Approx(-c32.mean_closed / 3.0).epsilon(1e-14));
    CHECK(c32.closed_coeff2(2, 2) == 0.0);

    Family tau = family("tau_gcd", std::nullopt, kParams);
    CHECK(tau.closed_coeff2(2, 2) == doctest::Approx(zeta(2.0) / 4.0).epsilon(1e-14));

    Family delta = family("delta_gcd", std::nullopt, kParams);
    CHECK(delta.closed_coeff2(1, 1) == doctest::Approx(1.0 / zeta(2.0)).epsilon(1e-13));
}

TEST_CASE("phi_product local grid case analysis") {
    Family pp = family("phi_product", std::nullopt, kParams);
    for (i64 p : {2, 3, 5, 13}) {
        double pd = static_cast<double>(p);
        CHECK(pp.fn2.local(p, 1, 0) == -1.0 / pd);
        CHECK(pp.fn2.local(p, 0, 1) == -1.0 / pd);
        CHECK(pp.fn2.local(p, 1, 1) == 1.0 / pd);
        for (int e = 2; e <= 5; ++e) {
            CHECK(pp.fn2.local(p, e, 0) == 0.0);
            CHECK(pp.fn2.local(p, 0, e) == 0.0);
        }
        for (int e1 = 1; e1 <= 4; ++e1)
            for (int e2 = 1; e2 <= 4; ++e2)
                if (e1 + e2 >= 3) CHECK(pp.fn2.local(p, e1, e2) == 0.0);
    }
}

TEST_CASE("r_gcd local tail sums reproduce the residue-class closed forms") {
    Family r = family("r_gcd", std::nullopt, kParams);
    REQUIRE(r.gcd_g.has_value());
    const ArithFn1d& g = *r.gcd_g;
    SieveTables sv = build_sieve(50);
    for (auto p : sv.primes()) {
        double pd = static_cast<double>(p);
        for (int k = 1; k <= 5; ++k) {
            double tail = 0.0;
            for (int e = k; e <= 80; ++e)
                tail += g.local(p, e) * std::pow(pd, -2.0 * e);
            double expect;
            if (p == 2) {
                expect = 0.0;
            } else if (p % 4 == 1) {
                expect = std::pow(pd, -2.0 * k) / (1.0 - 1.0 / (pd * pd));
            } else if (k % 2 == 1) {
                expect = -std::pow(pd, -2.0 * k) / (1.0 + 1.0 / (pd * pd));
            } else {
                expect = std::pow(pd, -2.0 * k) / (1.0 + 1.0 / (pd * pd));
            }
            CHECK(tail == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("r_gcd coefficients vanish exactly on even lcm and carry chi's sign") {
    Family r = family("r_gcd", std::nullopt, kParams);
    for (i64 q1 = 1; q1 <= 100; ++q1)
        for (i64 q2 = 1; q2 <= 100; ++q2) {
            i64 L = lcm_i64(q1, q2);
            double a = r.closed_coeff2(q1, q2);
            if (L % 2 == 0) {
                CHECK(a == 0.0);
            } else {
                CHECK(a != 0.0);
                CHECK((a > 0) == (chi4(L) > 0));
            }
        }
}

TEST_CASE("family registry and validation") {
    CHECK(family_names().size() == 9);
    CHECK_THROWS_AS(family("nosuch"), std::invalid_argument);
    CHECK_THROWS_AS(family("sigma_gcd", -1.0), std::invalid_argument);
    CHECK_THROWS_AS(family("phi_gcd", -2.5), std::invalid_argument);
    CHECK_THROWS_AS(family("sigma1", 0.0), std::invalid_argument);
    CHECK_THROWS_AS(family("tau_gcd", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(family("phi1", 2.0), std::invalid_argument);
    CHECK_THROWS_AS(family("tau1"), unsupported_family_error);
    CHECK_THROWS_AS(family("r1"), unsupported_family_error);
    CHECK(display_only_families().size() == 2);
}

TEST_CASE("catalog functions are multiplicative pairs with unit value at (1,1)") {
    for (const auto& nf : two_var_instances()) {
        Family fam = family(nf.name, nf.s, kParams);
        CAPTURE(fam.name);
        CHECK(fam.direct2(1, 1) == 1.0);
        // f(m1 n1, m2 n2) = f(m1,m2) f(n1,n2) when m1 m2 and n1 n2 are coprime
        const std::vector<std::array<i64, 4>> samples = {
            {2, 4, 3, 9}, {5, 1, 4, 6}, {7, 49, 8, 27}, {25, 5, 9, 3}, {11, 13, 6, 10}};
        for (auto [m1, m2, n1, n2] : samples) {
            REQUIRE(std::gcd(m1 * m2, n1 * n2) == 1);
            CHECK(fam.direct2(m1 * n1, m2 * n2) ==
                  doctest::Approx(fam.direct2(m1, m2) * fam.direct2(n1, n2)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gcd-family local data agrees with evaluator differences") {
    for (const char* name : {"sigma_gcd", "phi_gcd", "tau_gcd", "r_gcd"}) {
        Family fam = family(name, std::nullopt, kParams);
        CAPTURE(fam.name);
        REQUIRE(fam.gcd_g.has_value());
        const ArithFn1d& g = *fam.gcd_g;
        CHECK(g.multiplicative);
        CHECK(g.eval(1) == 1.0);
        for (i64 m : {3, 4, 5, 9})
            for (i64 n : {7, 8, 11, 49}) {
                if (std::gcd(m, n) != 1) continue;
                CHECK(g.eval(m * n) == doctest::Approx(g.eval(m) * g.eval(n)).epsilon(1e-12));
            }
        for (i64 p : {2, 3, 5, 13})
            for (int e = 1; e <= 4; ++e) {
                double diff = g.eval(checked_pow(p, e)) - g.eval(checked_pow(p, e - 1));
                CHECK(g.local(p, e) == doctest::Approx(diff).epsilon(1e-12));
            }
    }
}

TEST_CASE("coefficient tail bounds shrink monotonically") {
    for (const auto& nf : two_var_instances()) {
        Family fam = family(nf.name, nf.s, kParams);
        CAPTURE(fam.name);
        double prev = fam.coeff_abs_tail(128);
        for (i64 Q = 256; Q <= 16384; Q *= 2) {
            double b = fam.coeff_abs_tail(Q);
            CHECK(b > 0.0);
            CHECK(b < prev);
            prev = b;
        }
    }
}
