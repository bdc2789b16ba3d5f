#include "rfseries/catalog.hpp"

#include <cmath>
#include <stdexcept>

#include "rfseries/errors.hpp"
#include "rfseries/zeta.hpp"

namespace rfs {

namespace {

// Merged prime walk over the pair (n1, n2); fn(p, e1, e2).
template <class Fn>
void for_each_prime_pair(i64 n1, i64 n2, Fn&& fn) {
    Factorization f1 = factorize(n1);
    Factorization f2 = factorize(n2);
    size_t i = 0, j = 0;
    while (i < f1.factors.size() || j < f2.factors.size()) {
        i64 p1 = i < f1.factors.size() ? f1.factors[i].first : 0;
        i64 p2 = j < f2.factors.size() ? f2.factors[j].first : 0;
        if (p2 == 0 || (p1 != 0 && p1 < p2)) {
            fn(p1, f1.factors[i].second, 0);
            ++i;
        } else if (p1 == 0 || p2 < p1) {
            fn(p2, 0, f2.factors[j].second);
            ++j;
        } else {
            fn(p1, f1.factors[i].second, f2.factors[j].second);
            ++i;
            ++j;
        }
    }
}

double require_s(const std::optional<double>& s, double dflt, double lower,
                 const char* name) {
    double v = s.value_or(dflt);
    if (!(v > lower))
        throw std::invalid_argument(std::string(name) + ": requires s > " + std::to_string(lower));
    return v;
}

void reject_s(const std::optional<double>& s, const char* name) {
    if (s)
        throw std::invalid_argument(std::string(name) + " is not parameterized; drop --s");
}

bool integral_s(double s) { return std::round(s) == s && s >= 0 && s <= 20; }

// f(n1,n2) = phi(n1 n2)/(n1 n2).
Family make_phi_product(const TruncationParams& params) {
    Family fam;
    fam.name = "phi_product";
    fam.description = "phi(n1*n2)/(n1*n2)";

    fam.fn2 = MultFn2d::from_parts(
        [](i64 n1, i64 n2) {
            i64 m = checked_mul(n1, n2);
            return static_cast<double>(euler_phi(m)) / static_cast<double>(m);
        },
        [](i64 p, int e1, int e2) -> double {
            if ((e1 == 1 && e2 == 0) || (e1 == 0 && e2 == 1)) return -1.0 / static_cast<double>(p);
            if (e1 == 1 && e2 == 1) return 1.0 / static_cast<double>(p);
            return 0.0;
        },
        GridShape::depth_one);

    fam.fn2_exact = MultFn2<Rat>::from_parts(
        [](i64 n1, i64 n2) {
            i64 m = checked_mul(n1, n2);
            return Rat(euler_phi(m), m);
        },
        [](i64 p, int e1, int e2) -> Rat {
            if ((e1 == 1 && e2 == 0) || (e1 == 0 && e2 == 1)) return Rat(-1, p);
            if (e1 == 1 && e2 == 1) return Rat(1, p);
            return Rat(0);
        },
        GridShape::depth_one);

    fam.mean_engine = mean_value(fam.fn2, params);
    fam.mean_closed = fam.mean_engine;  // M(f) is an infinite product; the
                                        // truncated value is the reference
    double M = fam.mean_closed;
    fam.closed_coeff2 = [M](i64 q1, i64 q2) -> double {
        int m1 = mobius(q1);
        if (m1 == 0) return 0.0;
        int m2 = mobius(q2);
        if (m2 == 0) return 0.0;
        i64 g = gcd_i64(q1, q2);
        double denom = static_cast<double>(euler_phi(g)) *
                       static_cast<double>(phi_tilde(checked_mul(q1, q2)));
        return M * static_cast<double>(m1 * m2) / denom;
    };

    // |a| <= M gcd^2/(phi(gcd) q1^2 q2^2) and sum_{d|q} 1/phi(d) <= sqrt(2) tau(q).
    double z2 = zeta(2.0);
    fam.coeff_abs_tail = [M, z2](i64 Q) {
        return 2.0 * std::sqrt(2.0) * M * z2 * tau_tail_upper(2.0, static_cast<double>(Q));
    };
    return fam;
}

// The multiplicative pair function with local values
// f(p^k, p^l) = 1 - p/(p^2+1) when exactly one exponent is positive and
// 1 - 2p/(p^2+1) when both are; the local grid is its definition.
Family make_custom_32(const TruncationParams& params) {
    Family fam;
    fam.name = "custom_32";
    fam.description = "multiplicative pair function with local values 1 - p/(p^2+1), 1 - 2p/(p^2+1)";

    auto direct = [](i64 n1, i64 n2) {
        double out = 1.0;
        for_each_prime_pair(n1, n2, [&](i64 p, int e1, int e2) {
            double pd = static_cast<double>(p);
            double unit = pd / (pd * pd + 1.0);
            out *= (e1 >= 1 && e2 >= 1) ? 1.0 - 2.0 * unit : 1.0 - unit;
        });
        return out;
    };
    fam.fn2 = MultFn2d::from_parts(
        direct,
        [](i64 p, int e1, int e2) -> double {
            if ((e1 == 1 && e2 == 0) || (e1 == 0 && e2 == 1))
                return -static_cast<double>(p) / (static_cast<double>(p) * static_cast<double>(p) + 1.0);
            return 0.0;
        },
        GridShape::depth_one);

    fam.fn2_exact = MultFn2<Rat>::from_parts(
        [](i64 n1, i64 n2) {
            Rat out(1);
            for_each_prime_pair(n1, n2, [&](i64 p, int e1, int e2) {
                Rat unit(p, checked_mul(p, p) + 1);
                out *= (e1 >= 1 && e2 >= 1) ? Rat(1) - unit - unit : Rat(1) - unit;
            });
            return out;
        },
        [](i64 p, int e1, int e2) -> Rat {
            if ((e1 == 1 && e2 == 0) || (e1 == 0 && e2 == 1))
                return Rat(-p, checked_mul(p, p) + 1);
            return Rat(0);
        },
        GridShape::depth_one);

    fam.mean_engine = mean_value(fam.fn2, params);
    fam.mean_closed = fam.mean_engine;
    double M = fam.mean_closed;
    fam.closed_coeff2 = [M](i64 q1, i64 q2) -> double {
        if (gcd_i64(q1, q2) != 1) return 0.0;
        int m1 = mobius(q1);
        if (m1 == 0) return 0.0;
        int m2 = mobius(q2);
        if (m2 == 0) return 0.0;
        return M * static_cast<double>(m1 * m2) /
               (static_cast<double>(phi_s_int(q1, 2)) * static_cast<double>(phi_s_int(q2, 2)));
    };
    double z2 = zeta(2.0);
    fam.coeff_abs_tail = [M, z2](i64 Q) {
        return 2.0 * M * z2 * z2 * zeta_tail_upper(2.0, static_cast<double>(Q));
    };
    return fam;
}

// Shared scaffolding for the f(n1,n2) = g(gcd(n1,n2)) families.
// abs_coeff_scale bounds |a_{q1,q2}| <= scale / lcm^sigma.
Family make_gcd_family(std::string name, std::string description, ArithFn1d g,
                       std::optional<MultFn2<Rat>> exact, double mean_closed, double sigma,
                       double abs_coeff_scale, ClosedCoeffFn closed,
                       const TruncationParams& params) {
    Family fam;
    fam.name = std::move(name);
    fam.description = std::move(description);
    fam.gcd_g = g;
    fam.fn2 = gcd_lift<double>(g, params.exponent_cap);
    fam.fn2_exact = std::move(exact);
    fam.closed_coeff2 = std::move(closed);
    fam.mean_closed = mean_closed;
    fam.mean_engine = mean_value(fam.fn2, params);
    double zs = zeta(sigma);
    fam.coeff_abs_tail = [abs_coeff_scale, zs, sigma](i64 Q) {
        return 2.0 * abs_coeff_scale * zs * tau_tail_upper(sigma, static_cast<double>(Q));
    };
    return fam;
}

// f = sigma_s(gcd)/gcd^s; a = zeta(s+2)/lcm^{s+2}.
Family make_sigma_gcd(double s, std::string name, const TruncationParams& params) {
    double sigma = s + 2.0;
    double zs2 = zeta(sigma);
    ArithFn1d g{
        [s](i64 n) { return sigma_s(n, s) / std::pow(static_cast<double>(n), s); },
        true,
        [s](i64 p, int e) { return std::pow(static_cast<double>(p), -s * e); }};
    std::optional<MultFn2<Rat>> exact;
    if (integral_s(s)) {
        int si = static_cast<int>(s);
        ArithFn1<Rat> gr{
            [si](i64 n) { return Rat(sigma_s_int(n, si), checked_pow(n, si)); },
            true,
            [si](i64 p, int e) { return Rat(1, checked_pow(p, si * e)); }};
        exact = gcd_lift<Rat>(gr, params.exponent_cap);
    }
    ClosedCoeffFn closed = [zs2, sigma](i64 q1, i64 q2) {
        return zs2 / std::pow(static_cast<double>(lcm_i64(q1, q2)), sigma);
    };
    Family fam = make_gcd_family(std::move(name),
                                 s == 0.0 ? "tau(gcd(n1,n2))" : "sigma_s(gcd)/gcd^s",
                                 std::move(g), std::move(exact), zs2, sigma, zs2,
                                 std::move(closed), params);
    fam.s = s;
    return fam;
}

// f = phi_s(gcd)/gcd^s; a = mu(lcm) / (zeta(s+2) phi_{s+2}(lcm)).
Family make_phi_gcd(double s, std::string name, const TruncationParams& params) {
    double sigma = s + 2.0;
    double zs2 = zeta(sigma);
    ArithFn1d g{
        [s](i64 n) { return phi_s(n, s) / std::pow(static_cast<double>(n), s); },
        true,
        [s](i64 p, int e) {
            return e == 1 ? -std::pow(static_cast<double>(p), -s) : 0.0;
        }};
    std::optional<MultFn2<Rat>> exact;
    if (integral_s(s)) {
        int si = static_cast<int>(s);
        ArithFn1<Rat> gr{
            [si](i64 n) { return Rat(phi_s_int(n, si), checked_pow(n, si)); },
            true,
            [si](i64 p, int e) { return e == 1 ? Rat(-1, checked_pow(p, si)) : Rat(0); }};
        exact = gcd_lift<Rat>(gr, params.exponent_cap);
    }
    ClosedCoeffFn closed = [zs2, sigma](i64 q1, i64 q2) -> double {
        i64 L = lcm_i64(q1, q2);
        int m = mobius(L);
        if (m == 0) return 0.0;
        return static_cast<double>(m) / (zs2 * phi_s(L, sigma));
    };
    // phi_sigma(L) >= L^sigma / zeta(sigma), so |a| <= 1/L^sigma.
    Family fam = make_gcd_family(std::move(name),
                                 s == 0.0 ? "1 if gcd(n1,n2) = 1 else 0" : "phi_s(gcd)/gcd^s",
                                 std::move(g), std::move(exact), 1.0 / zs2, sigma, 1.0,
                                 std::move(closed), params);
    fam.s = s;
    return fam;
}

// f = r(gcd)/4; a = M(f) chi(lcm)/lcm^2 with chi the character mod 4.
Family make_r_gcd(const TruncationParams& params) {
    ArithFn1d g{
        [](i64 n) { return static_cast<double>(r2(n)) / 4.0; },
        true,
        [](i64 p, int e) -> double {
            if (p == 2) return 0.0;
            if (p % 4 == 1) return 1.0;
            return (e % 2 == 1) ? -1.0 : 1.0;
        }};
    ArithFn1<Rat> gr{
        [](i64 n) { return Rat(r2(n) / 4); },
        true,
        [](i64 p, int e) -> Rat {
            if (p == 2) return Rat(0);
            if (p % 4 == 1) return Rat(1);
            return (e % 2 == 1) ? Rat(-1) : Rat(1);
        }};
    Family fam;
    fam.name = "r_gcd";
    fam.description = "(1/4) r(gcd(n1,n2)), r = sum-of-two-squares count";
    fam.gcd_g = g;
    fam.fn2 = gcd_lift<double>(g, params.exponent_cap);
    fam.fn2_exact = gcd_lift<Rat>(gr, params.exponent_cap);
    fam.mean_engine = mean_value(fam.fn2, params);
    fam.mean_closed = fam.mean_engine;  // infinite product over odd primes
    double M = fam.mean_closed;
    fam.closed_coeff2 = [M](i64 q1, i64 q2) -> double {
        i64 L = lcm_i64(q1, q2);
        int chi = chi4(L);
        if (chi == 0) return 0.0;
        return M * static_cast<double>(chi) /
               (static_cast<double>(L) * static_cast<double>(L));
    };
    double z2 = zeta(2.0);
    fam.coeff_abs_tail = [M, z2](i64 Q) {
        return 2.0 * M * z2 * tau_tail_upper(2.0, static_cast<double>(Q));
    };
    return fam;
}

// One-variable baseline sigma_s(n)/n^s = zeta(s+1) sum c_q(n)/q^{s+1}.
Family make_sigma1(double s) {
    Family fam;
    fam.name = "sigma1";
    fam.description = "sigma_s(n)/n^s (one variable)";
    fam.arity = 1;
    fam.s = s;
    double zs1 = zeta(s + 1.0);
    fam.direct1 = [s](i64 n) { return sigma_s(n, s) / std::pow(static_cast<double>(n), s); };
    fam.closed_coeff1 = [zs1, s](i64 q) {
        return zs1 / std::pow(static_cast<double>(q), s + 1.0);
    };
    fam.mean_closed = fam.mean_engine = zs1;
    fam.coeff_abs_tail = [zs1, s](i64 Q) {
        return zs1 * zeta_tail_upper(s + 1.0, static_cast<double>(Q));
    };
    return fam;
}

// One-variable baseline phi(n)/n = (1/zeta(2)) sum mu(q)/phi_2(q) c_q(n).
Family make_phi1() {
    Family fam;
    fam.name = "phi1";
    fam.description = "phi(n)/n (one variable)";
    fam.arity = 1;
    double z2 = zeta(2.0);
    fam.direct1 = [](i64 n) {
        return static_cast<double>(euler_phi(n)) / static_cast<double>(n);
    };
    fam.closed_coeff1 = [z2](i64 q) -> double {
        int m = mobius(q);
        if (m == 0) return 0.0;
        return static_cast<double>(m) / (z2 * static_cast<double>(phi_s_int(q, 2)));
    };
    fam.mean_closed = fam.mean_engine = 1.0 / z2;
    // |a_q| <= 1/q^2 since phi_2(q) >= q^2/zeta(2).
    fam.coeff_abs_tail = [](i64 Q) { return zeta_tail_upper(2.0, static_cast<double>(Q)); };
    return fam;
}

}  // namespace

Family family(const std::string& name, std::optional<double> s, const TruncationParams& params) {
    params.validate();
    if (name == "phi_product") {
        reject_s(s, "phi_product");
        return make_phi_product(params);
    }
    if (name == "custom_32") {
        reject_s(s, "custom_32");
        return make_custom_32(params);
    }
    if (name == "sigma_gcd")
        return make_sigma_gcd(require_s(s, 1.0, -1.0, "sigma_gcd"), "sigma_gcd", params);
    if (name == "tau_gcd") {
        reject_s(s, "tau_gcd");
        return make_sigma_gcd(0.0, "tau_gcd", params);
    }
    if (name == "phi_gcd")
        return make_phi_gcd(require_s(s, 1.0, -1.0, "phi_gcd"), "phi_gcd", params);
    if (name == "delta_gcd") {
        reject_s(s, "delta_gcd");
        return make_phi_gcd(0.0, "delta_gcd", params);
    }
    if (name == "r_gcd") {
        reject_s(s, "r_gcd");
        return make_r_gcd(params);
    }
    if (name == "sigma1") return make_sigma1(require_s(s, 1.0, 0.0, "sigma1"));
    if (name == "phi1") {
        reject_s(s, "phi1");
        return make_phi1();
    }
    for (const auto& d : display_only_families())
        if (d.name == name)
            throw unsupported_family_error(
                "family '" + name + "' is display-only: " + d.description);
    throw std::invalid_argument("unknown family '" + name + "'");
}

const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names = {
        "phi_product", "custom_32", "sigma_gcd", "tau_gcd", "phi_gcd",
        "delta_gcd",   "r_gcd",     "sigma1",    "phi1"};
    return names;
}

const std::vector<DisplayOnlyFamily>& display_only_families() {
    static const std::vector<DisplayOnlyFamily> entries = {
        {"tau1",
         "tau(n) ~ -sum_q (log q / q) c_q(n): the coefficient series is only conditionally "
         "convergent, so no tail bound exists and the family cannot be evaluated"},
        {"r1",
         "r(n) ~ pi sum_q ((-1)^{q-1}/(2q-1)) c_{2q-1}(n): the coefficient series is only "
         "conditionally convergent, so no tail bound exists and the family cannot be evaluated"},
    };
    return entries;
}

}  // namespace rfs
