#include "rfseries/zeta.hpp"

#include <cmath>
#include <stdexcept>

#include "rfseries/arith.hpp"

namespace rfs {

double zeta(double s) {
    if (!(s > 1.0)) throw std::invalid_argument("zeta: requires s > 1");
    // Partial sum to N, then the first Euler-Maclaurin corrections:
    // integral, half endpoint, and the N^{-s-1} term. Residual is
    // O(s^3 N^{-s-3}).
    const long N = s > 30 ? 64 : (s > 10 ? 1024 : 100'000);
    double sum = 0.0;
    for (long n = N - 1; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
    const double Nd = static_cast<double>(N);
    sum += std::pow(Nd, 1.0 - s) / (s - 1.0);
    sum += 0.5 * std::pow(Nd, -s);
    sum += s / 12.0 * std::pow(Nd, -s - 1.0);
    return sum;
}

double catalan_constant() {
    // Alternating series; error bounded by the first omitted term.
    const long K = 2'000'000;
    double sum = 0.0;
    for (long k = K; k >= 0; --k) {
        double t = 1.0 / (static_cast<double>(2 * k + 1) * static_cast<double>(2 * k + 1));
        sum = (k % 2 == 0) ? sum + t : sum - t;
    }
    return sum;
}

double prime_zeta(double s) {
    if (!(s > 1.0)) throw std::invalid_argument("prime_zeta: requires s > 1");
    // P(s) = sum_j mu(j)/j log zeta(js); terms vanish once js is large.
    double out = 0.0;
    for (int j = 1; j * s <= 64.0; ++j) {
        int m = mobius(j);
        if (m == 0) continue;
        out += static_cast<double>(m) / j * std::log(zeta(j * s));
    }
    return out;
}

double zeta_tail_upper(double s, double x) {
    if (!(s > 1.0)) throw std::invalid_argument("zeta_tail_upper: requires s > 1");
    if (x < 1.0) return zeta(s);
    double m = std::floor(x) + 1.0;
    return std::pow(m, -s) + std::pow(m, 1.0 - s) / (s - 1.0);
}

double tau_tail_upper(double s, double x) {
    if (!(s > 1.0)) throw std::invalid_argument("tau_tail_upper: requires s > 1");
    if (x < 1.0) return zeta(s) * zeta(s);
    // sum_{q>x} tau(q)/q^s = sum over pairs ab > x. Split at a <= x:
    //   sum_{a<=x} a^-s T(s, x/a) <= x^{1-s} (1 + H_x/(s-1))
    // and a > x contributes at most zeta(s) T(s, x).
    double Hx = std::log(x) + 0.57721566490153287 + 0.5 / x;
    return std::pow(x, 1.0 - s) * (1.0 + Hx / (s - 1.0)) + zeta(s) * zeta_tail_upper(s, x);
}

}  // namespace rfs
