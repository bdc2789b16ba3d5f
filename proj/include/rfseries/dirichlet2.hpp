#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "rfseries/arith.hpp"
#include "rfseries/errors.hpp"

namespace rfs {

// One-variable arithmetic function with optional multiplicative local
// data (f*mu)(p^e) = f(p^e) - f(p^{e-1}).
template <class S>
struct ArithFn1 {
    std::function<S(i64)> eval;
    bool multiplicative = false;
    std::function<S(i64, int)> local;  // (p, e) -> (f*mu)(p^e), e >= 1

    S local_value(i64 p, int e) const {
        if (local) return local(p, e);
        return eval(checked_pow(p, e)) - eval(checked_pow(p, e - 1));
    }
};

// Support structure of a local grid, used to pick the summation
// strategy for coefficient double sums.
//   diagonal:  (f*mu)(p^{e1},p^{e2}) = 0 unless e1 == e2
//   depth_one: (f*mu)(p^{e1},p^{e2}) = 0 whenever max(e1,e2) >= 2
//   generic:   no structure assumed
enum class GridShape { generic, diagonal, depth_one };

// Two-variable multiplicative function given by a direct evaluator and
// the local grid (f*mu)(p^{e1},p^{e2}). Grid values are lazily memoized;
// instances are immutable and cheap to copy (copies share the memo).
template <class S>
class MultFn2 {
public:
    using Eval = std::function<S(i64, i64)>;
    using Local = std::function<S(i64, int, int)>;

    MultFn2() = default;

    static MultFn2 from_eval(Eval eval, GridShape shape = GridShape::generic, int cap = 40) {
        MultFn2 f;
        f.state_ = std::make_shared<State>();
        f.state_->eval = std::move(eval);
        f.state_->shape = shape;
        f.state_->cap = cap;
        return f;
    }

    static MultFn2 from_parts(Eval eval, Local local, GridShape shape, int cap = 40) {
        MultFn2 f = from_eval(std::move(eval), shape, cap);
        f.state_->local = std::move(local);
        return f;
    }

    // f == 1: the local grid vanishes away from the origin.
    static MultFn2 constant_one() {
        return from_parts([](i64, i64) { return S(1); },
                          [](i64, int, int) { return S(0); },
                          GridShape::depth_one);
    }

    bool valid() const { return static_cast<bool>(state_); }
    GridShape shape() const { return state_->shape; }
    int exponent_cap() const { return state_->cap; }

    // Identity of the shared state; copies of one function compare equal.
    // Used to key derived-table caches.
    std::shared_ptr<const void> state_handle() const {
        return std::shared_ptr<const void>(state_, state_.get());
    }

    S eval(i64 n1, i64 n2) const { return state_->eval(n1, n2); }

    // (f*mu)(p^{e1}, p^{e2}); memoized, implicit 1 at (0,0).
    S local(i64 p, int e1, int e2) const {
        if (e1 == 0 && e2 == 0) return S(1);
        State& st = *state_;
        if (e1 < 0 || e2 < 0 || e1 > st.cap || e2 > st.cap)
            throw exponent_cap_error("MultFn2: exponent " + std::to_string(std::max(e1, e2)) +
                                     " outside local grid cap " + std::to_string(st.cap));
        const std::uint64_t key = (static_cast<std::uint64_t>(p) << 14) |
                                  (static_cast<std::uint64_t>(e1) << 7) |
                                  static_cast<std::uint64_t>(e2);
        {
            std::lock_guard<std::mutex> lk(st.mu);
            auto it = st.memo.find(key);
            if (it != st.memo.end()) return it->second;
        }
        S v = st.local ? st.local(p, e1, e2) : finite_difference(p, e1, e2);
        std::lock_guard<std::mutex> lk(st.mu);
        return st.memo.emplace(key, std::move(v)).first->second;
    }

    // (f*mu)(n1, n2) via multiplicativity of the grid.
    S fmu(i64 n1, i64 n2) const {
        S out(1);
        Factorization f1 = rfs::factorize(n1);
        Factorization f2 = rfs::factorize(n2);
        size_t i = 0, j = 0;
        while (i < f1.factors.size() || j < f2.factors.size()) {
            i64 p1 = i < f1.factors.size() ? f1.factors[i].first : 0;
            i64 p2 = j < f2.factors.size() ? f2.factors[j].first : 0;
            if (p2 == 0 || (p1 != 0 && p1 < p2)) {
                out = out * local(p1, f1.factors[i].second, 0);
                ++i;
            } else if (p1 == 0 || p2 < p1) {
                out = out * local(p2, 0, f2.factors[j].second);
                ++j;
            } else {
                out = out * local(p1, f1.factors[i].second, f2.factors[j].second);
                ++i;
                ++j;
            }
        }
        return out;
    }

private:
    struct State {
        Eval eval;
        Local local;
        GridShape shape = GridShape::generic;
        int cap = 40;
        mutable std::mutex mu;
        mutable std::unordered_map<std::uint64_t, S> memo;
    };

    S finite_difference(i64 p, int e1, int e2) const {
        const Eval& f = state_->eval;
        i64 a = checked_pow(p, e1);
        i64 b = checked_pow(p, e2);
        S v = f(a, b);
        if (e1 >= 1) v = v - f(a / p, b);
        if (e2 >= 1) v = v - f(a, b / p);
        if (e1 >= 1 && e2 >= 1) v = v + f(a / p, b / p);
        return v;
    }

    std::shared_ptr<State> state_;
};

// Two-variable Dirichlet convolution (f*g)(n1,n2).
template <class S, class F, class G>
S convolve2(const F& f, const G& g, i64 n1, i64 n2) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("convolve2: arguments must be positive");
    S out(0);
    for (i64 d1 : divisors(n1))
        for (i64 d2 : divisors(n2))
            out += f(d1, d2) * g(n1 / d1, n2 / d2);
    return out;
}

// mu(n1, n2) = mu(n1) mu(n2), the convolution inverse of constant 1.
inline int mobius2(i64 n1, i64 n2) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("mobius2: arguments must be positive");
    int m1 = mobius(n1);
    return m1 == 0 ? 0 : m1 * mobius(n2);
}

// (f * mu)(n1, n2) by direct double divisor sum.
template <class S, class F>
S f_star_mu(const F& f, i64 n1, i64 n2) {
    return convolve2<S>(f, [](i64 a, i64 b) { return S(mobius2(a, b)); }, n1, n2);
}

// Reconstruct f(n1,n2) from the local grid: product over primes of the
// partial grid sums. Independent of the direct evaluator.
template <class S>
S mult2_eval(const MultFn2<S>& F, i64 n1, i64 n2) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("mult2_eval: arguments must be positive");
    Factorization f1 = rfs::factorize(n1);
    Factorization f2 = rfs::factorize(n2);
    std::unordered_map<i64, std::pair<int, int>> exps;
    for (auto& [p, e] : f1.factors) exps[p].first = e;
    for (auto& [p, e] : f2.factors) exps[p].second = e;
    S out(1);
    for (auto& [p, ee] : exps) {
        S loc(0);
        for (int d1 = 0; d1 <= ee.first; ++d1)
            for (int d2 = 0; d2 <= ee.second; ++d2)
                loc += F.local(p, d1, d2);
        out = out * loc;
    }
    return out;
}

// Lift a multiplicative one-variable g to f(n1,n2) = g(gcd(n1,n2)).
// The local grid is diagonal: (f*mu)(p^k,p^l) = g(p^k)-g(p^{k-1}) when
// k == l >= 1 and 0 otherwise.
template <class S>
MultFn2<S> gcd_lift(const ArithFn1<S>& g, int cap = 40) {
    if (!g.multiplicative)
        throw std::invalid_argument("gcd_lift: g must be multiplicative");
    auto eval = [g](i64 n1, i64 n2) { return g.eval(std::gcd(n1, n2)); };
    auto local = [g](i64 p, int e1, int e2) {
        if (e1 != e2) return S(0);
        return g.local_value(p, e1);
    };
    return MultFn2<S>::from_parts(std::move(eval), std::move(local), GridShape::diagonal, cap);
}

}  // namespace rfs
