#pragma once

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <utility>

#include "wdrm/error.hpp"

namespace wdrm::roots {

struct Bracket {
    double lo;
    double hi;
    double f_lo;
    double f_hi;
};

// Root of f on a sign-changing bracket, stopping when the bracket is narrower
// than abs_tol + rel_tol*|x|. Uses TOMS 748 (Alefeld-Potra-Shi).
template <class F>
double solve_bracketed(const F& f, Bracket b, double abs_tol, double rel_tol, int* iterations = nullptr,
                       std::uintmax_t max_iter = 400) {
    if (b.f_lo == 0.0) return b.lo;
    if (b.f_hi == 0.0) return b.hi;
    if ((b.f_lo > 0) == (b.f_hi > 0)) throw InvalidArgument("solve_bracketed: no sign change");
    auto stop = [&](double x, double y) {
        return std::abs(y - x) <= abs_tol + rel_tol * std::min(std::abs(x), std::abs(y));
    };
    std::uintmax_t it = max_iter;
    auto r = boost::math::tools::toms748_solve(f, b.lo, b.hi, b.f_lo, b.f_hi, stop, it);
    if (iterations) *iterations += static_cast<int>(it);
    // Return the endpoint with the smaller residual magnitude side-agnostically.
    return 0.5 * (r.first + r.second);
}

// Safeguarded Newton for monotone f with derivative df on [lo, hi].
template <class F, class DF>
double newton_bracketed(const F& f, const DF& df, double target, double lo, double hi, int max_iter = 100) {
    double f_lo = f(lo) - target;
    double f_hi = f(hi) - target;
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0) == (f_hi > 0)) return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
    bool increasing = f_hi > f_lo;
    double x = 0.5 * (lo + hi);
    for (int k = 0; k < max_iter; ++k) {
        double fx = f(x) - target;
        if (fx == 0.0) return x;
        if ((fx > 0) == increasing) hi = x; else lo = x;
        double d = df(x);
        double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4e-16 * (1.0 + std::abs(x)) || hi - lo <= 4e-16 * (1.0 + std::abs(x))) return next;
        x = next;
    }
    return x;
}

}  // namespace wdrm::roots
