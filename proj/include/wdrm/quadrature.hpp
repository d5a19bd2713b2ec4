#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <queue>

namespace wdrm::quad {

inline constexpr double default_tolerance = 1e-12;

// Globally adaptive 7/15-point Gauss-Kronrod with an absolute error target:
// the panel with the largest Kronrod-Gauss difference is bisected until the
// summed estimate meets the target or the panel budget runs out. Callers split
// at known kinks so that each call sees a smooth piece.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = default_tolerance, int max_panels = 4096) {
    if (!(b > a)) return 0.0;
    struct Panel {
        double a, b, value, err;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    auto make = [&](double lo, double hi) {
        Panel p{lo, hi, 0.0, 0.0};
        p.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 0, 0.0, &p.err);
        return p;
    };
    std::priority_queue<Panel> heap;
    heap.push(make(a, b));
    double total = heap.top().value, err = heap.top().err;
    for (int n = 1; err > abs_tol && n < max_panels; ++n) {
        Panel worst = heap.top();
        double m = 0.5 * (worst.a + worst.b);
        if (!(m > worst.a && m < worst.b)) break;
        heap.pop();
        Panel l = make(worst.a, m), r = make(m, worst.b);
        total += l.value + r.value - worst.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
    }
    return total;
}

// Double-exponential rule for integrands with integrable endpoint blow-up.
// f(x, xc) receives the signed distance xc to the nearest endpoint
// (negative near a, positive near b), which keeps 1-u accurate near u = 1.
template <class F>
double integrate_endpoint_singular(const F& f, double a, double b, double tol = default_tolerance) {
    if (!(b > a)) return 0.0;
    static thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    return rule.integrate(f, a, b, tol);
}

}  // namespace wdrm::quad
