#include <algorithm>
#include <cmath>
#include <limits>

#include "wdrm/distributions.hpp"
#include "wdrm/error.hpp"
#include "wdrm/quadrature.hpp"

namespace wdrm {

namespace {

using Segment = PiecewiseCdf::QuantileSegment;

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Integrates f(Q(u), 1-u) over [a, b] inside one smooth quantile segment.
// Stretches ending at u = 1 go through the double-exponential rule so that
// weights like g'(1-u) and unbounded tails are handled.
template <class Fn>
double integrate_segment(const PiecewiseCdf& F, const Segment& s, double a, double b, const Fn& f) {
    if (!(b > a)) return 0.0;
    const CdfPiece& piece = F.pieces()[static_cast<std::size_t>(s.piece)];
    if (b >= 1.0) {
        auto h = [&](double u, double uc) {
            double tail = uc > 0.0 ? uc : 1.0 - u;
            return f(F.piece_inverse(piece, u, tail), tail);
        };
        return quad::integrate_endpoint_singular(h, a, b);
    }
    auto h = [&](double u) { return f(F.piece_inverse(piece, u), 1.0 - u); };
    return quad::integrate(h, a, b);
}

void require_nonnegative_bounded(const PiecewiseCdf& F, const char* what) {
    if (F.pieces().front().lo < 0.0 || !std::isfinite(F.pieces().back().hi)) {
        throw InvalidArgument(std::string(what) + " needs a bounded nonnegative support");
    }
}

double drm_x_domain(const PiecewiseCdf& F, const Distortion& g) {
    require_nonnegative_bounded(F, "x-domain risk evaluation");
    double v = F.pieces().front().lo;
    for (const CdfPiece& p : F.pieces()) {
        if (!(p.hi > p.lo)) continue;
        switch (p.kind) {
        case CdfPiece::Kind::flat: v += g.value(1.0 - clamp01(p.level)) * (p.hi - p.lo); break;
        case CdfPiece::Kind::linear:
            v += quad::integrate_endpoint_singular(
                [&](double x, double) { return g.value(1.0 - F.piece_value(p, x)); }, p.lo, p.hi);
            break;
        case CdfPiece::Kind::analytic:
            v += quad::integrate([&](double x) { return g.value(1.0 - F.piece_value(p, x)); }, p.lo, p.hi);
            break;
        }
    }
    return v * F.scale();
}

double drm_quantile(const PiecewiseCdf& F, const Distortion& g) {
    double v = 0.0;
    for (const Segment& s : F.quantile_segments()) {
        if (s.piece < 0) {
            v += s.x * (g.value(clamp01(1.0 - s.u_lo)) - g.value(clamp01(1.0 - s.u_hi)));
        } else {
            v += integrate_segment(F, s, s.u_lo, s.u_hi,
                                   [&](double q, double tail) { return q * g.derivative(clamp01(tail)); });
        }
    }
    return v * F.scale();
}

}  // namespace

double drm_value(const PiecewiseCdf& F, const Distortion& g, DrmRoute route) {
    if (route == DrmRoute::automatic) {
        bool x_ok = F.support().bounded() && F.pieces().front().lo >= 0.0 && std::isfinite(F.pieces().back().hi);
        route = x_ok ? DrmRoute::x_domain : DrmRoute::quantile;
    }
    return route == DrmRoute::x_domain ? drm_x_domain(F, g) : drm_quantile(F, g);
}

double drm_value(const EmpiricalCdf& F, const Distortion& g) {
    const auto& x = F.samples();
    double n = static_cast<double>(x.size());
    double v = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double hi = static_cast<double>(x.size() - k) / n;
        double lo = static_cast<double>(x.size() - k - 1) / n;
        v += x[k] * (g.value(hi) - g.value(lo));
    }
    return v;
}

double moment_raw(const PiecewiseCdf& F, double k) {
    double v = 0.0;
    for (const Segment& s : F.quantile_segments()) {
        if (s.piece < 0) {
            v += std::pow(s.x, k) * (s.u_hi - s.u_lo);
        } else {
            v += integrate_segment(F, s, s.u_lo, s.u_hi, [&](double q, double) { return std::pow(q, k); });
        }
    }
    return v * std::pow(F.scale(), k);
}

double moment_raw_x_domain(const PiecewiseCdf& F, double k) {
    require_nonnegative_bounded(F, "x-domain moment");
    double v = std::pow(F.pieces().front().lo, k);
    for (const CdfPiece& p : F.pieces()) {
        if (!(p.hi > p.lo)) continue;
        if (p.kind == CdfPiece::Kind::flat) {
            v += (1.0 - p.level) * (std::pow(p.hi, k) - std::pow(p.lo, k));
        } else {
            v += quad::integrate([&](double x) { return k * std::pow(x, k - 1.0) * (1.0 - F.piece_value(p, x)); },
                                 p.lo, p.hi);
        }
    }
    return v * std::pow(F.scale(), k);
}

double wasserstein_to_empirical(const PiecewiseCdf& F, const EmpiricalCdf& Fhat, double p) {
    if (!(p >= 1.0)) throw InvalidArgument("Wasserstein order must be >= 1");
    const double s_out = F.scale();
    const auto& xs = Fhat.samples();
    const std::size_t n = xs.size();
    const double nd = static_cast<double>(n);
    double total = 0.0;
    for (const Segment& s : F.quantile_segments()) {
        if (!(s.u_hi > s.u_lo)) continue;
        auto first = static_cast<std::size_t>(std::floor(s.u_lo * nd));
        for (std::size_t i = std::min(first, n - 1); i < n; ++i) {
            double band_lo = static_cast<double>(i) / nd;
            double band_hi = static_cast<double>(i + 1) / nd;
            if (band_lo >= s.u_hi) break;
            double a = std::max(band_lo, s.u_lo);
            double b = std::min(band_hi, s.u_hi);
            if (!(b > a)) continue;
            double xi = xs[i] / s_out;
            if (s.piece < 0) {
                total += std::pow(std::abs(s.x - xi), p) * (b - a);
                continue;
            }
            const CdfPiece& piece = F.pieces()[static_cast<std::size_t>(s.piece)];
            auto f = [&](double q, double) { return std::pow(std::abs(q - xi), p); };
            // Split where the quantile crosses the sample (kink of |.|^p).
            double cut = -1.0;
            if (xi > piece.lo && xi < piece.hi) {
                double uc = F.piece_value(piece, xi);
                if (uc > a && uc < b) cut = uc;
            }
            if (cut > 0.0) {
                total += integrate_segment(F, s, a, cut, f) + integrate_segment(F, s, cut, b, f);
            } else {
                total += integrate_segment(F, s, a, b, f);
            }
        }
    }
    return s_out * std::pow(std::max(total, 0.0), 1.0 / p);
}

}  // namespace wdrm
