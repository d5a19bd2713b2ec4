#include "band_integrals.hpp"

#include <algorithm>
#include <vector>

namespace wdrm::detail {

BandIntegrals integrate_band(const ConditionalBandCdf& band, double p, double tol, bool need_moments) {
    const double xi = band.curve().anchor;
    auto prim_power = [p](double x) { return std::pow(x, p) / p; };
    // d/dx |x - xi|^p / p = s(x - xi) on both sides of xi.
    auto prim_s = [p, xi](double x) { return std::pow(std::abs(x - xi), p) / p; };

    BandIntegrals out;
    const double L = band.active_begin();
    const double R = band.active_end();
    for (const auto& seg : band.segments()) {
        double a = std::max(seg.lo, L);
        double b = std::min(seg.hi, R);
        if (!(b > a)) continue;
        if (seg.flat || band.curve().is_constant() || band.curve().order == 1.0) {
            // F^i is constant on flats; for a step curve split at the jump.
            std::vector<double> cuts{a};
            if (xi > a && xi < b) cuts.push_back(xi);
            cuts.push_back(b);
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                double lo = cuts[k], hi = cuts[k + 1];
                double c = seg.flat ? band.value_from_level(seg.level) : band(0.5 * (lo + hi));
                out.budget += c * (prim_s(hi) - prim_s(lo));
                if (need_moments) {
                    out.plain += c * (hi - lo);
                    out.power += c * (prim_power(hi) - prim_power(lo));
                }
            }
            continue;
        }
        std::vector<double> cuts{a};
        if (xi > a && xi < b) cuts.push_back(xi);
        cuts.push_back(b);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            double lo = cuts[k], hi = cuts[k + 1];
            auto F = [&band](double x) { return band.value_from_level(band.curve()(x)); };
            // Near a band edge where g' vanishes F^i has a root-type kink, so a
            // double-exponential rule is used on every active stretch.
            auto q = [&](auto&& h) { return quad::integrate_endpoint_singular([&](double x, double) { return h(x); }, lo, hi, tol); };
            out.budget += q([&](double x) { return F(x) * signed_power(x - xi, p); });
            if (need_moments) {
                out.plain += q(F);
                out.power += q([&](double x) { return F(x) * std::pow(x, p - 1.0); });
            }
        }
    }
    if (R < 1.0) {
        out.budget += prim_s(1.0) - prim_s(R);
        if (need_moments) {
            out.plain += 1.0 - R;
            out.power += prim_power(1.0) - prim_power(R);
        }
    }
    return out;
}

}  // namespace wdrm::detail
