#include "wdrm/moment_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "band_integrals.hpp"
#include "validation.hpp"
#include "wdrm/error.hpp"
#include "wdrm/roots.hpp"

namespace wdrm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLambdaLo = 1e-8;
constexpr double kLambdaHi = 1e8;

struct Multipliers {
    double eta1 = 0.0;
    double etap = 0.0;
};

// Candidate family over fixed anchors on [0,1]. Evaluates the moments and the
// budget left-hand side of the assembled candidate at given multipliers.
class Family {
public:
    struct Eval {
        double mean;
        double pmoment;
        double lhs;
    };

    Family(std::vector<double> anchors, const Distortion& g, double p, double tol)
        : anchors_(std::move(anchors)), g_(g), p_(p), tol_(tol) {}

    std::size_t size() const { return anchors_.size(); }
    double order() const { return p_; }

    std::vector<ConditionalBandCdf> bands(double lambda, Multipliers m, bool* rectified = nullptr) const {
        std::vector<ConditionalBandCdf> out;
        out.reserve(anchors_.size());
        for (std::size_t i = 0; i < anchors_.size(); ++i) {
            BandCandidate c{i + 1, anchors_.size(), StationarityCurve{p_, anchors_[i], lambda, m.eta1, m.etap}};
            if (m.etap > 0.0 && !c.is_monotone()) {
                out.push_back(monotone_rectify(c, g_));
                if (rectified) *rectified = true;
            } else {
                out.emplace_back(c.index, c.count, c.curve, g_);
            }
        }
        return out;
    }

    Eval evaluate(double lambda, Multipliers m) const {
        ++evaluations;
        double plain = 0.0, power = 0.0, budget = 0.0;
        for (const auto& band : bands(lambda, m)) {
            auto r = detail::integrate_band(band, p_, tol_, true);
            plain += r.plain;
            power += r.power;
            budget += r.budget;
        }
        double n = static_cast<double>(anchors_.size());
        return {1.0 - plain / n, 1.0 - p_ * power / n, -budget / n};
    }

    mutable int evaluations = 0;

private:
    std::vector<double> anchors_;
    Distortion g_;
    double p_;
    double tol_;
};

// Expands [x - w, x + w] until f changes sign; f increasing.
roots::Bracket expand_bracket(const std::function<double(double)>& f, double centre, double width) {
    double lo = centre - width, hi = centre + width;
    double f_lo = f(lo), f_hi = f(hi);
    for (int k = 0; k < 2000 && !(f_lo <= 0.0 && f_hi >= 0.0); ++k) {
        if (f_lo > 0.0) {
            hi = lo;
            f_hi = f_lo;
            width *= 2.0;
            lo -= width;
            f_lo = f(lo);
        } else {
            lo = hi;
            f_lo = f_hi;
            width *= 2.0;
            hi += width;
            f_hi = f(hi);
        }
        if (!std::isfinite(lo) || !std::isfinite(hi) || width > 1e200) break;
    }
    if (!(f_lo <= 0.0 && f_hi >= 0.0)) throw ConvergenceError("could not bracket a multiplier", {f_lo, f_hi});
    return {lo, hi, f_lo, f_hi};
}

struct InnerSolver {
    const Family& family;
    double c1;
    std::optional<double> cp;
    double tol;
    IterationCounts& counts;
    std::uint32_t& flags;

    double residual_norm(const Family::Eval& e) const {
        double r = std::abs(e.mean - c1);
        if (cp) r = std::max(r, std::abs(e.pmoment - *cp));
        return r;
    }

    // Mean as a function of eta1 is increasing: one bracketed root.
    double solve_eta1(double lambda, double etap, double guess) {
        auto f = [&](double e1) {
            ++counts.inner;
            return family.evaluate(lambda, {e1, etap}).mean - c1;
        };
        auto b = expand_bracket(f, guess, 1.0 + 0.01 * std::abs(guess));
        return roots::solve_bracketed(f, b, 0.0, 1e-15, nullptr, 200);
    }

    // Nested bisection: eta1 matches the mean for each etap, and the p-th
    // moment is increasing in etap along that curve.
    Multipliers nested(double lambda, Multipliers start) {
        flags |= flag_nested_fallback;
        double e1 = start.eta1;
        auto f = [&](double ep) {
            e1 = solve_eta1(lambda, ep, e1);
            return family.evaluate(lambda, {e1, ep}).pmoment - *cp;
        };
        auto b = expand_bracket(f, start.etap, 1.0 + 0.01 * std::abs(start.etap));
        double ep = roots::solve_bracketed(f, b, 0.0, 1e-15, nullptr, 200);
        e1 = solve_eta1(lambda, ep, e1);
        return {e1, ep};
    }

    // Damped Newton with a forward-difference Jacobian.
    std::optional<Multipliers> newton(double lambda, Multipliers x, int max_iter = 40) {
        auto eval = [&](Multipliers m) {
            ++counts.inner;
            return family.evaluate(lambda, m);
        };
        Family::Eval e = eval(x);
        double norm = residual_norm(e);
        for (int it = 0; it < max_iter; ++it) {
            if (norm <= tol) return x;
            double r1 = e.mean - c1, r2 = e.pmoment - *cp;
            double h1 = 1e-6 * (1.0 + std::abs(x.eta1));
            double h2 = 1e-6 * (1.0 + std::abs(x.etap));
            Family::Eval e1 = eval({x.eta1 + h1, x.etap});
            Family::Eval e2 = eval({x.eta1, x.etap + h2});
            double j11 = (e1.mean - e.mean) / h1, j12 = (e2.mean - e.mean) / h2;
            double j21 = (e1.pmoment - e.pmoment) / h1, j22 = (e2.pmoment - e.pmoment) / h2;
            double det = j11 * j22 - j12 * j21;
            if (!std::isfinite(det) || std::abs(det) < 1e-300) return std::nullopt;
            double d1 = -(j22 * r1 - j12 * r2) / det;
            double d2 = -(-j21 * r1 + j11 * r2) / det;
            double t = 1.0;
            bool accepted = false;
            for (int half = 0; half <= 30; ++half, t *= 0.5) {
                Multipliers trial{x.eta1 + t * d1, x.etap + t * d2};
                Family::Eval et = eval(trial);
                double nt = residual_norm(et);
                if (nt < (1.0 - 1e-4 * t) * norm) {
                    x = trial;
                    e = et;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) return std::nullopt;
        }
        return norm <= tol ? std::optional<Multipliers>(x) : std::nullopt;
    }

    Multipliers solve(double lambda, Multipliers start) {
        if (!cp) {
            return {solve_eta1(lambda, 0.0, start.eta1), 0.0};
        }
        if (auto r = newton(lambda, start)) return *r;
        // Restarts around the warm start before falling back to bisection.
        const double scales[] = {0.5, 2.0, 0.25, 4.0};
        for (int k = 0; k < 8; ++k) {
            ++counts.restarts;
            Multipliers s = start;
            if (k < 4) {
                s.etap = start.etap * scales[k];
            } else {
                s.etap = start.etap * scales[k - 4];
                s.eta1 = start.eta1 + (k % 2 == 0 ? 1.0 : -1.0) * (1.0 + std::abs(start.eta1));
            }
            if (auto r = newton(lambda, s, 20)) return *r;
        }
        Multipliers m = nested(lambda, start);
        if (auto r = newton(lambda, m, 10)) return *r;
        return m;
    }
};

void require_unit_moments(double c1, std::optional<double> cp, double p) {
    if (!(c1 > 0.0 && c1 < 1.0)) throw InfeasibleError("mean target must lie strictly inside the support");
    if (!cp) return;
    double lo = std::pow(c1, p);
    if (*cp < lo * (1.0 - 1e-14) || *cp > c1 * (1.0 + 1e-14)) {
        std::ostringstream msg;
        msg.precision(10);
        msg << "moment targets infeasible: need c1^p <= cp <= c1 (scaled to the unit interval), got c1=" << c1
            << " cp=" << *cp;
        throw InfeasibleError(msg.str());
    }
}

// Point mass at c1 or the two-point law on {0,1}: the only members of the
// moment set when cp sits on its boundary.
std::optional<PiecewiseCdf> boundary_moment_law(double c1, double cp, double p) {
    if (std::abs(cp - std::pow(c1, p)) <= 1e-14) return PiecewiseCdf::point_mass(c1);
    if (std::abs(cp - c1) <= 1e-14) return PiecewiseCdf({CdfPiece::flat(0.0, 1.0, 1.0 - c1)}, std::nullopt);
    return std::nullopt;
}

void finish_report(SolveReport& r, const Distortion& g, double p, double c1, std::optional<double> cp,
                   const EmpiricalCdf* Fhat, double eps) {
    r.value = drm_value(r.cdf, g);
    r.residuals.mean = moment_raw(r.cdf, 1.0) - c1;
    if (cp) r.residuals.pmoment = moment_raw(r.cdf, p) - *cp;
    if (Fhat) {
        r.budget_used = wasserstein_to_empirical(r.cdf, *Fhat, p);
        r.residuals.budget = r.budget_used - eps;
    }
}

// Cornilly-type problem on [0,1] with unit-scale targets.
SolveReport cornilly_unit(const Distortion& g, double p, double c1, double cp, const Tolerances& tol) {
    SolveReport r;
    if (auto law = boundary_moment_law(c1, cp, p)) {
        r.cdf = *law;
        return r;
    }
    Family family({0.0}, g, p, tol.quadrature);
    InnerSolver inner{family, c1, cp, tol.newton, r.iterations, r.flags};
    // pmoment is constant (= c1) for etap >= 0, so the root lies at etap < 0.
    double e1 = -g.derivative(c1);
    auto f = [&](double ep) {
        e1 = inner.solve_eta1(0.0, ep, e1);
        return family.evaluate(0.0, {e1, ep}).pmoment - cp;
    };
    double hi = 0.0, f_hi = f(hi);
    double lo = -1.0, f_lo = f(lo);
    while (f_lo > 0.0 && lo > -1e200) {
        hi = lo;
        f_hi = f_lo;
        lo *= 4.0;
        f_lo = f(lo);
    }
    if (!(f_lo <= 0.0 && f_hi >= 0.0)) throw ConvergenceError("cannot bracket the moment multiplier", {f_lo, f_hi});
    double ep = roots::solve_bracketed(f, {lo, hi, f_lo, f_hi}, 0.0, 1e-15, &r.iterations.outer, 300);
    e1 = inner.solve_eta1(0.0, ep, e1);
    Multipliers m{e1, ep};
    if (auto polished = inner.newton(0.0, m, 10)) m = *polished;
    bool rectified = false;
    auto bands = family.bands(0.0, m, &rectified);
    if (rectified) r.flags |= flag_rectified;
    r.cdf = assemble_bands(bands, g, SupportMode::unit());
    r.multipliers.eta1 = m.eta1;
    r.multipliers.etap = m.etap;
    r.flags &= ~static_cast<std::uint32_t>(flag_nested_fallback);
    r.iterations.evaluations = family.evaluations;
    return r;
}

// Scaled quantities of the unbounded p = 2 family with mean c1 and standard
// deviation sigma. All integrals against the band structure are closed form.
struct CorollaryFamily {
    std::vector<double> x;
    const Distortion& g;
    double c1;
    double sigma;
    double g2;
    double xbar;
    std::vector<double> dg;  // integral of g'(1-u) over band i

    CorollaryFamily(std::vector<double> xs, const Distortion& g_, double c1_, double sigma_)
        : x(std::move(xs)), g(g_), c1(c1_), sigma(sigma_), g2(g_.derivative_square_integral()) {
        double n = static_cast<double>(x.size());
        xbar = 0.0;
        for (double v : x) xbar += v / n;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double hi = static_cast<double>(x.size() - i) / n;
            double lo = static_cast<double>(x.size() - i - 1) / n;
            dg.push_back(g.value(hi) - g.value(lo));
        }
    }

    double d(std::size_t i, double lambda) const { return lambda * (x[i] - xbar) - 1.0; }

    double h_norm(double lambda) const {
        double n = static_cast<double>(x.size());
        double s = g2;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double di = d(i, lambda);
            s += 2.0 * di * dg[i] + di * di / n;
        }
        return std::sqrt(std::max(s, 0.0));
    }

    double w2_squared(double lambda) const {
        double n = static_cast<double>(x.size());
        double hn = h_norm(lambda);
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            a += (c1 - x[i]) * (c1 - x[i]) / n;
            b += (c1 - x[i]) * (dg[i] + d(i, lambda) / n);
        }
        return a + 2.0 * sigma / hn * b + sigma * sigma;
    }

    double value(double lambda) const {
        double s = g2;
        for (std::size_t i = 0; i < x.size(); ++i) s += d(i, lambda) * dg[i];
        return c1 + sigma / h_norm(lambda) * s;
    }

    PiecewiseCdf cdf(double lambda, MultiplierSet* out) const {
        double k = h_norm(lambda) / sigma;
        double eta2 = lambda - k;
        double eta1 = k * c1 - lambda * xbar - 1.0;
        std::vector<ConditionalBandCdf> bands;
        for (std::size_t i = 0; i < x.size(); ++i) {
            StationarityCurve curve{2.0, x[i], lambda, eta1, eta2};
            bands.emplace_back(i + 1, x.size(), curve, g, std::vector<ConditionalBandCdf::Flat>{}, -kInf, kInf);
        }
        if (out) {
            out->lambda = lambda;
            out->eta1 = eta1;
            out->etap = eta2;
        }
        return assemble_bands(bands, g, SupportMode::unbounded());
    }
};

}  // namespace

SolveReport solve_cornilly(const Distortion& g, double p, double c1, double cp, SupportMode support,
                           const SolverOptions& options) {
    detail::check_distortion(g, options);
    if (!g.is_strict()) throw InvalidArgument("moment-constrained problems need a strictly concave distortion");
    if (!support.bounded()) {
        if (p != 2.0) throw InvalidArgument("unbounded moment problem is only solved for p = 2");
        double var = cp - c1 * c1;
        if (!(var > 0.0)) throw InfeasibleError("second moment must exceed the squared mean");
        if (!std::isfinite(g.derivative_square_integral())) {
            throw UnboundedError("integral of g'(u)^2 diverges: the worst case is +infinity");
        }
        CorollaryFamily fam({c1}, g, c1, std::sqrt(var));
        SolveReport r;
        r.cdf = fam.cdf(0.0, &r.multipliers);
        r.multipliers.lambda = 0.0;
        finish_report(r, g, p, c1, cp, nullptr, 0.0);
        return r;
    }
    detail::check_order(p, 1.0 + 1e-12);
    const double s = support.scale;
    const double c1u = c1 / s, cpu = cp / std::pow(s, p);
    require_unit_moments(c1u, cpu, p);
    SolveReport r = cornilly_unit(g, p, c1u, cpu, options.tol);
    if (cpu >= 1.0 / p) {
        r.flags |= flag_cp_outside_reference_range;
        r.warnings.push_back("cp >= 1/p on the unit scale");
    }
    r.cdf = r.cdf.with_support(support);
    finish_report(r, g, p, c1, cp, nullptr, 0.0);
    return r;
}

namespace {

// Outer search on lambda shared by the two bounded ball-plus-moment problems.
SolveReport solve_with_ball(const EmpiricalCdf& Fhat, const Distortion& g, double p, double eps, double c1,
                            std::optional<double> cp, const SolverOptions& options) {
    const double s = Fhat.support().scale;
    const EmpiricalCdf unit = Fhat.to_unit();
    const double e = eps / s;
    const double c1u = c1 / s;
    std::optional<double> cpu;
    if (cp) cpu = *cp / std::pow(s, p);
    require_unit_moments(c1u, cpu, p);

    // Stage 1: moment constraints alone.
    SolveReport stage1;
    Multipliers start;
    if (cpu) {
        stage1 = cornilly_unit(g, p, c1u, *cpu, options.tol);
        start = {stage1.multipliers.eta1, stage1.multipliers.etap};
    } else {
        // Two-point law on {0,1}: constant stationarity level g'(c1).
        start = {-g.derivative(c1u), 0.0};
        stage1.cdf = PiecewiseCdf({CdfPiece::flat(0.0, 1.0, 1.0 - c1u)}, std::nullopt);
        stage1.multipliers.eta1 = start.eta1;
    }
    double w1 = wasserstein_to_empirical(stage1.cdf, unit, p);
    if (w1 <= e) {
        SolveReport r = stage1;
        r.cdf = r.cdf.with_support(Fhat.support());
        if (cpu && *cpu >= 1.0 / p) r.flags |= flag_cp_outside_reference_range;
        finish_report(r, g, p, c1, cp, &Fhat, eps);
        return r;
    }
    if (cpu && boundary_moment_law(c1u, *cpu, p)) {
        throw InfeasibleError("ball and moment set do not intersect");
    }

    // Stage 2: lambda > 0 with the budget equation active.
    SolveReport r;
    Family family(unit.samples(), g, p, options.tol.quadrature);
    InnerSolver inner{family, c1u, cpu, options.tol.newton, r.iterations, r.flags};
    double tail = 0.0;
    for (double x : unit.samples()) tail += std::pow(1.0 - x, p);
    tail /= static_cast<double>(unit.size());
    const double kappa = (std::pow(e, p) - tail) / p;

    std::map<double, Multipliers> cache;  // warm starts keyed by log(lambda)
    auto warm = [&](double t) {
        if (cache.empty()) return start;
        auto it = cache.lower_bound(t);
        if (it == cache.end()) return std::prev(it)->second;
        if (it == cache.begin()) return it->second;
        auto prev = std::prev(it);
        return (t - prev->first < it->first - t) ? prev->second : it->second;
    };
    auto residual = [&](double t) {
        double lambda = std::exp(t);
        Multipliers m = inner.solve(lambda, warm(t));
        cache[t] = m;
        return family.evaluate(lambda, m).lhs - kappa;
    };

    // Continuation sweep upward in lambda; inner solutions depend on lambda
    // only, so each step warm-starts from the previous one.
    const double step = std::log(10.0) / 2.0;
    double t_prev = std::log(kLambdaLo);
    double f_prev = residual(t_prev);
    double t_root = t_prev;
    if (f_prev > 0.0) {
        bool bracketed = false;
        for (double t = t_prev + step; t <= std::log(kLambdaHi) + 1e-9; t += step) {
            double f = residual(t);
            ++r.iterations.outer;
            if (f <= 0.0) {
                t_root = roots::solve_bracketed(residual, {t_prev, t, f_prev, f}, options.tol.root, 0.0,
                                                &r.iterations.outer);
                bracketed = true;
                break;
            }
            t_prev = t;
            f_prev = f;
        }
        if (!bracketed) {
            throw InfeasibleError("empty feasible set: the budget stays violated at lambda = 1e8");
        }
    }
    double lambda = std::exp(t_root);
    Multipliers m = inner.solve(lambda, warm(t_root));
    bool rectified = false;
    auto bands = family.bands(lambda, m, &rectified);
    if (rectified) r.flags |= flag_rectified;
    r.cdf = assemble_bands(bands, g, SupportMode::unit()).with_support(Fhat.support());
    r.multipliers = {lambda, m.eta1, m.etap, true};
    r.flags |= flag_binding;
    if (cpu && *cpu >= 1.0 / p) r.flags |= flag_cp_outside_reference_range;
    r.iterations.evaluations = family.evaluations;
    finish_report(r, g, p, c1, cp, &Fhat, eps);
    return r;
}

}  // namespace

SolveReport solve_problem_b(const EmpiricalCdf& Fhat, const Distortion& g, double p, double eps, double c1,
                            double cp, const SolverOptions& options) {
    detail::check_order(p, 2.0);
    detail::check_radius(eps);
    detail::check_distortion(g, options);
    if (!g.is_strict()) throw InvalidArgument("moment-constrained problems need a strictly concave distortion");
    if (!Fhat.support().bounded()) {
        if (p != 2.0) throw InvalidArgument("unbounded moment problem is only solved for p = 2");
        return solve_corollary_p2(Fhat, g, eps, c1, cp, options);
    }
    if (std::isinf(eps)) return solve_cornilly(g, p, c1, cp, Fhat.support(), options);
    return solve_with_ball(Fhat, g, p, eps, c1, cp, options);
}

SolveReport solve_mean_only(const EmpiricalCdf& Fhat, const Distortion& g, double p, double eps, double c1,
                            const SolverOptions& options) {
    detail::check_order(p, 1.0);
    detail::check_radius(eps);
    detail::check_distortion(g, options);
    if (!Fhat.support().bounded()) throw InvalidArgument("mean-only problem needs a bounded support");
    if (!g.is_strict()) {
        // Linear distortion: the value is the mean itself on every feasible law.
        const double s = Fhat.support().scale;
        std::vector<double> moved;
        double shift = c1 - Fhat.mean();
        for (double x : Fhat.samples()) moved.push_back(std::min(std::max(x + shift, 0.0), s));
        EmpiricalCdf shifted(moved, Fhat.support());
        SolveReport r;
        r.cdf = shifted.to_piecewise();
        r.flags |= flag_non_strict_distortion;
        finish_report(r, g, p, c1, std::nullopt, &Fhat, eps);
        if (std::abs(*r.residuals.mean) > 1e-9 || r.budget_used > eps) {
            throw InfeasibleError("clipped shift cannot meet the mean inside the ball");
        }
        return r;
    }
    return solve_with_ball(Fhat, g, p, eps, c1, std::nullopt, options);
}

SolveReport solve_corollary_p2(const EmpiricalCdf& Fhat, const Distortion& g, double eps, double c1, double c2,
                               const SolverOptions& options) {
    detail::check_radius(eps);
    detail::check_distortion(g, options);
    if (!g.is_strict()) throw InvalidArgument("moment-constrained problems need a strictly concave distortion");
    double var = c2 - c1 * c1;
    if (!(var > 0.0)) throw InfeasibleError("second moment must exceed the squared mean");
    if (!std::isfinite(g.derivative_square_integral())) {
        throw UnboundedError("integral of g'(u)^2 diverges: the worst case is +infinity");
    }
    CorollaryFamily fam(Fhat.samples(), g, c1, std::sqrt(var));
    SolveReport r;
    double lambda = 0.0;
    double w0 = std::sqrt(std::max(fam.w2_squared(0.0), 0.0));
    if (w0 > eps) {
        auto f = [&](double l) { return std::sqrt(std::max(fam.w2_squared(l), 0.0)) - eps; };
        double hi = 1.0, f_hi = f(hi);
        while (f_hi > 0.0 && hi < 1e12) {
            hi *= 4.0;
            f_hi = f(hi);
        }
        if (f_hi > 0.0) throw InfeasibleError("empty feasible set: ball and moment set do not intersect");
        lambda = roots::solve_bracketed(f, {0.0, hi, w0 - eps, f_hi}, 0.0, options.tol.root, &r.iterations.outer);
        r.flags |= flag_binding;
    }
    r.cdf = fam.cdf(lambda, &r.multipliers);
    r.multipliers.wasserstein_binding = lambda > 0.0;
    finish_report(r, g, 2.0, c1, c2, &Fhat, eps);
    return r;
}

}  // namespace wdrm
