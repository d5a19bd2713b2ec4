#include "wdrm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "wdrm/error.hpp"
#include "wdrm/roots.hpp"

namespace wdrm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Inverse of the signed power: v = |t|^{p-1} sign(t)  =>  t = |v|^{1/(p-1)} sign(v).
double signed_root(double v, double p) {
    if (p == 2.0) return v;
    return std::copysign(std::pow(std::abs(v), 1.0 / (p - 1.0)), v);
}

}  // namespace

// ---------------------------------------------------------------- SupportMode

SupportMode SupportMode::scaled(double bound) {
    if (!(bound > 0.0) || !std::isfinite(bound)) throw InvalidArgument("scaled support needs a finite bound > 0");
    return {Kind::scaled, bound};
}

SupportMode SupportMode::parse(std::string_view text) {
    if (text == "unit") return unit();
    if (text == "unbounded") return unbounded();
    if (text.substr(0, 7) == "scaled:") {
        std::string rest(text.substr(7));
        char* end = nullptr;
        double b = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str() || *end != '\0') throw InvalidArgument("bad scaled support '" + std::string(text) + "'");
        return scaled(b);
    }
    throw InvalidArgument("unknown support '" + std::string(text) + "'");
}

double SupportMode::upper() const {
    switch (kind) {
    case Kind::unit_interval: return 1.0;
    case Kind::scaled: return scale;
    case Kind::unbounded: return kInf;
    }
    return kInf;
}

std::string SupportMode::to_string() const {
    switch (kind) {
    case Kind::unit_interval: return "unit";
    case Kind::scaled: {
        std::ostringstream out;
        out.precision(17);
        out << "scaled:" << scale;
        return out.str();
    }
    case Kind::unbounded: return "unbounded";
    }
    return "unit";
}

// ---------------------------------------------------------------- EmpiricalCdf

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples, SupportMode support)
    : x_(std::move(samples)), support_(support) {
    if (x_.empty()) throw InvalidArgument("empirical distribution needs at least one sample");
    for (double v : x_) {
        if (!std::isfinite(v)) throw InvalidArgument("samples must be finite");
        if (support_.bounded() && (v < 0.0 || v > support_.upper())) {
            std::ostringstream msg;
            msg << "sample " << v << " outside support " << support_.to_string();
            throw InvalidArgument(msg.str());
        }
    }
    std::sort(x_.begin(), x_.end());
}

double EmpiricalCdf::operator()(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return static_cast<double>(it - x_.begin()) / static_cast<double>(x_.size());
}

double EmpiricalCdf::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level outside [0,1]");
    double n = static_cast<double>(x_.size());
    auto k = static_cast<std::size_t>(std::ceil(u * n - 1e-12));
    if (k == 0) k = 1;
    if (k > x_.size()) k = x_.size();
    return x_[k - 1];
}

double EmpiricalCdf::mean() const { return std::accumulate(x_.begin(), x_.end(), 0.0) / static_cast<double>(x_.size()); }

double EmpiricalCdf::raw_moment(double k) const {
    double s = 0.0;
    for (double v : x_) s += std::pow(v, k);
    return s / static_cast<double>(x_.size());
}

double EmpiricalCdf::variance() const {
    double m = mean();
    double s = 0.0;
    for (double v : x_) s += (v - m) * (v - m);
    return s / static_cast<double>(x_.size());
}

EmpiricalCdf EmpiricalCdf::to_unit() const {
    if (support_.kind != SupportMode::Kind::scaled) return EmpiricalCdf(x_, support_);
    std::vector<double> y(x_);
    for (double& v : y) v = std::min(1.0, v / support_.scale);
    return EmpiricalCdf(std::move(y), SupportMode::unit());
}

PiecewiseCdf EmpiricalCdf::to_piecewise() const {
    double s = support_.kind == SupportMode::Kind::scaled ? support_.scale : 1.0;
    std::vector<CdfPiece> pieces;
    double n = static_cast<double>(x_.size());
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
        if (x_[k + 1] > x_[k]) pieces.push_back(CdfPiece::flat(x_[k] / s, x_[k + 1] / s, static_cast<double>(k + 1) / n));
    }
    if (pieces.empty()) pieces.push_back(CdfPiece::flat(x_.back() / s, x_.back() / s, 0.0));
    return PiecewiseCdf(std::move(pieces), std::nullopt, support_);
}

// ---------------------------------------------------------------- curves

double signed_power(double t, double p) {
    if (p == 1.0) return t >= 0.0 ? 1.0 : -1.0;
    if (p == 2.0) return t;
    return std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

double StationarityCurve::operator()(double x) const {
    double y = -eta1;
    if (etap != 0.0) y -= etap * signed_power(x, order);
    if (lambda != 0.0) y += lambda * signed_power(x - anchor, order);
    return y;
}

double StationarityCurve::derivative(double x) const {
    if (order == 1.0) return 0.0;
    if (order == 2.0) return lambda - etap;
    double d = 0.0;
    if (etap != 0.0) d -= etap * std::pow(std::abs(x), order - 2.0);
    if (lambda != 0.0) d += lambda * std::pow(std::abs(x - anchor), order - 2.0);
    return (order - 1.0) * d;
}

double StationarityCurve::primitive(double x) const {
    double v = -eta1 * x;
    if (etap != 0.0) v -= etap * std::pow(std::abs(x), order) / order;
    if (lambda != 0.0) v += lambda * std::pow(std::abs(x - anchor), order) / order;
    return v;
}

bool StationarityCurve::is_constant() const { return lambda == 0.0 && etap == 0.0; }

double StationarityCurve::solve(double target, double lo, double hi) const {
    const StationarityCurve& y = *this;
    if (std::isfinite(lo) && y(lo) >= target) return lo;
    if (std::isfinite(hi) && y(hi) < target) return hi;
    auto clip = [&](double x) { return std::min(std::max(x, lo), hi); };
    if (order > 1.0) {
        if (order == 2.0 && lambda - etap > 0.0) return clip((target + eta1 + lambda * anchor) / (lambda - etap));
        if (etap == 0.0 && lambda > 0.0) return clip(anchor + signed_root((target + eta1) / lambda, order));
        if (lambda == 0.0 && etap < 0.0) return clip(signed_root(-(target + eta1) / etap, order));
    }
    // General case: a finite bracket, then safeguarded Newton (bisection for steps).
    if (!std::isfinite(lo)) {
        double w = 1.0;
        lo = (std::isfinite(hi) ? hi : 0.0) - w;
        while (y(lo) >= target && w < 1e300) { w *= 2.0; lo -= w; }
    }
    if (!std::isfinite(hi)) {
        double w = 1.0;
        hi = lo + w;
        while (y(hi) < target && w < 1e300) { w *= 2.0; hi += w; }
    }
    if (order == 1.0) {
        for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
            double m = 0.5 * (lo + hi);
            if (m <= lo || m >= hi) break;
            if (y(m) >= target) hi = m; else lo = m;
        }
        return hi;
    }
    return roots::newton_bracketed(y, [this](double x) { return derivative(x); }, target, lo, hi);
}

// ---------------------------------------------------------------- pieces

CdfPiece CdfPiece::flat(double lo, double hi, double level) {
    CdfPiece p;
    p.kind = Kind::flat;
    p.lo = lo;
    p.hi = hi;
    p.level = level;
    return p;
}

CdfPiece CdfPiece::linear(double lo, double hi, double f_lo, double f_hi) {
    CdfPiece p;
    p.kind = Kind::linear;
    p.lo = lo;
    p.hi = hi;
    p.f_lo = f_lo;
    p.f_hi = f_hi;
    return p;
}

CdfPiece CdfPiece::analytic(double lo, double hi, const StationarityCurve& curve, double q_lo, double q_hi) {
    CdfPiece p;
    p.kind = Kind::analytic;
    p.lo = lo;
    p.hi = hi;
    p.curve = curve;
    p.q_lo = q_lo;
    p.q_hi = q_hi;
    return p;
}

// ---------------------------------------------------------------- PiecewiseCdf

PiecewiseCdf::PiecewiseCdf(std::vector<CdfPiece> pieces, std::optional<Distortion> g, SupportMode support)
    : pieces_(std::move(pieces)), g_(std::move(g)), support_(support) {
    if (pieces_.empty()) throw InvalidArgument("piecewise CDF needs at least one piece");
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        CdfPiece& p = pieces_[k];
        if (!(p.hi >= p.lo) || std::isnan(p.lo)) throw InvalidArgument("piece with hi < lo");
        if (p.kind == CdfPiece::Kind::analytic && !g_) throw InvalidArgument("analytic piece needs a distortion");
        if (k > 0) {
            double prev = pieces_[k - 1].hi;
            if (std::abs(p.lo - prev) > 1e-9 * (1.0 + std::abs(prev))) throw InvalidArgument("pieces are not contiguous");
            p.lo = prev;
            if (p.hi < p.lo) p.hi = p.lo;
        }
    }
    build_segments();
}

PiecewiseCdf PiecewiseCdf::point_mass(double x, SupportMode support) {
    double s = support.kind == SupportMode::Kind::scaled ? support.scale : 1.0;
    return PiecewiseCdf({CdfPiece::flat(x / s, x / s, 0.0)}, std::nullopt, support);
}

PiecewiseCdf PiecewiseCdf::with_support(SupportMode support) const {
    PiecewiseCdf out = *this;
    out.support_ = support;
    return out;
}

double PiecewiseCdf::piece_value(const CdfPiece& p, double x) const {
    switch (p.kind) {
    case CdfPiece::Kind::flat: return p.level;
    case CdfPiece::Kind::linear: {
        if (!(p.hi > p.lo)) return p.f_hi;
        double t = (x - p.lo) / (p.hi - p.lo);
        return clamp01(p.f_lo + (p.f_hi - p.f_lo) * std::min(std::max(t, 0.0), 1.0));
    }
    case CdfPiece::Kind::analytic: {
        double v = 1.0 - g_->derivative_inverse(p.curve(x));
        return std::min(std::max(v, p.q_lo), p.q_hi);
    }
    }
    return 0.0;
}

double PiecewiseCdf::piece_inverse(const CdfPiece& p, double u) const { return piece_inverse(p, u, 1.0 - u); }

double PiecewiseCdf::piece_inverse(const CdfPiece& p, double u, double one_minus_u) const {
    switch (p.kind) {
    case CdfPiece::Kind::flat: return p.lo;
    case CdfPiece::Kind::linear: {
        if (!(p.f_hi > p.f_lo)) return p.lo;
        double t = (u - p.f_lo) / (p.f_hi - p.f_lo);
        return p.lo + std::min(std::max(t, 0.0), 1.0) * (p.hi - p.lo);
    }
    case CdfPiece::Kind::analytic: {
        double target = g_->derivative(clamp01(one_minus_u));
        if (target == kInf) return p.hi;
        return p.curve.solve(target, p.lo, p.hi);
    }
    }
    return p.lo;
}

void PiecewiseCdf::build_segments() {
    segments_.clear();
    double prev = 0.0;
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        const CdfPiece& p = pieces_[k];
        if (!(p.hi > p.lo)) continue;
        double f_lo = piece_value(p, p.lo);
        if (f_lo > prev) segments_.push_back({prev, f_lo, -1, p.lo});
        prev = std::max(prev, f_lo);
        double f_hi = std::isfinite(p.hi) ? piece_value(p, p.hi)
                                          : (p.kind == CdfPiece::Kind::analytic ? p.q_hi : piece_value(p, p.lo));
        if (p.kind != CdfPiece::Kind::flat && f_hi > prev) segments_.push_back({prev, f_hi, static_cast<int>(k), 0.0});
        prev = std::max(prev, f_hi);
    }
    double edge = pieces_.back().hi;
    if (prev < 1.0) {
        if (std::isfinite(edge)) {
            segments_.push_back({prev, 1.0, -1, edge});
        } else if (!segments_.empty()) {
            segments_.back().u_hi = 1.0;
        }
    }
    if (!segments_.empty()) segments_.back().u_hi = 1.0;
}

double PiecewiseCdf::unit_eval(double x) const {
    if (x < pieces_.front().lo) return 0.0;
    if (x >= pieces_.back().hi) return 1.0;
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](double v, const CdfPiece& p) { return v < p.lo; });
    return piece_value(*(it - 1), x);
}

double PiecewiseCdf::unit_left_limit(double x) const {
    if (x <= pieces_.front().lo) return 0.0;
    if (x > pieces_.back().hi) return 1.0;
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), x,
                               [](const CdfPiece& p, double v) { return p.lo < v; });
    const CdfPiece& p = *(it - 1);
    return piece_value(p, std::min(x, p.hi));
}

double PiecewiseCdf::unit_quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level outside [0,1]");
    if (u == 0.0 || segments_.empty()) return segments_.empty() ? pieces_.back().hi : pieces_.front().lo;
    auto it = std::lower_bound(segments_.begin(), segments_.end(), u,
                               [](const QuantileSegment& s, double v) { return s.u_hi < v; });
    if (it == segments_.end()) --it;
    if (it->piece < 0) return it->x;
    return piece_inverse(pieces_[static_cast<std::size_t>(it->piece)], u);
}

double PiecewiseCdf::operator()(double x) const { return unit_eval(x / scale()); }

double PiecewiseCdf::left_limit(double x) const { return unit_left_limit(x / scale()); }

double PiecewiseCdf::quantile(double u) const { return scale() * unit_quantile(u); }

double PiecewiseCdf::lower() const { return scale() * unit_quantile(0.0); }

double PiecewiseCdf::upper() const { return scale() * pieces_.back().hi; }

std::vector<PiecewiseCdf::Atom> PiecewiseCdf::atoms(double min_mass) const {
    std::vector<Atom> out;
    for (const auto& s : segments_) {
        if (s.piece < 0 && s.u_hi - s.u_lo >= min_mass) out.push_back({scale() * s.x, s.u_hi - s.u_lo});
    }
    return out;
}

std::vector<double> PiecewiseCdf::breakpoints() const {
    std::vector<double> out;
    for (const auto& p : pieces_) {
        if (std::isfinite(p.lo)) out.push_back(scale() * p.lo);
        if (std::isfinite(p.hi)) out.push_back(scale() * p.hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------- bands

ConditionalBandCdf::ConditionalBandCdf(std::size_t index, std::size_t count, const StationarityCurve& curve,
                                       const Distortion& g, std::vector<Flat> flats, double domain_lo,
                                       double domain_hi)
    : index_(index), count_(count), curve_(curve), g_(g), flats_(std::move(flats)), domain_lo_(domain_lo),
      domain_hi_(domain_hi) {
    if (index_ < 1 || index_ > count_) throw InvalidArgument("band index out of range");
    double n = static_cast<double>(count_);
    thr_lo_ = g_.derivative(static_cast<double>(count_ - index_ + 1) / n);
    thr_hi_ = g_.derivative(static_cast<double>(count_ - index_) / n);

    std::sort(flats_.begin(), flats_.end(), [](const Flat& a, const Flat& b) { return a.lo < b.lo; });
    double cursor = domain_lo_;
    for (const Flat& f : flats_) {
        double lo = std::max(f.lo, cursor);
        double hi = std::min(f.hi, domain_hi_);
        if (!(hi > lo)) continue;
        if (lo > cursor) segments_.push_back({cursor, lo, false, 0.0});
        segments_.push_back({lo, hi, true, f.level});
        cursor = hi;
    }
    if (domain_hi_ > cursor) segments_.push_back({cursor, domain_hi_, false, 0.0});

    begin_ = first_crossing(thr_lo_, true);
    end_ = first_crossing(thr_hi_, false);
    if (end_ < begin_) end_ = begin_;
}

double ConditionalBandCdf::first_crossing(double threshold, bool strict) const {
    if (threshold == kInf) return domain_hi_;
    auto above = [&](double y) { return strict ? y > threshold : y >= threshold; };
    for (const Segment& s : segments_) {
        if (s.flat) {
            if (above(s.level)) return s.lo;
            continue;
        }
        double y_lo = std::isfinite(s.lo) ? curve_(s.lo) : -kInf;
        if (curve_.is_constant()) y_lo = curve_(0.0);
        if (above(y_lo)) return s.lo;
        if (curve_.is_constant()) continue;
        double y_hi = std::isfinite(s.hi) ? curve_(s.hi) : kInf;
        if (y_hi > threshold || (!strict && y_hi >= threshold)) {
            return curve_.solve(threshold, s.lo, s.hi);
        }
    }
    return domain_hi_;
}

double ConditionalBandCdf::stationarity(double x) const {
    for (const Flat& f : flats_) {
        if (x >= f.lo && x < f.hi) return f.level;
    }
    return curve_(x);
}

double ConditionalBandCdf::value_from_level(double y) const {
    double n = static_cast<double>(count_);
    return clamp01(n - n * g_.derivative_inverse(y) - static_cast<double>(index_ - 1));
}

double ConditionalBandCdf::operator()(double x) const {
    if (x < begin_) return 0.0;
    if (x >= end_) return 1.0;
    return value_from_level(stationarity(x));
}

std::vector<CdfPiece> ConditionalBandCdf::assembled_pieces() const {
    std::vector<CdfPiece> out;
    double n = static_cast<double>(count_);
    double base = static_cast<double>(index_ - 1);
    auto emit_flat = [&](double a, double b, double y) {
        out.push_back(CdfPiece::flat(a, b, (base + value_from_level(y)) / n));
    };
    for (const Segment& s : segments_) {
        double a = std::max(s.lo, begin_);
        double b = std::min(s.hi, end_);
        if (!(b > a)) continue;
        if (s.flat) {
            emit_flat(a, b, s.level);
        } else if (curve_.is_constant()) {
            emit_flat(a, b, curve_(0.0));
        } else if (curve_.order == 1.0) {
            // Step curve: constant between its jump points.
            std::vector<double> cuts{a};
            for (double c : {0.0, curve_.anchor}) {
                if (c > a && c < b) cuts.push_back(c);
            }
            std::sort(cuts.begin(), cuts.end());
            cuts.push_back(b);
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                emit_flat(cuts[k], cuts[k + 1], curve_(cuts[k]));
            }
        } else {
            out.push_back(CdfPiece::analytic(a, b, curve_, base / n, (base + 1.0) / n));
        }
    }
    return out;
}

PiecewiseCdf assemble_bands(const std::vector<ConditionalBandCdf>& bands, const Distortion& g, SupportMode support) {
    if (bands.empty()) throw InvalidArgument("assemble_bands: no bands");
    const double n = static_cast<double>(bands.size());
    const double d_lo = bands.front().domain_lo();
    std::vector<CdfPiece> pieces;
    double cursor = std::isfinite(d_lo) ? d_lo : bands.front().active_begin();
    if (!std::isfinite(cursor)) throw InvalidArgument("assemble_bands: unbounded first band");
    for (std::size_t k = 0; k < bands.size(); ++k) {
        const auto& band = bands[k];
        if (band.index() != k + 1) throw InvalidArgument("assemble_bands: bands out of order");
        double b = band.active_begin();
        if (b < cursor) {
            if (cursor - b > 1e-7 * (1.0 + std::abs(cursor))) {
                throw Error(ErrorCode::internal, "assemble_bands: bands are not comonotone");
            }
            b = cursor;
        }
        if (b > cursor) pieces.push_back(CdfPiece::flat(cursor, b, static_cast<double>(k) / n));
        for (CdfPiece& p : band.assembled_pieces()) {
            p.lo = std::max(p.lo, b);
            if (p.hi > p.lo) pieces.push_back(p);
        }
        cursor = std::max(b, band.active_end());
    }
    // Nothing after the last band: F = 1 from there on, and whatever mass is
    // still missing sits at the right edge.
    if (pieces.empty()) pieces.push_back(CdfPiece::flat(cursor, cursor, 0.0));
    return PiecewiseCdf(std::move(pieces), g, support);
}

}  // namespace wdrm
