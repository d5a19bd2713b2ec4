#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wdrm/distortion.hpp"

namespace wdrm {

// Where candidate distributions live. Scaled supports are handled by mapping
// to [0,1]: every unit-scale quantity x becomes scale*x on the way out.
struct SupportMode {
    enum class Kind { unit_interval, scaled, unbounded };

    Kind kind = Kind::unit_interval;
    double scale = 1.0;

    static SupportMode unit() { return {}; }
    static SupportMode scaled(double bound);
    static SupportMode unbounded() { return {Kind::unbounded, 1.0}; }
    // "unit", "scaled:<B>" or "unbounded"
    static SupportMode parse(std::string_view text);

    bool bounded() const { return kind != Kind::unbounded; }
    double upper() const;
    std::string to_string() const;
};

class PiecewiseCdf;

// Sorted samples with equal weights 1/N.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> samples, SupportMode support = SupportMode::unit());

    std::size_t size() const { return x_.size(); }
    const std::vector<double>& samples() const { return x_; }
    SupportMode support() const { return support_; }

    double operator()(double x) const;
    double quantile(double u) const;
    double mean() const;
    double raw_moment(double k) const;
    double variance() const;

    // Samples divided by the support scale, with unit support.
    EmpiricalCdf to_unit() const;
    PiecewiseCdf to_piecewise() const;

private:
    std::vector<double> x_;
    SupportMode support_;
};

// |t|^{p-1} sign(t). For p = 1 this is the right-continuous sign (sign(0) = 1).
double signed_power(double t, double p);

// y(x) = -eta1 - etap*s(x) + lambda*s(x - anchor) with s the signed power of
// order p-1. Every stationarity condition in the solvers has this shape.
struct StationarityCurve {
    double order = 2.0;
    double anchor = 0.0;
    double lambda = 0.0;
    double eta1 = 0.0;
    double etap = 0.0;

    double operator()(double x) const;
    double derivative(double x) const;
    // Antiderivative, valid for order > 1.
    double primitive(double x) const;
    bool is_constant() const;
    // Smallest x in [lo, hi] with y(x) >= target, assuming y nondecreasing there.
    double solve(double target, double lo, double hi) const;
};

struct CdfPiece {
    enum class Kind { flat, linear, analytic };

    Kind kind = Kind::flat;
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.0;  // flat
    double f_lo = 0.0;   // linear: F goes from f_lo at lo to f_hi at hi-
    double f_hi = 0.0;
    StationarityCurve curve{};  // analytic: F = clamp(1 - (g')^{-1}(curve(x)), q_lo, q_hi)
    double q_lo = 0.0;
    double q_hi = 1.0;

    static CdfPiece flat(double lo, double hi, double level);
    static CdfPiece linear(double lo, double hi, double f_lo, double f_hi);
    static CdfPiece analytic(double lo, double hi, const StationarityCurve& curve, double q_lo, double q_hi);
};

// Right-continuous CDF built from contiguous pieces on [lo, hi). F = 0 below the
// first piece and F = 1 from the end of the last one; any gap left below 1 at
// the end is a terminal atom. Pieces are stored in unit coordinates.
class PiecewiseCdf {
public:
    struct Atom {
        double x;
        double mass;
    };

    // One stretch of the quantile function: either an atom (Q constant) or the
    // inverse of a single non-flat piece.
    struct QuantileSegment {
        double u_lo;
        double u_hi;
        int piece;  // -1 for an atom
        double x;   // atom location (unit coordinates)
    };

    PiecewiseCdf() = default;
    PiecewiseCdf(std::vector<CdfPiece> pieces, std::optional<Distortion> g, SupportMode support = SupportMode::unit());

    static PiecewiseCdf point_mass(double x, SupportMode support = SupportMode::unit());

    double operator()(double x) const;
    double left_limit(double x) const;
    // Left-continuous inverse inf{x : F(x) >= u}.
    double quantile(double u) const;

    const std::vector<CdfPiece>& pieces() const { return pieces_; }
    const std::vector<QuantileSegment>& quantile_segments() const { return segments_; }
    SupportMode support() const { return support_; }
    double scale() const { return support_.kind == SupportMode::Kind::scaled ? support_.scale : 1.0; }
    double lower() const;
    double upper() const;
    std::vector<Atom> atoms(double min_mass = 1e-13) const;
    // Piece boundaries in outer coordinates.
    std::vector<double> breakpoints() const;

    // Unit-coordinate evaluation helpers used by the integrators.
    double unit_eval(double x) const;
    double unit_left_limit(double x) const;
    double unit_quantile(double u) const;
    double piece_value(const CdfPiece& piece, double x) const;
    double piece_inverse(const CdfPiece& piece, double u) const;
    // Same inverse with 1-u supplied separately, for accuracy next to u = 1.
    double piece_inverse(const CdfPiece& piece, double u, double one_minus_u) const;

    PiecewiseCdf with_support(SupportMode support) const;

private:
    void build_segments();

    std::vector<CdfPiece> pieces_;
    std::optional<Distortion> g_;
    SupportMode support_;
    std::vector<QuantileSegment> segments_;
};

// F^i(x) = clamp(N - N (g')^{-1}(y(x)) - (i-1), 0, 1): the i-th comonotone band
// of a stationarity candidate, with y replaced by a constant level on each
// flat interval (set by monotone rectification).
class ConditionalBandCdf {
public:
    struct Flat {
        double lo;
        double hi;
        double level;
    };

    struct Segment {
        double lo;
        double hi;
        bool flat;
        double level;
    };

    ConditionalBandCdf(std::size_t index, std::size_t count, const StationarityCurve& curve, const Distortion& g,
                       std::vector<Flat> flats = {}, double domain_lo = 0.0, double domain_hi = 1.0);

    std::size_t index() const { return index_; }
    std::size_t count() const { return count_; }
    const StationarityCurve& curve() const { return curve_; }
    const std::vector<Flat>& flats() const { return flats_; }
    const std::vector<Segment>& segments() const { return segments_; }
    double domain_lo() const { return domain_lo_; }
    double domain_hi() const { return domain_hi_; }

    double stationarity(double x) const;
    double operator()(double x) const;
    double value_from_level(double y) const;

    // F^i > 0 exactly on (active_begin, ...) and F^i = 1 from active_end on.
    double active_begin() const { return begin_; }
    double active_end() const { return end_; }
    double lower_threshold() const { return thr_lo_; }
    double upper_threshold() const { return thr_hi_; }

    // Pieces of the assembled F = ((i-1) + F^i)/N on [active_begin, active_end).
    std::vector<CdfPiece> assembled_pieces() const;

private:
    double first_crossing(double threshold, bool strict) const;

    std::size_t index_;
    std::size_t count_;
    StationarityCurve curve_;
    Distortion g_;
    std::vector<Flat> flats_;
    std::vector<Segment> segments_;
    double domain_lo_;
    double domain_hi_;
    double thr_lo_;
    double thr_hi_;
    double begin_;
    double end_;
};

// Averages comonotone bands (ordered by index) into one CDF.
PiecewiseCdf assemble_bands(const std::vector<ConditionalBandCdf>& bands, const Distortion& g, SupportMode support);

enum class DrmRoute { automatic, x_domain, quantile };

// H_g(F) = integral of g(1 - F(x)) over [0, inf) for nonnegative supports,
// equivalently the integral of F^{-1}(u) g'(1-u) over [0,1].
double drm_value(const PiecewiseCdf& F, const Distortion& g, DrmRoute route = DrmRoute::automatic);
double drm_value(const EmpiricalCdf& F, const Distortion& g);

double moment_raw(const PiecewiseCdf& F, double k);
// Same moment from k * integral x^{k-1} (1 - F(x)) dx; nonnegative bounded support only.
double moment_raw_x_domain(const PiecewiseCdf& F, double k);

double wasserstein_to_empirical(const PiecewiseCdf& F, const EmpiricalCdf& Fhat, double p);

// Curve export: header "x,F", 10 significant digits, a uniform grid plus
// explicit rows at breakpoints and both sides of every atom.
std::string format_curve(const PiecewiseCdf& F, std::size_t grid_points = 2000);
void write_curve(const PiecewiseCdf& F, const std::string& path, std::size_t grid_points = 2000);
// Reads a curve back as a piecewise-linear CDF (repeated x values become jumps).
PiecewiseCdf parse_curve(std::istream& in, SupportMode support = SupportMode::unit());
PiecewiseCdf read_curve(const std::string& path, SupportMode support = SupportMode::unit());

std::vector<double> read_samples(const std::string& path);
std::vector<double> parse_samples(std::istream& in);

}  // namespace wdrm
