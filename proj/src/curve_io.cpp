#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "wdrm/distributions.hpp"
#include "wdrm/error.hpp"

namespace wdrm {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, std::size_t line) {
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
        throw InvalidArgument("line " + std::to_string(line) + ": cannot parse '" + text + "'");
    }
    return v;
}

std::string fmt10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
    return buf;
}

}  // namespace

std::string format_curve(const PiecewiseCdf& F, std::size_t grid_points) {
    if (grid_points < 2) grid_points = 2;
    double lo = F.lower();
    double hi = F.upper();
    if (F.support().bounded()) {
        lo = std::min(0.0, lo);
        hi = F.support().upper();
    } else if (!std::isfinite(hi)) {
        hi = F.quantile(1.0 - 1e-6);
    }
    struct Row {
        double x;
        int order;  // 0 = left limit, 1 = value
        double f;
    };
    std::vector<Row> rows;
    for (std::size_t k = 0; k < grid_points; ++k) {
        double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_points - 1);
        rows.push_back({x, 1, F(x)});
    }
    std::vector<double> marks = F.breakpoints();
    for (const auto& a : F.atoms()) marks.push_back(a.x);
    for (double x : marks) {
        if (!std::isfinite(x)) continue;
        double left = F.left_limit(x);
        double value = F(x);
        if (value > left) rows.push_back({x, 0, left});
        rows.push_back({x, 1, value});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.order < b.order;
    });
    std::ostringstream out;
    out << "x,F\n";
    std::string last;
    for (const Row& r : rows) {
        std::string line = fmt10(r.x) + "," + fmt10(r.f);
        if (line == last) continue;
        out << line << "\n";
        last = line;
    }
    return out.str();
}

void write_curve(const PiecewiseCdf& F, const std::string& path, std::size_t grid_points) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << format_curve(F, grid_points);
    if (!out) throw IoError("failed writing '" + path + "'");
}

PiecewiseCdf parse_curve(std::istream& in, SupportMode support) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::pair<double, double>> pts;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line == "x,F") continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("line " + std::to_string(lineno) + ": expected 'x,F'");
        double x = parse_double(trim(line.substr(0, comma)), lineno);
        double f = parse_double(trim(line.substr(comma + 1)), lineno);
        if (!pts.empty() && x < pts.back().first) throw InvalidArgument("curve rows must be sorted by x");
        f = std::min(std::max(f, 0.0), 1.0);
        if (!pts.empty()) f = std::max(f, pts.back().second);
        pts.emplace_back(x, f);
    }
    if (pts.empty()) throw InvalidArgument("empty curve");
    double s = support.kind == SupportMode::Kind::scaled ? support.scale : 1.0;
    std::vector<CdfPiece> pieces;
    std::size_t k = 0;
    while (k < pts.size()) {
        // Last row at this x gives the value, first row at the next x the left limit.
        std::size_t j = k;
        while (j + 1 < pts.size() && pts[j + 1].first == pts[k].first) ++j;
        if (j + 1 >= pts.size()) break;
        double x0 = pts[j].first;
        double x1 = pts[j + 1].first;
        pieces.push_back(CdfPiece::linear(x0 / s, x1 / s, pts[j].second, pts[j + 1].second));
        k = j + 1;
    }
    if (pieces.empty()) return PiecewiseCdf::point_mass(pts.back().first, support);
    return PiecewiseCdf(std::move(pieces), std::nullopt, support);
}

PiecewiseCdf read_curve(const std::string& path, SupportMode support) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open curve file '" + path + "'");
    return parse_curve(in, support);
}

std::vector<double> parse_samples(std::istream& in) {
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        out.push_back(parse_double(line, lineno));
    }
    if (out.empty()) throw InvalidArgument("sample file has no values");
    return out;
}

std::vector<double> read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sample file '" + path + "'");
    return parse_samples(in);
}

}  // namespace wdrm
