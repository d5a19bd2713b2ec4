// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wdrm/moment_solver.hpp"
#include "wdrm/oracle.hpp"
#include "wdrm/rng.hpp"
#include "wdrm/wball_solver.hpp"

using namespace wdrm;

namespace {

constexpr std::uint64_t kSeed = 162072707ULL;

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;
std::map<int, std::string> lines;

void verdict(int id, bool pass, const std::string& detail) {
    lines[id] = fmt("criterion %2d: %s  ", id, pass ? "PASS" : "FAIL") + detail;
    failures += pass ? 0 : 1;
}

// Residual bookkeeping shared by every solve in the run.
struct ResidualAudit {
    int binding = 0;
    int moment = 0;
    double worst_budget = 0.0;
    double worst_moment = 0.0;

    void add(const SolveReport& r) {
        if (r.multipliers.wasserstein_binding && r.residuals.budget) {
            ++binding;
            worst_budget = std::max(worst_budget, std::abs(*r.residuals.budget));
        }
        for (const auto& m : {r.residuals.mean, r.residuals.pmoment})
            if (m) {
                ++moment;
                worst_moment = std::max(worst_moment, std::abs(*m));
            }
    }
};

ResidualAudit audit;

const char* kRows[] = {"power:0.1", "power:0.2", "power:0.5", "dual:2", "dual:3", "dual:5"};
const double kEps[] = {0.1, 0.2, 0.3, 0.4, 0.5};
const double kTable1[18][5] = {
    {.94005, 1, 1, 1, 1},                     {.93156, .95189, .96804, .98122, 1},
    {.93048, .95035, .96645, .97948, .98975}, {.88472, .91998, .94784, .97183, .99335},
    {.87039, .90753, .93787, .96317, .98396}, {.86986, .90502, .93506, .95986, .97980},
    {.73943, .81362, .87511, .93113, .98346}, {.72317, .79459, .85754, .91325, .96133},
    {.72155, .79145, .85275, .90644, .95175}, {.76753, .87433, .93837, .98166, 1},
    {.73364, .82655, .90236, .95718, .98946}, {.73187, .81567, .88914, .94540, .98132},
    {.87248, .95309, .98649, .99752, 1},      {.82372, .90801, .96193, .98911, .99869},
    {.81950, .89327, .94969, .98259, .99645}, {.87248, .95309, .98649, .99752, 1},
    {.82372, .90801, .96193, .98911, .99869}, {.81950, .89327, .94969, .98259, .99645}};

double table1[18][5];

void criteria_1_2() {
    EmpiricalCdf F(uniform_samples(200, 0.0, 1.0, kSeed));
    auto t0 = Clock::now();
    int errors = 0, far = 0;
    std::string cells;
    for (int row = 0; row < 18; ++row) {
        Distortion g = Distortion::parse(kRows[row / 3]);
        int p = row % 3 + 1;
        for (int k = 0; k < 5; ++k) {
            try {
                SolveReport r = solve_problem_a(F, g, p, kEps[k]);
                audit.add(r);
                table1[row][k] = r.value;
            } catch (const std::exception&) {
                ++errors;
                table1[row][k] = std::nan("");
            }
            if (!(std::abs(table1[row][k] - kTable1[row][k]) <= 0.02)) {
                ++far;
                cells += fmt(" %s/p%d/eps%.1f", kRows[row / 3], p, kEps[k]);
            }
        }
    }
    double t = seconds_since(t0);
    verdict(1, errors == 0 && t < 60.0 && far <= 5,
            fmt("90 cells, %d errors, %.1f s, %d outside +-0.02:", errors, t, far) + cells);

    int violations = 0;
    for (int row = 0; row < 18; ++row)
        for (int k = 1; k < 5; ++k) violations += table1[row][k] < table1[row][k - 1];
    for (int block = 0; block < 6; ++block)
        for (int k = 0; k < 5; ++k)
            for (int p = 1; p < 3; ++p) violations += table1[block * 3 + p][k] > table1[block * 3 + p - 1][k];
    verdict(2, violations == 0, fmt("%d monotonicity violations over eps-rows and p-columns", violations));
}

void criterion_3() {
    const std::vector<std::vector<double>> data = {{0.4}, {0.25, 0.75}, {0.2, 0.5, 0.9}};
    const std::pair<double, double> pe[] = {{2.0, 0.1}, {3.0, 0.2}};
    double worst = 0.0, slowest = 0.0;
    int count = 0;
    for (const auto& xs : data)
        for (const char* gs : {"dual:2", "power:0.5"})
            for (auto [p, eps] : pe) {
                EmpiricalCdf F(xs);
                Distortion g = Distortion::parse(gs);
                SolveReport r = solve_problem_a(F, g, p, eps);
                audit.add(r);
                auto t0 = Clock::now();
                OracleResult o = oracle_solve(F, g, p, eps);
                slowest = std::max(slowest, seconds_since(t0));
                worst = std::max(worst, std::abs(oracle_gap(r, o)));
                ++count;
            }
    verdict(3, count == 12 && worst <= 5e-3 && slowest < 30.0,
            fmt("%d instances, max |gap| %.2e, slowest oracle %.2f s", count, worst, slowest));
}

void criterion_4() {
    struct Instance {
        std::vector<double> x;
        const char* g;
        double eps, c1, cp;
    };
    const Instance list[] = {
        {{0.25, 0.75}, "dual:2", 0.15, 0.5, 0.29},     {{0.25, 0.75}, "dual:2", 0.1, 0.5, 0.35},
        {{0.2, 0.5, 0.9}, "dual:2", 0.1, 0.5, 0.3},    {{0.2, 0.5, 0.9}, "dual:2", 0.2, 0.5, 0.4},
        {{0.3, 0.6}, "power:0.5", 0.15, 0.45, 0.25},   {{0.1, 0.4, 0.7}, "dual:3", 0.1, 0.42, 0.22},
        {{0.2, 0.5, 0.9}, "power:0.5", 0.1, 0.55, 0.36}, {{0.2, 0.5, 0.9}, "dual:3", 0.15, 0.55, 0.36}};
    double worst = 0.0;
    int count = 0, binding = 0;
    for (const auto& in : list) {
        EmpiricalCdf F(in.x);
        Distortion g = Distortion::parse(in.g);
        SolveReport r = solve_problem_b(F, g, 2.0, in.eps, in.c1, in.cp);
        audit.add(r);
        binding += r.multipliers.wasserstein_binding;
        OracleResult o = oracle_solve(F, g, 2.0, in.eps, OracleConstraints{in.c1, in.cp});
        worst = std::max(worst, std::abs(oracle_gap(r, o)));
        ++count;
    }
    verdict(4, count == 8 && worst <= 5e-3, fmt("%d instances (%d binding), max |gap| %.2e", count, binding, worst));
}

void criterion_6() {
    Distortion g2 = Distortion::dual_power(2), g3 = Distortion::dual_power(3);
    EmpiricalCdf F({0.15, 0.4, 0.85});
    double a = std::abs(solve_problem_b(F, g3, 2.0, 1e3, 0.5, 0.35).value - solve_cornilly(g3, 2.0, 0.5, 0.35).value);

    EmpiricalCdf line({0.15, 0.4, 0.85}, SupportMode::unbounded());
    double b = std::abs(solve_corollary_p2(line, g2, 1e3, 0.5, 1.0 / 3.0).value - 2.0 / 3.0);

    EmpiricalCdf data(uniform_samples(200, 0.0, 1.0, kSeed), SupportMode::unbounded());
    double c = 0.0;
    for (const Distortion& g : {g2, g3, Distortion::power(0.7)}) {
        double expected = drm_value(data, g) + 0.1 * std::sqrt(g.derivative_square_integral());
        c = std::max(c, std::abs(solve_problem_a(data, g, 2.0, 0.1).value - expected));
    }
    verdict(6, a <= 1e-9 && b <= 1e-8 && c <= 1e-8,
            fmt("(a) |B - moments only| %.1e  (b) |corollary - 2/3| %.1e  (c) |unbounded - closed form| %.1e", a, b, c));
}

void criterion_7() {
    std::vector<double> xs = uniform_samples(200, 0.0, 1.0, kSeed);
    Distortion g = Distortion::dual_power(3);
    SolveReport bounded = solve_problem_b(EmpiricalCdf(xs), g, 2.0, 0.1, 0.5, 0.35);
    audit.add(bounded);
    SolveReport line = solve_corollary_p2(EmpiricalCdf(xs, SupportMode::unbounded()), g, 0.1, 0.5, 0.35);
    SolveReport p1 = solve_problem_a(EmpiricalCdf(xs), g, 1.0, 0.1);
    audit.add(p1);
    bool flagged = p1.has(flag_p1_degenerate);
    bool near = std::abs(bounded.value - 0.53354) <= 0.05;
    verdict(7, near && flagged,
            fmt("moment cell %.5f on [0,1] (%.5f on the real line) vs 0.53354 +- 0.05; p=1 cell %.5f vs 1.65104, "
                "degeneracy flag %s",
                bounded.value, line.value, p1.value, flagged ? "set" : "missing"));
}

void criterion_8() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int bad_nest = 0, bad_sup = 0, solved = 0;
    double worst = -1e9;
    for (int k = 0; k < 20; ++k) {
        int n = 2 + k % 4;
        double p = k % 2 ? 3.0 : 2.0;
        double eps = 0.05 + 0.25 * U(rng);
        std::vector<double> xs(n);
        for (double& x : xs) x = 0.05 + 0.8 * U(rng);
        Distortion g = k % 3 ? Distortion::dual_power(2 + k % 3) : Distortion::power(0.4 + 0.1 * (k % 4));
        // Moments of a law inside the ball: every sample shifted right by eps/2.
        double c1 = 0.0, cp = 0.0;
        for (double x : xs) {
            double y = std::min(1.0, x + 0.5 * eps);
            c1 += y / n;
            cp += std::pow(y, p) / n;
        }
        EmpiricalCdf F(xs);
        SolveReport a = solve_problem_a(F, g, p, eps);
        SolveReport b = solve_problem_b(F, g, p, eps, c1, cp);
        audit.add(a);
        audit.add(b);
        ++solved;
        bad_nest += b.value > a.value + 1e-9;
        bad_sup += a.value > 1.0 + 1e-12;
        worst = std::max(worst, b.value - a.value);
    }
    verdict(8, solved == 20 && bad_nest == 0 && bad_sup == 0,
            fmt("%d instances, %d nesting violations (max B - A %.2e), %d above the support edge", solved, bad_nest,
                worst, bad_sup));
}

// Value of the law with equal-mass atoms q (sorted) under g.
double atom_value(const std::vector<double>& q, const Distortion& g) {
    const double m = static_cast<double>(q.size());
    double v = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) v += q[k] * (g.value(1.0 - k / m) - g.value(1.0 - (k + 1) / m));
    return v;
}

// W_p between equal-mass atom vectors of the same length (both sorted).
double atom_distance(const std::vector<double>& a, const std::vector<double>& b, double p) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::pow(std::abs(a[k] - b[k]), p);
    return std::pow(s / a.size(), 1.0 / p);
}

void criterion_9() {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> Z(0.0, 1.0);
    const int cells = 600;
    double worst = -1e9;
    int checked = 0;
    for (int k = 0; k < 10; ++k) {
        int n = 1 + k % 3;
        double p = 1.0 + k % 3;
        double eps = 0.05 + 0.2 * U(rng);
        std::vector<double> xs(n);
        for (double& x : xs) x = 0.1 + 0.7 * U(rng);
        std::sort(xs.begin(), xs.end());
        Distortion g = k % 2 ? Distortion::dual_power(2.0 + k % 3) : Distortion::power(0.3 + 0.1 * (k % 4));
        EmpiricalCdf F(xs);
        SolveReport report = solve_problem_a(F, g, p, eps);

        // Equal-mass atoms of the sample law and of the reported optimiser.
        std::vector<double> base(cells), optimum(cells);
        for (int j = 0; j < cells; ++j) {
            base[j] = xs[j * n / cells];
            optimum[j] = std::min(1.0, report.cdf.quantile((j + 0.5) / cells));
        }
        for (int trial = 0; trial < 100; ++trial) {
            // Even trials: random moves of the sample law; odd trials: small moves of the optimiser.
            bool near = trial % 2 == 1;
            const std::vector<double>& start = near ? optimum : base;
            double drift = near ? 0.0 : U(rng), spread = near ? 0.02 * U(rng) : 0.5;
            std::vector<double> dir(cells);
            for (int j = 0; j < cells; ++j) dir[j] = drift + spread * Z(rng);
            auto moved = [&](double s) {
                std::vector<double> q(cells);
                for (int j = 0; j < cells; ++j) q[j] = std::clamp(start[j] + s * dir[j], 0.0, 1.0);
                std::sort(q.begin(), q.end());
                return q;
            };
            std::vector<double> q;
            if (near) {
                // Pull back towards the sample law until the ball constraint holds.
                q = moved(1.0);
                double d = atom_distance(q, base, p);
                if (d > eps) {
                    double t = eps / d;
                    for (int j = 0; j < cells; ++j) q[j] = base[j] + t * (q[j] - base[j]);
                }
            } else {
                // Largest step along dir that stays inside the ball.
                double lo = 0.0, hi = 4.0;
                if (atom_distance(moved(hi), base, p) <= eps) lo = hi;
                for (int it = 0; it < 60 && lo < hi; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (atom_distance(moved(mid), base, p) <= eps ? lo : hi) = mid;
                }
                q = moved(lo);
            }
            if (atom_distance(q, base, p) > eps * (1.0 + 1e-12)) continue;
            worst = std::max(worst, atom_value(q, g) - report.value);
            ++checked;
        }
    }
    verdict(9, checked == 1000 && worst <= 1e-6,
            fmt("%d feasible perturbations over 10 instances, max excess over optimum %.2e", checked, worst));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

void criterion_10() {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "wdrm_acceptance";
    fs::create_directories(dir / "run0");
    fs::create_directories(dir / "run1");
    std::string cli = WDRM_CLI_PATH;
    std::string samples = (dir / "samples.txt").string();
    auto sh = [](const std::string& cmd) { return std::system((cmd + " 2>/dev/null").c_str()); };
    int status = sh(cli + " gen --n 200 --seed 42 --out " + samples);
    // Identical command lines, run from two directories.
    for (const char* run : {"run0", "run1"}) {
        std::string cd = "cd " + (dir / run).string() + " && ";
        status |= sh(cd + cli + " solve-a --samples " + samples +
                     " --g dual:3 --p 2 --eps 0.1 --out a.json --curve a.csv");
        status |= sh(cd + cli + " solve-b --samples " + samples +
                     " --g dual:2 --p 2 --eps 0.1 --c1 0.5 --cp 0.33 --out b.json --curve b.csv");
        status |= sh(cd + cli + " table 3 --seed 42 --out t3.csv > t3.txt");
    }
    bool same = status == 0;
    for (const char* file : {"a.json", "a.csv", "b.json", "b.csv", "t3.csv", "t3.txt"}) {
        std::string x = slurp(dir / "run0" / file), y = slurp(dir / "run1" / file);
        same &= !x.empty() && x == y;
    }
    verdict(10, same, fmt("two CLI runs (solve-a, solve-b, table 3): reports, curves and tables %s, exit status %d",
                          same ? "byte-identical" : "differ", status));
}

}  // namespace

int main() {
    auto guard = [](int id, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            verdict(id, false, std::string("exception: ") + e.what());
        }
    };
    guard(1, criteria_1_2);
    guard(3, criterion_3);
    guard(4, criterion_4);
    guard(6, criterion_6);
    guard(7, criterion_7);
    guard(8, criterion_8);
    guard(9, criterion_9);
    guard(10, criterion_10);
    verdict(5, audit.worst_budget <= 1e-6 && audit.worst_moment <= 1e-6,
            fmt("%d binding solves, max |W_p - eps| %.2e; %d moment residuals, max %.2e", audit.binding,
                audit.worst_budget, audit.moment, audit.worst_moment));
    for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
