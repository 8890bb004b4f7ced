// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "nlmc/cli/commands.hpp"
#include "nlmc/dynamics.hpp"
#include "nlmc/experiments.hpp"
#include "nlmc/graphon.hpp"
#include "nlmc/sampling.hpp"

using namespace nlmc;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail, double seconds) {
    fmt::print("{} criterion {}: {} [{:.1f}s]\n", ok ? "PASS" : "FAIL", id, detail, seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Rate vs gamma on the band kernel.
void criterion_1() {
    const Timer timer;
    ExperimentConfig c = ExperimentConfig::desk_scale();
    c.kernel = KernelSpec{};
    c.kernel.kind = "band";
    c.kernel.r = 0.2;
    c.omega = 0.5;
    c.q = 3;
    c.dt = 1e-2;
    c.T = 1.0;
    c.ns = {64, 128};
    c.trials = 30;
    c.gammas = {0.2, 0.5, 0.8};
    const RateReport r = rate_sweep(c);

    bool ok = r.excluded == 0;
    std::string detail;
    double prev = INFINITY;
    for (const RateRow& row : r.rows) {
        if (row.n != c.ns.front()) continue;
        const double theory = (1.0 - row.gamma) / 2.0;
        const bool within = std::abs(row.alpha_gamma - theory) <= 0.15 && row.alpha_gamma <= theory + 0.05;
        ok = ok && within && row.alpha_gamma < prev;
        prev = row.alpha_gamma;
        detail += fmt::format("gamma={} alpha={:.4f} theory={:.4f}; ", row.gamma, row.alpha_gamma, theory);
    }
    report(1, ok, detail + "need |alpha - theory| <= 0.15, alpha <= theory + 0.05, strictly decreasing",
           timer.seconds());
}

// Sampled-vs-averaged gap decay.
void criterion_2() {
    const Timer timer;
    ExperimentConfig c = ExperimentConfig::desk_scale();
    const GapTable t = sampled_vs_averaged(c, 0.5, {64, 128, 256}, 20);
    const bool ok = t.fitted_exponent >= 0.15 && t.fitted_exponent <= 0.35;
    report(2, ok,
           fmt::format("fitted gap exponent {:.4f} (theory {:.4f}), need [0.15, 0.35]", t.fitted_exponent,
                       t.theory_exponent),
           timer.seconds());
}

// Projection rates.
void criterion_3() {
    const Timer timer;
    const std::vector<int> levels{8, 16, 32, 64, 128, 256, 512};
    const auto lin = projection_rate_study({"linear", 0.0}, 2.0, levels);
    const auto ind = projection_rate_study({"indicator", 1.0 / std::numbers::sqrt2}, 2.0, levels);
    const auto hol = projection_rate_study({"holder", 0.5}, 2.0, levels);
    const bool lin_ok = std::abs(lin.slope - 1.0) <= 0.02;
    const bool ind_ok = std::abs(ind.slope - 0.5) <= 0.05;
    const bool hol_ok = hol.slope >= 0.48;
    report(3, lin_ok && ind_ok && hol_ok,
           fmt::format("linear slope {:.4f} (1.00 +- 0.02) {}; indicator slope {:.4f} (0.50 +- 0.05) {}; "
                       "holder-1/2 slope {:.4f} (>= 0.48) {}",
                       lin.slope, lin_ok ? "ok" : "out", ind.slope, ind_ok ? "ok" : "out", hol.slope,
                       hol_ok ? "ok" : "out"),
           timer.seconds());
}

// ||W - min(W, cap)||_{L^2(Q^2)} for |x - y|^{-lambda}, d = 1, in closed form:
// 2 int_0^eps (1 - u)(u^{-lambda} - eps^{-lambda})^2 du with eps = alpha^{1/lambda}.
double truncation_oracle(double lambda, double alpha) {
    const double e = std::min(std::pow(alpha, 1.0 / lambda), 1.0);
    const double l = lambda;
    const double a = std::pow(e, 1 - 2 * l) / (1 - 2 * l) - std::pow(e, 2 - 2 * l) / (2 - 2 * l);
    const double b = std::pow(e, 1 - l) / (1 - l) - std::pow(e, 2 - l) / (2 - l);
    const double c = e - 0.5 * e * e;
    const double cap = std::pow(e, -l);
    return std::sqrt(2.0 * (a - 2.0 * cap * b + cap * cap * c));
}

// Singular kernel truncation rate.
void criterion_4() {
    const Timer timer;
    const double lambda = 0.25;
    const double gamma = optimal_gamma_singular(lambda, 1);
    const SingularStudy s = singular_study(lambda, 1, gamma, {16, 32, 64, 128, 256});
    std::vector<double> xs, ys;
    bool agree = true;
    for (const SingularRow& row : s.rows) {
        const double oracle = truncation_oracle(lambda, row.alpha);
        agree = agree && std::abs(row.truncation_error - oracle) <= 1e-8 * oracle;
        xs.push_back(std::log(row.n));
        ys.push_back(std::log(oracle));
    }
    const double oracle_exponent = -least_squares_slope(xs, ys);
    const double predicted = s.exponents.truncation;
    const bool gamma_ok = fmt::format("{:.6f}", gamma) == "0.166667";
    const bool rate_ok = std::abs(s.fitted_exponent - predicted) <= 0.3 * predicted &&
                         std::abs(oracle_exponent - predicted) <= 0.3 * predicted;
    report(4, gamma_ok && rate_ok && agree,
           fmt::format("optimal gamma {:.6f}; fitted exponent {:.4f} (oracle {:.4f}), predicted {:.4f} +- 30%; "
                       "library matches closed form: {}",
                       gamma, s.fitted_exponent, oracle_exponent, predicted, agree ? "yes" : "no"),
           timer.seconds());
}

// Sampling statistics.
void criterion_5() {
    const Timer timer;
    const GridPartition part(256, 1);
    const CellKernelMatrix ones{part, std::vector<double>(part.cell_count() * part.cell_count(), 1.0), {}};
    const SparsitySchedule sched(0.5);
    double lo = INFINITY, hi = -INFINITY, avg = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const double m = degree_stats(sample_graph(ones, sched, s)).mean;
        lo = std::min(lo, m);
        hi = std::max(hi, m);
        avg += m / 20.0;
    }
    const bool degree_ok = lo >= 13.0 && hi <= 19.0;

    const GridPartition small(16, 1);
    const auto cells = cell_matrix(Graphon::band(0.2), small, SparsitySchedule(0.25));
    const SparsitySchedule sched16(0.25);
    const int seeds = 2000;
    std::vector<int> hits(256, 0);
    for (int s = 0; s < seeds; ++s) {
        const auto g = sample_graph(cells, sched16, static_cast<std::uint64_t>(s) + 1000);
        for (std::size_t i = 0; i < 16; ++i) {
            for (auto j : g.row(i)) ++hits[i * 16 + static_cast<std::size_t>(j)];
        }
    }
    const double alpha = sched16.alpha(16, 1);
    int bad = 0;
    for (std::size_t k = 0; k < 256; ++k) {
        const double p = alpha * cells.entries[k];
        const double f = static_cast<double>(hits[k]) / seeds;
        const double tol = 4.0 * std::sqrt(p * (1.0 - p) / seeds);
        if (std::abs(f - p) > tol && !(p == 0.0 && hits[k] == 0)) ++bad;
    }
    report(5, degree_ok && bad == 0,
           fmt::format("mean degree over 20 seeds {:.3f} (range {:.3f}..{:.3f}, need [13, 19]); "
                       "pairs outside 4 sigma: {} of 256",
                       avg, lo, hi, bad),
           timer.seconds());
}

// Twisted-state stationarity of the averaged system.
void criterion_6() {
    const Timer timer;
    const GridPartition part(128, 1);
    auto cells = std::make_shared<const CellKernelMatrix>(
        cell_matrix(Graphon::band(0.2), part, SparsitySchedule(0.0)));
    const State u0 = twisted_state(3, part);
    SemidiscreteSystem sys(part, cells, InteractionSpec::kuramoto(0.0), u0);
    const Trajectory traj = rk4_integrate(sys, TimeGrid(0.0, 1.0, 1e-2, 1));
    double worst = 0.0;
    for (const State& s : traj.states) worst = std::max(worst, discrete_l2_distance(s, u0, part));
    report(6, worst <= 1e-10, fmt::format("max distance from the twisted state {:.3e}, need <= 1e-10", worst),
           timer.seconds());
}

// RK4 order.
void criterion_7() {
    const Timer timer;
    const RhsFn grow = [](double, std::span<const double> u, std::span<double> out) { out[0] = u[0]; };
    const double e1 = std::abs(rk4_integrate(grow, State{1.0}, TimeGrid(0.0, 1.0, 0.1)).states.back()[0] -
                               std::numbers::e);
    const double e2 = std::abs(rk4_integrate(grow, State{1.0}, TimeGrid(0.0, 1.0, 0.05)).states.back()[0] -
                               std::numbers::e);
    const double ratio = e1 / e2;
    report(7, ratio >= 14.0 && ratio <= 18.0,
           fmt::format("error ratio under dt halving {:.3f}, need [14, 18]", ratio), timer.seconds());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "nlmc");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

// Thread-count independence of rate-sweep output.
void criterion_8() {
    const Timer timer;
    const fs::path dir = fs::temp_directory_path() / "nlmc_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "sweep.ini";
    std::ofstream(cfg) << "[kernel]\nkind = band\nr = 0.2\n\n[rate-sweep]\ngammas = 0.2, 0.5, 0.8\n"
                          "ns = 32, 64\ntrials = 10\n";
    const int a = run_cli({"--config", cfg.string(), "--out", (dir / "t1").string(), "--seed", "4242",
                           "--threads", "1", "rate-sweep"});
    const int b = run_cli({"--config", cfg.string(), "--out", (dir / "t4").string(), "--seed", "4242",
                           "--threads", "4", "rate-sweep"});
    const std::string r1 = slurp(dir / "t1" / "rates.csv");
    const std::string r4 = slurp(dir / "t4" / "rates.csv");
    const bool ok = a == 0 && b == 0 && !r1.empty() && r1 == r4;
    report(8, ok,
           fmt::format("rates.csv with --threads 1 and 4: {} bytes vs {} bytes, {}", r1.size(), r4.size(),
                       r1 == r4 ? "identical" : "different"),
           timer.seconds());
}

}  // namespace

int main() {
    const std::vector<void (*)()> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                           criterion_5, criterion_6, criterion_7, criterion_8};
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        try {
            criteria[k]();
        } catch (const std::exception& e) {
            report(static_cast<int>(k + 1), false, std::string("threw: ") + e.what(), 0.0);
        }
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
               criteria.size());
    return failures == 0 ? 0 : 1;
}
