#include "nlmc/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nlmc/errors.hpp"
#include "nlmc/expression.hpp"
#include "nlmc/parallel.hpp"
#include "nlmc/rng.hpp"
#include "nlmc/sampling.hpp"

namespace nlmc {

namespace {

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanStderr summarize(const std::vector<double>& xs) {
    MeanStderr s;
    if (xs.empty()) return s;
    const double m = static_cast<double>(xs.size());
    s.mean = pairwise_sum(xs) / m;
    if (xs.size() > 1) {
        std::vector<double> dev(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = (xs[i] - s.mean) * (xs[i] - s.mean);
        s.stderr_ = std::sqrt(pairwise_sum(dev) / (m - 1.0) / m);
    }
    return s;
}

bool is_power_of_two(int n) { return n > 0 && std::has_single_bit(static_cast<unsigned>(n)); }

std::uint64_t double_bits(double x) { return std::bit_cast<std::uint64_t>(x); }

// Max and final discrete distance between two checkpointed trajectories.
std::pair<double, double> sup_and_final(const Trajectory& a, const Trajectory& b,
                                        const GridPartition& partition) {
    double sup = 0.0;
    double last = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        last = discrete_l2_distance(a.states[k], b.states[k], partition);
        sup = std::max(sup, last);
    }
    return {sup, last};
}

}  // namespace

Graphon KernelSpec::build() const {
    if (kind == "constant") return Graphon::constant(value, d);
    if (kind == "band") return Graphon::band(r, periodic);
    if (kind == "singular") return Graphon::singular(lambda, d);
    if (kind == "custom-expression") {
        if (expression.empty()) throw ConfigError("custom-expression kernel needs an expression", "expression");
        const KernelExpression expr = compile_kernel_expression(expression);
        auto eval = [expr](std::span<const double> x, std::span<const double> y) { return expr(x[0], y[0]); };
        return Graphon::bounded(1, sup_bound, eval);
    }
    throw ConfigError("unknown kernel kind '" + kind + "'", "kind");
}

ExperimentConfig ExperimentConfig::desk_scale() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::paper_scale() {
    ExperimentConfig c;
    c.gammas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    c.ns = {128, 256};
    c.trials = 200;
    return c;
}

void ExperimentConfig::validate() const {
    if (gammas.empty()) throw ConfigError("gamma list is empty", "gammas");
    for (double g : gammas) {
        if (!(g >= 0.0 && g < 1.0)) throw ConfigError("gamma values must lie in [0,1)", "gammas");
    }
    if (ns.size() < 2) throw ConfigError("rate estimation needs at least two n values", "ns");
    for (int n : ns) {
        if (!is_power_of_two(n)) throw ConfigError("n values must be powers of two", "ns");
    }
    if (!std::is_sorted(ns.begin(), ns.end()) ||
        std::adjacent_find(ns.begin(), ns.end()) != ns.end()) {
        throw ConfigError("n values must be strictly increasing", "ns");
    }
    if (trials < 1) throw ConfigError("trials must be at least 1", "trials");
    if (!(T > 0.0)) throw ConfigError("time horizon must be positive", "T");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive", "dt");
    try {
        (void)time_grid();
    } catch (const DomainError& e) {
        throw ConfigError(e.what(), "checkpoint_interval");
    }
    if (kernel.kind == "band" && kernel.d != 1) throw ConfigError("band kernels need d = 1", "d");
}

TimeGrid ExperimentConfig::time_grid() const {
    const double ratio = checkpoint_interval / dt;
    const auto every = static_cast<std::int64_t>(std::llround(ratio));
    if (every < 1 || std::abs(ratio - static_cast<double>(every)) > 1e-9 * std::max(1.0, ratio)) {
        throw DomainError("checkpoint interval must be a whole number of time steps");
    }
    return TimeGrid(0.0, T, dt, every);
}

InteractionSpec ExperimentConfig::interaction() const {
    return coupling == CouplingFunction::Sine ? InteractionSpec::kuramoto(omega)
                                              : InteractionSpec::drift(omega);
}

State ExperimentConfig::initial_state(const GridPartition& partition) const {
    return initial == InitialData::Midpoint ? twisted_state(q, partition)
                                            : twisted_state_cell_average(q, partition);
}

std::uint64_t trial_seed(std::uint64_t base_seed, double gamma, int n, int trial) {
    std::uint64_t key = splitmix64(base_seed);
    key = mix_key(key, double_bits(gamma));
    key = mix_key(key, static_cast<std::uint64_t>(n));
    key = mix_key(key, static_cast<std::uint64_t>(trial));
    return key;
}

TrialContext make_trial_context(const ExperimentConfig& config, double gamma, int n) {
    GridPartition partition(n, 1);
    SparsitySchedule schedule(gamma);
    auto cells = std::make_shared<const CellKernelMatrix>(
        cell_matrix(config.kernel.build(), partition, schedule, QuadratureSpec{}, 1));
    return TrialContext{partition, std::move(cells), schedule};
}

TrialResult run_trial(const ExperimentConfig& config, const TrialContext& ctx, int trial,
                      CouplingMode mode) {
    TrialResult result;
    Coupling coupling = ctx.cells;
    if (mode == CouplingMode::Sampled) {
        result.seed = trial_seed(config.base_seed, ctx.schedule.gamma(), ctx.partition.n(), trial);
        coupling = std::make_shared<const SparseGraph>(sample_graph(*ctx.cells, ctx.schedule, result.seed));
    }
    SemidiscreteSystem sys(ctx.partition, coupling, config.interaction(),
                           config.initial_state(ctx.partition));
    const Trajectory traj = rk4_integrate(sys, config.time_grid());

    Trajectory exact;
    exact.times = traj.times;
    for (double t : traj.times) {
        exact.states.push_back(exact_kuramoto_reference(config.q, config.omega, t, ctx.partition));
    }
    std::tie(result.sup_error, result.final_error) = sup_and_final(traj, exact, ctx.partition);
    return result;
}

TrialResult run_trial(const ExperimentConfig& config, double gamma, int n, int trial,
                      CouplingMode mode) {
    return run_trial(config, make_trial_context(config, gamma, n), trial, mode);
}

double estimate_rate(double coarse_error, double fine_error) {
    if (!(coarse_error > 0.0) || !(fine_error > 0.0)) {
        throw DomainError("rate estimation needs positive errors");
    }
    return std::log(coarse_error / fine_error) / std::log(2.0);
}

double fit_rate(const std::vector<int>& ns, const std::vector<double>& errors) {
    if (ns.size() != errors.size() || ns.size() < 2) {
        throw DomainError("rate fit needs at least two (n, error) pairs");
    }
    for (double e : errors) {
        if (!(e > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    }
    if (ns.size() == 2 && ns[1] == 2 * ns[0]) return estimate_rate(errors[0], errors[1]);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        xs.push_back(std::log(static_cast<double>(ns[i])));
        ys.push_back(std::log(errors[i]));
    }
    return -least_squares_slope(xs, ys);
}

RateReport rate_sweep(const ExperimentConfig& config, const std::atomic<bool>* cancel) {
    config.validate();
    const unsigned threads = resolve_threads(config.threads);

    struct Cell {
        double gamma;
        int n;
    };
    std::vector<Cell> cells;
    for (double g : config.gammas) {
        for (int n : config.ns) cells.push_back({g, n});
    }
    std::vector<TrialContext> contexts;
    contexts.reserve(cells.size());
    for (const Cell& c : cells) contexts.push_back(make_trial_context(config, c.gamma, c.n));

    const auto per_cell = static_cast<std::size_t>(config.trials);
    std::vector<TrialRecord> records(cells.size() * per_cell);
    parallel_for(records.size(), threads, [&](std::size_t task) {
        const std::size_t ci = task / per_cell;
        const int trial = static_cast<int>(task % per_cell);
        TrialRecord& rec = records[task];
        rec.gamma = cells[ci].gamma;
        rec.n = cells[ci].n;
        rec.trial = trial;
        rec.seed = trial_seed(config.base_seed, rec.gamma, rec.n, trial);
        if (cancel != nullptr && cancel->load()) {
            rec.status = TrialStatus::Cancelled;
            return;
        }
        try {
            const TrialResult r = run_trial(config, contexts[ci], trial);
            rec.sup_error = r.sup_error;
            rec.final_error = r.final_error;
        } catch (const DivergenceError&) {
            rec.status = TrialStatus::Diverged;
        }
    });

    RateReport report;
    report.base_seed = config.base_seed;
    for (const auto& rec : records) {
        if (rec.status == TrialStatus::Diverged) ++report.excluded;
        if (rec.status == TrialStatus::Cancelled) report.cancelled = true;
    }

    for (std::size_t gi = 0; gi < config.gammas.size(); ++gi) {
        const double gamma = config.gammas[gi];
        std::vector<RateRow> rows;
        std::vector<double> means;
        for (std::size_t ni = 0; ni < config.ns.size(); ++ni) {
            const std::size_t ci = gi * config.ns.size() + ni;
            std::vector<double> errs;
            int excluded = 0;
            for (std::size_t t = 0; t < per_cell; ++t) {
                const TrialRecord& rec = records[ci * per_cell + t];
                if (rec.status == TrialStatus::Ok) {
                    errs.push_back(config.error == ErrorFunctional::SupTime ? rec.sup_error : rec.final_error);
                } else if (rec.status == TrialStatus::Diverged) {
                    ++excluded;
                }
            }
            const MeanStderr s = summarize(errs);
            RateRow row;
            row.gamma = gamma;
            row.n = config.ns[ni];
            row.trials = static_cast<int>(errs.size());
            row.excluded = excluded;
            row.mean_error = s.mean;
            row.stderr_ = s.stderr_;
            row.theory_rate = (1.0 - gamma) / 2.0;
            rows.push_back(row);
            means.push_back(errs.empty() ? 0.0 : s.mean);
        }
        const double alpha = fit_rate(config.ns, means);
        for (RateRow& row : rows) {
            row.alpha_gamma = alpha;
            report.rows.push_back(row);
        }
    }
    report.trials = std::move(records);
    return report;
}

GapTable sampled_vs_averaged(const ExperimentConfig& config, double gamma, const std::vector<int>& ns,
                             int seeds) {
    if (ns.size() < 2) throw ConfigError("gap study needs at least two n values", "ns");
    for (int n : ns) {
        if (!is_power_of_two(n)) throw ConfigError("n values must be powers of two", "ns");
    }
    if (seeds < 1) throw ConfigError("gap study needs at least one seed", "seeds");
    const unsigned threads = resolve_threads(config.threads);
    const TimeGrid grid = config.time_grid();

    GapTable table;
    table.gamma = gamma;
    table.theory_exponent = static_cast<double>(config.kernel.d) * (1.0 - gamma) / 2.0;
    std::vector<double> means;
    for (int n : ns) {
        const TrialContext ctx = make_trial_context(config, gamma, n);
        const State initial = config.initial_state(ctx.partition);
        SemidiscreteSystem averaged(ctx.partition, ctx.cells, config.interaction(), initial);
        const Trajectory reference = rk4_integrate(averaged, grid);

        std::vector<double> gaps(static_cast<std::size_t>(seeds));
        parallel_for(gaps.size(), threads, [&](std::size_t s) {
            const std::uint64_t seed =
                mix_key(trial_seed(config.base_seed, gamma, n, static_cast<int>(s)), 0x6a70ULL);
            auto graph = std::make_shared<const SparseGraph>(sample_graph(*ctx.cells, ctx.schedule, seed));
            SemidiscreteSystem sampled(ctx.partition, graph, config.interaction(), initial);
            const Trajectory traj = rk4_integrate(sampled, grid);
            gaps[s] = sup_and_final(traj, reference, ctx.partition).first;
        });
        const MeanStderr st = summarize(gaps);
        table.rows.push_back(GapRow{n, seeds, st.mean, st.stderr_});
        means.push_back(st.mean);
    }
    table.fitted_exponent = fit_rate(ns, means);
    return table;
}

Field FieldFamily::build() const {
    Field f;
    f.dim = 1;
    if (name == "linear") {
        f.eval = [](std::span<const double> x) { return x[0]; };
        f.box_integral = [](const Box& b) { return 0.5 * (b.hi[0] * b.hi[0] - b.lo[0] * b.lo[0]); };
    } else if (name == "indicator") {
        const double a = parameter;
        f.eval = [a](std::span<const double> x) { return x[0] <= a ? 1.0 : 0.0; };
        f.box_integral = [a](const Box& b) { return std::max(0.0, std::min(b.hi[0], a) - b.lo[0]); };
        f.breakpoints = {{a}};
    } else if (name == "holder") {
        const double beta = parameter;
        if (!(beta > 0.0)) throw ConfigError("Hoelder exponent must be positive", "parameter");
        f.eval = [beta](std::span<const double> x) { return std::pow(std::abs(x[0] - 0.5), beta); };
        // Antiderivative of |x - 1/2|^beta.
        auto F = [beta](double x) {
            const double s = x - 0.5;
            return std::copysign(std::pow(std::abs(s), beta + 1.0) / (beta + 1.0), s);
        };
        f.box_integral = [F](const Box& b) { return F(b.hi[0]) - F(b.lo[0]); };
        f.breakpoints = {{0.5}};
    } else {
        throw ConfigError("unknown field family '" + name + "'", "family");
    }
    return f;
}

double FieldFamily::predicted_exponent(double p) const {
    if (name == "linear") return 1.0;
    if (name == "indicator") return 1.0 / p;  // (d - beta_box) / p with a point boundary
    if (name == "holder") return std::min(parameter, 1.0);
    throw ConfigError("unknown field family '" + name + "'", "family");
}

SlopeTable projection_rate_study(const FieldFamily& family, double p, const std::vector<int>& levels) {
    if (levels.size() < 2) throw ConfigError("projection study needs at least two levels", "levels");
    for (int n : levels) {
        if (!is_power_of_two(n)) throw ConfigError("levels must be powers of two", "levels");
    }
    const Field phi = family.build();
    QuadratureSpec quad;
    quad.throw_on_exhaustion = false;

    SlopeTable table;
    table.family = family.name;
    table.p = p;
    table.predicted = family.predicted_exponent(p);
    std::vector<double> errors;
    for (int n : levels) {
        const StepFunction approx = project_step(phi, n, quad);
        const double err = lp_error(phi, approx, p, quad);
        table.rows.push_back(SlopeRow{n, 1.0 / n, err});
        errors.push_back(err);
    }
    table.slope = fit_rate(levels, errors);
    return table;
}

SingularStudy singular_study(double lambda, int d, double gamma, const std::vector<int>& levels) {
    if (levels.size() < 2) throw ConfigError("singular study needs at least two levels", "levels");
    SingularStudy study;
    study.lambda = lambda;
    study.d = d;
    study.gamma = gamma;
    study.optimal_gamma = optimal_gamma_singular(lambda, d);
    study.exponents = singular_error_exponents(lambda, d, gamma);

    const SparsitySchedule schedule(gamma);
    QuadratureSpec quad;
    quad.throw_on_exhaustion = false;
    std::vector<double> errors;
    for (int n : levels) {
        const double alpha = schedule.alpha(n, d);
        const double err = singular_truncation_error(lambda, d, alpha, quad);
        study.rows.push_back(SingularRow{n, alpha, err});
        errors.push_back(err);
    }
    study.fitted_exponent = fit_rate(levels, errors);
    return study;
}

}  // namespace nlmc
