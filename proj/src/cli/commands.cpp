#include "nlmc/cli/commands.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "nlmc/errors.hpp"
#include "nlmc/experiments.hpp"
#include "nlmc/sampling.hpp"

namespace nlmc::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kDynamicsKeys{"q",   "omega",   "T",       "dt",      "checkpoint_interval",
                                             "seed", "error", "initial", "coupling"};

std::vector<std::string> with_dynamics(std::vector<std::string> keys) {
    keys.insert(keys.end(), kDynamicsKeys.begin(), kDynamicsKeys.end());
    return keys;
}

class CsvFile {
public:
    CsvFile(const fs::path& path, const std::string& header) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open " + path.string() + " for writing", path.string());
        out_ << header << '\n';
    }

    template <typename... Cells>
    void row(const Cells&... cells) {
        std::string line;
        bool first = true;
        (append(line, first, cells), ...);
        out_ << line << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("failed writing " + path_.string(), path_.string());
    }

private:
    template <typename T>
    static void append(std::string& line, bool& first, const T& cell) {
        if (!first) line += ',';
        first = false;
        if constexpr (std::is_floating_point_v<T>) {
            line += format_real(cell);
        } else if constexpr (std::is_convertible_v<T, std::string>) {
            line += cell;
        } else {
            line += fmt::format("{}", cell);
        }
    }

    fs::path path_;
    std::ofstream out_;
};

ConfigFile read_config(const CommonOptions& options) {
    return options.config ? ConfigFile::load(*options.config) : ConfigFile{};
}

void prepare_out(const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message(), out.string());
}

std::uint64_t config_hash(const std::string& command, const ConfigFile& file, const CommonOptions& options) {
    std::string text = command + "\n" + file.canonical();
    if (options.seed) text += "--seed=" + std::to_string(*options.seed) + "\n";
    if (options.paper_scale) text += "--paper-scale\n";
    return fnv1a64(text);
}

ExperimentConfig experiment_for(const ConfigFile& file, const std::string& section,
                                const CommonOptions& options, bool paper_scale) {
    ExperimentConfig c = load_experiment_config(file, section, paper_scale);
    if (options.seed) c.base_seed = *options.seed;
    c.threads = options.threads;
    return c;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RunManifest finish(RunManifest manifest, const CommonOptions& options, const Stopwatch& clock) {
    manifest.wall_seconds = clock.seconds();
    manifest.verify();
    manifest.write(options.out / "manifest.json");
    for (const auto& p : manifest.outputs) spdlog::info("wrote {}", p.string());
    return manifest;
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

}  // namespace

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

std::string pixmap_name(int n, double gamma) { return fmt::format("adj_n{}_g{}.pgm", n, gamma); }

void RunManifest::verify() const {
    for (const auto& p : outputs) {
        std::error_code ec;
        const auto size = fs::file_size(p, ec);
        if (ec || size == 0) throw IoError("output " + p.string() + " is missing or empty", p.string());
    }
}

void RunManifest::write(const fs::path& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = fmt::format("{:016x}", config_hash);
    j["version"] = version;
    j["wall_seconds"] = wall_seconds;
    j["interrupted"] = interrupted;
    j["outputs"] = nlohmann::json::array();
    for (const auto& p : outputs) j["outputs"].push_back(p.filename().string());
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing", path.string());
    out << j.dump(2) << '\n';
}

RunManifest cmd_rate_sweep(const CommonOptions& options) {
    const Stopwatch clock;
    const ConfigFile file = read_config(options);
    file.require_known("rate-sweep", with_dynamics({"gammas", "ns", "trials"}));
    ExperimentConfig config = experiment_for(file, "rate-sweep", options, options.paper_scale);
    config.validate();
    prepare_out(options.out);

    spdlog::info("rate sweep: {} gamma values x {} levels x {} trials", config.gammas.size(),
                 config.ns.size(), config.trials);
    const RateReport report = rate_sweep(config, options.cancel);

    RunManifest manifest;
    manifest.command = "rate-sweep";
    manifest.config_hash = config_hash(manifest.command, file, options);
    manifest.interrupted = report.cancelled;

    const fs::path rates = options.out / "rates.csv";
    CsvFile rates_csv(rates, "gamma,n,trials,mean_error,stderr,alpha_gamma,theory_rate");
    for (const RateRow& r : report.rows) {
        rates_csv.row(r.gamma, r.n, r.trials, r.mean_error, r.stderr_, r.alpha_gamma, r.theory_rate);
    }
    rates_csv.close();

    const fs::path errors = options.out / "errors.csv";
    CsvFile errors_csv(errors, "gamma,n,trial,seed,sup_error,final_error,status");
    for (const TrialRecord& t : report.trials) {
        const char* status = t.status == TrialStatus::Ok         ? "ok"
                             : t.status == TrialStatus::Diverged ? "diverged"
                                                                 : "cancelled";
        errors_csv.row(t.gamma, t.n, t.trial, t.seed, t.sup_error, t.final_error, std::string(status));
    }
    errors_csv.close();
    if (report.excluded > 0) spdlog::warn("{} diverged trials excluded from the means", report.excluded);

    manifest.outputs = {rates, errors};
    return finish(std::move(manifest), options, clock);
}

RunManifest cmd_pixmap(const CommonOptions& options) {
    const Stopwatch clock;
    const ConfigFile file = read_config(options);
    file.require_known("pixmap", {"n", "gammas", "seed", "edge_list"});
    const ExperimentConfig base = experiment_for(file, "pixmap", options, false);
    const int n = file.get_int("pixmap", "n", 512);
    const std::vector<double> gammas = file.get_doubles("pixmap", "gammas", {0.25, 0.5, 0.75, 0.95});
    const std::uint64_t seed = options.seed.value_or(file.get_u64("pixmap", "seed", base.base_seed));
    const bool edge_list = file.get_bool("pixmap", "edge_list", false);
    if (gammas.empty()) throw ConfigError("gamma list is empty", "pixmap.gammas");
    if (n < 1) throw ConfigError("n must be positive", "pixmap.n");

    const Graphon kernel = base.kernel.build();
    const GridPartition partition(n, kernel.d());
    if (partition.cell_count() > kMaxPixmapNodes) {
        throw DomainError(fmt::format("pixmap needs n^d <= {}, got {}", kMaxPixmapNodes, partition.cell_count()));
    }
    prepare_out(options.out);

    RunManifest manifest;
    manifest.command = "pixmap";
    manifest.config_hash = config_hash(manifest.command, file, options);
    for (double gamma : gammas) {
        const SparsitySchedule schedule(gamma);
        const CellKernelMatrix cells = cell_matrix(kernel, partition, schedule, {}, options.threads);
        const SparseGraph g = sample_graph(cells, schedule, seed, options.threads);
        const fs::path path = options.out / pixmap_name(n, gamma);
        adjacency_pixmap(g, path);
        manifest.outputs.push_back(path);
        if (edge_list) {
            const fs::path edges = options.out / fmt::format("edges_n{}_g{}.txt", n, gamma);
            write_edge_list(g, edges);
            if (g.edge_count() > 0) manifest.outputs.push_back(edges);
        }
        spdlog::info("gamma {}: {} edges, mean degree {:.3f}", gamma, g.edge_count(), degree_stats(g).mean);
    }
    return finish(std::move(manifest), options, clock);
}

RunManifest cmd_project_study(const CommonOptions& options) {
    const Stopwatch clock;
    const ConfigFile file = read_config(options);
    file.require_known("project-study", {"families", "p", "levels"});
    const std::vector<std::string> families = file.get_strings(
        "project-study", "families", {"linear", "indicator:0.70710678118654752", "holder:0.5"});
    const double p = file.get_double("project-study", "p", 2.0);
    const std::vector<int> levels =
        file.get_ints("project-study", "levels", {8, 16, 32, 64, 128, 256, 512});
    if (families.empty()) throw ConfigError("family list is empty", "project-study.families");
    if (!(p >= 1.0)) throw ConfigError("p must be at least 1", "project-study.p");
    prepare_out(options.out);

    RunManifest manifest;
    manifest.command = "project-study";
    manifest.config_hash = config_hash(manifest.command, file, options);
    const fs::path rows_path = options.out / "projection.csv";
    const fs::path summary_path = options.out / "projection_summary.csv";
    CsvFile rows(rows_path, "family,parameter,p,n,h,error");
    CsvFile summary(summary_path, "family,parameter,p,fitted_slope,predicted_exponent");
    for (const std::string& spec : families) {
        FieldFamily family;
        const auto colon = spec.find(':');
        family.name = spec.substr(0, colon);
        if (colon != std::string::npos) {
            try {
                family.parameter = std::stod(spec.substr(colon + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad family parameter in '" + spec + "'", "project-study.families");
            }
        } else if (family.name == "indicator") {
            family.parameter = 0.70710678118654752;
        } else if (family.name == "holder") {
            family.parameter = 0.5;
        }
        const SlopeTable table = projection_rate_study(family, p, levels);
        for (const SlopeRow& r : table.rows) rows.row(family.name, family.parameter, p, r.n, r.h, r.error);
        summary.row(family.name, family.parameter, p, table.slope, table.predicted);
        spdlog::info("{}: slope {:.4f} (predicted {:.4f})", spec, table.slope, table.predicted);
    }
    rows.close();
    summary.close();
    manifest.outputs = {rows_path, summary_path};
    return finish(std::move(manifest), options, clock);
}

RunManifest cmd_singular_study(const CommonOptions& options) {
    const Stopwatch clock;
    const ConfigFile file = read_config(options);
    file.require_known("singular-study", {"lambda", "d", "gamma", "levels"});
    const double lambda = file.get_double("singular-study", "lambda", 0.25);
    const int d = file.get_int("singular-study", "d", 1);
    double gamma = 0.0;
    try {
        gamma = file.get_double("singular-study", "gamma", optimal_gamma_singular(lambda, d));
    } catch (const DomainError& e) {
        throw ConfigError(e.what(), "singular-study.lambda");
    }
    const std::vector<int> levels = file.get_ints("singular-study", "levels", {16, 32, 64, 128, 256});
    prepare_out(options.out);

    const SingularStudy study = singular_study(lambda, d, gamma, levels);
    fmt::print("optimal gamma = {:.6f}\n", study.optimal_gamma);
    fmt::print("exponents at gamma = {:.6f}: truncation {:.6f}, projection {:.6f}, monte carlo {:.6f}\n",
               study.gamma, study.exponents.truncation, study.exponents.projection,
               study.exponents.monte_carlo);
    fmt::print("fitted truncation exponent = {:.6f}\n", study.fitted_exponent);

    RunManifest manifest;
    manifest.command = "singular-study";
    manifest.config_hash = config_hash(manifest.command, file, options);
    const fs::path rows_path = options.out / "singular.csv";
    const fs::path summary_path = options.out / "singular_summary.csv";
    CsvFile rows(rows_path, "n,alpha,truncation_error");
    for (const SingularRow& r : study.rows) rows.row(r.n, r.alpha, r.truncation_error);
    rows.close();
    CsvFile summary(summary_path,
                    "lambda,d,gamma,optimal_gamma,truncation_exponent,projection_exponent,"
                    "monte_carlo_exponent,predicted_overall,fitted_truncation_exponent");
    summary.row(lambda, d, study.gamma, study.optimal_gamma, study.exponents.truncation,
                study.exponents.projection, study.exponents.monte_carlo, study.exponents.overall(),
                study.fitted_exponent);
    summary.close();
    manifest.outputs = {rows_path, summary_path};
    return finish(std::move(manifest), options, clock);
}

RunManifest cmd_gap_study(const CommonOptions& options) {
    const Stopwatch clock;
    const ConfigFile file = read_config(options);
    file.require_known("gap-study", with_dynamics({"gamma", "ns", "seeds"}));
    const ExperimentConfig config = experiment_for(file, "gap-study", options, false);
    const double gamma = file.get_double("gap-study", "gamma", 0.5);
    const std::vector<int> ns = file.get_ints("gap-study", "ns", {64, 128, 256});
    const int seeds = file.get_int("gap-study", "seeds", 20);
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0,1)", "gap-study.gamma");
    prepare_out(options.out);

    const GapTable table = sampled_vs_averaged(config, gamma, ns, seeds);
    fmt::print("fitted gap exponent = {:.4f}, theory = {:.4f}\n", table.fitted_exponent, table.theory_exponent);

    RunManifest manifest;
    manifest.command = "gap-study";
    manifest.config_hash = config_hash(manifest.command, file, options);
    const fs::path rows_path = options.out / "gap.csv";
    const fs::path summary_path = options.out / "gap_summary.csv";
    CsvFile rows(rows_path, "gamma,n,seeds,mean_gap,stderr");
    for (const GapRow& r : table.rows) rows.row(gamma, r.n, r.seeds, r.mean_gap, r.stderr_);
    rows.close();
    CsvFile summary(summary_path, "gamma,fitted_exponent,theory_exponent");
    summary.row(gamma, table.fitted_exponent, table.theory_exponent);
    summary.close();
    manifest.outputs = {rows_path, summary_path};
    return finish(std::move(manifest), options, clock);
}

RunManifest cmd_solve(const CommonOptions& options) {
    const Stopwatch clock;
    const ConfigFile file = read_config(options);
    file.require_known("solve", with_dynamics({"n", "gamma", "system"}));
    const ExperimentConfig config = experiment_for(file, "solve", options, false);
    const int n = file.get_int("solve", "n", 128);
    const double gamma = file.get_double("solve", "gamma", 0.25);
    const std::string system = file.get_string("solve", "system", "sampled");
    if (n < 1) throw ConfigError("n must be positive", "solve.n");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0,1)", "solve.gamma");
    if (system != "sampled" && system != "averaged") {
        throw ConfigError("system must be sampled or averaged", "solve.system");
    }
    prepare_out(options.out);

    const TrialContext ctx = make_trial_context(config, gamma, n);
    Coupling coupling = ctx.cells;
    if (system == "sampled") {
        coupling = std::make_shared<const SparseGraph>(sample_graph(*ctx.cells, ctx.schedule, config.base_seed));
    }
    SemidiscreteSystem sys(ctx.partition, coupling, config.interaction(), config.initial_state(ctx.partition));
    const Trajectory traj = rk4_integrate(sys, config.time_grid());

    RunManifest manifest;
    manifest.command = "solve";
    manifest.config_hash = config_hash(manifest.command, file, options);
    const fs::path path = options.out / "trajectory.csv";
    CsvFile csv(path, "t,node,value,exact");
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const State exact = exact_kuramoto_reference(config.q, config.omega, traj.times[k], ctx.partition);
        for (std::size_t i = 0; i < traj.states[k].size(); ++i) {
            csv.row(traj.times[k], i, traj.states[k][i], exact[i]);
        }
    }
    csv.close();
    manifest.outputs = {path};
    return finish(std::move(manifest), options, clock);
}

int run(int argc, char** argv) {
    CLI::App app{"Sparse Monte Carlo integration of nonlocal diffusion equations"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    CommonOptions options;
    std::string config_path;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", options.out, "Output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Base seed (overrides the config)");
    auto* threads_opt = app.add_option("--threads", options.threads,
                                       "Worker threads (default: NONLOCAL_MC_THREADS or all cores)");
    app.add_flag("--paper-scale", options.paper_scale,
                 "rate-sweep at n in {128,256}, 200 trials, gamma = 0.1..0.9");

    const char* kernel_help =
        "Kernel section [kernel]: kind = constant|band|singular|custom-expression; "
        "value, r, periodic, lambda, d, sup_bound, expression. Custom expressions use x, y, "
        "dist (= |x-y|), pi, + - * / ^, |..|, abs sin cos exp log sqrt min max step.";
    auto* sweep = app.add_subcommand("rate-sweep", "Convergence exponent vs gamma (rates.csv, errors.csv)");
    auto* pixmap = app.add_subcommand("pixmap", "Adjacency pixel pictures (PGM) per gamma");
    auto* project = app.add_subcommand("project-study", "Step-function projection rates");
    auto* singular = app.add_subcommand("singular-study", "Truncation error of |x-y|^-lambda");
    auto* gap = app.add_subcommand("gap-study", "Sampled vs averaged system gap decay");
    auto* solve = app.add_subcommand("solve", "Single integration, trajectory.csv");
    for (auto* sub : {sweep, pixmap, project, singular, gap, solve}) sub->footer(kernel_help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (!config_path.empty()) options.config = config_path;
    if (seed_opt->count() > 0) options.seed = seed;
    if (threads_opt->count() == 0) {
        if (const char* env = std::getenv("NONLOCAL_MC_THREADS")) {
            try {
                options.threads = static_cast<unsigned>(std::stoul(env));
            } catch (const std::exception&) {
                spdlog::error("NONLOCAL_MC_THREADS must be a non-negative integer");
                return 2;
            }
        }
    }
    options.cancel = &g_interrupted;
    std::signal(SIGINT, on_sigint);

    try {
        RunManifest manifest;
        if (sweep->parsed()) manifest = cmd_rate_sweep(options);
        if (pixmap->parsed()) manifest = cmd_pixmap(options);
        if (project->parsed()) manifest = cmd_project_study(options);
        if (singular->parsed()) manifest = cmd_singular_study(options);
        if (gap->parsed()) manifest = cmd_gap_study(options);
        if (solve->parsed()) manifest = cmd_solve(options);
        if (manifest.interrupted) {
            spdlog::warn("interrupted; partial results written");
            return 130;
        }
        return 0;
    } catch (const ConfigError& e) {
        spdlog::error("config error: {}", e.what());
        return 2;
    } catch (const DomainError& e) {
        spdlog::error("invalid input: {}", e.what());
        return 2;
    } catch (const DivergenceError& e) {
        spdlog::error("numerical divergence: {}", e.what());
        return 3;
    } catch (const IoError& e) {
        spdlog::error("I/O error: {}", e.what());
        return 4;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}

}  // namespace nlmc::cli
