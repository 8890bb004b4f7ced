#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "nlmc/dynamics.hpp"
#include "nlmc/graphon.hpp"
#include "nlmc/grid.hpp"

namespace nlmc {

struct KernelSpec {
    std::string kind = "band";  // constant | band | singular | custom-expression
    double value = 1.0;         // constant
    double r = 0.2;             // band radius
    bool periodic = true;       // band
    double lambda = 0.25;       // singular exponent
    int d = 1;                  // singular dimension
    double sup_bound = 1.0;     // custom-expression
    std::string expression;     // custom-expression

    Graphon build() const;
};

enum class ErrorFunctional { SupTime, FinalTime };
enum class InitialData { Midpoint, CellAverage };
enum class CouplingFunction { Sine, None };
enum class CouplingMode { Sampled, Averaged };

struct ExperimentConfig {
    KernelSpec kernel;
    std::vector<double> gammas{0.2, 0.35, 0.5, 0.65, 0.8};
    std::vector<int> ns{64, 128};
    int trials = 30;
    int q = 3;
    double omega = 0.5;
    double T = 1.0;
    double dt = 1e-2;
    double checkpoint_interval = 0.1;
    std::uint64_t base_seed = 20190401;
    ErrorFunctional error = ErrorFunctional::SupTime;
    InitialData initial = InitialData::Midpoint;
    CouplingFunction coupling = CouplingFunction::Sine;
    unsigned threads = 0;

    static ExperimentConfig desk_scale();
    static ExperimentConfig paper_scale();

    // Throws ConfigError naming the offending key.
    void validate() const;

    TimeGrid time_grid() const;
    InteractionSpec interaction() const;
    State initial_state(const GridPartition& partition) const;
};

// Seed of one trial; depends on the gamma value itself, not its list position.
std::uint64_t trial_seed(std::uint64_t base_seed, double gamma, int n, int trial);

struct TrialResult {
    double sup_error = 0.0;
    double final_error = 0.0;
    std::uint64_t seed = 0;

    double error(ErrorFunctional f) const {
        return f == ErrorFunctional::SupTime ? sup_error : final_error;
    }
};

// Shared inputs of every trial at one (gamma, n).
struct TrialContext {
    GridPartition partition;
    std::shared_ptr<const CellKernelMatrix> cells;
    SparsitySchedule schedule;
};

TrialContext make_trial_context(const ExperimentConfig& config, double gamma, int n);

TrialResult run_trial(const ExperimentConfig& config, const TrialContext& ctx, int trial,
                      CouplingMode mode = CouplingMode::Sampled);

TrialResult run_trial(const ExperimentConfig& config, double gamma, int n, int trial,
                      CouplingMode mode = CouplingMode::Sampled);

// ln(coarse / fine) / ln 2.
double estimate_rate(double coarse_error, double fine_error);

// Convergence exponent: -slope of ln(error) against ln(n). Reduces to
// estimate_rate for two levels with ratio 2. NaN if any error is not positive.
double fit_rate(const std::vector<int>& ns, const std::vector<double>& errors);

enum class TrialStatus { Ok, Diverged, Cancelled };

struct TrialRecord {
    double gamma = 0.0;
    int n = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double sup_error = 0.0;
    double final_error = 0.0;
    TrialStatus status = TrialStatus::Ok;
};

struct RateRow {
    double gamma = 0.0;
    int n = 0;
    int trials = 0;  // successful trials entering the mean
    int excluded = 0;
    double mean_error = 0.0;
    double stderr_ = 0.0;
    double alpha_gamma = 0.0;
    double theory_rate = 0.0;
};

struct RateReport {
    std::vector<RateRow> rows;
    std::vector<TrialRecord> trials;
    std::uint64_t base_seed = 0;
    int excluded = 0;
    bool cancelled = false;
};

// Runs every trial of the sweep on a work pool; the report does not depend
// on the worker count. A set cancel flag skips the trials not yet started.
RateReport rate_sweep(const ExperimentConfig& config, const std::atomic<bool>* cancel = nullptr);

struct GapRow {
    int n = 0;
    int seeds = 0;
    double mean_gap = 0.0;
    double stderr_ = 0.0;
};

struct GapTable {
    double gamma = 0.0;
    std::vector<GapRow> rows;
    double fitted_exponent = 0.0;
    double theory_exponent = 0.0;
};

// sup_t ||u_n(t) - v_n(t)|| between the sampled and averaged systems started
// from the same state, averaged over seeds.
GapTable sampled_vs_averaged(const ExperimentConfig& config, double gamma, const std::vector<int>& ns,
                             int seeds);

struct FieldFamily {
    std::string name = "linear";  // linear | indicator | holder
    double parameter = 0.0;       // indicator threshold or Hoelder exponent

    Field build() const;
    // Predicted L^p decay exponent of the step projection.
    double predicted_exponent(double p) const;
};

struct SlopeRow {
    int n = 0;
    double h = 0.0;
    double error = 0.0;
};

struct SlopeTable {
    std::string family;
    double p = 2.0;
    std::vector<SlopeRow> rows;
    double slope = 0.0;
    double predicted = 0.0;
};

SlopeTable projection_rate_study(const FieldFamily& family, double p, const std::vector<int>& levels);

struct SingularRow {
    int n = 0;
    double alpha = 0.0;
    double truncation_error = 0.0;
};

struct SingularStudy {
    double lambda = 0.0;
    int d = 1;
    double gamma = 0.0;
    double optimal_gamma = 0.0;
    SingularExponents exponents;
    std::vector<SingularRow> rows;
    double fitted_exponent = 0.0;
};

// Truncation error of |x-y|^{-lambda} at alpha_n = n^{-d gamma} over the levels.
SingularStudy singular_study(double lambda, int d, double gamma, const std::vector<int>& levels);

}  // namespace nlmc
