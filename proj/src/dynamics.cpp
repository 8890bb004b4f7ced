#include "nlmc/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nlmc/errors.hpp"

namespace nlmc {

namespace {

double frac(double s) { return s - std::floor(s); }

void check_lengths(std::span<const double> u, std::span<double> out, const SemidiscreteSystem& sys) {
    const std::size_t size = sys.partition().cell_count();
    if (u.size() != size || out.size() != size) {
        throw DomainError("state length does not match partition");
    }
}

}  // namespace

InteractionSpec InteractionSpec::kuramoto(double omega) {
    InteractionSpec s;
    s.coupling = [](double w) { return -std::sin(w); };
    s.coupling_derivative = [](double w) { return -std::cos(w); };
    s.coupling_lipschitz = 1.0;
    s.reaction = [omega](double, std::size_t, double) { return omega; };
    s.reaction_derivative = [](double, std::size_t, double) { return 0.0; };
    s.reaction_lipschitz = 0.0;
    return s;
}

InteractionSpec InteractionSpec::drift(double omega) {
    InteractionSpec s = kuramoto(omega);
    s.coupling = [](double) { return 0.0; };
    s.coupling_derivative = [](double) { return 0.0; };
    s.coupling_lipschitz = 0.0;
    return s;
}

ProbeReport probe_interaction(const InteractionSpec& spec, std::size_t cells) {
    constexpr int kPoints = 10000;
    constexpr double kSlack = 1e-12;
    const double lo = -4.0 * std::numbers::pi;
    const double step = 8.0 * std::numbers::pi / (kPoints - 1);
    ProbeReport report;
    double prev_w = lo;
    double prev_d = spec.coupling(lo);
    for (int k = 0; k < kPoints; ++k) {
        const double w = lo + step * k;
        const double dv = spec.coupling(w);
        if (std::abs(dv) > 1.0 + kSlack) report.coupling_bounded = false;
        if (k > 0 && std::abs(dv - prev_d) > spec.coupling_lipschitz * (w - prev_w) + kSlack) {
            report.coupling_lipschitz = false;
        }
        prev_w = w;
        prev_d = dv;
    }
    if (spec.reaction) {
        for (std::size_t c = 0; c < cells; ++c) {
            double prev_f = spec.reaction(lo, c, 0.0);
            for (int k = 1; k < kPoints; k += 7) {
                const double w = lo + step * k;
                const double fv = spec.reaction(w, c, 0.0);
                const double dw = step * 7;
                if (std::abs(fv - prev_f) > spec.reaction_lipschitz * dw + kSlack) {
                    report.reaction_lipschitz = false;
                }
                prev_f = fv;
            }
        }
    }
    return report;
}

SemidiscreteSystem::SemidiscreteSystem(GridPartition partition, Coupling coupling,
                                       InteractionSpec interaction, State initial, double t0)
    : partition_(partition),
      coupling_(std::move(coupling)),
      interaction_(std::move(interaction)),
      state_(std::move(initial)),
      time_(t0) {
    if (state_.size() != partition_.cell_count()) {
        throw DomainError("initial state length " + std::to_string(state_.size()) +
                          " does not match n^d = " + std::to_string(partition_.cell_count()));
    }
    std::visit(
        [&](const auto& c) {
            if (!c) throw DomainError("coupling is null");
            std::size_t nodes = 0;
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, std::shared_ptr<const SparseGraph>>) {
                nodes = c->node_count();
            } else {
                nodes = c->size();
            }
            if (nodes != partition_.cell_count()) {
                throw DomainError("coupling dimension does not match partition");
            }
        },
        coupling_);
    if (!interaction_.coupling) throw DomainError("interaction needs a coupling function");
}

void rhs_sampled(double t, std::span<const double> u, const SemidiscreteSystem& sys,
                 std::span<double> out) {
    const auto* graph_ptr = std::get_if<std::shared_ptr<const SparseGraph>>(&sys.coupling());
    if (graph_ptr == nullptr) throw PreconditionError("rhs_sampled needs a sampled graph");
    check_lengths(u, out, sys);
    const SparseGraph& g = **graph_ptr;
    const auto& spec = sys.interaction();
    const double scale = 1.0 / (g.alpha() * static_cast<double>(g.node_count()));
    for (std::size_t i = 0; i < u.size(); ++i) {
        double acc = 0.0;
        for (const auto j : g.row(i)) acc += spec.coupling(u[static_cast<std::size_t>(j)] - u[i]);
        const double local = spec.reaction ? spec.reaction(u[i], i, t) : 0.0;
        out[i] = local + scale * acc;
    }
}

void rhs_averaged(double t, std::span<const double> v, const SemidiscreteSystem& sys,
                  std::span<double> out) {
    const auto* cells_ptr = std::get_if<std::shared_ptr<const CellKernelMatrix>>(&sys.coupling());
    if (cells_ptr == nullptr) throw PreconditionError("rhs_averaged needs a cell kernel matrix");
    check_lengths(v, out, sys);
    const CellKernelMatrix& w = **cells_ptr;
    const auto& spec = sys.interaction();
    const std::size_t size = v.size();
    const double scale = 1.0 / static_cast<double>(size);
    for (std::size_t i = 0; i < size; ++i) {
        const double* row = w.entries.data() + i * size;
        double acc = 0.0;
        for (std::size_t j = 0; j < size; ++j) {
            if (row[j] != 0.0) acc += row[j] * spec.coupling(v[j] - v[i]);
        }
        const double local = spec.reaction ? spec.reaction(v[i], i, t) : 0.0;
        out[i] = local + scale * acc;
    }
}

void rhs(double t, std::span<const double> u, const SemidiscreteSystem& sys, std::span<double> out) {
    if (sys.is_sampled()) {
        rhs_sampled(t, u, sys, out);
    } else {
        rhs_averaged(t, u, sys, out);
    }
}

void rhs_averaged_jvp(double t, std::span<const double> v, std::span<const double> dir,
                      const SemidiscreteSystem& sys, std::span<double> out) {
    const auto* cells_ptr = std::get_if<std::shared_ptr<const CellKernelMatrix>>(&sys.coupling());
    if (cells_ptr == nullptr) throw PreconditionError("rhs_averaged_jvp needs a cell kernel matrix");
    check_lengths(v, out, sys);
    const auto& spec = sys.interaction();
    if (!spec.coupling_derivative) throw PreconditionError("jvp needs the derivative of D");
    if (spec.reaction && !spec.reaction_derivative && spec.reaction_lipschitz != 0.0) {
        throw PreconditionError("jvp needs df/du for a u-dependent reaction");
    }
    const CellKernelMatrix& w = **cells_ptr;
    const std::size_t size = v.size();
    const double scale = 1.0 / static_cast<double>(size);
    for (std::size_t i = 0; i < size; ++i) {
        const double* row = w.entries.data() + i * size;
        double acc = 0.0;
        for (std::size_t j = 0; j < size; ++j) {
            if (row[j] != 0.0) acc += row[j] * spec.coupling_derivative(v[j] - v[i]) * (dir[j] - dir[i]);
        }
        const double local =
            spec.reaction_derivative ? spec.reaction_derivative(v[i], i, t) * dir[i] : 0.0;
        out[i] = local + scale * acc;
    }
}

TimeGrid::TimeGrid(double t0, double t1, double dt, std::int64_t checkpoint_every)
    : t0_(t0), t1_(t1), dt_(dt), steps_(0), every_(checkpoint_every) {
    if (!(dt > 0.0) || !(t1 > t0)) throw DomainError("time grid needs t1 > t0 and dt > 0");
    const double ratio = (t1 - t0) / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-12 * std::max(1.0, rounded)) {
        throw DomainError("(t1 - t0) / dt must be an integer");
    }
    steps_ = static_cast<std::int64_t>(rounded);
    if (every_ < 1) throw DomainError("checkpoint interval must be at least one step");
}

bool TimeGrid::is_checkpoint(std::int64_t step) const noexcept {
    return step == 0 || step == steps_ || step % every_ == 0;
}

Trajectory rk4_integrate(const RhsFn& f, State initial, const TimeGrid& grid) {
    const std::size_t size = initial.size();
    State u = std::move(initial);
    State k1(size), k2(size), k3(size), k4(size), tmp(size);
    const double dt = grid.dt();
    const double half = 0.5 * dt;

    Trajectory traj;
    traj.times.push_back(grid.t0());
    traj.states.push_back(u);
    for (std::int64_t step = 0; step < grid.steps(); ++step) {
        const double t = grid.time_at(step);
        f(t, u, k1);
        for (std::size_t i = 0; i < size; ++i) tmp[i] = u[i] + half * k1[i];
        f(t + half, tmp, k2);
        for (std::size_t i = 0; i < size; ++i) tmp[i] = u[i] + half * k2[i];
        f(t + half, tmp, k3);
        for (std::size_t i = 0; i < size; ++i) tmp[i] = u[i] + dt * k3[i];
        f(t + dt, tmp, k4);
        bool finite = true;
        for (std::size_t i = 0; i < size; ++i) {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            finite = finite && std::isfinite(u[i]);
        }
        if (!finite) {
            throw DivergenceError("non-finite state at step " + std::to_string(step + 1), step + 1);
        }
        if (grid.is_checkpoint(step + 1)) {
            traj.times.push_back(grid.time_at(step + 1));
            traj.states.push_back(u);
        }
    }
    return traj;
}

Trajectory rk4_integrate(SemidiscreteSystem& sys, const TimeGrid& grid) {
    const RhsFn f = [&sys](double t, std::span<const double> u, std::span<double> out) {
        rhs(t, u, sys, out);
    };
    Trajectory traj = rk4_integrate(f, sys.state(), grid);
    sys.state() = traj.states.back();
    sys.set_time(grid.t1());
    return traj;
}

State twisted_state(int q, const GridPartition& partition) {
    if (partition.d() != 1) throw DomainError("twisted states are defined for d = 1 only");
    const int n = partition.n();
    State u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / n;
        u[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * frac(q * x);
    }
    return u;
}

State twisted_state_cell_average(int q, const GridPartition& partition) {
    if (partition.d() != 1) throw DomainError("twisted states are defined for d = 1 only");
    const int n = partition.n();
    State u(static_cast<std::size_t>(n), 0.0);
    if (q == 0) return u;
    // Antiderivative of frac(s).
    auto G = [](double s) {
        const double fl = std::floor(s);
        const double fr = s - fl;
        return 0.5 * fl + 0.5 * fr * fr;
    };
    const double h = partition.h();
    for (int i = 0; i < n; ++i) {
        const double a = i * h;
        const double b = (i + 1) * h;
        u[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * (G(q * b) - G(q * a)) / (q * h);
    }
    return u;
}

State exact_kuramoto_reference(int q, double omega, double t, const GridPartition& partition) {
    State u = twisted_state(q, partition);
    for (double& x : u) x += omega * t;
    return u;
}

double discrete_l2_distance(std::span<const double> u, std::span<const double> v,
                            const GridPartition& partition) {
    if (u.size() != v.size() || u.size() != partition.cell_count()) {
        throw DomainError("state lengths do not match");
    }
    std::vector<double> sq(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) sq[i] = (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(u.size()));
}

}  // namespace nlmc
