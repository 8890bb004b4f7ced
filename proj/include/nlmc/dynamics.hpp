#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "nlmc/graphon.hpp"
#include "nlmc/grid.hpp"
#include "nlmc/sampling.hpp"

namespace nlmc {

using State = std::vector<double>;

// Coupling function D and local reaction f of the nonlocal equation.
struct InteractionSpec {
    std::function<double(double)> coupling;             // D(w), |D| <= 1
    std::function<double(double)> coupling_derivative;  // D'(w), optional
    double coupling_lipschitz = 1.0;
    // f(u, cell rank, t), already cell-averaged.
    std::function<double(double, std::size_t, double)> reaction;
    std::function<double(double, std::size_t, double)> reaction_derivative;  // df/du, optional
    double reaction_lipschitz = 0.0;

    // D(w) = -sin(w), f = omega: the Kuramoto right-hand side.
    static InteractionSpec kuramoto(double omega);
    // D = 0, f = omega.
    static InteractionSpec drift(double omega);
};

struct ProbeReport {
    bool coupling_bounded = true;
    bool coupling_lipschitz = true;
    bool reaction_lipschitz = true;
};

// Checks |D| <= 1 and the declared Lipschitz constants on a 10^4-point probe of [-4pi, 4pi].
ProbeReport probe_interaction(const InteractionSpec& spec, std::size_t cells);

using Coupling = std::variant<std::shared_ptr<const SparseGraph>, std::shared_ptr<const CellKernelMatrix>>;

class SemidiscreteSystem {
public:
    SemidiscreteSystem(GridPartition partition, Coupling coupling, InteractionSpec interaction,
                       State initial, double t0 = 0.0);

    const GridPartition& partition() const noexcept { return partition_; }
    const Coupling& coupling() const noexcept { return coupling_; }
    const InteractionSpec& interaction() const noexcept { return interaction_; }
    const State& state() const noexcept { return state_; }
    State& state() noexcept { return state_; }
    double time() const noexcept { return time_; }
    void set_time(double t) noexcept { time_ = t; }

    bool is_sampled() const noexcept {
        return std::holds_alternative<std::shared_ptr<const SparseGraph>>(coupling_);
    }

private:
    GridPartition partition_;
    Coupling coupling_;
    InteractionSpec interaction_;
    State state_;
    double time_;
};

// du_i = f(u_i, t) + (alpha_n n^d)^{-1} sum_{j : (i,j) edge} D(u_j - u_i)
void rhs_sampled(double t, std::span<const double> u, const SemidiscreteSystem& sys,
                 std::span<double> out);

// dv_i = f(v_i, t) + n^{-d} sum_j W_ij D(v_j - v_i)
void rhs_averaged(double t, std::span<const double> v, const SemidiscreteSystem& sys,
                  std::span<double> out);

// Dispatches on the coupling held by the system.
void rhs(double t, std::span<const double> u, const SemidiscreteSystem& sys, std::span<double> out);

// Directional derivative of rhs_averaged at v along dir, using D'.
void rhs_averaged_jvp(double t, std::span<const double> v, std::span<const double> dir,
                      const SemidiscreteSystem& sys, std::span<double> out);

class TimeGrid {
public:
    // checkpoint_every: store a snapshot every that many steps (t0 and t1 always stored).
    TimeGrid(double t0, double t1, double dt, std::int64_t checkpoint_every = 1);

    double t0() const noexcept { return t0_; }
    double t1() const noexcept { return t1_; }
    double dt() const noexcept { return dt_; }
    std::int64_t steps() const noexcept { return steps_; }
    bool is_checkpoint(std::int64_t step) const noexcept;
    double time_at(std::int64_t step) const noexcept { return t0_ + static_cast<double>(step) * dt_; }

private:
    double t0_;
    double t1_;
    double dt_;
    std::int64_t steps_;
    std::int64_t every_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
};

using RhsFn = std::function<void(double, std::span<const double>, std::span<double>)>;

// Classical fixed-step RK4 on the raw ODE u' = F(t, u).
Trajectory rk4_integrate(const RhsFn& f, State initial, const TimeGrid& grid);

// Integrates the system in place (state and time advance to t1).
Trajectory rk4_integrate(SemidiscreteSystem& sys, const TimeGrid& grid);

// 2 pi ((q x_i) mod 1) at cell midpoints.
State twisted_state(int q, const GridPartition& partition);

// Exact cell averages of the twisted profile.
State twisted_state_cell_average(int q, const GridPartition& partition);

// Unwrapped travelling wave: twisted_state + omega t.
State exact_kuramoto_reference(int q, double omega, double t, const GridPartition& partition);

// (n^{-d} sum (u_i - v_i)^2)^{1/2}: the L^2(Q) distance of the step functions.
double discrete_l2_distance(std::span<const double> u, std::span<const double> v,
                            const GridPartition& partition);

}  // namespace nlmc
