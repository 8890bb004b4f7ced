#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "nlmc/errors.hpp"
#include "nlmc/graphon.hpp"
#include "nlmc/sampling.hpp"
#include "nlmc/dynamics.hpp"

using namespace nlmc;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const CellKernelMatrix> band_cells(int n) {
    return std::make_shared<const CellKernelMatrix>(
        cell_matrix(Graphon::band(0.2), GridPartition(n, 1), SparsitySchedule(0.0)));
}

std::shared_ptr<const SparseGraph> complete_graph(int n) {
    const GridPartition part(n, 1);
    const CellKernelMatrix ones{part, std::vector<double>(part.cell_count() * part.cell_count(), 1.0), {}};
    return std::make_shared<const SparseGraph>(sample_graph(ones, SparsitySchedule(0.0), 1));
}

State eval_rhs(const SemidiscreteSystem& sys, std::span<const double> u, double t = 0.0) {
    State out(u.size());
    rhs(t, u, sys, out);
    return out;
}

}  // namespace

TEST_CASE("interaction probes") {
    const auto k = InteractionSpec::kuramoto(0.5);
    const auto report = probe_interaction(k, 4);
    CHECK(report.coupling_bounded);
    CHECK(report.coupling_lipschitz);
    CHECK(report.reaction_lipschitz);

    InteractionSpec bad = k;
    bad.coupling = [](double w) { return 2.0 * std::sin(w); };
    const auto r2 = probe_interaction(bad, 4);
    CHECK_FALSE(r2.coupling_bounded);
    CHECK_FALSE(r2.coupling_lipschitz);
}

TEST_CASE("rhs_sampled examples") {
    const GridPartition p2(2, 1);
    const GridPartition p4(4, 1);
    const auto empty = std::make_shared<const SparseGraph>(sample_graph(
        CellKernelMatrix{p4, std::vector<double>(16, 0.0), {}}, SparsitySchedule(0.0), 1));
    const SemidiscreteSystem s0(p4, empty, InteractionSpec::kuramoto(0.0), State(4, 0.3));
    for (double v : eval_rhs(s0, std::vector<double>{1, 2, 3, 4})) CHECK(v == 0.0);

    const SemidiscreteSystem s1(p4, complete_graph(4), InteractionSpec::kuramoto(0.0), State(4, 0.0));
    for (double v : eval_rhs(s1, std::vector<double>(4, 1.7))) CHECK(v == 0.0);

    const SemidiscreteSystem s2(p2, complete_graph(2), InteractionSpec::kuramoto(0.5), State(2, 0.0));
    const auto out = eval_rhs(s2, std::vector<double>{0.0, kPi / 2});
    CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rhs_averaged examples") {
    const GridPartition p4(4, 1);
    const auto zero = std::make_shared<const CellKernelMatrix>(CellKernelMatrix{p4, std::vector<double>(16, 0.0), {}});
    const SemidiscreteSystem s0(p4, zero, InteractionSpec::kuramoto(0.0), State(4, 0.0));
    for (double v : eval_rhs(s0, std::vector<double>{1, 5, 2, 0})) CHECK(v == 0.0);

    const SemidiscreteSystem s1(p4, band_cells(4), InteractionSpec::kuramoto(0.0), State(4, 0.0));
    for (double v : eval_rhs(s1, std::vector<double>(4, -2.0))) CHECK(v == 0.0);

    const GridPartition p128(128, 1);
    const SemidiscreteSystem tw(p128, band_cells(128), InteractionSpec::kuramoto(0.5), State(128, 0.0));
    for (double v : eval_rhs(tw, twisted_state(3, p128))) CHECK(std::abs(v - 0.5) < 1e-12);
}

TEST_CASE("system validates dimensions") {
    const GridPartition p4(4, 1);
    CHECK_THROWS_AS(SemidiscreteSystem(p4, band_cells(8), InteractionSpec::kuramoto(0.0), State(4, 0.0)),
                    DomainError);
    CHECK_THROWS_AS(SemidiscreteSystem(p4, band_cells(4), InteractionSpec::kuramoto(0.0), State(3, 0.0)),
                    DomainError);
}

TEST_CASE("sampled equals averaged for a complete graph at alpha = 1") {
    const int n = 12;
    const GridPartition part(n, 1);
    const auto ones = std::make_shared<const CellKernelMatrix>(
        cell_matrix(Graphon::constant(1.0), part, SparsitySchedule(0.0)));
    const SemidiscreteSystem avg(part, ones, InteractionSpec::kuramoto(0.3), State(n, 0.0));
    const SemidiscreteSystem smp(part, complete_graph(n), InteractionSpec::kuramoto(0.3), State(n, 0.0));
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    State x(n);
    for (double& v : x) v = u(gen);
    const auto a = eval_rhs(avg, x), b = eval_rhs(smp, x);
    for (int i = 0; i < n; ++i) CHECK(a[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(i)]);
}

TEST_CASE("translation equivariance") {
    const int n = 32;
    const GridPartition part(n, 1);
    const auto cells = band_cells(n);
    const auto graph = std::make_shared<const SparseGraph>(sample_graph(*cells, SparsitySchedule(0.4), 3));
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    State x(n);
    for (double& v : x) v = u(gen);
    for (const Coupling& c : {Coupling(cells), Coupling(graph)}) {
        const SemidiscreteSystem sys(part, c, InteractionSpec::kuramoto(0.7), State(n, 0.0));
        const auto base = eval_rhs(sys, x);
        State shifted = x;
        for (double& v : shifted) v += 1.234;
        const auto moved = eval_rhs(sys, shifted);
        for (int i = 0; i < n; ++i) {
            CHECK(moved[static_cast<std::size_t>(i)] == doctest::Approx(base[static_cast<std::size_t>(i)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("twisted state is stationary for the averaged system") {
    const GridPartition part(128, 1);
    SemidiscreteSystem sys(part, band_cells(128), InteractionSpec::kuramoto(0.0), twisted_state(3, part));
    const auto traj = rk4_integrate(sys, TimeGrid(0.0, 1.0, 0.01, 10));
    const auto u0 = twisted_state(3, part);
    for (const auto& s : traj.states) CHECK(discrete_l2_distance(s, u0, part) < 1e-10);
}

TEST_CASE("averaged jacobian-vector product") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    const GridPartition part(16, 1);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> entries(256);
        for (double& e : entries) e = w(gen);
        const auto cells = std::make_shared<const CellKernelMatrix>(CellKernelMatrix{part, entries, {}});
        const SemidiscreteSystem sys(part, cells, InteractionSpec::kuramoto(0.2), State(16, 0.0));
        State v(16), dir(16);
        for (double& x : v) x = u(gen);
        for (double& x : dir) x = u(gen);
        State jv(16), plus(16), minus(16);
        rhs_averaged_jvp(0.0, v, dir, sys, jv);
        const double eps = 1e-6;
        State vp = v, vm = v;
        for (std::size_t i = 0; i < 16; ++i) {
            vp[i] += eps * dir[i];
            vm[i] -= eps * dir[i];
        }
        rhs_averaged(0.0, vp, sys, plus);
        rhs_averaged(0.0, vm, sys, minus);
        for (std::size_t i = 0; i < 16; ++i) {
            const double fd = (plus[i] - minus[i]) / (2 * eps);
            CHECK(std::abs(fd - jv[i]) <= 1e-4 * std::max(1.0, std::abs(jv[i])));
        }
    }
}

TEST_CASE("time grid") {
    const TimeGrid g(0.0, 1.0, 0.01, 10);
    CHECK(g.steps() == 100);
    CHECK(g.is_checkpoint(0));
    CHECK(g.is_checkpoint(50));
    CHECK_FALSE(g.is_checkpoint(55));
    CHECK(g.is_checkpoint(100));
    CHECK(g.time_at(100) == 1.0);
    CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0.03), DomainError);
    CHECK_THROWS_AS(TimeGrid(0.0, -1.0, 0.01), DomainError);
}

TEST_CASE("rk4 examples") {
    const RhsFn zero = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    const auto flat = rk4_integrate(zero, State{3.5}, TimeGrid(0.0, 1.0, 0.1));
    CHECK(flat.states.size() == 11);
    for (const auto& s : flat.states) CHECK(s[0] == 3.5);

    const RhsFn grow = [](double, std::span<const double> u, std::span<double> out) { out[0] = u[0]; };
    const auto e1 = rk4_integrate(grow, State{1.0}, TimeGrid(0.0, 1.0, 0.1));
    CHECK(e1.times.back() == 1.0);
    CHECK(e1.states.back()[0] == doctest::Approx(2.7182797441351627).epsilon(1e-15));
    CHECK(std::abs(e1.states.back()[0] - std::numbers::e) < 3e-6);

    const auto e2 = rk4_integrate(grow, State{1.0}, TimeGrid(0.0, 1.0, 0.05));
    const double ratio = std::abs(e1.states.back()[0] - std::numbers::e) / std::abs(e2.states.back()[0] - std::numbers::e);
    CHECK(ratio >= 14.0);
    CHECK(ratio <= 18.0);

    const RhsFn blow = [](double, std::span<const double> u, std::span<double> out) { out[0] = u[0] * u[0]; };
    try {
        rk4_integrate(blow, State{1.0}, TimeGrid(0.0, 2.0, 0.1));
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.step() > 0);
    }
}

TEST_CASE("linear drift is exact") {
    const int n = 8;
    const GridPartition part(n, 1);
    const auto zero = std::make_shared<const CellKernelMatrix>(CellKernelMatrix{part, std::vector<double>(64, 0.0), {}});
    const State u0 = twisted_state(2, part);
    SemidiscreteSystem sys(part, zero, InteractionSpec::drift(0.75), u0);
    const auto traj = rk4_integrate(sys, TimeGrid(0.0, 1.0, 0.01, 25));
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto exact = exact_kuramoto_reference(2, 0.75, traj.times[k], part);
        for (int i = 0; i < n; ++i) {
            CHECK(traj.states[k][static_cast<std::size_t>(i)] == doctest::Approx(exact[static_cast<std::size_t>(i)]).epsilon(1e-14));
        }
    }
    CHECK(sys.time() == 1.0);
}

TEST_CASE("twisted states") {
    const GridPartition p4(4, 1);
    for (double v : twisted_state(0, p4)) CHECK(v == 0.0);
    const auto t1 = twisted_state(1, p4);
    for (int i = 0; i < 4; ++i) CHECK(t1[static_cast<std::size_t>(i)] == doctest::Approx(2 * kPi * (2 * i + 1) / 8.0));

    const GridPartition p128(128, 1);
    const auto t3 = twisted_state(3, p128);
    int drops = 0;
    for (std::size_t i = 1; i < t3.size(); ++i) {
        CHECK(t3[i] >= 0.0);
        CHECK(t3[i] < 2 * kPi);
        if (t3[i] < t3[i - 1]) ++drops;
    }
    CHECK(drops == 2);

    // Cell averages agree with midpoints away from the jump cells.
    const auto avg = twisted_state_cell_average(3, p128);
    int differing = 0;
    for (std::size_t i = 0; i < t3.size(); ++i) {
        if (std::abs(avg[i] - t3[i]) > 1e-12) ++differing;
    }
    CHECK(differing <= 3);

    CHECK_THROWS_AS(twisted_state(1, GridPartition(4, 2)), DomainError);
    CHECK_THROWS_AS(exact_kuramoto_reference(1, 0.5, 1.0, GridPartition(4, 2)), DomainError);
}

TEST_CASE("exact reference") {
    const GridPartition p(128, 1);
    const auto tw = twisted_state(3, p);
    CHECK(exact_kuramoto_reference(3, 0.5, 0.0, p) == tw);
    const auto r = exact_kuramoto_reference(3, 0.5, 1.0, p);
    for (std::size_t i = 0; i < tw.size(); ++i) CHECK(r[i] == doctest::Approx(tw[i] + 0.5));

    const auto sync = exact_kuramoto_reference(0, 1.0, 2 * kPi, GridPartition(6, 1));
    for (double v : sync) CHECK(v == doctest::Approx(2 * kPi));
    const GridPartition p6(6, 1);
    const SemidiscreteSystem sys(p6, band_cells(6), InteractionSpec::kuramoto(1.0), State(6, 0.0));
    for (double v : eval_rhs(sys, sync)) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("discrete L2 distance") {
    const GridPartition p4(4, 1);
    const State u{1, 2, 3, 4};
    CHECK(discrete_l2_distance(u, u, p4) == 0.0);
    CHECK(discrete_l2_distance(u, State{1.5, 2.5, 3.5, 4.5}, p4) == doctest::Approx(0.5));
    CHECK(discrete_l2_distance(State{1, -1, 1, -1}, State(4, 0.0), p4) == doctest::Approx(1.0));
    CHECK_THROWS_AS(discrete_l2_distance(u, State{1, 2}, p4), DomainError);
}
