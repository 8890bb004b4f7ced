#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nlmc/quadrature.hpp"

namespace nlmc {

// Exact integral of a function over a box, when one is known in closed form.
using BoxIntegralFn = std::function<double(const Box&)>;

// Scalar function on [0,1]^dim with an optional closed-form box integral.
struct Field {
    std::size_t dim = 1;
    PointFn eval;
    BoxIntegralFn box_integral;
    // Known kink or jump coordinates per axis; integrals are split there.
    std::vector<std::vector<double>> breakpoints;

    double operator()(std::span<const double> x) const { return eval(x); }
};

// One-based cell index (i_1, ..., i_d), each component in [1, n].
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> indices) : indices_(std::move(indices)) {}

    std::size_t dim() const noexcept { return indices_.size(); }
    int operator[](std::size_t k) const { return indices_[k]; }
    const std::vector<int>& indices() const noexcept { return indices_; }

    bool operator==(const MultiIndex&) const = default;

private:
    std::vector<int> indices_;
};

// Uniform partition of [0,1]^d into n^d half-open cells of width h = 1/n.
class GridPartition {
public:
    GridPartition(int n, int d);

    int n() const noexcept { return n_; }
    int d() const noexcept { return d_; }
    double h() const noexcept { return 1.0 / static_cast<double>(n_); }
    std::size_t cell_count() const noexcept { return cells_; }

    // Row-major rank with i_1 most significant.
    std::size_t rank(const MultiIndex& idx) const;
    MultiIndex unrank(std::size_t rank) const;

    Box cell_box(const MultiIndex& idx) const;
    Box cell_box(std::size_t rank) const;
    std::vector<double> cell_midpoint(std::size_t rank) const;

    bool operator==(const GridPartition&) const = default;

private:
    int n_;
    int d_;
    std::size_t cells_;
};

// Piecewise-constant function on a GridPartition.
class StepFunction {
public:
    StepFunction(GridPartition partition, std::vector<double> values);

    const GridPartition& partition() const noexcept { return partition_; }
    std::span<const double> values() const noexcept { return values_; }
    double value(std::size_t rank) const { return values_[rank]; }

    double operator()(std::span<const double> x) const;
    double l2_norm() const;

    // View as a Field with exact box integrals.
    Field as_field() const;

private:
    GridPartition partition_;
    std::vector<double> values_;
};

MultiIndex cell_of(std::span<const double> x, const GridPartition& partition);

// n^d times the integral of phi over the cell; exact when phi carries a box integral.
double cell_average(const Field& phi, const MultiIndex& idx, const GridPartition& partition,
                    const QuadratureSpec& quad = {});

StepFunction project_step(const Field& phi, int n, const QuadratureSpec& quad = {});

double lp_error(const Field& phi, const StepFunction& approx, double p,
                const QuadratureSpec& quad = {});

struct ModulusProbe {
    int shifts_per_axis = 32;
};

// Lower estimate of the L^p modulus of continuity at delta by probing a
// finite shift set in [-delta, delta]^d.
double lp_modulus(const Field& phi, double delta, double p, const ModulusProbe& probe = {},
                  const QuadratureSpec& quad = {});

struct BoxCountResult {
    std::vector<int> levels;
    std::vector<std::int64_t> counts;
    double beta = 0.0;
    // Fewer than two levels with a positive count; beta reported as 0.
    bool flat = false;
};

// Counts cells whose sample points see both indicator values, then fits the
// box-counting exponent. Sampling can only undercount straddling cells.
BoxCountResult box_counting(const Field& indicator, std::span<const int> levels);

// Least-squares slope of ys against xs.
double least_squares_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace nlmc
