#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nlmc {

using PointFn = std::function<double(std::span<const double>)>;

// Axis-aligned box [lo, hi) in R^dim.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const noexcept { return lo.size(); }
    double volume() const noexcept;
    static Box unit(std::size_t dim);
};

// Controls for the adaptive dyadic midpoint rule.
//
// Every box is estimated by the midpoint rule on its 2^dim children,
// Richardson-corrected against the one-point rule. A box is accepted when
// the sum of its children's estimates differs from its own by at most
// max(rel_tol * |f|_1, abs_tol) scaled by the box's share of the domain.
struct QuadratureSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-13;
    int min_depth = 2;
    int max_depth = 12;
    std::size_t max_evaluations = 50'000'000;
    // When false, depth exhaustion returns the last estimate with
    // converged == false instead of throwing ToleranceNotMet.
    bool throw_on_exhaustion = true;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    std::size_t evaluations = 0;
};

QuadratureResult integrate(const PointFn& f, const Box& box, const QuadratureSpec& spec = {});

// Sum in a fixed binary-tree order; result is independent of how the
// addends were produced.
double pairwise_sum(std::span<const double> values);

}  // namespace nlmc
