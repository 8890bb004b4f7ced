#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlmc/grid.hpp"
#include "nlmc/quadrature.hpp"

namespace nlmc {

struct BoundedKind {
    double sup_bound = 1.0;
};

// W(x,y) = |x - y|^{-exponent}, square integrable for 0 < exponent < d/2.
struct SingularKind {
    double exponent = 0.25;
};

// Indicator of dist(x, y) <= radius, with the periodic distance on [0,1) when periodic.
struct BandKind {
    double radius = 0.2;
    bool periodic = true;
};

using GraphonKind = std::variant<BoundedKind, SingularKind, BandKind>;

// Kernel W on [0,1]^d x [0,1]^d. Evaluators must be pure so that they can be
// called from several threads at once.
class Graphon {
public:
    using Evaluator = std::function<double(std::span<const double>, std::span<const double>)>;
    // Exact integral of W over xbox x ybox.
    using ProductIntegral = std::function<double(const Box&, const Box&)>;

    Graphon(int d, GraphonKind kind, Evaluator eval, bool nonnegative,
            ProductIntegral exact = {}, std::optional<double> row_bound = {});

    static Graphon constant(double value, int d = 1);
    static Graphon band(double radius, bool periodic = true);
    static Graphon singular(double exponent, int d = 1);
    // Kernel declared bounded by sup_bound; sign unknown unless stated.
    static Graphon bounded(int d, double sup_bound, Evaluator eval, bool nonnegative = false);
    // Piecewise-constant kernel taking value cells[i*N + j] on cell i x cell j.
    static Graphon piecewise_constant(const GridPartition& partition, std::vector<double> cells);

    double operator()(std::span<const double> x, std::span<const double> y) const {
        return eval_(x, y);
    }

    int d() const noexcept { return d_; }
    const GraphonKind& kind() const noexcept { return kind_; }
    bool nonnegative() const noexcept { return nonnegative_; }
    bool has_exact_integral() const noexcept { return static_cast<bool>(exact_); }
    const ProductIntegral& exact_integral() const noexcept { return exact_; }
    const Evaluator& evaluator() const noexcept { return eval_; }
    std::optional<double> row_bound() const noexcept { return row_bound_; }

    // True for case (I) kernels: declared bounded with 0 <= W <= 1.
    bool is_unit_bounded() const noexcept;

    // The kernel as a Field on [0,1]^{2d}.
    Field as_field() const;

private:
    int d_;
    GraphonKind kind_;
    Evaluator eval_;
    bool nonnegative_;
    ProductIntegral exact_;
    std::optional<double> row_bound_;
};

// alpha(n) = n^{-d gamma}, gamma in [0,1).
class SparsitySchedule {
public:
    explicit SparsitySchedule(double gamma);

    double gamma() const noexcept { return gamma_; }
    double alpha(int n, int d) const;

private:
    double gamma_;
};

// Dense n^d x n^d matrix of kernel cell averages, row-major.
struct CellKernelMatrix {
    GridPartition partition;
    std::vector<double> entries;
    std::optional<double> truncated_at;

    std::size_t size() const noexcept { return partition.cell_count(); }
    double operator()(std::size_t i, std::size_t j) const { return entries[i * size() + j]; }
};

std::pair<Graphon, Graphon> split_sign(const Graphon& w);

// Pointwise min(W, 1/alpha). W must be nonnegative.
Graphon truncate(const Graphon& w, double alpha);

// Unit-bounded kernels are averaged as-is; every other kernel is truncated
// at 1/alpha_n first. threads == 0 selects the hardware default.
CellKernelMatrix cell_matrix(const Graphon& w, const GridPartition& partition,
                             const SparsitySchedule& schedule, const QuadratureSpec& quad = {},
                             unsigned threads = 1);

// Area of {(x,y) in xbox x ybox : dist(x,y) <= radius} for d = 1.
double band_overlap_area(double x0, double x1, double y0, double y1, double radius,
                         bool periodic);

double optimal_gamma_singular(double lambda, int d);

struct SingularExponents {
    double truncation = 0.0;
    double projection = 0.0;
    double monte_carlo = 0.0;

    double overall() const;
};

SingularExponents singular_error_exponents(double lambda, int d, double gamma);

// ||W - min(W, 1/alpha)||_{L^2(Q^2)} for W = |x - y|^{-lambda}.
double singular_truncation_error(double lambda, int d, double alpha, const QuadratureSpec& quad = {});

}  // namespace nlmc
