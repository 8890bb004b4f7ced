#include "nlmc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlmc/errors.hpp"

namespace nlmc {

namespace {

std::vector<Box> split_at_breakpoints(const Box& box, const std::vector<std::vector<double>>& breaks) {
    std::vector<Box> pieces{box};
    for (std::size_t k = 0; k < breaks.size() && k < box.dim(); ++k) {
        for (double c : breaks[k]) {
            std::vector<Box> next;
            for (Box& b : pieces) {
                if (c > b.lo[k] && c < b.hi[k]) {
                    Box left = b;
                    left.hi[k] = c;
                    b.lo[k] = c;
                    next.push_back(std::move(left));
                }
                next.push_back(std::move(b));
            }
            pieces = std::move(next);
        }
    }
    return pieces;
}

}  // namespace

GridPartition::GridPartition(int n, int d) : n_(n), d_(d), cells_(1) {
    if (n < 1) throw DomainError("partition needs at least one cell per axis");
    if (d < 1) throw DomainError("partition dimension must be positive");
    for (int k = 0; k < d; ++k) cells_ *= static_cast<std::size_t>(n);
}

std::size_t GridPartition::rank(const MultiIndex& idx) const {
    if (idx.dim() != static_cast<std::size_t>(d_)) {
        throw DomainError("multi-index dimension does not match partition");
    }
    std::size_t r = 0;
    for (std::size_t k = 0; k < idx.dim(); ++k) {
        if (idx[k] < 1 || idx[k] > n_) throw DomainError("multi-index component out of [1, n]");
        r = r * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx[k] - 1);
    }
    return r;
}

MultiIndex GridPartition::unrank(std::size_t rank) const {
    if (rank >= cells_) throw DomainError("cell rank out of range");
    std::vector<int> idx(static_cast<std::size_t>(d_));
    for (int k = d_ - 1; k >= 0; --k) {
        idx[static_cast<std::size_t>(k)] = static_cast<int>(rank % static_cast<std::size_t>(n_)) + 1;
        rank /= static_cast<std::size_t>(n_);
    }
    return MultiIndex(std::move(idx));
}

Box GridPartition::cell_box(const MultiIndex& idx) const {
    Box b{std::vector<double>(idx.dim()), std::vector<double>(idx.dim())};
    const double nn = static_cast<double>(n_);
    for (std::size_t k = 0; k < idx.dim(); ++k) {
        b.lo[k] = static_cast<double>(idx[k] - 1) / nn;
        b.hi[k] = static_cast<double>(idx[k]) / nn;
    }
    return b;
}

Box GridPartition::cell_box(std::size_t rank) const { return cell_box(unrank(rank)); }

std::vector<double> GridPartition::cell_midpoint(std::size_t rank) const {
    const MultiIndex idx = unrank(rank);
    std::vector<double> x(idx.dim());
    for (std::size_t k = 0; k < idx.dim(); ++k) {
        x[k] = (static_cast<double>(idx[k]) - 0.5) / static_cast<double>(n_);
    }
    return x;
}

StepFunction::StepFunction(GridPartition partition, std::vector<double> values)
    : partition_(partition), values_(std::move(values)) {
    if (values_.size() != partition_.cell_count()) {
        throw DomainError("step function needs one value per cell");
    }
}

double StepFunction::operator()(std::span<const double> x) const {
    return values_[partition_.rank(cell_of(x, partition_))];
}

double StepFunction::l2_norm() const {
    std::vector<double> sq(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) sq[i] = values_[i] * values_[i];
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(values_.size()));
}

Field StepFunction::as_field() const {
    // Captures by value; the field outlives this object safely.
    auto self = *this;
    Field f;
    f.dim = static_cast<std::size_t>(partition_.d());
    f.eval = [self](std::span<const double> x) { return self(x); };
    std::vector<double> faces;
    for (int i = 1; i < partition_.n(); ++i) faces.push_back(static_cast<double>(i) / partition_.n());
    f.breakpoints.assign(f.dim, faces);
    f.box_integral = [self](const Box& box) {
        const GridPartition& part = self.partition();
        const int n = part.n();
        const std::size_t d = box.dim();
        // Index range of cells overlapped by the box along each axis.
        std::vector<int> first(d), last(d);
        for (std::size_t k = 0; k < d; ++k) {
            first[k] = std::clamp(static_cast<int>(std::floor(box.lo[k] * n)), 0, n - 1);
            last[k] = std::clamp(static_cast<int>(std::ceil(box.hi[k] * n)) - 1, 0, n - 1);
        }
        std::vector<int> cur = first;
        double total = 0.0;
        while (true) {
            double overlap = 1.0;
            std::size_t r = 0;
            for (std::size_t k = 0; k < d; ++k) {
                const double a = std::max(box.lo[k], static_cast<double>(cur[k]) / n);
                const double b = std::min(box.hi[k], static_cast<double>(cur[k] + 1) / n);
                overlap *= std::max(0.0, b - a);
                r = r * static_cast<std::size_t>(n) + static_cast<std::size_t>(cur[k]);
            }
            total += overlap * self.value(r);
            bool done = true;
            for (std::size_t k = d; k-- > 0;) {
                if (cur[k] < last[k]) {
                    ++cur[k];
                    done = false;
                    break;
                }
                cur[k] = first[k];
            }
            if (done) return total;
        }
    };
    return f;
}

MultiIndex cell_of(std::span<const double> x, const GridPartition& partition) {
    if (x.size() != static_cast<std::size_t>(partition.d())) {
        throw DomainError("point dimension does not match partition");
    }
    std::vector<int> idx(x.size());
    const int n = partition.n();
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] >= 0.0 && x[k] <= 1.0)) {
            throw DomainError("coordinate " + std::to_string(x[k]) + " outside [0,1]");
        }
        const int i = static_cast<int>(std::floor(x[k] * static_cast<double>(n)));
        idx[k] = std::min(i, n - 1) + 1;
    }
    return MultiIndex(std::move(idx));
}

double cell_average(const Field& phi, const MultiIndex& idx, const GridPartition& partition,
                    const QuadratureSpec& quad) {
    if (phi.dim != static_cast<std::size_t>(partition.d())) {
        throw DomainError("field dimension does not match partition");
    }
    const Box cell = partition.cell_box(idx);
    const double volume = cell.volume();
    if (phi.box_integral) return phi.box_integral(cell) / volume;
    std::vector<double> pieces;
    for (const Box& piece : split_at_breakpoints(cell, phi.breakpoints)) {
        pieces.push_back(integrate(phi.eval, piece, quad).value);
    }
    return pairwise_sum(pieces) / volume;
}

StepFunction project_step(const Field& phi, int n, const QuadratureSpec& quad) {
    GridPartition part(n, static_cast<int>(phi.dim));
    std::vector<double> values(part.cell_count());
    for (std::size_t r = 0; r < values.size(); ++r) {
        values[r] = cell_average(phi, part.unrank(r), part, quad);
    }
    return StepFunction(part, std::move(values));
}

double lp_error(const Field& phi, const StepFunction& approx, double p, const QuadratureSpec& quad) {
    if (!(p >= 1.0)) throw DomainError("L^p error needs p >= 1");
    const GridPartition& part = approx.partition();
    if (phi.dim != static_cast<std::size_t>(part.d())) {
        throw DomainError("field dimension does not match step function");
    }
    std::vector<double> per_cell(part.cell_count());
    for (std::size_t r = 0; r < per_cell.size(); ++r) {
        const double c = approx.value(r);
        const PointFn integrand = [&](std::span<const double> x) {
            return std::pow(std::abs(phi.eval(x) - c), p);
        };
        std::vector<double> pieces;
        for (const Box& piece : split_at_breakpoints(part.cell_box(r), phi.breakpoints)) {
            pieces.push_back(integrate(integrand, piece, quad).value);
        }
        per_cell[r] = pairwise_sum(pieces);
    }
    return std::pow(std::max(pairwise_sum(per_cell), 0.0), 1.0 / p);
}

double lp_modulus(const Field& phi, double delta, double p, const ModulusProbe& probe,
                  const QuadratureSpec& quad) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw DomainError("modulus shift bound must lie in (0,1); Q_xi is empty otherwise");
    }
    if (!(p >= 1.0)) throw DomainError("L^p modulus needs p >= 1");
    if (probe.shifts_per_axis < 2) throw DomainError("modulus probe needs at least 2 shifts per axis");

    const std::size_t d = phi.dim;
    const int m = probe.shifts_per_axis;
    std::vector<double> axis(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        axis[static_cast<std::size_t>(j)] = -delta + 2.0 * delta * j / (m - 1);
    }

    auto norm_for_shift = [&](const std::vector<double>& xi) {
        Box region{std::vector<double>(d), std::vector<double>(d)};
        for (std::size_t k = 0; k < d; ++k) {
            region.lo[k] = std::max(0.0, -xi[k]);
            region.hi[k] = std::min(1.0, 1.0 - xi[k]);
        }
        std::vector<double> shifted(d);
        const PointFn integrand = [&](std::span<const double> x) {
            for (std::size_t k = 0; k < d; ++k) shifted[k] = x[k] + xi[k];
            return std::pow(std::abs(phi.eval(shifted) - phi.eval(x)), p);
        };
        // phi(x + xi) breaks where x = b - xi.
        std::vector<std::vector<double>> breaks = phi.breakpoints;
        for (std::size_t k = 0; k < breaks.size() && k < d; ++k) {
            const std::size_t m = breaks[k].size();
            for (std::size_t j = 0; j < m; ++j) breaks[k].push_back(breaks[k][j] - xi[k]);
        }
        std::vector<double> pieces;
        for (const Box& piece : split_at_breakpoints(region, breaks)) {
            pieces.push_back(integrate(integrand, piece, quad).value);
        }
        return std::pow(std::max(pairwise_sum(pieces), 0.0), 1.0 / p);
    };

    double best = norm_for_shift(std::vector<double>(d, delta));
    std::vector<std::size_t> digit(d, 0);
    std::vector<double> xi(d);
    while (true) {
        for (std::size_t k = 0; k < d; ++k) xi[k] = axis[digit[k]];
        best = std::max(best, norm_for_shift(xi));
        std::size_t k = 0;
        while (k < d && ++digit[k] == axis.size()) digit[k++] = 0;
        if (k == d) break;
    }
    return best;
}

BoxCountResult box_counting(const Field& indicator, std::span<const int> levels) {
    if (levels.size() < 2) throw DomainError("box counting needs at least two levels");
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (levels[i] <= levels[i - 1]) throw DomainError("box counting levels must increase");
    }
    const std::size_t d = indicator.dim;
    constexpr int kSub = 4;
    constexpr double kInset = 1e-9;

    BoxCountResult out;
    out.levels.assign(levels.begin(), levels.end());
    for (const int n : levels) {
        GridPartition part(n, static_cast<int>(d));
        const double h = part.h();
        std::int64_t count = 0;
        std::vector<double> x(d);
        for (std::size_t r = 0; r < part.cell_count(); ++r) {
            const Box cell = part.cell_box(r);
            bool seen0 = false;
            bool seen1 = false;
            auto sample = [&]() {
                (indicator.eval(x) > 0.5 ? seen1 : seen0) = true;
            };
            std::size_t sub_total = 1;
            for (std::size_t k = 0; k < d; ++k) sub_total *= kSub;
            for (std::size_t s = 0; s < sub_total && !(seen0 && seen1); ++s) {
                std::size_t rem = s;
                for (std::size_t k = 0; k < d; ++k) {
                    x[k] = cell.lo[k] + (static_cast<double>(rem % kSub) + 0.5) * h / kSub;
                    rem /= kSub;
                }
                sample();
            }
            // Corners, pulled just inside the half-open cell.
            for (std::size_t c = 0; c < (std::size_t{1} << d) && !(seen0 && seen1); ++c) {
                for (std::size_t k = 0; k < d; ++k) {
                    x[k] = ((c >> k) & 1U) ? cell.hi[k] - kInset * h : cell.lo[k] + kInset * h;
                }
                sample();
            }
            if (seen0 && seen1) ++count;
        }
        out.counts.push_back(count);
    }

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (out.counts[i] > 0) {
            xs.push_back(std::log(static_cast<double>(levels[i])));
            ys.push_back(std::log(static_cast<double>(out.counts[i])));
        }
    }
    if (xs.size() < 2) {
        out.flat = true;
        out.beta = 0.0;
    } else {
        out.beta = least_squares_slope(xs, ys);
    }
    return out;
}

double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw DomainError("slope fit needs at least two paired points");
    }
    const double m = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw DomainError("slope fit needs distinct abscissae");
    return sxy / sxx;
}

}  // namespace nlmc
