#include "nlmc/quadrature.hpp"

#include <cmath>
#include <string>

#include "nlmc/errors.hpp"

namespace nlmc {

double Box::volume() const noexcept {
    double v = 1.0;
    for (std::size_t k = 0; k < lo.size(); ++k) v *= hi[k] - lo[k];
    return v;
}

Box Box::unit(std::size_t dim) {
    return Box{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

class AdaptiveMidpoint {
public:
    AdaptiveMidpoint(const PointFn& f, const QuadratureSpec& spec, std::size_t dim)
        : f_(f), spec_(spec), dim_(dim), children_(std::size_t{1} << dim), point_(dim) {}

    QuadratureResult run(const Box& box) {
        const double volume = box.volume();
        if (volume <= 0.0) return {};

        // Reference magnitude of |f| on a uniform grid at min_depth.
        const double ref = abs_reference(box);
        tol_density_ = std::max(spec_.rel_tol * ref, spec_.abs_tol) / volume;

        std::vector<double> width(dim_);
        for (std::size_t k = 0; k < dim_; ++k) width[k] = box.hi[k] - box.lo[k];
        const double root = estimate(box.lo, width);
        const double value = refine(box.lo, width, root, 0);

        QuadratureResult out;
        out.value = value;
        out.error_estimate = unresolved_;
        out.converged = !exhausted_;
        out.evaluations = evaluations_;
        if (!std::isfinite(value)) {
            throw DomainError("integrand is not finite on the integration box");
        }
        if (exhausted_ && spec_.throw_on_exhaustion) {
            throw ToleranceNotMet("adaptive quadrature reached max depth " +
                                      std::to_string(spec_.max_depth) +
                                      " without meeting tolerance",
                                  value);
        }
        return out;
    }

private:
    double eval(std::span<const double> x) {
        ++evaluations_;
        return f_(x);
    }

    double abs_reference(const Box& box) {
        const std::size_t per_axis = std::size_t{1} << std::max(spec_.min_depth, 0);
        std::size_t total = 1;
        for (std::size_t k = 0; k < dim_; ++k) total *= per_axis;
        std::vector<double> terms(total);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            for (std::size_t k = 0; k < dim_; ++k) {
                const std::size_t j = rem % per_axis;
                rem /= per_axis;
                const double w = (box.hi[k] - box.lo[k]) / static_cast<double>(per_axis);
                point_[k] = box.lo[k] + (static_cast<double>(j) + 0.5) * w;
            }
            const double v = eval(point_);
            terms[idx] = std::isfinite(v) ? std::abs(v) : 0.0;
        }
        return pairwise_sum(terms) / static_cast<double>(total) * box.volume();
    }

    // Richardson-corrected two-level midpoint estimate of the box integral.
    double estimate(std::span<const double> lo, std::span<const double> width) {
        double volume = 1.0;
        for (std::size_t k = 0; k < dim_; ++k) {
            point_[k] = lo[k] + 0.5 * width[k];
            volume *= width[k];
        }
        const double one_point = eval(point_) * volume;
        double sum = 0.0;
        for (std::size_t m = 0; m < children_; ++m) {
            for (std::size_t k = 0; k < dim_; ++k) {
                const double q = ((m >> k) & 1U) ? 0.75 : 0.25;
                point_[k] = lo[k] + q * width[k];
            }
            sum += eval(point_);
        }
        const double split = sum * volume / static_cast<double>(children_);
        return split + (split - one_point) / 3.0;
    }

    double refine(const std::vector<double>& lo, const std::vector<double>& width, double whole,
                  int depth) {
        std::vector<double> half(dim_);
        double volume = 1.0;
        for (std::size_t k = 0; k < dim_; ++k) {
            half[k] = 0.5 * width[k];
            volume *= width[k];
        }

        std::vector<std::vector<double>> child_lo(children_, std::vector<double>(dim_));
        std::vector<double> child_est(children_);
        double parts = 0.0;
        for (std::size_t m = 0; m < children_; ++m) {
            for (std::size_t k = 0; k < dim_; ++k) {
                child_lo[m][k] = lo[k] + (((m >> k) & 1U) ? half[k] : 0.0);
            }
            child_est[m] = estimate(child_lo[m], half);
            parts += child_est[m];
        }

        const double diff = std::abs(parts - whole);
        if (depth >= spec_.min_depth && diff <= tol_density_ * volume) return parts;
        if (depth >= spec_.max_depth || evaluations_ >= spec_.max_evaluations ||
            !std::isfinite(parts)) {
            exhausted_ = true;
            unresolved_ += diff;
            return parts;
        }
        double total = 0.0;
        for (std::size_t m = 0; m < children_; ++m) {
            total += refine(child_lo[m], half, child_est[m], depth + 1);
        }
        return total;
    }

    const PointFn& f_;
    const QuadratureSpec& spec_;
    std::size_t dim_;
    std::size_t children_;
    std::vector<double> point_;
    double tol_density_ = 0.0;
    double unresolved_ = 0.0;
    bool exhausted_ = false;
    std::size_t evaluations_ = 0;
};

}  // namespace

QuadratureResult integrate(const PointFn& f, const Box& box, const QuadratureSpec& spec) {
    if (box.lo.size() != box.hi.size() || box.lo.empty()) {
        throw DomainError("integration box has inconsistent or zero dimension");
    }
    AdaptiveMidpoint rule(f, spec, box.dim());
    return rule.run(box);
}

}  // namespace nlmc
