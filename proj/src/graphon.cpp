#include "nlmc/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "nlmc/errors.hpp"
#include "nlmc/parallel.hpp"

namespace nlmc {

namespace {

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
    return std::sqrt(s);
}

Box first_half(const Box& b, std::size_t d) {
    return Box{{b.lo.begin(), b.lo.begin() + static_cast<std::ptrdiff_t>(d)},
               {b.hi.begin(), b.hi.begin() + static_cast<std::ptrdiff_t>(d)}};
}

Box second_half(const Box& b, std::size_t d) {
    return Box{{b.lo.begin() + static_cast<std::ptrdiff_t>(d), b.lo.end()},
               {b.hi.begin() + static_cast<std::ptrdiff_t>(d), b.hi.end()}};
}

// Length of [y0, y1] intersected with [c - r, c + r].
double clipped_length(double y0, double y1, double c, double r) {
    return std::max(0.0, std::min(y1, c + r) - std::max(y0, c - r));
}

}  // namespace

Graphon::Graphon(int d, GraphonKind kind, Evaluator eval, bool nonnegative, ProductIntegral exact,
                 std::optional<double> row_bound)
    : d_(d),
      kind_(kind),
      eval_(std::move(eval)),
      nonnegative_(nonnegative),
      exact_(std::move(exact)),
      row_bound_(row_bound) {
    if (d_ < 1) throw DomainError("graphon dimension must be positive");
    if (const auto* s = std::get_if<SingularKind>(&kind_)) {
        if (!(s->exponent > 0.0 && s->exponent < 0.5 * d_)) {
            throw DomainError("singular exponent must lie in (0, d/2)");
        }
    }
    if (const auto* b = std::get_if<BandKind>(&kind_)) {
        if (d_ != 1) throw DomainError("band kernels are defined for d = 1");
        if (!(b->radius >= 0.0 && b->radius < 0.5)) {
            throw DomainError("band radius must lie in [0, 1/2)");
        }
    }
}

Graphon Graphon::constant(double value, int d) {
    auto eval = [value](std::span<const double>, std::span<const double>) { return value; };
    auto exact = [value](const Box& bx, const Box& by) { return value * (bx.volume() * by.volume()); };
    return Graphon(d, BoundedKind{std::abs(value)}, eval, value >= 0.0, exact, std::abs(value));
}

Graphon Graphon::band(double radius, bool periodic) {
    auto eval = [radius, periodic](std::span<const double> x, std::span<const double> y) {
        double dist = std::abs(y[0] - x[0]);
        if (periodic) dist = std::min(dist, 1.0 - dist);
        return dist <= radius ? 1.0 : 0.0;
    };
    auto exact = [radius, periodic](const Box& bx, const Box& by) {
        return band_overlap_area(bx.lo[0], bx.hi[0], by.lo[0], by.hi[0], radius, periodic);
    };
    return Graphon(1, BandKind{radius, periodic}, eval, true, exact,
                   periodic ? std::min(1.0, 2.0 * radius) : 2.0 * radius);
}

Graphon Graphon::singular(double exponent, int d) {
    auto eval = [exponent](std::span<const double> x, std::span<const double> y) {
        return std::pow(euclidean_distance(x, y), -exponent);
    };
    return Graphon(d, SingularKind{exponent}, eval, true);
}

Graphon Graphon::bounded(int d, double sup_bound, Evaluator eval, bool nonnegative) {
    if (!(sup_bound >= 0.0)) throw DomainError("sup bound must be nonnegative");
    return Graphon(d, BoundedKind{sup_bound}, std::move(eval), nonnegative);
}

Graphon Graphon::piecewise_constant(const GridPartition& partition, std::vector<double> cells) {
    const int d = partition.d();
    const GridPartition joint(partition.n(), 2 * d);
    const StepFunction step(joint, std::move(cells));
    const Field field = step.as_field();
    double sup = 0.0;
    bool nonneg = true;
    for (double v : step.values()) {
        sup = std::max(sup, std::abs(v));
        nonneg = nonneg && v >= 0.0;
    }
    const auto ud = static_cast<std::size_t>(d);
    auto eval = [field, ud](std::span<const double> x, std::span<const double> y) {
        std::vector<double> xy(2 * ud);
        std::copy(x.begin(), x.end(), xy.begin());
        std::copy(y.begin(), y.end(), xy.begin() + static_cast<std::ptrdiff_t>(ud));
        return field.eval(xy);
    };
    auto exact = [field](const Box& bx, const Box& by) {
        Box joint_box = bx;
        joint_box.lo.insert(joint_box.lo.end(), by.lo.begin(), by.lo.end());
        joint_box.hi.insert(joint_box.hi.end(), by.hi.begin(), by.hi.end());
        return field.box_integral(joint_box);
    };
    return Graphon(d, BoundedKind{sup}, eval, nonneg, exact);
}

bool Graphon::is_unit_bounded() const noexcept {
    if (std::holds_alternative<BandKind>(kind_)) return true;
    if (const auto* b = std::get_if<BoundedKind>(&kind_)) {
        return nonnegative_ && b->sup_bound <= 1.0;
    }
    return false;
}

Field Graphon::as_field() const {
    const auto d = static_cast<std::size_t>(d_);
    Field f;
    f.dim = 2 * d;
    f.eval = [eval = eval_, d](std::span<const double> xy) {
        return eval(xy.first(d), xy.subspan(d));
    };
    if (exact_) {
        f.box_integral = [exact = exact_, d](const Box& b) {
            return exact(first_half(b, d), second_half(b, d));
        };
    }
    return f;
}

SparsitySchedule::SparsitySchedule(double gamma) : gamma_(gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("sparsity exponent must lie in [0,1)");
}

double SparsitySchedule::alpha(int n, int d) const {
    if (n < 1 || d < 1) throw DomainError("sparsity schedule needs n >= 1 and d >= 1");
    return std::pow(static_cast<double>(n), -static_cast<double>(d) * gamma_);
}

std::pair<Graphon, Graphon> split_sign(const Graphon& w) {
    if (w.nonnegative()) return {w, Graphon::constant(0.0, w.d())};
    const auto eval = w.evaluator();
    GraphonKind kind = w.kind();
    auto pos = [eval](std::span<const double> x, std::span<const double> y) {
        return std::max(eval(x, y), 0.0);
    };
    auto neg = [eval](std::span<const double> x, std::span<const double> y) {
        return std::max(-eval(x, y), 0.0);
    };
    return {Graphon(w.d(), kind, pos, true), Graphon(w.d(), kind, neg, true)};
}

Graphon truncate(const Graphon& w, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("truncation needs alpha in (0,1]");
    if (!w.nonnegative()) {
        // Probe for negative values; callers must split the sign first.
        std::mt19937_64 rng(0x5eed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const auto d = static_cast<std::size_t>(w.d());
        std::vector<double> x(d), y(d);
        for (int s = 0; s < 4096; ++s) {
            for (std::size_t k = 0; k < d; ++k) {
                x[k] = unif(rng);
                y[k] = unif(rng);
            }
            if (w(x, y) < 0.0) {
                throw PreconditionError("cannot truncate a kernel with negative values; split_sign first");
            }
        }
    }
    const double cap = 1.0 / alpha;
    bool below_cap = std::holds_alternative<BandKind>(w.kind()) && cap >= 1.0;
    if (const auto* b = std::get_if<BoundedKind>(&w.kind())) below_cap = b->sup_bound <= cap;
    if (below_cap) {
        return Graphon(w.d(), BoundedKind{cap}, w.evaluator(), true, w.exact_integral(), w.row_bound());
    }
    auto eval = [inner = w.evaluator(), cap](std::span<const double> x, std::span<const double> y) {
        return std::min(inner(x, y), cap);
    };
    return Graphon(w.d(), BoundedKind{cap}, eval, true);
}

CellKernelMatrix cell_matrix(const Graphon& w, const GridPartition& partition,
                             const SparsitySchedule& schedule, const QuadratureSpec& quad,
                             unsigned threads) {
    if (w.d() != partition.d()) throw DomainError("graphon dimension does not match partition");
    const double alpha = schedule.alpha(partition.n(), partition.d());

    std::optional<double> truncated_at;
    const Graphon kernel = [&]() {
        if (w.is_unit_bounded()) {
            if (!w.nonnegative()) truncate(w, 1.0);  // sign probe only
            return w;
        }
        truncated_at = 1.0 / alpha;
        return truncate(w, alpha);
    }();

    const std::size_t size = partition.cell_count();
    CellKernelMatrix out{partition, std::vector<double>(size * size, 0.0), truncated_at};
    std::vector<Box> boxes(size);
    for (std::size_t r = 0; r < size; ++r) boxes[r] = partition.cell_box(r);
    const Field field = kernel.as_field();

    parallel_for(size, threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < size; ++j) {
            double integral = 0.0;
            if (kernel.has_exact_integral()) {
                integral = kernel.exact_integral()(boxes[i], boxes[j]);
            } else {
                Box joint = boxes[i];
                joint.lo.insert(joint.lo.end(), boxes[j].lo.begin(), boxes[j].lo.end());
                joint.hi.insert(joint.hi.end(), boxes[j].hi.begin(), boxes[j].hi.end());
                try {
                    integral = integrate(field.eval, joint, quad).value;
                } catch (const ToleranceNotMet& e) {
                    throw ToleranceNotMet("cell matrix entry (" + std::to_string(i + 1) + ", " +
                                              std::to_string(j + 1) + "): " + e.what(),
                                          e.last_estimate());
                }
            }
            const double entry = integral / (boxes[i].volume() * boxes[j].volume());
            if (entry < -1e-12) {
                throw PreconditionError("cell matrix entry is negative; split_sign first");
            }
            out.entries[i * size + j] = std::max(entry, 0.0);
        }
    });
    return out;
}

double band_overlap_area(double x0, double x1, double y0, double y1, double radius, bool periodic) {
    if (!(x1 > x0) || !(y1 > y0)) return 0.0;
    double area = 0.0;
    const int kmin = periodic ? -1 : 0;
    const int kmax = periodic ? 1 : 0;
    for (int k = kmin; k <= kmax; ++k) {
        const double shift = static_cast<double>(k);
        // The overlap length is piecewise linear in x with kinks where an
        // end of the band window crosses an end of [y0, y1].
        std::vector<double> knots{x0, x1};
        for (double edge : {y0 - shift - radius, y0 - shift + radius, y1 - shift - radius,
                            y1 - shift + radius}) {
            if (edge > x0 && edge < x1) knots.push_back(edge);
        }
        std::sort(knots.begin(), knots.end());
        for (std::size_t m = 0; m + 1 < knots.size(); ++m) {
            const double a = knots[m];
            const double b = knots[m + 1];
            const double la = clipped_length(y0, y1, a + shift, radius);
            const double lb = clipped_length(y0, y1, b + shift, radius);
            area += 0.5 * (la + lb) * (b - a);
        }
    }
    return area;
}

double optimal_gamma_singular(double lambda, int d) {
    if (d < 1) throw DomainError("dimension must be positive");
    // The closed end admits the limiting exponent d/2.
    if (!(lambda > 0.0 && lambda <= 0.5 * d)) throw DomainError("lambda must lie in (0, d/2]");
    return 2.0 * lambda / (static_cast<double>(d) * (d + 2));
}

double SingularExponents::overall() const {
    return std::min({truncation, projection, monte_carlo});
}

SingularExponents singular_error_exponents(double lambda, int d, double gamma) {
    if (d < 1) throw DomainError("dimension must be positive");
    if (!(lambda > 0.0 && lambda < 0.5 * d)) throw DomainError("lambda must lie in (0, d/2)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in [0,1)");
    const double dd = static_cast<double>(d);
    return SingularExponents{
        dd * gamma * (dd / (2.0 * lambda) - 1.0),
        1.0 - dd * gamma * (1.0 + 1.0 / lambda),
        dd * (1.0 - gamma) / 2.0,
    };
}

double singular_truncation_error(double lambda, int d, double alpha, const QuadratureSpec& quad) {
    if (d < 1) throw DomainError("dimension must be positive");
    if (!(lambda > 0.0 && lambda < 0.5 * d)) throw DomainError("lambda must lie in (0, d/2)");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0,1]");
    const double cap = 1.0 / alpha;
    // W exceeds the cap only for |x - y| < radius.
    const double radius = std::pow(cap, -1.0 / lambda);
    const double reach = std::min(radius, 1.0);
    const auto ud = static_cast<std::size_t>(d);

    // The integrand depends on u = x - y only; integrating out the sum
    // direction leaves the weight prod_k (1 - |u_k|) on [-1,1]^d. By symmetry
    // one orthant suffices, and u_k = reach * s_k^m with m(1 - 2 lambda/d) = 4
    // leaves a bounded integrand.
    const double m = 4.0 / (1.0 - 2.0 * lambda / d);
    const PointFn integrand = [&](std::span<const double> s) {
        double jacobian = 1.0;
        double weight = 1.0;
        double r2 = 0.0;
        for (std::size_t k = 0; k < ud; ++k) {
            const double u = reach * std::pow(s[k], m);
            jacobian *= m * reach * std::pow(s[k], m - 1.0);
            weight *= 1.0 - u;
            r2 += u * u;
        }
        if (jacobian == 0.0 || r2 == 0.0) return 0.0;
        const double excess = std::pow(r2, -0.5 * lambda) - cap;
        return excess > 0.0 ? excess * excess * weight * jacobian : 0.0;
    };
    const double orthant = integrate(integrand, Box::unit(ud), quad).value;
    return std::sqrt(std::ldexp(orthant, d));
}

}  // namespace nlmc
