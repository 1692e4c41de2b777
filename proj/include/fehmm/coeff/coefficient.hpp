#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "fehmm/coeff/expr.hpp"
#include "fehmm/error.hpp"
#include "fehmm/fem/quadrature.hpp"

namespace fehmm::coeff {

/// Scalar coefficient a(t, x, s, y), 1-periodic in s and in y over Y = (-1/2, 1/2),
/// with declared coercivity bound lambda_min and upper bound lambda_max.
class MultiscaleCoefficient {
public:
    MultiscaleCoefficient(Expr expr, double lambda_min, double lambda_max)
        : expr_(std::move(expr)), lambda_min_(lambda_min), lambda_max_(lambda_max) {
        if (!(lambda_min > 0.0) || !(lambda_min <= lambda_max) || !std::isfinite(lambda_max))
            throw InputError("coefficient bounds must satisfy 0 < lambda_min <= lambda_max, got [" +
                             std::to_string(lambda_min) + ", " + std::to_string(lambda_max) + "]");
    }

    MultiscaleCoefficient(std::string_view source, double lambda_min, double lambda_max)
        : MultiscaleCoefficient(parse(source), lambda_min, lambda_max) {}

    static MultiscaleCoefficient constant(double c) { return {Expr::constant(c), c, c}; }

    double operator()(double t, double x, double s, double y) const { return expr_.evaluate({t, x, s, y}); }

    const Expr& expr() const noexcept { return expr_; }
    double lambda_min() const noexcept { return lambda_min_; }
    double lambda_max() const noexcept { return lambda_max_; }

    bool depends_on_t() const { return expr_.depends_on(Variable::t); }
    bool depends_on_x() const { return expr_.depends_on(Variable::x); }
    bool depends_on_s() const { return expr_.depends_on(Variable::s); }
    bool depends_on_y() const { return expr_.depends_on(Variable::y); }

private:
    Expr expr_;
    double lambda_min_;
    double lambda_max_;
};

/// Slow-variable box sampled by check_bounds; the fast variables always cover [0,1] x Y.
struct SampleBox {
    double t0 = 0.0, t1 = 1.0;
    double x0 = 0.0, x1 = 1.0;
};

struct BoundsReport {
    double min_seen = std::numeric_limits<double>::infinity();
    double max_seen = -std::numeric_limits<double>::infinity();
    bool ok = false;
};

/// Samples a on a tensor grid (only over the axes it depends on, endpoints included)
/// and compares the observed range with the declared bounds.
inline BoundsReport check_bounds(const MultiscaleCoefficient& c, int n_samples_per_axis, const SampleBox& box = {}) {
    if (n_samples_per_axis < 2) throw InputError("check_bounds: need at least 2 samples per axis");
    const auto axis_count = [&](bool dep) { return dep ? n_samples_per_axis : 1; };
    const int nt = axis_count(c.depends_on_t()), nx = axis_count(c.depends_on_x());
    const int ns = axis_count(c.depends_on_s()), ny = axis_count(c.depends_on_y());
    const auto node = [](double lo, double hi, int i, int n) {
        return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    };
    BoundsReport r;
    for (int it = 0; it < nt; ++it)
        for (int ix = 0; ix < nx; ++ix)
            for (int is = 0; is < ns; ++is)
                for (int iy = 0; iy < ny; ++iy) {
                    const double v = c(node(box.t0, box.t1, it, nt), node(box.x0, box.x1, ix, nx),
                                       node(0.0, 1.0, is, ns), node(-0.5, 0.5, iy, ny));
                    r.min_seen = std::min(r.min_seen, v);
                    r.max_seen = std::max(r.max_seen, v);
                }
    r.ok = r.min_seen >= c.lambda_min() && r.max_seen <= c.lambda_max();
    return r;
}

/// (int_Y 1/a(y) dy)^{-1}, the exact homogenized value in 1D for coefficients that
/// depend on y only. Composite Gauss-Legendre (3 points) on n_quad panels.
inline double harmonic_mean_1d(const MultiscaleCoefficient& c, int n_quad) {
    if (c.depends_on_t() || c.depends_on_x() || c.depends_on_s())
        throw InputError("harmonic_mean_1d: coefficient must depend on y only, got '" + c.expr().source() + "'");
    if (n_quad < 1) throw InputError("harmonic_mean_1d: n_quad must be positive");
    static const fem::GaussRule rule = fem::gauss_legendre(3);
    const double w = 1.0 / n_quad;
    double sum = 0.0;
    for (int k = 0; k < n_quad; ++k)
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double y = -0.5 + w * (k + rule.points[q]);
            sum += w * rule.weights[q] / c(0.0, 0.0, 0.0, y);
        }
    return 1.0 / sum;
}

}  // namespace fehmm::coeff
