#include "sinflow/rq_spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sinflow {
namespace {

// Index m of the bin [x_m, x_{m+1}) containing x, clamped to valid bins.
std::size_t find_bin(const std::vector<double>& knots, double v) {
    auto it = std::upper_bound(knots.begin(), knots.end(), v);
    if (it == knots.begin()) return 0;
    std::size_t m = static_cast<std::size_t>(it - knots.begin()) - 1;
    return std::min(m, knots.size() - 2);
}

struct Bin {
    double x0, h, y0, dy, s, sigma, d0, d1;
};

Bin bin_params(const RQSpline& sp, std::size_t m) {
    Bin b;
    b.x0 = sp.xs[m];
    b.h = sp.xs[m + 1] - sp.xs[m];
    b.y0 = sp.ys[m];
    b.dy = sp.ys[m + 1] - sp.ys[m];
    b.s = b.dy / b.h;
    b.d0 = sp.derivs[m];
    b.d1 = sp.derivs[m + 1];
    b.sigma = b.d1 + b.d0 - 2.0 * b.s;
    return b;
}

}  // namespace

RQSpline make_rq_spline(std::vector<double> xs, std::vector<double> ys,
                        std::vector<double> derivs, double left_slope, double right_slope) {
    const std::size_t m = xs.size();
    if (m < 2 || ys.size() != m || derivs.size() != m)
        throw std::invalid_argument("rq_spline: need M >= 2 knots with matching arrays");
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (!(xs[i + 1] > xs[i]) || !(ys[i + 1] > ys[i]))
            throw std::invalid_argument("rq_spline: knots must be strictly increasing");
    }
    for (double d : derivs)
        if (!(d > 0.0) || !std::isfinite(d))
            throw std::invalid_argument("rq_spline: knot derivatives must be positive");
    if (!(left_slope > 0.0) || !(right_slope > 0.0))
        throw std::invalid_argument("rq_spline: tail slopes must be positive");
    // C1 on all of R: the tails extrapolate with the endpoint derivatives
    if (left_slope != derivs.front() || right_slope != derivs.back())
        throw std::invalid_argument("rq_spline: tail slopes must equal the endpoint derivatives");
    RQSpline sp;
    sp.xs = std::move(xs);
    sp.ys = std::move(ys);
    sp.derivs = std::move(derivs);
    sp.left_slope = left_slope;
    sp.right_slope = right_slope;
    return sp;
}

std::vector<double> fit_knot_derivatives(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t m = xs.size();
    if (m < 2 || ys.size() != m)
        throw std::invalid_argument("fit_knot_derivatives: need M >= 2 knots");
    for (std::size_t i = 0; i + 1 < m; ++i)
        if (!(xs[i + 1] > xs[i]) || !(ys[i + 1] > ys[i]))
            throw std::invalid_argument("fit_knot_derivatives: knots must be strictly increasing");

    std::vector<double> slopes(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) slopes[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);

    std::vector<double> d(m);
    d.front() = slopes.front();
    d.back() = slopes.back();
    for (std::size_t i = 1; i + 1 < m; ++i)
        d[i] = (slopes[i - 1] * (xs[i + 1] - xs[i]) + slopes[i] * (xs[i] - xs[i - 1])) /
               (xs[i + 1] - xs[i - 1]);
    return d;
}

double spline_forward(const RQSpline& sp, double x) {
    if (x < sp.xs.front()) return sp.ys.front() + sp.left_slope * (x - sp.xs.front());
    if (x >= sp.xs.back()) return sp.ys.back() + sp.right_slope * (x - sp.xs.back());
    const Bin b = bin_params(sp, find_bin(sp.xs, x));
    const double xi = (x - b.x0) / b.h;
    const double num = b.s * xi * xi + b.d0 * xi * (1.0 - xi);
    const double den = b.s + b.sigma * xi * (1.0 - xi);
    return b.y0 + b.dy * num / den;
}

double spline_derivative(const RQSpline& sp, double x) {
    if (x < sp.xs.front()) return sp.left_slope;
    if (x >= sp.xs.back()) return sp.right_slope;
    const Bin b = bin_params(sp, find_bin(sp.xs, x));
    const double xi = (x - b.x0) / b.h;
    const double den = b.s + b.sigma * xi * (1.0 - xi);
    return b.s * b.s *
           (b.d1 * xi * xi + 2.0 * b.s * xi * (1.0 - xi) + b.d0 * (1.0 - xi) * (1.0 - xi)) /
           (den * den);
}

double spline_inverse(const RQSpline& sp, double y) {
    if (y < sp.ys.front()) return sp.xs.front() + (y - sp.ys.front()) / sp.left_slope;
    if (y >= sp.ys.back()) return sp.xs.back() + (y - sp.ys.back()) / sp.right_slope;
    const std::size_t m = find_bin(sp.ys, y);
    const Bin b = bin_params(sp, m);
    // zeta clamped against floating-point drift at bin edges
    const double zeta = std::clamp((y - b.y0) / b.dy, 0.0, 1.0);
    const double a = (b.s - b.d0) + zeta * b.sigma;
    const double bq = b.d0 - zeta * b.sigma;
    const double c = -b.s * zeta;
    const double disc = std::max(bq * bq - 4.0 * a * c, 0.0);
    const double xi = 2.0 * c / (-bq - std::sqrt(disc));
    return b.x0 + b.h * (std::isfinite(xi) ? std::clamp(xi, 0.0, 1.0) : 0.0);
}

RegularizedMap make_regularized_map(RQSpline base, double alpha_spline, double alpha_tail) {
    if (!(alpha_spline >= 0.0 && alpha_spline < 1.0) || !(alpha_tail >= 0.0 && alpha_tail < 1.0))
        throw std::invalid_argument("regularized map: alpha values must be in [0,1)");
    return RegularizedMap{std::move(base), alpha_spline, alpha_tail};
}

double map_forward(const RegularizedMap& m, double x) {
    const RQSpline& sp = m.base;
    const double a1 = m.alpha_spline, a2 = m.alpha_tail;
    if (x < sp.xs.front()) {
        const double anchor = (1.0 - a1) * sp.ys.front() + a1 * sp.xs.front();
        return anchor + ((1.0 - a2) * sp.left_slope + a2) * (x - sp.xs.front());
    }
    if (x >= sp.xs.back()) {
        const double anchor = (1.0 - a1) * sp.ys.back() + a1 * sp.xs.back();
        return anchor + ((1.0 - a2) * sp.right_slope + a2) * (x - sp.xs.back());
    }
    return (1.0 - a1) * spline_forward(sp, x) + a1 * x;
}

double map_derivative(const RegularizedMap& m, double x) {
    const RQSpline& sp = m.base;
    if (x < sp.xs.front()) return (1.0 - m.alpha_tail) * sp.left_slope + m.alpha_tail;
    if (x >= sp.xs.back()) return (1.0 - m.alpha_tail) * sp.right_slope + m.alpha_tail;
    return (1.0 - m.alpha_spline) * spline_derivative(sp, x) + m.alpha_spline;
}

double map_inverse(const RegularizedMap& m, double y) {
    const RQSpline& sp = m.base;
    const double a1 = m.alpha_spline, a2 = m.alpha_tail;
    const double f_lo = (1.0 - a1) * sp.ys.front() + a1 * sp.xs.front();
    const double f_hi = (1.0 - a1) * sp.ys.back() + a1 * sp.xs.back();
    if (y < f_lo) return sp.xs.front() + (y - f_lo) / ((1.0 - a2) * sp.left_slope + a2);
    if (y >= f_hi) return sp.xs.back() + (y - f_hi) / ((1.0 - a2) * sp.right_slope + a2);
    if (a1 == 0.0) return spline_inverse(sp, y);

    // safeguarded Newton: fall back to bisection whenever the Newton step
    // leaves the bracket or fails to shrink it fast enough
    double lo = sp.xs.front(), hi = sp.xs.back();
    double x = 0.5 * (lo + hi);
    double step_prev = hi - lo, step = step_prev;
    for (int it = 0; it < 200; ++it) {
        const double f = map_forward(m, x) - y;
        if (std::abs(f) <= 1e-12 * std::max(1.0, std::abs(y))) return x;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        const double deriv = map_derivative(m, x);
        const double newton = x - f / deriv;
        step_prev = step;
        if (newton <= lo || newton >= hi || std::abs(2.0 * f) > std::abs(step_prev * deriv)) {
            step = 0.5 * (hi - lo);
            x = lo + step;
        } else {
            step = std::abs(newton - x);
            x = newton;
        }
        if (step <= 1e-14 * std::max(1.0, std::abs(x))) return x;
    }
    return x;
}

RegularizedMap identity_map() {
    RQSpline sp;
    sp.xs = {0.0, 1.0};
    sp.ys = {0.0, 1.0};
    sp.derivs = {1.0, 1.0};
    sp.left_slope = sp.right_slope = 1.0;
    return RegularizedMap{std::move(sp), 0.0, 0.0};
}

}  // namespace sinflow
