#pragma once

#include <span>
#include <vector>

namespace sinflow {

/// Monotonic rational quadratic spline on R: M knots (x_m, y_m) with positive
/// knot derivatives, each bin a quotient of two quadratics, linear tails.
/// Strictly increasing and C1 on the whole real line.
struct RQSpline {
    std::vector<double> xs;      // ascending knot abscissae
    std::vector<double> ys;      // ascending knot ordinates
    std::vector<double> derivs;  // positive knot derivatives
    double left_slope = 1.0;     // tail slope for x < x_1
    double right_slope = 1.0;    // tail slope for x > x_M

    std::size_t size() const { return xs.size(); }
};

/// Validates the monotonicity/positivity invariants and returns the spline.
RQSpline make_rq_spline(std::vector<double> xs, std::vector<double> ys,
                        std::vector<double> derivs, double left_slope, double right_slope);

/// Knot derivatives from a local quadratic fit through neighbouring knots:
/// y_m' = (s_{m-1}(x_{m+1}-x_m) + s_m(x_m-x_{m-1})) / (x_{m+1}-x_{m-1}).
/// Endpoints get the adjacent secant slope; callers overwrite them according
/// to their boundary policy.
std::vector<double> fit_knot_derivatives(std::span<const double> xs, std::span<const double> ys);

double spline_forward(const RQSpline& s, double x);
double spline_derivative(const RQSpline& s, double x);
double spline_inverse(const RQSpline& s, double y);

/// Spline blended with the identity: (1-a1) psi(x) + a1 x inside the knot
/// range; tails stay linear from the blended boundary points with slopes
/// (1-a2) slope + a2. With a1 == a2 this is exactly the global blend.
struct RegularizedMap {
    RQSpline base;
    double alpha_spline = 0.0;  // a1 in [0,1)
    double alpha_tail = 0.0;    // a2 in [0,1)
};

RegularizedMap make_regularized_map(RQSpline base, double alpha_spline, double alpha_tail);

double map_forward(const RegularizedMap& m, double x);
double map_derivative(const RegularizedMap& m, double x);

/// Inverse of the blended map. Closed form in the tails and for alpha = 0;
/// otherwise monotone bisection refined with Newton steps (tolerance 1e-12).
double map_inverse(const RegularizedMap& m, double y);

/// The exact identity transform (used for degenerate axes).
RegularizedMap identity_map();

}  // namespace sinflow
