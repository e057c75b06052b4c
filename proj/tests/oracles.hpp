#pragma once

// Independent reference values. Built directly on Boost quadrature and closed
// forms; nothing here calls the library estimators.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

namespace oracle {

inline constexpr double kEps = 0.22975292054736118;     // r(eps) = 1/2
inline constexpr double kRadiusAt01 = 0.2030586606340041; // r(0.1)
inline constexpr double kJ_2_05_2 = 1.19781626;          // J at (n, s, p) = (2, 0.5, 2), 8 digits

inline double sphere_area(int n)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// J = int_0^{1/2} int_0^pi |S^{n-2}| sin^{n-2}(theta) tau^p
///         / (1 - 2 (1-tau) cos theta + (1-tau)^2)^{(n+sp)/2} dtheta dtau.
inline double J(int n, double s, double p)
{
    using boost::math::quadrature::gauss_kronrod;
    using boost::math::quadrature::tanh_sinh;
    const double kappa = 0.5 * (n + s * p);
    const double area = sphere_area(n - 1);
    tanh_sinh<double> ts;
    auto inner = [&](double tau) {
        if (tau < 1e-12)
            return 0.0;
        const double t = 1.0 - tau;
        auto g = [&](double theta) {
            // 1 - 2t cos + t^2 = tau^2 + 4 t sin^2(theta/2)
            const double sh = std::sin(0.5 * theta);
            const double d2 = tau * tau + 4.0 * t * sh * sh;
            return area * std::pow(std::sin(theta), n - 2) * std::pow(tau, p) * std::pow(d2, -kappa);
        };
        const double split = std::min(tau, 0.5 * std::numbers::pi);
        return ts.integrate(g, 0.0, split) + gauss_kronrod<double, 61>::integrate(g, split, std::numbers::pi, 15, 1e-13);
    };
    return ts.integrate(inner, 0.0, 0.5);
}

/// Gagliardo seminorm (p = 2) of X_1 on the unit disk:
/// pi int_0^2 A(r) r^{1 - 2 sigma} dr, A the lens area of two unit disks at distance r.
inline double disk_gagliardo_x1(double sigma)
{
    using boost::math::quadrature::tanh_sinh;
    auto lens = [](double r) { return 2.0 * std::acos(0.5 * r) - 0.5 * r * std::sqrt(std::max(0.0, 4.0 - r * r)); };
    tanh_sinh<double> ts;
    return std::numbers::pi * ts.integrate([&](double r) { return lens(r) * std::pow(r, 1.0 - 2.0 * sigma); }, 0.0, 2.0);
}

/// int_{lo}^{hi} (t^2 - 2 A t + 1)^{-3/2} dt by its antiderivative.
inline double kernel_three_halves(double A, double lo, double hi)
{
    auto F = [A](double t) { return (t - A) / ((1.0 - A * A) * std::sqrt(t * t - 2.0 * A * t + 1.0)); };
    return F(hi) - F(lo);
}

/// 2^{(n-1+sp)/2} sqrt(pi) Gamma(kappa - 1/2) / Gamma(kappa), kappa = (n+sp)/2.
inline double kernel_constant(int n, double s, double p)
{
    const double kappa = 0.5 * (n + s * p);
    return std::pow(2.0, 0.5 * (n - 1 + s * p)) * std::sqrt(std::numbers::pi) * std::tgamma(kappa - 0.5) /
           std::tgamma(kappa);
}

/// r(eps) = 2 eps sqrt(1 - eps^2) / (1 - 2 eps^2).
inline double chart_radius(double eps)
{
    return 2.0 * eps * std::sqrt(1.0 - eps * eps) / (1.0 - 2.0 * eps * eps);
}

} // namespace oracle
