#pragma once

#include <functional>
#include <stdexcept>

namespace rsl {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (61 point) on a finite interval.
QuadResult integrate_adaptive(const Integrand& f, double a, double b, double rel_tol = 1e-12,
                              unsigned max_depth = 15);

/// Tanh-sinh on a finite interval; tolerates integrable endpoint singularities.
QuadResult integrate_endpoint_singular(const Integrand& f, double a, double b,
                                       double rel_tol = 1e-12);

/// Integral over the whole real line (sinh-sinh).
QuadResult integrate_real_line(const Integrand& f, double rel_tol = 1e-12);

/// Same as integrate_adaptive, but throws QuadratureError when the error
/// estimate misses the requested tolerance.
double integrate_or_throw(const Integrand& f, double a, double b, double rel_tol = 1e-12,
                          double abs_tol = 0.0);

} // namespace rsl
