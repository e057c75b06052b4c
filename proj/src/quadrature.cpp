#include "rsl/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <sstream>

namespace rsl {

QuadResult integrate_adaptive(const Integrand& f, double a, double b, double rel_tol,
                              unsigned max_depth)
{
    // Integrate on the reference interval [-1, 1]; the library's error
    // estimate carries an absolute term that misbehaves on short intervals.
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto g = [&](double v) { return half * f(mid + half * v); };
    QuadResult r;
    r.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -1.0, 1.0, max_depth,
                                                                          rel_tol, &r.error);
    r.converged = std::isfinite(r.value) && r.error <= rel_tol * std::abs(r.value) + 1e-300;
    return r;
}

QuadResult integrate_endpoint_singular(const Integrand& f, double a, double b, double rel_tol)
{
    boost::math::quadrature::tanh_sinh<double> ts;
    QuadResult r;
    double l1 = 0.0;
    r.value = ts.integrate(f, a, b, rel_tol, &r.error, &l1);
    r.converged = std::isfinite(r.value) && r.error <= std::sqrt(rel_tol) * (std::abs(r.value) + 1e-300);
    return r;
}

QuadResult integrate_real_line(const Integrand& f, double rel_tol)
{
    boost::math::quadrature::sinh_sinh<double> ss;
    QuadResult r;
    double l1 = 0.0;
    r.value = ss.integrate(f, rel_tol, &r.error, &l1);
    r.converged = std::isfinite(r.value) && r.error <= std::sqrt(rel_tol) * (std::abs(r.value) + 1e-300);
    return r;
}

double integrate_or_throw(const Integrand& f, double a, double b, double rel_tol, double abs_tol)
{
    auto r = integrate_adaptive(f, a, b, rel_tol);
    if (!std::isfinite(r.value) || r.error > rel_tol * std::abs(r.value) + abs_tol) {
        std::ostringstream msg;
        msg << "quadrature did not converge on [" << a << ", " << b << "]: value " << r.value
            << ", error estimate " << r.error;
        throw QuadratureError(msg.str());
    }
    return r.value;
}

} // namespace rsl
