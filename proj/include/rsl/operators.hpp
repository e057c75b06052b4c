#pragma once

#include "rsl/functions.hpp"
#include "rsl/polyalg.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <variant>

namespace rsl {

/// Raised when an extension is evaluated at the origin, where it is not
/// defined (and unbounded for a < 0).
class OriginError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Function on the punctured ball, cube or cone. `try_eval` returns nullopt
/// at the origin; `operator()` throws OriginError there.
class VolumeFn {
public:
    using TryFn = std::function<std::optional<double>(const Point&)>;

    VolumeFn(int dim, TryFn eval, JetFn jet, int deriv_order, std::string label);

    int dim() const { return impl_->dim; }
    int deriv_order() const { return impl_->deriv_order; }
    const std::string& label() const { return impl_->label; }
    bool has_exact_partials() const { return static_cast<bool>(impl_->jet); }

    std::optional<double> try_eval(const Point& x) const;
    double operator()(const Point& x) const;
    /// d^alpha; analytic when a jet is attached, central differences otherwise.
    double partial(const MultiIndex& alpha, const Point& x) const;

    Field field() const;
    /// Copy carrying a cancellation-free difference F(x) - F(y).
    VolumeFn with_difference(DiffFn diff) const;

private:
    struct Impl {
        int dim;
        TryFn eval;
        JetFn jet;
        int deriv_order;
        std::string label;
        DiffFn diff;
    };
    std::shared_ptr<const Impl> impl_;
};

/// Origin guard shared by every extension.
inline constexpr double kOriginRadius = 1e-12;

enum class Geometry { ball, cube };

struct ExtensionSpec {
    Geometry geometry = Geometry::ball;
    double a = 0.0;
    std::variant<SphereFn, CubeBoundaryFn> boundary_fn;

    /// Cube with a != 0 lies outside the standard T.
    bool nonstandard() const { return geometry == Geometry::cube && a != 0.0; }
};

/// ball: X -> |X|^a f(X/|X|); cube: X -> |X|_inf^a f(X/|X|_inf).
VolumeFn radial_extend(const ExtensionSpec& spec);

/// U_a f for a sphere function (ball geometry). Chart-built f get exact
/// partials through the derivative recursion.
VolumeFn extend_U(const SphereFn& f, double a);
/// T f = f(X/|X|_inf) for a cube-boundary function (cube geometry, a = 0).
VolumeFn extend_T(const CubeBoundaryFn& f);

/// [U_0 (f o Psi)] o Lambda^{-1}.
VolumeFn compose_T_via_U(const CubeBoundaryFn& f);

/// V_a g(X', X_n) = X_n^a g(X'/X_n) on the cone over the disk of radius
/// cone_radius, 0 elsewhere. Exact partials up to min(g.deriv_order, 4).
VolumeFn extend_V(const PlaneFn& g, double a, double cone_radius = 0.5);

/// r^{-a} F(r x) for r in (0, 1].
double trace(const VolumeFn& F, double a, double r, const Point& x);

} // namespace rsl
