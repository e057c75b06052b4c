#pragma once

#include "rsl/geometry.hpp"
#include "rsl/polyalg.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rsl {

/// deriv_order of functions that are C-infinity on their domain.
inline constexpr int kSmooth = 1000;

using PointFn = std::function<double(const Point&)>;
using JetFn = std::function<double(const MultiIndex&, const Point&)>;
/// F(x) - F(y), evaluated without cancellation where the structure of F allows.
using DiffFn = std::function<double(const Point&, const Point&)>;

/// Type-erased evaluable function handed to the estimators. `partial` may
/// be empty, in which case derivatives are taken by central differences
/// with step `fd_step`.
struct Field {
    int dim = 0;
    PointFn value;
    JetFn partial;
    int deriv_order = 0;
    double fd_step = 2e-4;
    std::string label;
    DiffFn difference; ///< optional; value(x) - value(y) otherwise

    double at(const Point& x) const { return value(x); }
    double diff(const Point& x, const Point& y) const { return difference ? difference(x, y) : value(x) - value(y); }
    /// d^alpha, analytic when available.
    double derivative(const MultiIndex& alpha, const Point& x) const;
    /// The field (d^alpha F).
    Field derivative_field(const MultiIndex& alpha) const;
};

/// Field of a polynomial in dim variables; derivatives are exact.
Field polynomial_field(const Poly& p, std::string label = {});

/// Nested central differences for d^alpha f at x with step h.
double central_difference(const PointFn& f, const MultiIndex& alpha, const Point& x, double h);

/// Scalar function on R^{n-1} supported in the disk of radius support_radius.
/// Partials up to deriv_order are exposed through a jet; every partial
/// vanishes outside the support disk.
class PlaneFn {
public:
    PlaneFn(int dim, double support_radius, int deriv_order, JetFn jet, std::string label);

    int dim() const { return impl_->dim; }
    double support_radius() const { return impl_->support_radius; }
    int deriv_order() const { return impl_->deriv_order; }
    const std::string& label() const { return impl_->label; }

    double operator()(const Point& y) const { return partial(MultiIndex(dim()), y); }
    double partial(const MultiIndex& beta, const Point& y) const;

    PlaneFn scaled(double c) const;
    Field field() const;

private:
    struct Impl {
        int dim;
        double support_radius;
        int deriv_order;
        JetFn jet;
        std::string label;
    };
    std::shared_ptr<const Impl> impl_;
};

/// Support descriptor of a sphere function: the whole sphere, or the cap
/// {x : |x - e_n| < chord} around the north pole.
struct Support {
    enum class Kind { full, cap };
    Kind kind = Kind::full;
    double chord = 0.0;

    static Support full() { return {}; }
    static Support cap(double chord) { return {Kind::cap, chord}; }
    bool contains(const Point& x) const;
};

class SphereFn;

/// Records that a sphere function was built as x_n^a g(x'/x_n) from a chart
/// function g, so exact derivatives of its extensions are available.
struct ChartOrigin {
    std::shared_ptr<const PlaneFn> g;
    double a = 0.0;
    CapChart chart;
};

/// Scalar function on the unit sphere of R^n.
class SphereFn {
public:
    SphereFn(int n, PointFn eval, int deriv_order, Support support, std::string label,
             std::optional<ChartOrigin> origin = std::nullopt);

    int dim() const { return impl_->n; }
    int deriv_order() const { return impl_->deriv_order; }
    const Support& support() const { return impl_->support; }
    const std::string& label() const { return impl_->label; }
    const std::optional<ChartOrigin>& chart_origin() const { return impl_->origin; }

    /// Exactly 0 outside the declared support.
    double operator()(const Point& x) const;

    SphereFn scaled(double c) const;
    Field field() const;

private:
    struct Impl {
        int n;
        PointFn eval;
        int deriv_order;
        Support support;
        std::string label;
        std::optional<ChartOrigin> origin;
    };
    std::shared_ptr<const Impl> impl_;
};

/// Scalar function on the cube boundary {|x|_inf = 1}.
class CubeBoundaryFn {
public:
    CubeBoundaryFn(int n, PointFn eval, std::string label);
    int dim() const { return n_; }
    const std::string& label() const { return label_; }
    double operator()(const Point& x) const { return eval_(x); }
    Field field() const;

    /// g o Psi^{-1}, i.e. z -> g(z/|z|), for a sphere function g.
    static CubeBoundaryFn from_sphere(const SphereFn& g);

private:
    int n_;
    PointFn eval_;
    std::string label_;
};

/// Declarative description of a test function.
struct FunctionSpec {
    enum class Kind { constant, coordinate, bump, cusp, random_mix };
    Kind kind = Kind::constant;
    double value = 1.0;          ///< constant c
    int index = 1;               ///< coordinate, 1-based
    std::vector<double> center;  ///< bump centre / cusp anchor; empty = north pole (sphere) or 0 (plane)
    double radius = 0.1;         ///< bump radius (chordal on the sphere)
    int order = 3;               ///< bump regularity C^order
    double gamma = 0.5;          ///< cusp exponent
    std::uint64_t seed = 1;      ///< random_mix coefficients
    int count = 8;               ///< random_mix dictionary entries used (<= 8)
    bool cap = false;            ///< request support inside the chart cap

    static FunctionSpec constant(double c) { FunctionSpec s; s.kind = Kind::constant; s.value = c; return s; }
    static FunctionSpec coordinate(int i) { FunctionSpec s; s.kind = Kind::coordinate; s.index = i; return s; }
    static FunctionSpec bump(std::vector<double> center, double radius, int order, bool cap);
    static FunctionSpec cusp(std::vector<double> anchor, double gamma);
    static FunctionSpec random_mix(std::uint64_t seed, int count = 8, bool cap = false);
};

/// Parses "constant[:c]", "coordinate:i", "bump[:radius=..,order=..,center=a;b;c,cap]",
/// "cusp[:gamma=..,anchor=..]" and "random_mix[:seed=..,count=..,cap]".
FunctionSpec parse_function_spec(const std::string& text);
std::string to_string(const FunctionSpec& spec);

/// Sphere test function. Cap-supported specs need the chart; cap random
/// mixes are transferred from the plane with a = 0.
SphereFn make_sphere_function(const FunctionSpec& spec, int n, const CapChart& chart);
/// Plane test function on R^{plane_dim}; always supported in the chart disk.
PlaneFn make_plane_function(const FunctionSpec& spec, int plane_dim, const CapChart& chart);

/// Plane bump (1 - |y-c|^2/rho^2)_+^{order+1}; it is a polynomial inside its
/// support, so every partial is exact.
PlaneFn plane_bump(const Point& center, double radius, int order, double coeff = 1.0);
/// Sum of plane functions with common dimension.
PlaneFn plane_sum(const std::vector<PlaneFn>& parts, std::string label);

/// f(x) = x_n^a g(x'/x_n) on the lifted support of g, 0 elsewhere.
SphereFn plane_to_sphere(const PlaneFn& g, double a, const CapChart& chart);
/// g(X') = |(X',1)|^a f(Pi^{-1}(X',1)) on the chart disk, 0 outside.
/// Throws when f carries mass outside the chart cap.
PlaneFn sphere_to_plane(const SphereFn& f, double a, const CapChart& chart);

/// Largest |f| found on deterministic samples of the sphere outside the
/// closed chart cap.
double mass_outside_cap(const SphereFn& f, const CapChart& chart, int probes = 4096);

} // namespace rsl
