#include "rsl/functions.hpp"
#include "rsl/operators.hpp"

#include "doctest.h"

#include <cmath>

using namespace rsl;

namespace {

SphereFn sphere(const char* text, int n) { return make_sphere_function(parse_function_spec(text), n, cap_chart_build(n)); }

Point random_in_cube(int n, RngStream& rng)
{
    Point x(n);
    for (int k = 0; k < n; ++k)
        x[k] = rng.uniform(-1.0, 1.0);
    return x;
}

} // namespace

TEST_CASE("radial extension examples")
{
    const VolumeFn u2 = radial_extend({Geometry::ball, 2.0, sphere("constant", 2)});
    CHECK(u2(Point{0.5, 0.0}) == doctest::Approx(0.25).epsilon(1e-15));

    const CubeBoundaryFn x1(2, [](const Point& z) { return z[0]; }, "x1");
    const VolumeFn t = radial_extend({Geometry::cube, 0.0, x1});
    CHECK(t(Point{0.5, 0.25}) == 1.0);
    CHECK_FALSE(ExtensionSpec{Geometry::cube, 0.0, x1}.nonstandard());
    CHECK(ExtensionSpec{Geometry::cube, 0.5, x1}.nonstandard());
}

TEST_CASE("positive homogeneity and restriction")
{
    RngStream rng(12, 0);
    for (int n : {2, 3}) {
        for (double a : {0.0, 0.5, -0.75, 2.0}) {
            const SphereFn f = sphere("random_mix:seed=2", n);
            const VolumeFn u = extend_U(f, a);
            for (int i = 0; i < 1000; ++i) {
                const Point x = sample(Domain::ball(n), rng);
                const double t = rng.uniform();
                const double ref = std::pow(t, a) * u(x);
                CHECK(std::abs(u(t * x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
                const Point ux = x * (1.0 / norm(x));
                CHECK(std::abs(u(ux) - f(ux)) <= 1e-14);
            }
        }
    }
}

TEST_CASE("origin handling")
{
    const VolumeFn u = extend_U(sphere("constant", 2), -0.5);
    CHECK_THROWS_AS(u(Point{0.0, 0.0}), OriginError);
    CHECK_FALSE(u.try_eval(Point{0.0, 0.0}).has_value());
    CHECK(u.try_eval(Point{0.25, 0.0}).value() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(trace(u, -0.5, 0.0, Point{1.0, 0.0}), std::exception);
}

TEST_CASE("T through the U_0 composition")
{
    const CubeBoundaryFn one(2, [](const Point&) { return 1.0; }, "one");
    const VolumeFn c1 = compose_T_via_U(one);
    CHECK(c1(Point{0.3, -0.2}) == 1.0);
    CHECK(extend_T(one)(Point{0.3, -0.2}) == 1.0);

    for (int n : {2, 3}) {
        const CubeBoundaryFn x1(n, [](const Point& z) { return z[0]; }, "x1");
        const VolumeFn direct = extend_T(x1);
        const VolumeFn comp = compose_T_via_U(x1);
        RngStream rng(13, static_cast<std::uint64_t>(n));
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const Point x = random_in_cube(n, rng);
            worst = std::max(worst, std::abs(direct(x) - comp(x)));
        }
        CHECK(worst <= 1e-10);
    }
    const CubeBoundaryFn x1(2, [](const Point& z) { return z[0] + 2.0 * z[1]; }, "x1+2x2");
    CHECK(compose_T_via_U(x1)(Point{0.3, 0.3}) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(extend_T(x1)(Point{0.3, 0.3}) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("cone extension")
{
    const PlaneFn one(1, 0.5, kSmooth, [](const MultiIndex& b, const Point&) { return b.is_zero() ? 1.0 : 0.0; }, "one");
    const VolumeFn v = extend_V(one, 1.0);
    CHECK(v(Point{0.25, 0.5}) == 0.5);
    CHECK(v(Point{0.25, -0.5}) == 0.0);
    CHECK(v(Point{0.25, 0.0}) == 0.0);
    CHECK(v(Point{0.4, 0.5}) == 0.0);

    for (int n : {2, 3, 4}) {
        const CapChart chart = cap_chart_build(n);
        const PlaneFn g = make_plane_function(FunctionSpec::random_mix(7, 8, true), n - 1, chart);
        for (double a : {0.0, 0.5, -1.0}) {
            const VolumeFn vg = extend_V(g, a, chart.r);
            const VolumeFn ug = extend_U(plane_to_sphere(g, a, chart), a);
            RngStream rng(14, static_cast<std::uint64_t>(n));
            double worst = 0.0;
            for (int i = 0; i < 10000; ++i) {
                const Point x = sample(Domain::cone(n, chart.r), rng);
                const double ref = vg(x);
                worst = std::max(worst, std::abs(ug(x) - ref) / std::max(1.0, std::abs(ref)));
            }
            CHECK(worst <= 1e-12);
        }
    }
}

TEST_CASE("trace examples")
{
    const VolumeFn u = extend_U(sphere("coordinate:1", 2), 0.5);
    CHECK(trace(u, 0.5, 0.75, Point{0.6, 0.8}) == doctest::Approx(0.6).epsilon(1e-14));
    const VolumeFn c = extend_U(sphere("constant:3", 3), -0.25);
    RngStream rng(15, 0);
    for (int i = 0; i < 1000; ++i) {
        const Point x = sample(Domain::sphere(3), rng);
        CHECK(trace(c, -0.25, 0.55, x) == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(std::abs(trace(u, 0.5, 0.6, Point{x[0], x[1]} * (1.0 / norm(Point{x[0], x[1]}))) -
                       trace(u, 0.5, 0.95, Point{x[0], x[1]} * (1.0 / norm(Point{x[0], x[1]})))) <= 1e-12);
    }
}

TEST_CASE("attached difference matches the plain difference")
{
    RngStream rng(16, 0);
    for (double a : {0.5, -0.75, 1.0}) {
        const VolumeFn u = extend_U(sphere("random_mix:seed=5", 3), a);
        const Field F = u.field();
        REQUIRE(static_cast<bool>(F.difference));
        for (int i = 0; i < 1000; ++i) {
            const Point x = sample(Domain::ball(3), rng);
            const Point y = sample(Domain::ball(3), rng);
            const double plain = u(x) - u(y);
            CHECK(std::abs(F.diff(x, y) - plain) <= 1e-12 * std::max(1.0, std::abs(u(x)) + std::abs(u(y))));
        }
    }
}

TEST_CASE("exact partials of chart-built extensions")
{
    const CapChart chart = cap_chart_build(2);
    const PlaneFn g = plane_bump(Point{0.05}, 0.3, 3);
    const VolumeFn u = extend_U(plane_to_sphere(g, 0.5, chart), 0.5);
    REQUIRE(u.has_exact_partials());
    const VolumeFn v = extend_V(g, 0.5, chart.r);
    for (const auto& alpha : MultiIndex::with_order(2, 2)) {
        const Point x{0.05 * 0.6, 0.6};
        CHECK(u.partial(alpha, x) == doctest::Approx(v.partial(alpha, x)).epsilon(1e-12));
    }
}
