#include "oracles.hpp"

#include "rsl/experiments.hpp"
#include "rsl/quadrature.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace rsl;

namespace {

constexpr double kPi = std::numbers::pi;

EstimatorConfig config(long samples, std::uint64_t seed = 42)
{
    EstimatorConfig c;
    c.samples = samples;
    c.seed = seed;
    return c;
}

SphereFn sphere(const char* text, int n) { return make_sphere_function(parse_function_spec(text), n, cap_chart_build(n)); }

} // namespace

TEST_CASE("params")
{
    const Params p = Params::make(3, 1.5, 2.0, 0.0);
    CHECK(p.m == 1);
    CHECK(p.sigma == 0.5);
    CHECK_FALSE(p.wellposed);
    CHECK(Params::make(2, 0.5, 2.0, 0.0).wellposed);
    CHECK_THROWS(Params::make(1, 0.5, 2.0, 0.0));
    CHECK_THROWS(Params::make(2, 0.5, 0.5, 0.0));
    CHECK_THROWS(Params::make(2, -0.5, 2.0, 0.0));
}

TEST_CASE("compare and combine")
{
    CHECK(compare(1.0, 0.01, 1.01, 0.0, 0.05) == Verdict::pass);
    CHECK(compare(1.0, 0.001, 1.1, 0.0, 0.05) == Verdict::fail);
    CHECK(compare(1.0, 0.5, 1.3, 0.0, 0.05) == Verdict::inconclusive);
    CHECK(compare(kPi, 0.0, kPi * (1.0 + 1e-14), 0.0, 0.01) == Verdict::pass);
    CHECK(combine({Verdict::pass, Verdict::inconclusive}) == Verdict::inconclusive);
    CHECK(combine({Verdict::pass, Verdict::fail, Verdict::inconclusive}) == Verdict::fail);
    CHECK(combine({Verdict::pass, Verdict::pass}) == Verdict::pass);
    CHECK(exit_code(Verdict::pass) == 0);
    CHECK(exit_code(Verdict::fail) == 1);
    CHECK(exit_code(Verdict::inconclusive) == 2);
    CHECK(stable_under_doubling(1.0, 0.0, 1.05, 0.0));
    CHECK_FALSE(stable_under_doubling(1.0, 0.0, 1.5, 0.0));
}

TEST_CASE("kernel constant against the closed form")
{
    CHECK(kernel_constant(2, 0.5, 2.0) == doctest::Approx(4.0).epsilon(1e-12));
    for (int n : {2, 3, 4})
        for (double s : {0.25, 0.5, 0.9})
            for (double p : {1.0, 2.0, 3.0})
                CHECK(kernel_constant(n, s, p) == doctest::Approx(oracle::kernel_constant(n, s, p)).epsilon(1e-10));
}

TEST_CASE("adaptive quadrature against an antiderivative")
{
    for (double A : {-0.9, 0.0, 0.5, 0.99}) {
        auto f = [A](double t) { return std::pow(t * t - 2.0 * A * t + 1.0, -1.5); };
        const QuadResult q = integrate_adaptive(f, 0.5, 1.0, 1e-12);
        CHECK(q.converged);
        CHECK(q.value == doctest::Approx(oracle::kernel_three_halves(A, 0.5, 1.0)).epsilon(1e-10));
    }
    const QuadResult line = integrate_real_line([](double t) { return std::pow(1.0 + t * t, -1.5); });
    CHECK(line.value == doctest::Approx(2.0).epsilon(1e-12));
    const QuadResult sing = integrate_endpoint_singular([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
    CHECK(sing.value == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_THROWS_AS(integrate_or_throw([](double x) { return std::sin(1.0 / x) / x; }, 1e-9, 1.0, 1e-14), QuadratureError);
}

TEST_CASE("J oracle")
{
    CHECK(oracle::J(2, 0.5, 2.0) == doctest::Approx(oracle::kJ_2_05_2).epsilon(1e-7));
    CHECK(oracle::J(3, 0.5, 2.0) == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-7));
    const Report r = compute_J(Params::make(2, 0.5, 2.0, 0.0), config(200000));
    CHECK(std::abs(r.at("J_north_pole").value - oracle::kJ_2_05_2) <= 0.02 * oracle::kJ_2_05_2);
    CHECK(r.classification == "finite");
    const Report near = compute_J(Params::make(2, 0.995, 2.0, 0.0), config(20000));
    CHECK(near.classification == "divergent");
    CHECK(near.verdict == Verdict::inconclusive);
}

TEST_CASE("lp identity examples")
{
    const Report r1 = check_lp_identity(Params::make(3, 0.5, 2.0, 0.5), sphere("constant", 3), config(200000));
    CHECK(r1.verdict == Verdict::pass);
    CHECK(r1.at("lhs_ball_lp").value == doctest::Approx(kPi).epsilon(0.01));
    CHECK(r1.at("rhs_sphere_lp_over_n_plus_ap").value == doctest::Approx(kPi).epsilon(1e-12));
    const Report r2 = check_lp_identity(Params::make(2, 0.5, 1.0, 0.0), sphere("constant", 2), config(100000));
    CHECK(r2.verdict == Verdict::pass);
    const Report r3 = check_lp_identity(Params::make(2, 0.5, 2.0, -0.5), sphere("coordinate:1", 2), config(400000));
    CHECK(r3.verdict == Verdict::pass);
    CHECK(r3.at("rhs_sphere_lp_over_n_plus_ap").value == doctest::Approx(kPi).epsilon(0.02));
    CHECK_THROWS(check_lp_identity(Params::make(2, 0.5, 1.0, -2.0), sphere("constant", 2), config(1000)));
}

TEST_CASE("decomposition examples")
{
    const Report zero = check_decomposition(Params::make(2, 0.5, 2.0, 0.0), sphere("constant", 2), config(10000));
    CHECK(zero.at("lhs_ball_seminorm").value == 0.0);
    CHECK(zero.at("rhs_decomposition").value == 0.0);
    CHECK(zero.verdict == Verdict::pass);
    const Report x1 = check_decomposition(Params::make(2, 0.5, 2.0, 0.0), sphere("coordinate:1", 2), config(200000));
    CHECK(x1.verdict == Verdict::pass);
    CHECK(x1.at("split_inequality_violations").value == 0.0);
    CHECK_THROWS(check_decomposition(Params::make(2, 1.5, 2.0, 0.0), sphere("constant", 2), config(1000)));
}

TEST_CASE("kernel bound scan")
{
    const Report r = kernel_bound_scan(Params::make(2, 0.5, 2.0, 0.0), config(1000), 2000);
    CHECK(r.verdict == Verdict::pass);
    CHECK(r.at("C_analytic").value == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.at("max_scaled_kernel").value <= 4.0);
    CHECK(r.at("max_L_for_A_nonpositive").value <= 0.5);
    CHECK(r.at("tau_integral_quadrature").value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scaling law examples")
{
    const SphereFn x1 = sphere("coordinate:1", 2);
    const Report r = scaling_law(Params::make(2, 0.5, 2.0, 0.0), x1, 1, config(20000), ScalingBranch::exact);
    CHECK(std::abs(r.at("ratio").value - 0.5) <= 1e-12);
    const Report neg = scaling_law(Params::make(2, 0.5, 2.0, -1.0), x1, 1, config(20000), ScalingBranch::exact);
    CHECK(std::abs(neg.at("ratio").value - 2.0) <= 2e-12);
    const Report j0 = scaling_law(Params::make(3, 0.5, 2.0, 0.5), sphere("random_mix:seed=3", 3), 0, config(20000),
                                  ScalingBranch::exact);
    CHECK(std::abs(j0.at("ratio").value - 1.0) <= 1e-12);
    for (int j = 2; j <= 6; ++j) {
        const Report rj = scaling_law(Params::make(3, 0.5, 2.0, 0.5), sphere("random_mix:seed=2", 3), j, config(5000),
                                      ScalingBranch::exact);
        CHECK(rj.at("ratio_relative_error").value <= 1e-12);
    }
    CHECK_THROWS(scaling_law(Params::make(2, 0.5, 2.0, 0.0), sphere("constant", 2), 1, config(5000)));
}

TEST_CASE("divergence probe examples")
{
    const SphereFn x1 = sphere("coordinate:1", 2);
    const Report div = divergence_probe(Params::make(2, 0.5, 4.0, 0.0), x1, 8, config(20000));
    CHECK(div.classification == "divergent");
    CHECK(div.verdict == Verdict::pass);
    const Report conv = divergence_probe(Params::make(2, 0.5, 2.0, 0.0), x1, 8, config(20000));
    CHECK(conv.classification == "convergent");
    CHECK(conv.at("term_ratio_max").value == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(conv.at("geometric_limit").value == doctest::Approx(2.0 * conv.at("seminorm_omega0").value).epsilon(1e-10));
    CHECK_THROWS_AS(divergence_probe(Params::make(2, 0.5, 2.0, 0.0), sphere("constant", 2), 4, config(5000)),
                    std::domain_error);
}

TEST_CASE("operator sweep on constants")
{
    for (int n : {2, 3}) {
        const CapChart chart = cap_chart_build(n);
        std::vector<SphereFn> fam;
        for (double c : {1.0, 2.0, -3.0, 0.5})
            fam.push_back(make_sphere_function(FunctionSpec::constant(c), n, chart));
        const Report r = operator_sweep(Params::make(n, 0.5, 2.0, 0.0), fam, config(5000));
        CHECK(r.at("max_ratio").value == doctest::Approx(std::pow(n, -0.5)).epsilon(1e-12));
        CHECK(r.at("linearity_relative_error").value <= 1e-12);
        CHECK(r.verdict == Verdict::pass);
    }
    CHECK_THROWS(operator_sweep(Params::make(2, 0.5, 2.0, 0.0), {sphere("constant", 2)}, config(5000)));
}

TEST_CASE("derivative check examples")
{
    const PlaneFn g1 = plane_bump(Point{0.0}, 0.45, 3);
    const Report zero = derivative_check(g1, 1.0, MultiIndex{0, 0}, config(1000));
    CHECK(zero.at("relative_error_h").value == 0.0);
    CHECK(zero.verdict == Verdict::pass);
    const Report e2 = derivative_check(g1, 1.0, MultiIndex{0, 1}, config(1000), 2.0, 50);
    CHECK(e2.verdict == Verdict::pass);
    CHECK(std::abs(e2.at("richardson_slope").value - 2.0) <= 0.1);
    const PlaneFn g2 = plane_bump(Point{0.0, 0.0}, 0.4, 3);
    const Report mixed = derivative_check(g2, -0.25, MultiIndex{1, 0, 2}, config(1000), 2.0, 30);
    CHECK(mixed.verdict == Verdict::pass);
    const Report moment = derivative_check(g1, 0.0, MultiIndex{1, 0}, config(1000), 2.0, 20);
    CHECK(moment.classification == "divergent");
    CHECK_THROWS(derivative_check(g1, 1.0, MultiIndex{5, 0}, config(1000)));
}

TEST_CASE("solve epsilon")
{
    const Report r = solve_epsilon(3, 0.5);
    CHECK(r.verdict == Verdict::pass);
    CHECK(std::abs(r.at("eps").value - oracle::kEps) <= 1e-12);
    CHECK(r.at("residual").value < 1e-14);
}

TEST_CASE("reports are deterministic and serialise")
{
    const Params par = Params::make(2, 0.5, 2.0, 0.0);
    EstimatorConfig c1 = config(50000, 9), c3 = c1;
    c3.threads = 3;
    const Report a = check_decomposition(par, sphere("coordinate:1", 2), c1);
    const Report b = check_decomposition(par, sphere("coordinate:1", 2), c3);
    CHECK(a.to_json().dump() == b.to_json().dump());
    CHECK(a.to_csv() == b.to_csv());
    const std::string csv = a.to_csv();
    CHECK(csv.rfind("experiment,n,s,p,a,verdict,quantity,value,stderr,samples,seed,mode\n", 0) == 0);
    const auto j = a.to_json();
    CHECK(j.contains("verdict"));
    CHECK(j.contains("quantities"));
    CHECK_THROWS_AS(a.at("no_such_quantity"), std::out_of_range);
}
