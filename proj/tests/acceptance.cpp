// Acceptance gate: one PASS/FAIL line per criterion.

#include "oracles.hpp"

#include "rsl/experiments.hpp"
#include "rsl/functions.hpp"
#include "rsl/operators.hpp"
#include "rsl/polyalg.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace rsl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<void(Outcome&)>& body)
{
    Outcome o;
    const auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.ok = false;
        o.detail << " [error: " << e.what() << "]";
    }
    if (!o.ok)
        ++failures;
    std::printf("%s  %2d  %s (%.1f s)%s\n", o.ok ? "PASS" : "FAIL", id, title.c_str(), seconds_since(t0),
                o.detail.str().c_str());
    std::fflush(stdout);
}

EstimatorConfig config(long samples, std::uint64_t seed = 42)
{
    EstimatorConfig c;
    c.samples = samples;
    c.seed = seed;
    c.threads = 1;
    return c;
}

SphereFn sphere_fn(const std::string& spec, int n)
{
    return make_sphere_function(parse_function_spec(spec), n, cap_chart_build(n));
}

std::string g6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// 1 ---------------------------------------------------------------------------

void lp_identity(Outcome& o)
{
    const auto t0 = Clock::now();
    const Report main = check_lp_identity(Params::make(3, 0.5, 2.0, 0.5), sphere_fn("constant", 3), config(1000000));
    const double elapsed = seconds_since(t0);
    const double lhs = main.at("lhs_ball_lp").value;
    o.detail << " main: " << g6(lhs) << " +- " << g6(*main.at("lhs_ball_lp").std_error)
             << " vs pi, " << g6(elapsed) << " s;";
    o.require(main.verdict == Verdict::pass, "main verdict " + to_string(main.verdict));
    o.require(std::abs(main.at("rhs_sphere_lp_over_n_plus_ap").value - std::numbers::pi) < 1e-12 * std::numbers::pi,
              "rhs equals pi");
    o.require(elapsed < 30.0, "runtime < 30 s");

    int passed = 0, total = 0;
    for (int n : {2, 3, 4})
        for (auto [a, p] : {std::pair{0.0, 1.0}, std::pair{0.5, 2.0}, std::pair{-0.25, 2.0}}) {
            if (!(n + a * p > 0.25))
                continue;
            for (const char* f : {"constant", "coordinate:1", "bump:radius=0.2,cap"}) {
                ++total;
                const Report r = check_lp_identity(Params::make(n, 0.5, p, a), sphere_fn(f, n),
                                                   config(1000000, 1000 + total));
                if (r.verdict == Verdict::pass)
                    ++passed;
                else
                    o.require(false, "grid n=" + std::to_string(n) + " a=" + g6(a) + " p=" + g6(p) + " f=" + f +
                                         " " + to_string(r.verdict));
            }
        }
    o.detail << " grid " << passed << "/" << total;
}

// 2 ---------------------------------------------------------------------------

void decomposition(Outcome& o)
{
    for (double a : {0.0, 1.0})
        for (const char* f : {"coordinate:1", "bump:radius=0.2,cap"}) {
            const Report r = check_decomposition(Params::make(2, 0.5, 2.0, a), sphere_fn(f, 2), config(1000000));
            const auto& l = r.at("lhs_ball_seminorm");
            const auto& rr = r.at("rhs_decomposition");
            o.detail << " a=" << a << " " << f << ": " << g6(l.value) << " vs " << g6(rr.value) << ";";
            o.require(r.verdict == Verdict::pass, std::string("a=") + g6(a) + " " + f + " " + to_string(r.verdict));
        }
    const Report zero = check_decomposition(Params::make(2, 0.5, 2.0, 0.0), sphere_fn("constant", 2), config(1000000));
    const bool exact = zero.at("lhs_ball_seminorm").value == 0.0 && zero.at("triple_integral_k").value == 0.0;
    o.detail << " constant: " << (exact ? "0 = 0" : "nonzero");
    o.require(exact && zero.verdict == Verdict::pass, "constant case exactly 0 = 0");
}

// 3 ---------------------------------------------------------------------------

void kernel_bound(Outcome& o)
{
    const Report r = kernel_bound_scan(Params::make(2, 0.5, 2.0, 0.0), config(1000000), 10000);
    const double C = r.at("C_analytic").value;
    const double m = r.at("max_scaled_kernel").value;
    const double tq = r.at("tau_integral_quadrature").value;
    o.detail << " max " << g6(m) << " <= C " << g6(C) << ", tau integral " << g6(tq);
    o.require(std::abs(C - 4.0) < 1e-12 && std::abs(oracle::kernel_constant(2, 0.5, 2.0) - 4.0) < 1e-12,
              "C_analytic = 4");
    o.require(std::abs(tq - 2.0) <= 1e-10 * 2.0, "tau integral = 2 to 1e-10");
    o.require(m <= C, "scan max <= C");
    o.require(r.verdict == Verdict::pass, "verdict " + to_string(r.verdict));
}

// 4 ---------------------------------------------------------------------------

void j_finite(Outcome& o)
{
    const Report r = compute_J(Params::make(2, 0.5, 2.0, 0.0), config(1000000));
    const double ref = oracle::J(2, 0.5, 2.0);
    const double j = r.at("J_north_pole").value;
    const double drift = r.at("doubling_relative_change").value;
    const double gap = std::abs(j - r.at("J_random_pole").value);
    const double se = std::hypot(*r.at("J_north_pole").std_error, *r.at("J_random_pole").std_error);
    o.detail << " J " << g6(j) << " oracle " << g6(ref) << ", doubling " << g6(drift) << ", pole gap "
             << g6(gap / se) << " se";
    o.require(drift < 0.01, "doubling stability 1%");
    o.require(std::abs(j - ref) <= 0.02 * ref, "within 2% of oracle");
    o.require(gap <= 3.0 * se, "y-independence 3 se");
    o.require(r.verdict == Verdict::pass, "verdict " + to_string(r.verdict));
}

// 5 ---------------------------------------------------------------------------

void scaling(Outcome& o)
{
    double worst = 0.0, slowest = 0.0;
    int points = 0;
    for (auto [s, p] : {std::pair{0.25, 2.0}, std::pair{0.5, 2.0}, std::pair{0.75, 1.5}})
        for (double a : {-1.0, 0.0, 0.5})
            for (int j = 1; j <= 6; ++j) {
                const auto t0 = Clock::now();
                const Report r = scaling_law(Params::make(2, s, p, a), sphere_fn("coordinate:1", 2), j,
                                             config(100000, 7 + j), ScalingBranch::both);
                const double dt = seconds_since(t0);
                slowest = std::max(slowest, dt);
                worst = std::max(worst, r.at("ratio_relative_error").value);
                ++points;
                if (r.verdict != Verdict::pass)
                    o.require(false, "s=" + g6(s) + " p=" + g6(p) + " a=" + g6(a) + " j=" + std::to_string(j) +
                                         " " + to_string(r.verdict));
                if (dt >= 10.0)
                    o.require(false, "runtime < 10 s at s=" + g6(s) + " a=" + g6(a) + " j=" + std::to_string(j));
            }
    o.detail << " " << points << " points, worst exact-branch error " << g6(worst) << ", slowest " << g6(slowest)
             << " s";
    o.require(worst <= 1e-12, "exact branch 1e-12");
}

// 6 ---------------------------------------------------------------------------

void divergence(Outcome& o)
{
    int agree = 0, total = 0, divergent = 0;
    for (double s : {0.25, 0.5, 0.75})
        for (double p : {1.0, 2.0, 4.0})
            for (double a : {-0.5, 0.0, 0.5}) {
                ++total;
                const Report r = divergence_probe(Params::make(2, s, p, a), sphere_fn("coordinate:1", 2), 8,
                                                  config(20000, 100 + total));
                const bool predicate = (s - a) * p >= 2.0;
                const bool said = r.classification == "divergent";
                divergent += said;
                if (said == predicate && r.verdict == Verdict::pass)
                    ++agree;
                else
                    o.require(false, "s=" + g6(s) + " p=" + g6(p) + " a=" + g6(a));
            }
    o.detail << " " << agree << "/" << total << " agree (" << divergent << " divergent)";
    const Report eq = divergence_probe(Params::make(2, 0.5, 4.0, 0.0), sphere_fn("coordinate:1", 2), 12, config(20000));
    o.require(eq.classification == "divergent" && eq.verdict == Verdict::pass, "equality case (0.5, 4, 0) divergent");
}

// 7 ---------------------------------------------------------------------------

void derivatives(Outcome& o)
{
    double worst_extrap = 0.0, worst_plain = 0.0, slope_lo = 9.0, slope_hi = 0.0;
    int checks = 0;
    for (int n : {2, 3}) {
        RngStream rng(2024, static_cast<std::uint64_t>(n));
        const FunctionSpec spec = FunctionSpec::bump(std::vector<double>(n - 1, 0.0), rng.uniform(0.3, 0.5), 3, false);
        const PlaneFn g = make_plane_function(spec, n - 1, cap_chart_build(n));
        for (double a : {0.5, -0.25, 1.0})
            for (int order = 0; order <= 3; ++order)
                for (const MultiIndex& alpha : MultiIndex::with_order(n, order)) {
                    const Report r = derivative_check(g, a, alpha, config(1000));
                    ++checks;
                    worst_plain = std::max(worst_plain, r.at("relative_error_h").value);
                    if (order > 0) {
                        worst_extrap = std::max(worst_extrap, r.at("relative_error_extrapolated").value);
                        const double sl = r.at("richardson_slope").value;
                        slope_lo = std::min(slope_lo, sl);
                        slope_hi = std::max(slope_hi, sl);
                    } else {
                        o.require(r.at("relative_error_h").value == 0.0, "alpha = 0 exact");
                    }
                    o.require(r.verdict == Verdict::pass,
                              "n=" + std::to_string(n) + " a=" + g6(a) + " alpha=" + alpha.str() + " " +
                                  to_string(r.verdict));
                }
    }
    o.require(worst_extrap < 1e-6, "extrapolated FD error < 1e-6");
    o.require(slope_lo >= 1.9 && slope_hi <= 2.1, "slope 2.0 +- 0.1");

    // Mixed-partial path independence, dyadic a.
    int orderings = 0;
    bool exact = true;
    for (int n : {2, 3})
        for (double a : {0.5, -0.75, 0.25, 2.0})
            for (int order = 1; order <= 3; ++order)
                for (const MultiIndex& alpha : MultiIndex::with_order(n, order)) {
                    std::vector<int> seq;
                    for (int i = 0; i < n; ++i)
                        for (int k = 0; k < alpha[i]; ++k)
                            seq.push_back(i);
                    const DerivExpansion ref = deriv_expansion(alpha, a);
                    do {
                        ++orderings;
                        exact = exact && same_terms(ref, deriv_expansion_along(seq, n, a), 0.0);
                    } while (std::next_permutation(seq.begin(), seq.end()));
                }
    o.detail << " " << checks << " checks, extrapolated FD " << g6(worst_extrap) << ", plain FD " << g6(worst_plain)
             << ", slope [" << g6(slope_lo) << ", " << g6(slope_hi) << "], " << orderings
             << " orderings " << (exact ? "exact" : "differ");
    o.require(exact, "mixed partials exact");
}

// 8 ---------------------------------------------------------------------------

void chart(Outcome& o)
{
    const Report e = solve_epsilon(3, 0.5);
    const double eps = e.at("eps").value, residual = e.at("residual").value;
    o.require(residual < 1e-14, "residual < 1e-14");
    o.require(std::abs(eps - oracle::kEps) < 1e-12, "eps matches");
    o.require(std::abs(oracle::chart_radius(eps) - 0.5) < 1e-14, "oracle residual");

    double phi = 0.0, proj = 0.0, lift = 0.0, g3 = 0.0, uv = 0.0;
    for (int n : {2, 3, 4}) {
        const CapChart ch = cap_chart_build(n);
        RngStream rng(77, static_cast<std::uint64_t>(n));
        const Domain ball = Domain::ball(n), disk = Domain::plane_disk(n - 1, ch.r), sphere = Domain::sphere(n);
        for (int i = 0; i < 10000; ++i) {
            const Point x = sample(ball, rng);
            phi = std::max(phi, distance(phi_map(phi_map(x, Direction::forward), Direction::inverse), x));
            const Point y = sample(disk, rng);
            proj = std::max(proj, distance(gnomonic(ch, gnomonic(ch, y, Gnomonic::lift), Gnomonic::project), y));
            Point z = sample(sphere, rng);
            if (z.last() < 0.0)
                z = -1.0 * z;
            if (z.last() > 0.1)
                lift = std::max(lift, distance(gnomonic(ch, gnomonic(ch, z, Gnomonic::project), Gnomonic::lift), z));
        }
        for (double a : {0.0, 0.5, -0.75, 1.5}) {
            const PlaneFn g = make_plane_function(FunctionSpec::random_mix(5, 8, false), n - 1, ch);
            const PlaneFn back = sphere_to_plane(plane_to_sphere(g, a, ch), a, ch);
            const VolumeFn V = extend_V(g, a), U = extend_U(plane_to_sphere(g, a, ch), a);
            for (int i = 0; i < 10000; ++i) {
                const Point y = sample(disk, rng);
                g3 = std::max(g3, std::abs(back(y) - g(y)));
                const double xn = rng.uniform(0.05, 1.0);
                const Point x = Point::append(sample(Domain::plane_disk(n - 1, 0.5), rng) * xn, xn);
                if (norm(x) < 1.0)
                    uv = std::max(uv, std::abs(U(x) - V(x)));
            }
        }
    }
    o.detail << " eps " << g6(eps) << " residual " << g6(residual) << "; roundtrips Phi " << g6(phi) << ", Pi "
             << g6(proj) << ", Pi^-1 " << g6(lift) << ", g3 " << g6(g3) << "; U o p2s vs V " << g6(uv);
    o.require(phi <= 1e-12 && proj <= 1e-12 && lift <= 1e-12, "Phi / Pi roundtrips 1e-12");
    o.require(g3 <= 1e-12, "chart transfer roundtrip 1e-12");
    o.require(uv <= 1e-12, "U_a o plane_to_sphere = V_a 1e-12");
}

// 9 ---------------------------------------------------------------------------

void trace_identity(Outcome& o)
{
    double worst = 0.0;
    int tested = 0;
    for (int n : {2, 3, 4})
        for (double a : {-0.5, 0.0, 0.5, 1.5})
            for (const char* spec : {"coordinate:1", "random_mix:seed=3", "cusp:gamma=0.5"}) {
                const SphereFn f = sphere_fn(spec, n);
                const VolumeFn F = extend_U(f, a);
                RngStream rng(99, static_cast<std::uint64_t>(n * 100 + tested));
                for (double r : {0.5000001, 0.55, 0.6, 0.7, 0.8, 0.9, 0.99, 0.9999999}) {
                    for (int i = 0; i < 1000; ++i) {
                        const Point x = sample(Domain::sphere(n), rng);
                        worst = std::max(worst, std::abs(trace(F, a, r, x) - f(x)) / std::max(1.0, std::abs(f(x))));
                    }
                    ++tested;
                }
            }
    o.detail << " " << tested << " (r, f, a) cases, worst relative deviation " << g6(worst);
    o.require(worst <= 1e-12, "trace identity 1e-12");
}

// 10 --------------------------------------------------------------------------

void boundedness(Outcome& o)
{
    struct Case {
        int n;
        double s, p, a;
        SweepGeometry geometry;
    };
    for (const Case& c : {Case{2, 0.5, 2.0, 0.0, SweepGeometry::ball}, Case{3, 1.5, 2.0, 0.0, SweepGeometry::ball},
                          Case{2, 0.5, 2.0, 1.0, SweepGeometry::ball}, Case{2, 0.5, 2.0, 0.0, SweepGeometry::cube}}) {
        const Params par = Params::make(c.n, c.s, c.p, c.a);
        const auto family = random_mix_family(c.n, 32, c.s >= 1.0, cap_chart_build(c.n));
        const long samples = c.n == 3 ? 20000 : 50000;
        const Report r = operator_sweep(par, family, config(samples), c.geometry);
        const std::string tag = "(" + std::to_string(c.n) + "," + g6(c.s) + "," + g6(c.p) + "," + g6(c.a) + ")" +
                                (c.geometry == SweepGeometry::cube ? " cube" : " ball");
        o.detail << " " << tag << ": max " << g6(r.at("max_ratio").value) << " change "
                 << g6(r.at("max_ratio_relative_change").value);
        if (!r.classification.empty() && r.classification != "within hypotheses")
            o.detail << " [" << r.classification << "]";
        o.detail << ";";
        o.require(r.at("max_ratio_relative_change").value <= 0.1, tag + " family doubling 10%");
        o.require(r.verdict == Verdict::pass, tag + " verdict " + to_string(r.verdict));
    }
}

} // namespace

int main()
{
    criterion(1, "lp identity: ball integral of |U_a f|^p equals sphere integral over (n + a p)", lp_identity);
    criterion(2, "seminorm decomposition: LHS equals 2/(n-(s-a)p) times the kernel triple integral", decomposition);
    criterion(3, "kernel bound: L(x,y) |x-y|^{n-1+sp} <= C_analytic on 1e4 pairs", kernel_bound);
    criterion(4, "J finite, stable and y-independent", j_finite);
    criterion(5, "annulus scaling law 2^{j[(s-a)p-n]}", scaling);
    criterion(6, "divergence verdict matches (s-a)p >= n on 27 points", divergence);
    criterion(7, "derivative recursion against finite differences; mixed partials", derivatives);
    criterion(8, "chart: eps solve and roundtrips", chart);
    criterion(9, "trace G(r, .) = f for r in (1/2, 1)", trace_identity);
    criterion(10, "empirical boundedness under family doubling", boundedness);
    std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
