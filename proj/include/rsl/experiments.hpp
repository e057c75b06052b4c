#pragma once

#include "rsl/functions.hpp"
#include "rsl/norms.hpp"
#include "rsl/operators.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rsl {

struct Params {
    int n = 2;
    double s = 0.5;
    double p = 2.0;
    double a = 0.0;
    int m = 0;          ///< integer part of s
    double sigma = 0.5; ///< s - m
    bool wellposed = true; ///< (s - a) p < n

    static Params make(int n, double s, double p, double a);
};

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);
int exit_code(Verdict v); ///< 0 pass, 1 fail, 2 inconclusive

struct Quantity {
    std::string name;
    double value = 0.0;
    std::optional<double> std_error; ///< absent for exact quantities
    long samples = 0;
    std::uint64_t seed = 0;
    std::string mode;
};

struct Report {
    std::string experiment;
    Params params;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    std::vector<Quantity> quantities;
    Verdict verdict = Verdict::inconclusive;
    nlohmann::ordered_json tolerances = nlohmann::ordered_json::object();
    std::string classification;
    std::vector<std::string> notes;

    void add(const std::string& name, const Estimate& e);
    void add_exact(const std::string& name, double value);
    /// Value of a quantity by name; throws when absent.
    const Quantity& at(const std::string& name) const;

    nlohmann::ordered_json to_json() const;
    /// Long format, one row per quantity, header included.
    std::string to_csv() const;
};

/// Outcome of comparing two independent estimates (or an estimate and an
/// exact value, std_error 0): pass iff the gap is within 3 combined standard
/// errors and within rel * |reference|; fail when the gap exceeds 3 standard
/// errors; inconclusive otherwise.
Verdict compare(double x, double sx, double y, double sy, double rel);
/// Worst of the verdicts (fail > inconclusive > pass).
Verdict combine(std::initializer_list<Verdict> vs);
Verdict combine(const std::vector<Verdict>& vs);

/// Doubling stability of an empirical constant: the full-sample and
/// first-half values agree within rel or within 3 standard errors.
bool stable_under_doubling(double full, double full_se, double half, double half_se, double rel = 0.1);

// --- experiments -----------------------------------------------------------

/// ||U_a f||_p^p on the ball against ||f||_p^p / (n + a p) on the sphere.
Report check_lp_identity(const Params& par, const SphereFn& f, const EstimatorConfig& cfg);

/// |U_a f|^p_{W^{s,p}(B)} against 2/(n-(s-a)p) int int int_0^1 k, with the
/// I1/I2/I3 splits and their empirical constants.
Report check_decomposition(const Params& par, const SphereFn& f, const EstimatorConfig& cfg);

/// Max of L(x,y) |x-y|^{n-1+sp} over `pairs` pairs against the analytic constant.
Report kernel_bound_scan(const Params& par, const EstimatorConfig& cfg, int pairs = 10000);

/// Analytic constant 2^{(n-1+sp)/2} int_R (1+tau^2)^{-(n+sp)/2} dtau.
double kernel_constant(int n, double s, double p);

/// J estimated with y at the north pole and at a random pole.
Report compute_J(const Params& par, const EstimatorConfig& cfg);

enum class ScalingBranch { exact, statistical, both };
Report scaling_law(const Params& par, const SphereFn& f, int j, const EstimatorConfig& cfg,
                   ScalingBranch branch = ScalingBranch::both);

Report divergence_probe(const Params& par, const SphereFn& f, int j_max, const EstimatorConfig& cfg);

enum class SweepGeometry { ball, cube };
/// Norm ratios ||U_a f|| / ||f|| over the family; the first half of the
/// family is compared against the whole for max-ratio stability.
Report operator_sweep(const Params& par, const std::vector<SphereFn>& family, const EstimatorConfig& cfg,
                      SweepGeometry geometry = SweepGeometry::ball);

/// Finite-difference check of the derivative recursion for d^alpha V_a g and
/// the radial moment bookkeeping at exponent p. The error bound applies to the
/// Richardson-extrapolated stencil (4 D(h/2) - D(h)) / 3; the slope is that of
/// the plain stencil D.
Report derivative_check(const PlaneFn& g, double a, const MultiIndex& alpha, const EstimatorConfig& cfg,
                        double p = 2.0, int points = 100, double h = 3e-4);

/// Chart radius solve.
Report solve_epsilon(int n, double target_r);

/// Family helper: `count` members built from random_mix seeds 1..count
/// (cap-supported when cap is true).
std::vector<SphereFn> random_mix_family(int n, int count, bool cap, const CapChart& chart);

/// Top-order homogeneous seminorm used by the annulus scaling checks.
Estimate top_order_seminorm(const Field& F, const Domain& d, const Params& par, const EstimatorConfig& cfg);

} // namespace rsl
