#pragma once

#include "rsl/functions.hpp"
#include "rsl/geometry.hpp"
#include "rsl/monte_carlo.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rsl {

enum class EstimatorMode { uniform_pair, radial_importance };

std::string to_string(EstimatorMode mode);
EstimatorMode parse_mode(const std::string& text); ///< "uniform-pair" | "radial-importance"

struct EstimatorConfig {
    long samples = 200000;
    EstimatorMode mode = EstimatorMode::radial_importance;
    double importance_exponent = 0.0; ///< beta; 0 selects p (1 - sigma)
    double truncation_radius = 4.0;   ///< outer radius for plane domains
    std::uint64_t seed = 42;
    std::uint64_t stream = 0;
    int threads = 1;
    double origin_exclusion = 1e-6;   ///< ball radius removed when a < 0
    /// Points are sampled on the domain and mapped by X -> dilation * X; the
    /// estimate is the integral over the dilated domain.
    double dilation = 1.0;
    /// Known support of F inside a volume domain; X is then drawn from it
    /// and pairs with one end outside are counted twice.
    std::optional<Domain> support;
    /// Known support {|x - e_n| <= chord} of F on the sphere (chord <= sqrt 2);
    /// lp_norm then draws x' uniformly from the projected disk.
    std::optional<double> cap_chord;
};

void validate(const EstimatorConfig& cfg);

/// One named summand of a composite estimate.
struct Component {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    long samples = 0;
    std::uint64_t seed = 0;
    EstimatorMode mode = EstimatorMode::radial_importance;
    /// Same estimator on the first half of the chunks (sample-doubling checks).
    double half_value = 0.0;
    double half_std_error = 0.0;
    std::map<std::string, double> metadata;
    std::vector<Component> components;
    std::vector<std::string> warnings;
};

/// Sum of independent estimates; components and metadata are concatenated
/// with `prefix` names.
Estimate sum_estimates(const std::vector<std::pair<std::string, Estimate>>& parts);

/// int_d |F|^p (the p-th power, not its root).
Estimate lp_norm(const Field& F, const Domain& d, double p, const EstimatorConfig& cfg);

/// int_d int_d |F(X) - F(Y)|^p / dist(X, Y)^{k + sigma p} with k the
/// intrinsic dimension of d. Chordal distance on the sphere, sup distance
/// on the cube boundary. Plane domains integrate over all of R^k for F
/// supported in the disk.
Estimate gagliardo_seminorm(const Field& F, const Domain& d, double sigma, double p,
                            const EstimatorConfig& cfg);

/// s = m + sigma: sum_{1<=|alpha|<=m} ||d^alpha F||_p^p, plus
/// sum_{|alpha|=m} |d^alpha F|_{sigma,p}^p when sigma > 0.
Estimate sobolev_seminorm(const Field& F, const Domain& d, double s, double p, const EstimatorConfig& cfg);

/// ||F||_p^p + the seminorm above.
Estimate volume_norm_full(const Field& F, const Domain& d, double s, double p, const EstimatorConfig& cfg);

/// s < 1: L^p plus chordal Gagliardo on the sphere. s >= 1: the chart norm
/// of g = sphere_to_plane(f, 0, chart) on R^{n-1}; needs cap support.
Estimate sphere_norm_full(const SphereFn& f, double s, double p, const EstimatorConfig& cfg,
                          const CapChart& chart);

/// L^p plus sup-distance Gagliardo on the cube boundary (0 < s < 1).
Estimate cube_boundary_norm_full(const CubeBoundaryFn& f, double s, double p, const EstimatorConfig& cfg);

/// (num / den)^{1/p} with delta-method error for independent estimates.
std::pair<double, double> norm_ratio(const Estimate& num, const Estimate& den, double p);

} // namespace rsl
