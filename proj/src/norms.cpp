#include "rsl/norms.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace rsl {

std::string to_string(EstimatorMode mode)
{
    return mode == EstimatorMode::uniform_pair ? "uniform-pair" : "radial-importance";
}

EstimatorMode parse_mode(const std::string& text)
{
    if (text == "uniform-pair" || text == "uniform_pair" || text == "uniform")
        return EstimatorMode::uniform_pair;
    if (text == "radial-importance" || text == "radial_importance" || text == "radial")
        return EstimatorMode::radial_importance;
    throw std::invalid_argument("unknown estimator mode '" + text + "'");
}

void validate(const EstimatorConfig& cfg)
{
    if (cfg.samples < 1000)
        throw std::invalid_argument("estimator needs at least 1000 samples");
    if (cfg.mode == EstimatorMode::radial_importance && cfg.importance_exponent < 0.0)
        throw std::invalid_argument("importance exponent must be positive (0 selects the default)");
    if (!(cfg.truncation_radius > 0.0))
        throw std::invalid_argument("truncation radius must be positive");
    if (!(cfg.dilation > 0.0))
        throw std::invalid_argument("dilation must be positive");
    if (cfg.origin_exclusion < 0.0 || cfg.origin_exclusion >= 1.0)
        throw std::invalid_argument("origin exclusion radius must lie in [0, 1)");
}

namespace {

Estimate make_estimate(const McResult& r, int k, const EstimatorConfig& cfg)
{
    Estimate e;
    e.value = r.full[k].mean;
    e.std_error = r.full[k].std_error();
    e.samples = r.samples;
    e.seed = cfg.seed;
    e.mode = cfg.mode;
    e.half_value = r.half[k].mean;
    e.half_std_error = r.half[k].std_error();
    const double kf = r.full[k].kurtosis(), kh = r.half[k].kurtosis();
    e.metadata["kurtosis"] = kf;
    e.metadata["kurtosis_half"] = kh;
    if (kf > 100.0 && kf > 1.5 * kh)
        e.warnings.push_back("weight kurtosis grows under sample doubling; variance may be infinite");
    return e;
}

double beta_for(const EstimatorConfig& cfg, double sigma, double p)
{
    return cfg.importance_exponent > 0.0 ? cfg.importance_exponent : p * (1.0 - sigma);
}

void check_finite(double v, const char* what, const Point& x)
{
    if (std::isfinite(v))
        return;
    std::ostringstream msg;
    msg << what << " is non-finite (" << v << ") at (";
    for (int i = 0; i < x.dim(); ++i)
        msg << (i ? ", " : "") << x[i];
    msg << ")";
    throw NonFiniteSample(msg.str());
}

double eval_checked(const Field& F, const Point& x)
{
    const double v = F.value(x);
    check_finite(v, "function value", x);
    return v;
}

double diff_checked(const Field& F, const Point& x, const Point& y)
{
    const double v = F.diff(x, y);
    check_finite(v, "function difference", x);
    return v;
}

/// Uniform direction on the unit sphere of R^k (k >= 1).
Point random_direction(int k, RngStream& rng)
{
    if (k == 1)
        return Point{rng.uniform() < 0.5 ? -1.0 : 1.0};
    return sample(Domain::sphere(k), rng);
}

std::uint64_t component_stream(std::uint64_t base, int kind, const MultiIndex& alpha)
{
    std::uint64_t code = static_cast<std::uint64_t>(kind) + 1;
    for (int i = 0; i < alpha.size(); ++i)
        code = code * 131 + static_cast<std::uint64_t>(alpha[i]);
    return mix64(base ^ mix64(code * 0x9e3779b97f4a7c15ULL));
}

} // namespace

Estimate sum_estimates(const std::vector<std::pair<std::string, Estimate>>& parts)
{
    Estimate total;
    double var = 0.0, half_var = 0.0;
    for (const auto& [name, e] : parts) {
        total.value += e.value;
        total.half_value += e.half_value;
        var += e.std_error * e.std_error;
        half_var += e.half_std_error * e.half_std_error;
        total.samples = std::max(total.samples, e.samples);
        total.seed = e.seed;
        total.mode = e.mode;
        if (e.components.empty()) {
            total.components.push_back({name, e.value, e.std_error});
        } else {
            for (const auto& c : e.components)
                total.components.push_back({name + "/" + c.name, c.value, c.std_error});
        }
        for (const auto& [k, v] : e.metadata)
            total.metadata[name + "." + k] = v;
        for (const auto& w : e.warnings)
            total.warnings.push_back(name + ": " + w);
    }
    total.std_error = std::sqrt(var);
    total.half_std_error = std::sqrt(half_var);
    return total;
}

Estimate lp_norm(const Field& F, const Domain& d, double p, const EstimatorConfig& cfg)
{
    validate(cfg);
    validate(d);
    if (!(p >= 1.0))
        throw std::invalid_argument("lp_norm: p must be >= 1");
    if (cfg.cap_chord && d.kind == DomainKind::Sphere) {
        const double c = *cfg.cap_chord;
        if (!(c > 0.0 && c <= std::numbers::sqrt2))
            throw std::invalid_argument("lp_norm: cap chord must lie in (0, sqrt 2]");
        // Orthographic chart: dsigma = dx' / x_n over |x'| <= R.
        const double low = 1.0 - 0.5 * c * c;
        const double R = std::sqrt(std::max(0.0, 1.0 - low * low));
        const Domain disk = Domain::plane_disk(d.dim - 1, R);
        const double area = measure(disk);
        auto r = run_monte_carlo(cfg.samples, 1, cfg.seed, cfg.stream, cfg.threads,
                                 [&](RngStream& rng, std::span<double> out) {
                                     const Point y = sample(disk, rng);
                                     const double xn = std::sqrt(std::max(0.0, 1.0 - dot(y, y)));
                                     if (xn < low)
                                         return;
                                     const Point x = Point::append(y, xn);
                                     out[0] = area / xn * std::pow(std::abs(eval_checked(F, x)), p);
                                 });
        Estimate e = make_estimate(r, 0, cfg);
        e.metadata["cap_chord"] = c;
        return e;
    }
    const Domain S = cfg.support && d.is_volume() ? *cfg.support : d;
    const double lambda = cfg.dilation;
    const double scale = measure(S) * std::pow(lambda, intrinsic_dim(d));
    auto r = run_monte_carlo(cfg.samples, 1, cfg.seed, cfg.stream, cfg.threads,
                             [&](RngStream& rng, std::span<double> out) {
                                 Point x = sample(S, rng);
                                 if (cfg.support && d.is_volume() && !contains(d, x))
                                     return;
                                 if (lambda != 1.0)
                                     x *= lambda;
                                 out[0] = scale * std::pow(std::abs(eval_checked(F, x)), p);
                             });
    Estimate e = make_estimate(r, 0, cfg);
    e.metadata["measure"] = measure(S);
    return e;
}

Estimate gagliardo_seminorm(const Field& F, const Domain& d, double sigma, double p, const EstimatorConfig& cfg)
{
    validate(cfg);
    validate(d);
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("gagliardo_seminorm: sigma must lie in (0, 1)");
    if (!(p >= 1.0))
        throw std::invalid_argument("gagliardo_seminorm: p must be >= 1");
    const int k = intrinsic_dim(d);
    const double kappa = k + sigma * p;
    const double beta = beta_for(cfg, sigma, p);
    const bool radial = cfg.mode == EstimatorMode::radial_importance;
    const double lambda = cfg.dilation;
    if (lambda != 1.0 && !d.is_volume())
        throw std::invalid_argument("gagliardo_seminorm: dilation applies to volume domains only");

    Estimate e;
    switch (d.kind) {
    case DomainKind::Sphere: {
        const int n = d.dim;
        const double mu = measure(d);
        const double shell = sphere_area(n - 1);
        const double pb = std::pow(std::numbers::pi, beta);
        auto r = run_monte_carlo(cfg.samples, 1, cfg.seed, cfg.stream, cfg.threads,
                                 [&](RngStream& rng, std::span<double> out) {
                                     Point x = sample(d, rng);
                                     Point y;
                                     double w;
                                     if (radial) {
                                         const double theta = std::numbers::pi * std::pow(rng.uniform(), 1.0 / beta);
                                         Point perp = random_orthogonal_direction(x, rng);
                                         y = std::cos(theta) * x + std::sin(theta) * perp;
                                         w = mu * shell * std::pow(std::sin(theta), n - 2) * pb /
                                             (beta * std::pow(theta, beta - 1.0));
                                     } else {
                                         y = sample(d, rng);
                                         w = mu * mu;
                                     }
                                     const double diff = std::abs(eval_checked(F, x) - eval_checked(F, y));
                                     if (diff == 0.0)
                                         return;
                                     out[0] = w * std::pow(diff, p) / std::pow(distance(x, y), kappa);
                                 });
        e = make_estimate(r, 0, cfg);
        break;
    }
    case DomainKind::CubeBoundary: {
        if (radial)
            throw std::invalid_argument("cube-boundary seminorm supports uniform-pair mode only");
        const double mu = measure(d);
        auto r = run_monte_carlo(cfg.samples, 1, cfg.seed, cfg.stream, cfg.threads,
                                 [&](RngStream& rng, std::span<double> out) {
                                     Point x = sample(d, rng), y = sample(d, rng);
                                     const double diff = std::abs(eval_checked(F, x) - eval_checked(F, y));
                                     if (diff == 0.0)
                                         return;
                                     out[0] = mu * mu * std::pow(diff, p) /
                                              std::pow(distance(x, y, NormKind::sup), kappa);
                                 });
        e = make_estimate(r, 0, cfg);
        break;
    }
    case DomainKind::PlaneDisk: {
        // F vanishes off the disk S; the integral runs over R^k x R^k.
        const double Rt = cfg.truncation_radius;
        if (Rt < 2.0 * d.radius)
            throw std::invalid_argument("truncation radius must be at least twice the disk radius");
        const double mu = measure(d);
        const double shell = sphere_area(k);
        const double tail = shell * std::pow(Rt, -sigma * p) / (sigma * p);
        const double outer_vol = ball_volume(k) * std::pow(Rt, k);
        const double Rb = std::pow(Rt, beta);
        auto r = run_monte_carlo(cfg.samples, 2, cfg.seed, cfg.stream, cfg.threads,
                                 [&](RngStream& rng, std::span<double> out) {
                                     Point x = sample(d, rng);
                                     const double fx = eval_checked(F, x);
                                     const double fxp = std::pow(std::abs(fx), p);
                                     Point y;
                                     double w;
                                     double tail_w;
                                     if (radial) {
                                         const double rr = Rt * std::pow(rng.uniform(), 1.0 / beta);
                                         y = x + rr * random_direction(k, rng);
                                         w = mu * shell * Rb / (beta * std::pow(rr, beta - 1.0)) *
                                             std::pow(rr, k - 1.0);
                                         tail_w = 2.0 * mu * fxp * tail;
                                     } else {
                                         y = sample(Domain::plane_disk(k, Rt), rng);
                                         w = mu * outer_vol;
                                         // |X - Y| between |Y| -+ |X| off the disk of radius Rt.
                                         const double c = norm(x);
                                         const double lo = std::pow(Rt / (Rt + c), kappa);
                                         const double hi = std::pow(Rt / (Rt - c), kappa);
                                         tail_w = 2.0 * mu * fxp * tail * 0.5 * (lo + hi);
                                         out[1] = 2.0 * mu * fxp * tail * 0.5 * (hi - lo);
                                     }
                                     const double diff = std::abs(fx - eval_checked(F, y));
                                     double v = tail_w;
                                     if (diff != 0.0) {
                                         const double twice = contains(d, y) ? 1.0 : 2.0;
                                         v += twice * w * std::pow(diff, p) / std::pow(distance(x, y), kappa);
                                     }
                                     out[0] = v;
                                     if (radial)
                                         out[1] = tail_w;
                                 });
        e = make_estimate(r, 0, cfg);
        e.metadata["truncation_radius"] = Rt;
        e.metadata[radial ? "tail_contribution" : "tail_bound"] = r.full[1].mean;
        break;
    }
    default: {
        // Volume domains, optionally with a known support S inside d.
        const Domain S = cfg.support ? *cfg.support : d;
        if (cfg.support && (S.dim != d.dim || !S.is_volume()))
            throw std::invalid_argument("support domain must be a volume of the same dimension");
        const bool aware = cfg.support.has_value();
        const double mu_s = measure(S);
        const double mu_d = measure(d);
        const double R = diameter(d);
        const double shell = sphere_area(k);
        const double Rb = std::pow(R, beta);
        const double jac = std::pow(lambda, 2.0 * k - kappa);
        auto r = run_monte_carlo(cfg.samples, 1, cfg.seed, cfg.stream, cfg.threads,
                                 [&](RngStream& rng, std::span<double> out) {
                                     Point x = sample(S, rng);
                                     if (aware && !contains(d, x))
                                         return;
                                     Point y;
                                     double w;
                                     if (radial) {
                                         const double rr = R * std::pow(rng.uniform(), 1.0 / beta);
                                         y = x + rr * random_direction(k, rng);
                                         if (!contains(d, y))
                                             return;
                                         w = mu_s * shell * Rb / (beta * std::pow(rr, beta - 1.0)) *
                                             std::pow(rr, k - 1.0);
                                     } else {
                                         y = sample(d, rng);
                                         w = mu_s * mu_d;
                                     }
                                     if (aware && !contains(S, y))
                                         w *= 2.0;
                                     const double dist = distance(x, y);
                                     Point xs = x, ys = y;
                                     if (lambda != 1.0) {
                                         xs *= lambda;
                                         ys *= lambda;
                                     }
                                     const double diff = std::abs(diff_checked(F, xs, ys));
                                     if (diff == 0.0)
                                         return;
                                     out[0] = jac * w * std::pow(diff, p) / std::pow(dist, kappa);
                                 });
        e = make_estimate(r, 0, cfg);
        break;
    }
    }
    e.metadata["sigma"] = sigma;
    e.metadata["kappa"] = kappa;
    if (radial)
        e.metadata["beta"] = beta;
    return e;
}

Estimate sobolev_seminorm(const Field& F, const Domain& d, double s, double p, const EstimatorConfig& cfg)
{
    if (!(s > 0.0))
        throw std::invalid_argument("sobolev_seminorm: s must be positive");
    int m = static_cast<int>(std::floor(s + 1e-12));
    double sigma = s - m;
    if (sigma < 1e-12)
        sigma = 0.0;
    if (F.deriv_order < m)
        throw std::invalid_argument("derivative order unavailable: '" + F.label + "' has " +
                                    std::to_string(F.deriv_order) + ", s needs " + std::to_string(m));
    const int dim = F.dim;
    std::vector<std::pair<std::string, Estimate>> parts;
    for (int ord = 1; ord <= m; ++ord)
        for (const auto& alpha : MultiIndex::with_order(dim, ord)) {
            EstimatorConfig c = cfg;
            c.stream = component_stream(cfg.stream, 1, alpha);
            parts.emplace_back("Lp d" + alpha.str(), lp_norm(F.derivative_field(alpha), d, p, c));
        }
    if (sigma > 0.0)
        for (const auto& alpha : MultiIndex::with_order(dim, m)) {
            EstimatorConfig c = cfg;
            c.stream = component_stream(cfg.stream, 2, alpha);
            parts.emplace_back("W" + std::to_string(sigma) + " d" + alpha.str(),
                               gagliardo_seminorm(F.derivative_field(alpha), d, sigma, p, c));
        }
    if (parts.empty())
        throw std::logic_error("sobolev_seminorm: no summands");
    Estimate e = sum_estimates(parts);
    e.seed = cfg.seed;
    e.mode = cfg.mode;
    e.metadata["m"] = m;
    e.metadata["sigma"] = sigma;
    return e;
}

Estimate volume_norm_full(const Field& F, const Domain& d, double s, double p, const EstimatorConfig& cfg)
{
    EstimatorConfig c = cfg;
    c.stream = component_stream(cfg.stream, 0, MultiIndex(F.dim));
    Estimate lp = lp_norm(F, d, p, c);
    Estimate semi = sobolev_seminorm(F, d, s, p, cfg);
    Estimate e = sum_estimates({{"Lp", lp}, {"seminorm", semi}});
    e.seed = cfg.seed;
    e.mode = cfg.mode;
    return e;
}

Estimate sphere_norm_full(const SphereFn& f, double s, double p, const EstimatorConfig& cfg, const CapChart& chart)
{
    if (!(s > 0.0))
        throw std::invalid_argument("sphere_norm_full: s must be positive");
    const int n = f.dim();
    if (s < 1.0) {
        Field F = f.field();
        EstimatorConfig c = cfg;
        c.stream = component_stream(cfg.stream, 0, MultiIndex(n));
        Estimate lp = lp_norm(F, Domain::sphere(n), p, c);
        c.stream = component_stream(cfg.stream, 2, MultiIndex(n));
        Estimate semi = gagliardo_seminorm(F, Domain::sphere(n), s, p, c);
        Estimate e = sum_estimates({{"Lp", lp}, {"seminorm", semi}});
        e.seed = cfg.seed;
        e.mode = cfg.mode;
        return e;
    }
    const bool cap = f.support().kind == Support::Kind::cap && f.support().chord <= 2.0 * chart.eps * (1.0 + 1e-12);
    if (!cap)
        throw std::invalid_argument("sphere_norm_full: s >= 1 needs a function supported in the chart cap");
    PlaneFn g = sphere_to_plane(f, 0.0, chart);
    Estimate e = volume_norm_full(g.field(), Domain::plane_disk(n - 1, chart.r), s, p, cfg);
    e.metadata["chart_norm"] = 1.0;
    return e;
}

Estimate cube_boundary_norm_full(const CubeBoundaryFn& f, double s, double p, const EstimatorConfig& cfg)
{
    if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("cube-boundary norm supports 0 < s < 1");
    const int n = f.dim();
    Field F = f.field();
    EstimatorConfig c = cfg;
    c.mode = EstimatorMode::uniform_pair;
    c.stream = component_stream(cfg.stream, 0, MultiIndex(n));
    Estimate lp = lp_norm(F, Domain::cube_boundary(n), p, c);
    c.stream = component_stream(cfg.stream, 2, MultiIndex(n));
    Estimate semi = gagliardo_seminorm(F, Domain::cube_boundary(n), s, p, c);
    Estimate e = sum_estimates({{"Lp", lp}, {"seminorm", semi}});
    e.seed = cfg.seed;
    e.mode = c.mode;
    return e;
}

std::pair<double, double> norm_ratio(const Estimate& num, const Estimate& den, double p)
{
    if (!(den.value > 0.0))
        throw std::domain_error("norm_ratio: denominator norm is zero");
    const double q = num.value / den.value;
    const double rel = std::sqrt(std::pow(num.std_error / std::max(num.value, 1e-300), 2) +
                                 std::pow(den.std_error / den.value, 2));
    const double r = std::pow(q, 1.0 / p);
    return {r, r * rel / p};
}

} // namespace rsl
