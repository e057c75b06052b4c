#include "rsl/functions.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rsl {

// ---------------------------------------------------------------------------
// Field

double central_difference(const PointFn& f, const MultiIndex& alpha, const Point& x, double h)
{
    int i = 0;
    while (i < alpha.size() && alpha[i] == 0)
        ++i;
    if (i == alpha.size())
        return f(x);
    MultiIndex rest = alpha;
    --rest[i];
    Point xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (central_difference(f, rest, xp, h) - central_difference(f, rest, xm, h)) / (2.0 * h);
}

double Field::derivative(const MultiIndex& alpha, const Point& x) const
{
    if (alpha.size() != dim)
        throw std::invalid_argument("Field::derivative: multi-index size mismatch");
    if (alpha.is_zero())
        return value(x);
    if (alpha.order() > deriv_order)
        throw std::invalid_argument("derivative order " + std::to_string(alpha.order()) +
                                    " unavailable for '" + label + "' (max " +
                                    std::to_string(deriv_order) + ")");
    if (partial)
        return partial(alpha, x);
    return central_difference(value, alpha, x, fd_step);
}

Field Field::derivative_field(const MultiIndex& alpha) const
{
    if (alpha.order() > deriv_order)
        throw std::invalid_argument("derivative order " + std::to_string(alpha.order()) +
                                    " unavailable for '" + label + "'");
    if (alpha.is_zero())
        return *this;
    Field d;
    d.dim = dim;
    d.deriv_order = deriv_order - alpha.order();
    d.fd_step = fd_step;
    d.label = "d" + alpha.str() + " " + label;
    auto self = std::make_shared<const Field>(*this);
    d.value = [self, alpha](const Point& x) { return self->derivative(alpha, x); };
    if (partial) {
        d.partial = [self, alpha](const MultiIndex& beta, const Point& x) {
            MultiIndex sum = alpha;
            for (int i = 0; i < sum.size(); ++i)
                sum[i] += beta[i];
            return self->partial(sum, x);
        };
    }
    return d;
}

Field polynomial_field(const Poly& p, std::string label)
{
    Field f;
    f.dim = p.vars();
    f.deriv_order = kSmooth;
    f.label = label.empty() ? p.str() : std::move(label);
    auto poly = std::make_shared<const Poly>(p);
    f.value = [poly](const Point& x) { return (*poly)(x); };
    f.partial = [poly](const MultiIndex& a, const Point& x) { return poly->partial(a)(x); };
    return f;
}

// ---------------------------------------------------------------------------
// PlaneFn

PlaneFn::PlaneFn(int dim, double support_radius, int deriv_order, JetFn jet, std::string label)
    : impl_(std::make_shared<const Impl>(Impl{dim, support_radius, deriv_order, std::move(jet), std::move(label)}))
{
    if (dim < 1 || dim > kMaxDim)
        throw std::invalid_argument("PlaneFn: bad dimension");
    if (!(support_radius > 0.0))
        throw std::invalid_argument("PlaneFn: support radius must be positive");
}

double PlaneFn::partial(const MultiIndex& beta, const Point& y) const
{
    if (beta.size() != dim() || y.dim() != dim())
        throw std::invalid_argument("PlaneFn::partial: dimension mismatch");
    if (beta.order() > deriv_order())
        throw std::invalid_argument("PlaneFn '" + label() + "': partial of order " +
                                    std::to_string(beta.order()) + " not available");
    if (norm(y) > support_radius())
        return 0.0;
    return impl_->jet(beta, y);
}

PlaneFn PlaneFn::scaled(double c) const
{
    auto base = impl_;
    return PlaneFn(dim(), support_radius(), deriv_order(),
                   [base, c](const MultiIndex& b, const Point& y) { return c * base->jet(b, y); },
                   label());
}

Field PlaneFn::field() const
{
    Field f;
    f.dim = dim();
    f.deriv_order = deriv_order();
    f.fd_step = 1e-4 * 2.0 * support_radius();
    f.label = label();
    PlaneFn self = *this;
    f.value = [self](const Point& y) { return self(y); };
    f.partial = [self](const MultiIndex& b, const Point& y) { return self.partial(b, y); };
    return f;
}

namespace {

using PartialTable = std::map<MultiIndex, Poly>;

/// Partials of (1 - |Z|^2)^k for every |beta| <= k, shared between bumps.
std::shared_ptr<const PartialTable> bump_table(int dim, int k)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const PartialTable>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_pair(dim, k);
    if (auto it = cache.find(key); it != cache.end())
        return it->second;
    Poly u = Poly::constant(dim, 1.0);
    for (int i = 0; i < dim; ++i)
        u -= Poly::variable(dim, i) * Poly::variable(dim, i);
    auto table = std::make_shared<PartialTable>();
    Poly base = u.pow(k);
    for (int ord = 0; ord <= k; ++ord)
        for (const auto& beta : MultiIndex::with_order(dim, ord))
            table->emplace(beta, base.partial(beta));
    cache.emplace(key, table);
    return table;
}

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

/// Partials of w(Y) = (1 + |Y|^2)^e as sums P_j(Y) (1 + |Y|^2)^{e - j}.
using PowerJet = std::vector<Poly>; // index j -> P_j
std::map<MultiIndex, PowerJet> power_jets(int dim, double e, int max_order)
{
    std::map<MultiIndex, PowerJet> jets;
    jets.emplace(MultiIndex(dim), PowerJet{Poly::constant(dim, 1.0)});
    for (int ord = 1; ord <= max_order; ++ord) {
        for (const auto& beta : MultiIndex::with_order(dim, ord)) {
            int i = 0;
            while (beta[i] == 0)
                ++i;
            MultiIndex prev = beta;
            --prev[i];
            const PowerJet& src = jets.at(prev);
            PowerJet out(src.size() + 1, Poly(dim));
            for (size_t j = 0; j < src.size(); ++j) {
                // d_i [P q^{e-j}] = (d_i P) q^{e-j} + 2 (e-j) Y_i P q^{e-j-1}
                out[j] += src[j].partial(i);
                out[j + 1] += src[j].times_variable(i) * (2.0 * (e - static_cast<double>(j)));
            }
            jets.emplace(beta, std::move(out));
        }
    }
    return jets;
}

Point fixed_direction(int dim, RngStream& rng)
{
    Point u(dim);
    for (;;) {
        for (int i = 0; i < dim; ++i)
            u[i] = rng.normal();
        double r = norm(u);
        if (r > 1e-3)
            return u *= 1.0 / r;
    }
}

Point to_point(const std::vector<double>& v)
{
    return Point(std::span<const double>(v.data(), v.size()));
}

constexpr std::uint64_t kDictionarySeed = 0x7e57d1c7ULL;

} // namespace

PlaneFn plane_bump(const Point& center, double radius, int order, double coeff)
{
    if (!(radius > 0.0))
        throw std::invalid_argument("plane_bump: radius must be positive");
    if (order < 0)
        throw std::invalid_argument("plane_bump: order must be nonnegative");
    const int dim = center.dim();
    const int k = order + 1;
    auto table = bump_table(dim, k);
    JetFn jet = [table, center, radius, coeff](const MultiIndex& beta, const Point& y) {
        Point z = (y - center) * (1.0 / radius);
        if (dot(z, z) >= 1.0)
            return 0.0;
        auto it = table->find(beta);
        if (it == table->end())
            return 0.0; // order above 2k: polynomial derivative vanishes
        return coeff * std::pow(radius, -beta.order()) * it->second(z);
    };
    std::ostringstream label;
    label << "plane-bump(r=" << radius << ",order=" << order << ")";
    // The second-to-top derivative is Lipschitz and the top one bounded, so
    // weak derivatives exist up to k.
    return PlaneFn(dim, norm(center) + radius, k, std::move(jet), label.str());
}

PlaneFn plane_sum(const std::vector<PlaneFn>& parts, std::string label)
{
    if (parts.empty())
        throw std::invalid_argument("plane_sum: no parts");
    int order = kSmooth;
    double radius = 0.0;
    for (const auto& p : parts) {
        if (p.dim() != parts.front().dim())
            throw std::invalid_argument("plane_sum: dimension mismatch");
        order = std::min(order, p.deriv_order());
        radius = std::max(radius, p.support_radius());
    }
    auto copy = std::make_shared<const std::vector<PlaneFn>>(parts);
    JetFn jet = [copy](const MultiIndex& beta, const Point& y) {
        double s = 0.0;
        for (const auto& p : *copy)
            s += p.partial(beta, y);
        return s;
    };
    return PlaneFn(parts.front().dim(), radius, order, std::move(jet), std::move(label));
}

// ---------------------------------------------------------------------------
// SphereFn

bool Support::contains(const Point& x) const
{
    if (kind == Kind::full)
        return true;
    return distance(x, unit_vector(x.dim(), x.dim() - 1)) <= chord;
}

SphereFn::SphereFn(int n, PointFn eval, int deriv_order, Support support, std::string label,
                   std::optional<ChartOrigin> origin)
    : impl_(std::make_shared<const Impl>(
          Impl{n, std::move(eval), deriv_order, support, std::move(label), std::move(origin)}))
{
    if (n < 2 || n > kMaxDim)
        throw std::invalid_argument("SphereFn: dimension must be in [2, kMaxDim]");
}

double SphereFn::operator()(const Point& x) const
{
    if (x.dim() != dim())
        throw std::invalid_argument("SphereFn: point dimension mismatch");
    if (!impl_->support.contains(x))
        return 0.0;
    return impl_->eval(x);
}

SphereFn SphereFn::scaled(double c) const
{
    auto base = impl_;
    std::optional<ChartOrigin> origin = base->origin;
    if (origin)
        origin->g = std::make_shared<const PlaneFn>(origin->g->scaled(c));
    return SphereFn(
        dim(), [base, c](const Point& x) { return c * base->eval(x); }, deriv_order(), support(),
        label(), std::move(origin));
}

Field SphereFn::field() const
{
    Field f;
    f.dim = dim();
    f.deriv_order = 0;
    f.label = label();
    SphereFn self = *this;
    f.value = [self](const Point& x) { return self(x); };
    return f;
}

CubeBoundaryFn::CubeBoundaryFn(int n, PointFn eval, std::string label)
    : n_(n), eval_(std::move(eval)), label_(std::move(label))
{
    if (n < 2 || n > kMaxDim)
        throw std::invalid_argument("CubeBoundaryFn: dimension must be in [2, kMaxDim]");
}

Field CubeBoundaryFn::field() const
{
    Field f;
    f.dim = n_;
    f.label = label_;
    f.value = eval_;
    return f;
}

CubeBoundaryFn CubeBoundaryFn::from_sphere(const SphereFn& g)
{
    return CubeBoundaryFn(
        g.dim(), [g](const Point& z) { return g(z * (1.0 / norm(z))); }, g.label() + " o Psi^-1");
}

// ---------------------------------------------------------------------------
// Test corpus

FunctionSpec FunctionSpec::bump(std::vector<double> center, double radius, int order, bool cap)
{
    FunctionSpec s;
    s.kind = Kind::bump;
    s.center = std::move(center);
    s.radius = radius;
    s.order = order;
    s.cap = cap;
    return s;
}

FunctionSpec FunctionSpec::cusp(std::vector<double> anchor, double gamma)
{
    FunctionSpec s;
    s.kind = Kind::cusp;
    s.center = std::move(anchor);
    s.gamma = gamma;
    return s;
}

FunctionSpec FunctionSpec::random_mix(std::uint64_t seed, int count, bool cap)
{
    FunctionSpec s;
    s.kind = Kind::random_mix;
    s.seed = seed;
    s.count = count;
    s.cap = cap;
    return s;
}

namespace {

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';'))
        v.push_back(std::stod(item));
    return v;
}

std::string kind_name(FunctionSpec::Kind k)
{
    switch (k) {
    case FunctionSpec::Kind::constant: return "constant";
    case FunctionSpec::Kind::coordinate: return "coordinate";
    case FunctionSpec::Kind::bump: return "bump";
    case FunctionSpec::Kind::cusp: return "cusp";
    case FunctionSpec::Kind::random_mix: return "random_mix";
    }
    return "?";
}

} // namespace

FunctionSpec parse_function_spec(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
    FunctionSpec s;
    if (kind == "constant")
        s.kind = FunctionSpec::Kind::constant;
    else if (kind == "coordinate")
        s.kind = FunctionSpec::Kind::coordinate;
    else if (kind == "bump")
        s.kind = FunctionSpec::Kind::bump;
    else if (kind == "cusp")
        s.kind = FunctionSpec::Kind::cusp;
    else if (kind == "random_mix")
        s.kind = FunctionSpec::Kind::random_mix;
    else
        throw std::invalid_argument("unknown function kind '" + kind + "'");

    std::stringstream ss(args);
    std::string item;
    try {
        while (std::getline(ss, item, ',')) {
            if (item.empty())
                continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                if (item == "cap") {
                    s.cap = true;
                    continue;
                }
                // bare positional value
                switch (s.kind) {
                case FunctionSpec::Kind::constant: s.value = std::stod(item); break;
                case FunctionSpec::Kind::coordinate: s.index = std::stoi(item); break;
                case FunctionSpec::Kind::cusp: s.gamma = std::stod(item); break;
                case FunctionSpec::Kind::random_mix: s.seed = std::stoull(item); break;
                case FunctionSpec::Kind::bump: s.radius = std::stod(item); break;
                }
                continue;
            }
            const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
            if (key == "c" || key == "value")
                s.value = std::stod(val);
            else if (key == "i" || key == "index")
                s.index = std::stoi(val);
            else if (key == "center" || key == "anchor")
                s.center = parse_list(val);
            else if (key == "radius")
                s.radius = std::stod(val);
            else if (key == "order")
                s.order = std::stoi(val);
            else if (key == "gamma")
                s.gamma = std::stod(val);
            else if (key == "seed")
                s.seed = std::stoull(val);
            else if (key == "count")
                s.count = std::stoi(val);
            else if (key == "cap")
                s.cap = (val == "1" || val == "true");
            else
                throw std::invalid_argument("unknown key '" + key + "'");
        }
    } catch (const std::logic_error& e) {
        throw std::invalid_argument("bad function spec '" + text + "': " + e.what());
    }
    return s;
}

std::string to_string(const FunctionSpec& s)
{
    std::ostringstream o;
    o << kind_name(s.kind);
    auto list = [&o](const std::vector<double>& v) {
        for (size_t i = 0; i < v.size(); ++i)
            o << (i ? ";" : "") << v[i];
    };
    switch (s.kind) {
    case FunctionSpec::Kind::constant: o << ":c=" << s.value; break;
    case FunctionSpec::Kind::coordinate: o << ":i=" << s.index; break;
    case FunctionSpec::Kind::bump:
        o << ":radius=" << s.radius << ",order=" << s.order;
        if (!s.center.empty()) {
            o << ",center=";
            list(s.center);
        }
        break;
    case FunctionSpec::Kind::cusp:
        o << ":gamma=" << s.gamma;
        if (!s.center.empty()) {
            o << ",anchor=";
            list(s.center);
        }
        break;
    case FunctionSpec::Kind::random_mix: o << ":seed=" << s.seed << ",count=" << s.count; break;
    }
    if (s.cap)
        o << ",cap";
    return o.str();
}

SphereFn make_sphere_function(const FunctionSpec& spec, int n, const CapChart& chart)
{
    const Point pole = unit_vector(n, n - 1);
    switch (spec.kind) {
    case FunctionSpec::Kind::constant: {
        if (spec.cap)
            throw std::invalid_argument("constant function cannot be cap supported");
        const double c = spec.value;
        return SphereFn(n, [c](const Point&) { return c; }, kSmooth, Support::full(), to_string(spec));
    }
    case FunctionSpec::Kind::coordinate: {
        if (spec.index < 1 || spec.index > n)
            throw std::invalid_argument("coordinate index must be in [1, n]");
        if (spec.cap)
            throw std::invalid_argument("coordinate function cannot be cap supported");
        const int i = spec.index - 1;
        return SphereFn(n, [i](const Point& x) { return x[i]; }, kSmooth, Support::full(), to_string(spec));
    }
    case FunctionSpec::Kind::bump: {
        Point c = spec.center.empty() ? pole : to_point(spec.center);
        if (c.dim() != n || std::abs(norm(c) - 1.0) > 1e-9)
            throw std::invalid_argument("sphere bump centre must be a unit vector of R^n");
        if (!(spec.radius > 0.0) || spec.order < 0)
            throw std::invalid_argument("bump needs radius > 0 and order >= 0");
        Support support = Support::full();
        if (spec.cap) {
            if (distance(c, pole) + spec.radius > chart.eps * (1.0 + 1e-12))
                throw std::invalid_argument("bump support leaves the chart cap (|c - e_n| + radius > eps)");
            support = Support::cap(chart.eps);
        }
        const double rho2 = spec.radius * spec.radius;
        const int k = spec.order + 1;
        return SphereFn(
            n,
            [c, rho2, k](const Point& x) {
                Point d = x - c;
                double u = 1.0 - dot(d, d) / rho2;
                return u > 0.0 ? std::pow(u, k) : 0.0;
            },
            k, support, to_string(spec));
    }
    case FunctionSpec::Kind::cusp: {
        Point anchor = spec.center.empty() ? pole : to_point(spec.center);
        if (anchor.dim() != n)
            throw std::invalid_argument("cusp anchor must lie in R^n");
        if (!(spec.gamma > 0.0))
            throw std::invalid_argument("cusp exponent gamma must be positive");
        const double g = spec.gamma;
        return SphereFn(
            n, [anchor, g](const Point& x) { return std::pow(distance(x, anchor), g); }, 0,
            Support::full(), to_string(spec));
    }
    case FunctionSpec::Kind::random_mix: {
        if (spec.count < 1 || spec.count > 8)
            throw std::invalid_argument("random_mix count must be in [1, 8]");
        if (spec.cap) {
            SphereFn f = plane_to_sphere(make_plane_function(spec, n - 1, chart), 0.0, chart);
            return SphereFn(
                n, [f](const Point& x) { return f(x); }, f.deriv_order(), f.support(), to_string(spec),
                f.chart_origin());
        }
        // Fixed dictionary: 8 bumps of chordal radius 1 with centres from a fixed stream.
        RngStream dict(kDictionarySeed, static_cast<std::uint64_t>(n));
        RngStream coeffs(spec.seed, 7);
        std::vector<std::pair<Point, double>> terms;
        for (int i = 0; i < 8; ++i) {
            Point c = fixed_direction(n, dict);
            double w = coeffs.uniform(-1.0, 1.0);
            if (i < spec.count)
                terms.emplace_back(c, w);
        }
        constexpr int k = 4;
        return SphereFn(
            n,
            [terms](const Point& x) {
                double s = 0.0;
                for (const auto& [c, w] : terms) {
                    Point d = x - c;
                    double u = 1.0 - dot(d, d);
                    if (u > 0.0)
                        s += w * std::pow(u, k);
                }
                return s;
            },
            k, Support::full(), to_string(spec));
    }
    }
    throw std::logic_error("make_sphere_function: unknown kind");
}

PlaneFn make_plane_function(const FunctionSpec& spec, int plane_dim, const CapChart& chart)
{
    if (plane_dim != chart.n - 1)
        throw std::invalid_argument("plane function dimension must be n-1 of the chart");
    const double r = chart.r;
    const double limit = spec.cap ? chart.inner_radius() : r;
    switch (spec.kind) {
    case FunctionSpec::Kind::constant: {
        const double c = spec.value;
        return PlaneFn(
            plane_dim, r, 0, [c](const MultiIndex&, const Point&) { return c; }, to_string(spec));
    }
    case FunctionSpec::Kind::coordinate: {
        if (spec.index < 1 || spec.index > plane_dim)
            throw std::invalid_argument("plane coordinate index must be in [1, n-1]");
        const int i = spec.index - 1;
        return PlaneFn(
            plane_dim, r, 0, [i](const MultiIndex&, const Point& y) { return y[i]; }, to_string(spec));
    }
    case FunctionSpec::Kind::bump: {
        Point c = spec.center.empty() ? Point(plane_dim) : to_point(spec.center);
        if (c.dim() != plane_dim)
            throw std::invalid_argument("plane bump centre must lie in R^{n-1}");
        if (norm(c) + spec.radius > limit * (1.0 + 1e-12))
            throw std::invalid_argument(spec.cap ? "bump support leaves the chart cap"
                                                 : "bump support leaves the chart disk");
        PlaneFn b = plane_bump(c, spec.radius, spec.order);
        return plane_sum({b}, to_string(spec));
    }
    case FunctionSpec::Kind::cusp: {
        Point anchor = spec.center.empty() ? Point(plane_dim) : to_point(spec.center);
        if (!(spec.gamma > 0.0))
            throw std::invalid_argument("cusp exponent gamma must be positive");
        const double g = spec.gamma;
        return PlaneFn(
            plane_dim, r, 0,
            [anchor, g](const MultiIndex&, const Point& y) { return std::pow(distance(y, anchor), g); },
            to_string(spec));
    }
    case FunctionSpec::Kind::random_mix: {
        if (spec.count < 1 || spec.count > 8)
            throw std::invalid_argument("random_mix count must be in [1, 8]");
        const double rin = chart.inner_radius();
        RngStream dict(kDictionarySeed, 100 + static_cast<std::uint64_t>(plane_dim));
        RngStream coeffs(spec.seed, 11);
        std::vector<PlaneFn> parts;
        for (int i = 0; i < 8; ++i) {
            Point c = i == 0 ? Point(plane_dim) : fixed_direction(plane_dim, dict) * (0.4 * rin);
            double w = coeffs.uniform(-1.0, 1.0);
            if (i < spec.count)
                parts.push_back(plane_bump(c, 0.55 * rin, 3, w));
        }
        return plane_sum(parts, to_string(spec));
    }
    }
    throw std::logic_error("make_plane_function: unknown kind");
}

// ---------------------------------------------------------------------------
// Chart transfer

SphereFn plane_to_sphere(const PlaneFn& g, double a, const CapChart& chart)
{
    if (g.dim() != chart.n - 1)
        throw std::invalid_argument("plane_to_sphere: g must live in R^{n-1}");
    if (g.support_radius() > chart.r * (1.0 + 1e-12))
        throw std::invalid_argument("plane_to_sphere: g must be supported in the chart disk");
    auto gp = std::make_shared<const PlaneFn>(g);
    PointFn eval = [gp, a](const Point& x) {
        const double xn = x.last();
        if (xn <= 0.0)
            return 0.0;
        return std::pow(xn, a) * (*gp)(x.head() * (1.0 / xn));
    };
    std::ostringstream label;
    label << "lift[a=" << a << "](" << g.label() << ")";
    return SphereFn(chart.n, std::move(eval), g.deriv_order(), Support::cap(lifted_chord(g.support_radius())),
                    label.str(), ChartOrigin{gp, a, chart});
}

double mass_outside_cap(const SphereFn& f, const CapChart& chart, int probes)
{
    RngStream rng(0xC0FFEEULL, static_cast<std::uint64_t>(chart.n));
    const Domain sphere = Domain::sphere(chart.n);
    double worst = 0.0;
    for (int i = 0; i < probes; ++i) {
        Point x = sample(sphere, rng);
        if (!chart.in_outer_cap(x))
            worst = std::max(worst, std::abs(f(x)));
    }
    return worst;
}

PlaneFn sphere_to_plane(const SphereFn& f, double a, const CapChart& chart)
{
    if (f.dim() != chart.n)
        throw std::invalid_argument("sphere_to_plane: dimension mismatch with chart");
    const bool inside = f.support().kind == Support::Kind::cap &&
                        f.support().chord <= 2.0 * chart.eps * (1.0 + 1e-12);
    if (!inside) {
        double outside = mass_outside_cap(f, chart);
        if (outside > 1e-12) {
            std::ostringstream msg;
            msg << "sphere_to_plane: f has mass outside the chart cap (max |f| = " << outside << ")";
            throw std::invalid_argument(msg.str());
        }
    }
    const double r = chart.r;
    const int k = chart.n - 1;
    auto value = [f, a, chart](const Point& y) {
        Point x = gnomonic(chart, y, Gnomonic::lift);
        return std::pow(1.0 + dot(y, y), 0.5 * a) * f(x);
    };

    JetFn jet;
    int order = 0;
    if (const auto& origin = f.chart_origin()) {
        auto src = origin->g;
        order = src->deriv_order();
        const double c = a - origin->a;
        if (c == 0.0) {
            jet = [value, src](const MultiIndex& beta, const Point& y) {
                return beta.is_zero() ? value(y) : src->partial(beta, y);
            };
        } else {
            // g = (1+|Y|^2)^{c/2} g_src; Leibniz with exact weight partials.
            const int max_order = std::min(order, 6);
            order = max_order;
            auto jets = std::make_shared<const std::map<MultiIndex, PowerJet>>(power_jets(k, 0.5 * c, max_order));
            const double e = 0.5 * c;
            jet = [value, src, jets, e, k](const MultiIndex& beta, const Point& y) {
                if (beta.is_zero())
                    return value(y);
                const double q = 1.0 + dot(y, y);
                double sum = 0.0;
                for (int ord = 0; ord <= beta.order(); ++ord) {
                    for (const auto& gam : MultiIndex::with_order(k, ord)) {
                        bool fits = true;
                        double coef = 1.0;
                        MultiIndex rest(k);
                        for (int i = 0; i < k; ++i) {
                            if (gam[i] > beta[i]) {
                                fits = false;
                                break;
                            }
                            coef *= binomial(beta[i], gam[i]);
                            rest[i] = beta[i] - gam[i];
                        }
                        if (!fits)
                            continue;
                        double w = 0.0;
                        const PowerJet& pj = jets->at(gam);
                        for (size_t j = 0; j < pj.size(); ++j)
                            if (!pj[j].is_zero())
                                w += pj[j](y) * std::pow(q, e - static_cast<double>(j));
                        const double d = src->partial(rest, y);
                        sum += coef * w * d;
                    }
                }
                return sum;
            };
        }
    } else {
        order = std::min(f.deriv_order(), 4);
        const double h = 1e-4 * 2.0 * r;
        jet = [value, h](const MultiIndex& beta, const Point& y) {
            return central_difference(value, beta, y, h);
        };
    }
    std::ostringstream label;
    label << "chart[a=" << a << "](" << f.label() << ")";
    return PlaneFn(k, r, order, std::move(jet), label.str());
}

} // namespace rsl
