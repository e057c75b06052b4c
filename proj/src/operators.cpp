#include "rsl/operators.hpp"

#include <mutex>
#include <sstream>

namespace rsl {

VolumeFn::VolumeFn(int dim, TryFn eval, JetFn jet, int deriv_order, std::string label)
    : impl_(std::make_shared<const Impl>(Impl{dim, std::move(eval), std::move(jet), deriv_order, std::move(label), {}}))
{
}

std::optional<double> VolumeFn::try_eval(const Point& x) const
{
    if (x.dim() != dim())
        throw std::invalid_argument("VolumeFn: point dimension mismatch");
    return impl_->eval(x);
}

double VolumeFn::operator()(const Point& x) const
{
    auto v = try_eval(x);
    if (!v) {
        std::ostringstream msg;
        msg << "'" << label() << "' evaluated at the origin (|X| = " << norm(x) << ")";
        throw OriginError(msg.str());
    }
    return *v;
}

double VolumeFn::partial(const MultiIndex& alpha, const Point& x) const
{
    if (alpha.size() != dim())
        throw std::invalid_argument("VolumeFn::partial: multi-index size mismatch");
    if (alpha.is_zero())
        return (*this)(x);
    if (alpha.order() > deriv_order())
        throw std::invalid_argument("derivative order " + std::to_string(alpha.order()) +
                                    " unavailable for '" + label() + "'");
    if (norm(x) < kOriginRadius)
        throw OriginError("'" + label() + "' differentiated at the origin");
    if (impl_->jet)
        return impl_->jet(alpha, x);
    VolumeFn self = *this;
    return central_difference([self](const Point& y) { return self(y); }, alpha, x, 2e-4);
}

Field VolumeFn::field() const
{
    Field f;
    f.dim = dim();
    f.deriv_order = deriv_order();
    f.fd_step = 2e-4;
    f.label = label();
    VolumeFn self = *this;
    f.value = [self](const Point& x) { return self(x); };
    if (has_exact_partials())
        f.partial = [self](const MultiIndex& a, const Point& x) { return self.partial(a, x); };
    f.difference = impl_->diff;
    return f;
}

VolumeFn VolumeFn::with_difference(DiffFn diff) const
{
    VolumeFn out = *this;
    Impl copy = *impl_;
    copy.diff = std::move(diff);
    out.impl_ = std::make_shared<const Impl>(std::move(copy));
    return out;
}

namespace {

using ExpansionTable = std::map<MultiIndex, DerivExpansion>;

std::shared_ptr<const ExpansionTable> expansions(int n, double a, int max_order)
{
    static std::mutex mutex;
    static std::map<std::tuple<int, double, int>, std::shared_ptr<const ExpansionTable>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(n, a, max_order);
    if (auto it = cache.find(key); it != cache.end())
        return it->second;
    auto table = std::make_shared<ExpansionTable>();
    table->emplace(MultiIndex(n), base_expansion(n, a));
    for (int ord = 1; ord <= max_order; ++ord)
        for (const auto& alpha : MultiIndex::with_order(n, ord)) {
            int j = 0;
            while (alpha[j] == 0)
                ++j;
            MultiIndex prev = alpha;
            --prev[j];
            table->emplace(alpha, differentiate(table->at(prev), j));
        }
    cache.emplace(key, table);
    return table;
}

std::string fmt_a(double a)
{
    std::ostringstream s;
    s << a;
    return s.str();
}

} // namespace

VolumeFn extend_V(const PlaneFn& g, double a, double cone_radius)
{
    const int n = g.dim() + 1;
    if (g.support_radius() > cone_radius * (1.0 + 1e-12))
        throw std::invalid_argument("extend_V: g must be supported in the cone base disk");
    const int order = std::min(g.deriv_order(), 4);
    auto table = expansions(n, a, order);
    auto in_cone = [cone_radius](const Point& x) {
        const double xn = x.last();
        return xn > 0.0 && norm(x.head()) <= cone_radius * xn;
    };
    VolumeFn::TryFn eval = [g, a, in_cone](const Point& x) -> std::optional<double> {
        if (norm(x) < kOriginRadius)
            return std::nullopt;
        if (!in_cone(x))
            return 0.0;
        const double xn = x.last();
        return std::pow(xn, a) * g(x.head() * (1.0 / xn));
    };
    JetFn jet = [g, table, in_cone](const MultiIndex& alpha, const Point& x) {
        if (!in_cone(x))
            return 0.0;
        return eval_derivative(table->at(alpha), g, x);
    };
    return VolumeFn(n, std::move(eval), std::move(jet), order, "V[a=" + fmt_a(a) + "](" + g.label() + ")");
}

VolumeFn extend_U(const SphereFn& f, double a)
{
    const int n = f.dim();
    VolumeFn::TryFn eval = [f, a](const Point& x) -> std::optional<double> {
        const double r = norm(x);
        if (r < kOriginRadius)
            return std::nullopt;
        return std::pow(r, a) * f(x * (1.0 / r));
    };
    JetFn jet;
    int order = f.deriv_order();
    if (const auto& origin = f.chart_origin()) {
        // On the cone U_a f = V_a g with g the chart transfer at exponent a;
        // both vanish off the cone since f lives in the chart cap.
        PlaneFn g = sphere_to_plane(f, a, origin->chart);
        VolumeFn v = extend_V(g, a, origin->chart.r);
        order = v.deriv_order();
        jet = [v](const MultiIndex& alpha, const Point& x) { return v.partial(alpha, x); };
    } else {
        order = std::min(order, 4);
    }
    const std::string label = "U[a=" + fmt_a(a) + "](" + f.label() + ")";
    // |X|^a (f(x) - f(y)) + |Y|^a f(y) expm1(a log(|X|/|Y|)); every factor but
    // the two powers is invariant under X, Y -> 2^k X, 2^k Y.
    DiffFn diff = [f, a, label](const Point& x, const Point& y) {
        const double rx = norm(x), ry = norm(y);
        if (rx < kOriginRadius || ry < kOriginRadius)
            throw OriginError("'" + label + "' evaluated at the origin");
        const double fy = f(y * (1.0 / ry));
        const double df = f(x * (1.0 / rx)) - fy;
        const double radial = a == 0.0 || fy == 0.0 ? 0.0 : std::pow(ry, a) * fy * std::expm1(a * std::log(rx / ry));
        return std::pow(rx, a) * df + radial;
    };
    return VolumeFn(n, std::move(eval), std::move(jet), order, label).with_difference(std::move(diff));
}

VolumeFn extend_T(const CubeBoundaryFn& f)
{
    VolumeFn::TryFn eval = [f](const Point& x) -> std::optional<double> {
        const double r = norm(x, NormKind::sup);
        if (r < kOriginRadius)
            return std::nullopt;
        return f(x * (1.0 / r));
    };
    return VolumeFn(f.dim(), std::move(eval), {}, 0, "T(" + f.label() + ")");
}

VolumeFn radial_extend(const ExtensionSpec& spec)
{
    if (spec.geometry == Geometry::ball) {
        const auto* f = std::get_if<SphereFn>(&spec.boundary_fn);
        if (!f)
            throw std::invalid_argument("radial_extend: ball geometry needs a sphere function");
        return extend_U(*f, spec.a);
    }
    const auto* f = std::get_if<CubeBoundaryFn>(&spec.boundary_fn);
    if (!f)
        throw std::invalid_argument("radial_extend: cube geometry needs a cube-boundary function");
    if (spec.a == 0.0)
        return extend_T(*f);
    const double a = spec.a;
    CubeBoundaryFn g = *f;
    VolumeFn::TryFn eval = [g, a](const Point& x) -> std::optional<double> {
        const double r = norm(x, NormKind::sup);
        if (r < kOriginRadius)
            return std::nullopt;
        return std::pow(r, a) * g(x * (1.0 / r));
    };
    return VolumeFn(g.dim(), std::move(eval), {}, 0, "T[a=" + fmt_a(a) + ",nonstandard](" + g.label() + ")");
}

VolumeFn compose_T_via_U(const CubeBoundaryFn& f)
{
    // f o Psi on the sphere, then U_0, then precomposition with Lambda^{-1}.
    SphereFn f_psi(
        f.dim(), [f](const Point& x) { return f(phi_map(x, Direction::forward)); }, 0, Support::full(),
        f.label() + " o Psi");
    VolumeFn u = extend_U(f_psi, 0.0);
    VolumeFn::TryFn eval = [u](const Point& z) -> std::optional<double> {
        if (norm(z) < kOriginRadius)
            return std::nullopt;
        return u.try_eval(phi_map(z, Direction::inverse));
    };
    return VolumeFn(f.dim(), std::move(eval), {}, 0, "U0(" + f.label() + " o Psi) o Lambda^-1");
}

double trace(const VolumeFn& F, double a, double r, const Point& x)
{
    if (!(r > 0.0 && r <= 1.0))
        throw std::invalid_argument("trace: r must lie in (0, 1]");
    return std::pow(r, -a) * F(x * r);
}

} // namespace rsl
