#include "rsl/geometry.hpp"

#include "rsl/quadrature.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace rsl {

Point Point::head() const
{
    if (dim_ < 2)
        throw std::invalid_argument("Point::head: needs dimension >= 2");
    Point h(dim_ - 1);
    for (int i = 0; i < dim_ - 1; ++i)
        h[i] = x_[i];
    return h;
}

Point Point::append(const Point& head, double t)
{
    Point p(head.dim() + 1);
    for (int i = 0; i < head.dim(); ++i)
        p[i] = head[i];
    p[head.dim()] = t;
    return p;
}

Point& Point::operator+=(const Point& o)
{
    if (o.dim_ != dim_)
        throw std::invalid_argument("Point: dimension mismatch");
    for (int i = 0; i < dim_; ++i)
        x_[i] += o.x_[i];
    return *this;
}

Point& Point::operator-=(const Point& o)
{
    if (o.dim_ != dim_)
        throw std::invalid_argument("Point: dimension mismatch");
    for (int i = 0; i < dim_; ++i)
        x_[i] -= o.x_[i];
    return *this;
}

Point& Point::operator*=(double t)
{
    for (int i = 0; i < dim_; ++i)
        x_[i] *= t;
    return *this;
}

bool operator==(const Point& a, const Point& b)
{
    if (a.dim_ != b.dim_)
        return false;
    for (int i = 0; i < a.dim_; ++i)
        if (a.x_[i] != b.x_[i])
            return false;
    return true;
}

double dot(const Point& a, const Point& b)
{
    if (a.dim() != b.dim())
        throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm(const Point& v, NormKind kind)
{
    if (v.dim() == 0)
        throw std::invalid_argument("norm: empty point");
    if (kind == NormKind::sup) {
        double m = 0.0;
        for (int i = 0; i < v.dim(); ++i)
            m = std::max(m, std::abs(v[i]));
        return m;
    }
    double s = 0.0;
    for (int i = 0; i < v.dim(); ++i)
        s += v[i] * v[i];
    return std::sqrt(s);
}

Point unit_vector(int dim, int i)
{
    Point e(dim);
    e[i] = 1.0;
    return e;
}

// ---------------------------------------------------------------------------
// RngStream

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL)))
{
}

double RngStream::uniform()
{
    // 53 random bits shifted by half an ulp: never 0, never 1.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

int RngStream::below(int count)
{
    return static_cast<int>(uniform() * count) % count;
}

// ---------------------------------------------------------------------------
// Domains

Domain Domain::annulus(int n, int j)
{
    if (j < 0)
        throw std::invalid_argument("Domain::annulus: j must be nonnegative");
    Domain d{DomainKind::Annulus, n, j};
    d.inner = std::ldexp(1.0, -j - 1);
    d.radius = std::ldexp(1.0, -j);
    return d;
}

Domain Domain::shell(int n, double inner, double outer)
{
    if (!(inner >= 0.0 && outer > inner))
        throw std::invalid_argument("Domain::shell: need 0 <= inner < outer");
    return {DomainKind::Shell, n, 0, inner, outer};
}

bool Domain::is_volume() const
{
    return kind != DomainKind::Sphere && kind != DomainKind::CubeBoundary;
}

void validate(const Domain& d)
{
    if (d.dim > kMaxDim)
        throw std::invalid_argument("domain dimension exceeds kMaxDim");
    if (d.kind == DomainKind::PlaneDisk) {
        if (d.dim < 1 || !(d.radius > 0.0))
            throw std::invalid_argument("PlaneDisk: need dim >= 1 and radius > 0");
        return;
    }
    if (d.dim < 2)
        throw std::invalid_argument("domain dimension must be >= 2");
    if (d.kind == DomainKind::Cone && !(d.radius > 0.0))
        throw std::invalid_argument("Cone: radius must be positive");
}

int intrinsic_dim(const Domain& d)
{
    return d.is_volume() ? d.dim : d.dim - 1;
}

double sphere_area(int n)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double ball_volume(int n)
{
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

namespace {

/// Fraction of the unit sphere of R^n with polar angle below theta.
double cap_fraction(int n, double theta)
{
    auto w = [n](double t) { return std::pow(std::sin(t), n - 2); };
    double part = integrate_or_throw(w, 0.0, theta, 1e-13, 1e-300);
    double full = integrate_or_throw(w, 0.0, std::numbers::pi, 1e-13, 1e-300);
    return part / full;
}

Point gaussian_direction(int dim, RngStream& rng)
{
    Point g(dim);
    for (;;) {
        for (int i = 0; i < dim; ++i)
            g[i] = rng.normal();
        double r = norm(g);
        if (r > 1e-150)
            return g *= 1.0 / r;
    }
}

} // namespace

double measure(const Domain& d)
{
    validate(d);
    const int n = d.dim;
    switch (d.kind) {
    case DomainKind::Sphere: return sphere_area(n);
    case DomainKind::Ball: return ball_volume(n);
    case DomainKind::Cube: return std::ldexp(1.0, n);
    case DomainKind::CubeBoundary: return 2.0 * n * std::ldexp(1.0, n - 1);
    case DomainKind::Annulus:
    case DomainKind::Shell: return ball_volume(n) * (std::pow(d.radius, n) - std::pow(d.inner, n));
    case DomainKind::PlaneDisk: return ball_volume(n) * std::pow(d.radius, n);
    case DomainKind::Cone: return ball_volume(n) * cap_fraction(n, std::atan(d.radius));
    }
    throw std::logic_error("measure: unknown domain");
}

double diameter(const Domain& d)
{
    switch (d.kind) {
    case DomainKind::Sphere:
    case DomainKind::Ball: return 2.0;
    case DomainKind::Cube:
    case DomainKind::CubeBoundary: return 2.0 * std::sqrt(static_cast<double>(d.dim));
    case DomainKind::Annulus:
    case DomainKind::Shell:
    case DomainKind::PlaneDisk: return 2.0 * d.radius;
    case DomainKind::Cone: return std::max(1.0, 2.0 * std::sin(std::atan(d.radius)));
    }
    throw std::logic_error("diameter: unknown domain");
}

bool contains(const Domain& d, const Point& x, double tol)
{
    if (x.dim() != d.dim)
        return false;
    switch (d.kind) {
    case DomainKind::Sphere: return std::abs(norm(x) - 1.0) <= tol;
    case DomainKind::Ball: return norm(x) <= 1.0 + tol;
    case DomainKind::Cube: return norm(x, NormKind::sup) <= 1.0 + tol;
    case DomainKind::CubeBoundary: return std::abs(norm(x, NormKind::sup) - 1.0) <= tol;
    case DomainKind::Annulus:
    case DomainKind::Shell: {
        double r = norm(x);
        return r > d.inner - tol && r < d.radius + tol;
    }
    case DomainKind::PlaneDisk: return norm(x) <= d.radius + tol;
    case DomainKind::Cone: {
        double t = x.last();
        return t > -tol && norm(x) <= 1.0 + tol && norm(x.head()) <= d.radius * t + tol;
    }
    }
    return false;
}

Point sample(const Domain& d, RngStream& rng)
{
    validate(d);
    const int n = d.dim;
    switch (d.kind) {
    case DomainKind::Sphere: return gaussian_direction(n, rng);
    case DomainKind::Ball: return gaussian_direction(n, rng) * std::pow(rng.uniform(), 1.0 / n);
    case DomainKind::PlaneDisk:
        return gaussian_direction(n, rng) * (d.radius * std::pow(rng.uniform(), 1.0 / n));
    case DomainKind::Cube: {
        Point x(n);
        for (int i = 0; i < n; ++i)
            x[i] = rng.uniform(-1.0, 1.0);
        return x;
    }
    case DomainKind::CubeBoundary: {
        // All 2n faces have equal area, so the face choice is uniform.
        Point x(n);
        for (int i = 0; i < n; ++i)
            x[i] = rng.uniform(-1.0, 1.0);
        int face = rng.below(2 * n);
        x[face / 2] = (face % 2 == 0) ? 1.0 : -1.0;
        return x;
    }
    case DomainKind::Annulus:
    case DomainKind::Shell: {
        double lo = std::pow(d.inner, n), hi = std::pow(d.radius, n);
        double r = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / n);
        r = std::clamp(r, std::nextafter(d.inner, d.radius), std::nextafter(d.radius, d.inner));
        return gaussian_direction(n, rng) * r;
    }
    case DomainKind::Cone: {
        // Rejection from the bounding box [-rho, rho]^{n-1} x (0, 1).
        const double rho = std::min(d.radius, 1.0);
        for (;;) {
            Point x(n);
            for (int i = 0; i < n - 1; ++i)
                x[i] = rng.uniform(-rho, rho);
            x[n - 1] = rng.uniform();
            if (norm(x) < 1.0 && norm(x.head()) <= d.radius * x.last())
                return x;
        }
    }
    }
    throw std::logic_error("sample: unknown domain");
}

Point random_orthogonal_direction(const Point& x, RngStream& rng)
{
    for (;;) {
        Point g = gaussian_direction(x.dim(), rng);
        g -= dot(g, x) * x;
        double r = norm(g);
        if (r > 1e-8)
            return g *= 1.0 / r;
    }
}

// ---------------------------------------------------------------------------
// Maps

Point phi_map(const Point& x, Direction dir)
{
    const double e = norm(x);
    if (e < 1e-12)
        return Point(x.dim());
    const double s = norm(x, NormKind::sup);
    return dir == Direction::forward ? x * (e / s) : x * (s / e);
}

double chart_radius(double eps)
{
    return 2.0 * eps * std::sqrt(1.0 - eps * eps) / (1.0 - 2.0 * eps * eps);
}

double projected_radius(double chord)
{
    if (!(chord >= 0.0 && chord < std::numbers::sqrt2))
        throw std::invalid_argument("projected_radius: chord must lie in [0, sqrt 2)");
    const double xn = 1.0 - 0.5 * chord * chord;
    return chord * std::sqrt(1.0 - 0.25 * chord * chord) / xn;
}

double lifted_chord(double rho)
{
    const double xn = 1.0 / std::sqrt(1.0 + rho * rho);
    return std::sqrt(2.0 - 2.0 * xn);
}

double CapChart::inner_radius() const
{
    return projected_radius(eps);
}

bool CapChart::in_support_cap(const Point& x) const
{
    return distance(x, unit_vector(n, n - 1)) < eps;
}

bool CapChart::in_outer_cap(const Point& x) const
{
    return distance(x, unit_vector(n, n - 1)) <= 2.0 * eps;
}

CapChart cap_chart_build(int n, double target_r)
{
    if (n < 2)
        throw std::invalid_argument("cap_chart_build: n must be >= 2");
    if (!(target_r > 0.0) || !std::isfinite(target_r))
        throw std::invalid_argument("cap_chart_build: target radius not attained on (0, 1/sqrt 2)");
    double lo = 0.0;
    double hi = std::numbers::sqrt2 / 2.0;
    for (int it = 0; it < 200 && std::nextafter(lo, hi) < hi; ++it) {
        double mid = 0.5 * (lo + hi);
        double r = chart_radius(mid);
        if (!(r > 0.0) || r > target_r) // r <= 0 only from rounding at the pole 1/sqrt 2
            hi = mid;
        else
            lo = mid;
    }
    double eps = (std::abs(chart_radius(lo) - target_r) <= std::abs(chart_radius(hi) - target_r)) ? lo : hi;
    double residual = std::abs(chart_radius(eps) - target_r);
    if (residual >= 1e-14 * std::max(1.0, target_r)) {
        std::ostringstream msg;
        msg << "cap_chart_build: bisection residual " << residual << " for target " << target_r;
        throw std::runtime_error(msg.str());
    }
    return CapChart{eps, chart_radius(eps), n};
}

Point gnomonic(const CapChart& chart, const Point& x, Gnomonic dir)
{
    if (dir == Gnomonic::project) {
        if (x.dim() != chart.n)
            throw std::invalid_argument("gnomonic project: point dimension must equal n");
        if (x.last() <= 1e-12)
            throw std::domain_error("gnomonic project: needs X_n > 1e-12");
        return x.head() * (1.0 / x.last());
    }
    if (x.dim() != chart.n - 1)
        throw std::invalid_argument("gnomonic lift: point dimension must equal n-1");
    Point y = Point::append(x, 1.0);
    return y *= 1.0 / norm(y);
}

} // namespace rsl
