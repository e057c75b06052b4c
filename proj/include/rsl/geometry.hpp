#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace rsl {

inline constexpr int kMaxDim = 8;

/// A point of R^d with d <= kMaxDim, stored inline so that hot sampling
/// loops never allocate.
class Point {
public:
    Point() = default;
    explicit Point(int dim) : dim_(checked(dim)) {}
    Point(std::initializer_list<double> coords) : dim_(checked(static_cast<int>(coords.size())))
    {
        int i = 0;
        for (double c : coords)
            x_[i++] = c;
    }
    explicit Point(std::span<const double> coords) : dim_(checked(static_cast<int>(coords.size())))
    {
        for (int i = 0; i < dim_; ++i)
            x_[i] = coords[i];
    }

    int dim() const { return dim_; }
    double& operator[](int i) { return x_[i]; }
    double operator[](int i) const { return x_[i]; }
    std::span<const double> coords() const { return {x_.data(), static_cast<size_t>(dim_)}; }

    /// Last coordinate, X_n in the splitting X = (X', X_n).
    double last() const { return x_[dim_ - 1]; }
    /// The first dim-1 coordinates X'.
    Point head() const;
    /// (X', t) for a point X' of dimension dim-1.
    static Point append(const Point& head, double t);

    Point& operator+=(const Point& o);
    Point& operator-=(const Point& o);
    Point& operator*=(double t);

    friend Point operator+(Point a, const Point& b) { return a += b; }
    friend Point operator-(Point a, const Point& b) { return a -= b; }
    friend Point operator*(Point a, double t) { return a *= t; }
    friend Point operator*(double t, Point a) { return a *= t; }
    friend bool operator==(const Point& a, const Point& b);

private:
    static int checked(int dim)
    {
        if (dim < 1 || dim > kMaxDim)
            throw std::invalid_argument("Point: dimension must be in [1, " +
                                        std::to_string(kMaxDim) + "]");
        return dim;
    }

    int dim_ = 0;
    std::array<double, kMaxDim> x_{};
};

double dot(const Point& a, const Point& b);

enum class NormKind { euclidean, sup };

double norm(const Point& v, NormKind kind = NormKind::euclidean);
inline double distance(const Point& a, const Point& b, NormKind kind = NormKind::euclidean)
{
    return norm(a - b, kind);
}

/// Basis vector e_i (0-based) of R^dim.
Point unit_vector(int dim, int i);

/// Deterministic random stream. Identical (seed, stream) pairs produce
/// identical sequences; streams are cheap to copy and own all their state.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return normal_(engine_); }
    std::uint64_t next_u64() { return engine_(); }
    int below(int count); ///< uniform integer in [0, count)

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// SplitMix64 finaliser; used to derive independent stream ids.
std::uint64_t mix64(std::uint64_t x);

enum class DomainKind { Sphere, Ball, Cube, CubeBoundary, Annulus, Shell, PlaneDisk, Cone };

/// Integration domains. `dim` is the number of coordinates of the points
/// the domain contains (n for every kind except PlaneDisk, which lives in
/// R^{n-1}).
///
///  - Annulus(j): 2^{-j-1} < |X| < 2^{-j}
///  - Shell: inner < |X| < outer (general annulus)
///  - PlaneDisk(radius): |X'| <= radius in R^{dim}
///  - Cone(radius): {(t Y', t) : |Y'| <= radius, t > 0} intersected with the unit ball
struct Domain {
    DomainKind kind = DomainKind::Ball;
    int dim = 2;
    int j = 0;
    double inner = 0.0;
    double radius = 1.0;

    static Domain sphere(int n) { return {DomainKind::Sphere, n}; }
    static Domain ball(int n) { return {DomainKind::Ball, n}; }
    static Domain cube(int n) { return {DomainKind::Cube, n}; }
    static Domain cube_boundary(int n) { return {DomainKind::CubeBoundary, n}; }
    static Domain annulus(int n, int j);
    static Domain shell(int n, double inner, double outer);
    static Domain plane_disk(int plane_dim, double radius) { return {DomainKind::PlaneDisk, plane_dim, 0, 0.0, radius}; }
    static Domain cone(int n, double radius) { return {DomainKind::Cone, n, 0, 0.0, radius}; }

    bool is_volume() const;
};

void validate(const Domain& d);

/// Dimension of the measure carried by the domain: n-1 for the two
/// boundaries, the coordinate count otherwise.
int intrinsic_dim(const Domain& d);
/// Lebesgue or surface measure of the domain.
double measure(const Domain& d);
/// Euclidean diameter (sup-norm domains included).
double diameter(const Domain& d);
bool contains(const Domain& d, const Point& x, double tol = 1e-12);

/// Uniform point with respect to Lebesgue measure (volumes) or surface
/// measure (Sphere, CubeBoundary).
Point sample(const Domain& d, RngStream& rng);

double sphere_area(int n);  ///< surface measure of the unit sphere of R^n
double ball_volume(int n);  ///< Lebesgue measure of the unit ball of R^n

/// Uniform unit vector orthogonal to the unit vector x.
Point random_orthogonal_direction(const Point& x, RngStream& rng);

enum class Direction { forward, inverse };

/// Phi(X) = (|X| / |X|_inf) X, a bi-Lipschitz map from the Euclidean ball
/// onto the cube; the inverse is Z -> (|Z|_inf / |Z|) Z. Both fix 0.
Point phi_map(const Point& x, Direction dir);

/// Gnomonic chart around the north pole e_n. `eps` is the chordal radius of
/// the support cap E = {|x - e_n| < eps}; the closed cap S = {|x - e_n| <= 2 eps}
/// projects onto the plane disk of radius r = 2 eps sqrt(1-eps^2)/(1-2 eps^2).
struct CapChart {
    double eps = 0.0;
    double r = 0.0;
    int n = 2;

    /// Radius of the plane disk Pi(E).
    double inner_radius() const;
    /// x in E (open support cap).
    bool in_support_cap(const Point& x) const;
    /// x in S (closed cap of chordal radius 2 eps).
    bool in_outer_cap(const Point& x) const;
};

/// r(eps) = 2 eps sqrt(1 - eps^2) / (1 - 2 eps^2), increasing on (0, 1/sqrt 2).
double chart_radius(double eps);
/// Plane radius of the image of the cap {|x - e_n| <= chord}.
double projected_radius(double chord);
/// Chordal radius of the cap lifted from the plane disk of radius rho.
double lifted_chord(double rho);

/// Solves chart_radius(eps) = target_r by bisection on (0, 1/sqrt 2).
CapChart cap_chart_build(int n, double target_r = 0.5);

enum class Gnomonic { project, lift };

/// project: X = (X', X_n), X_n > 0  ->  X'/X_n in R^{n-1}.
/// lift:    Y' in R^{n-1}           ->  (Y', 1)/|(Y', 1)| on the sphere.
Point gnomonic(const CapChart& chart, const Point& x, Gnomonic dir);

} // namespace rsl
