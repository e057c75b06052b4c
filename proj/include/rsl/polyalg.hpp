#pragma once

#include "rsl/geometry.hpp"

#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rsl {

/// Multi-index alpha in N^d, d <= kMaxDim, stored densely.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(int size);
    MultiIndex(std::initializer_list<int> entries);

    int size() const { return size_; }
    int operator[](int i) const { return e_[i]; }
    int& operator[](int i) { return e_[i]; }
    int order() const;
    bool is_zero() const { return order() == 0; }
    MultiIndex plus_unit(int i) const;
    std::string str() const; ///< "(1,0,2)"

    auto operator<=>(const MultiIndex&) const = default;

    /// Every multi-index of the given size with |alpha| == order.
    static std::vector<MultiIndex> with_order(int size, int order);

private:
    int size_ = 0;
    std::array<int, kMaxDim> e_{};
};

/// Sparse real polynomial in `vars` variables.
class Poly {
public:
    explicit Poly(int vars = 0) : vars_(vars) {}
    static Poly constant(int vars, double c);
    static Poly variable(int vars, int i); ///< Y_i, 0-based
    static Poly monomial(const MultiIndex& exponent, double c);

    int vars() const { return vars_; }
    const std::map<MultiIndex, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const; ///< total degree, -1 for the zero polynomial
    double max_abs_coeff() const;
    double coeff(const MultiIndex& e) const;

    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    Poly& operator*=(double c);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(Poly a, double c) { return a *= c; }
    friend Poly operator*(double c, Poly a) { return a *= c; }
    friend Poly operator*(const Poly& a, const Poly& b);
    friend bool operator==(const Poly& a, const Poly& b) { return a.vars_ == b.vars_ && a.terms_ == b.terms_; }

    /// d/dY_i, 0-based.
    Poly partial(int i) const;
    Poly partial(const MultiIndex& beta) const;
    /// Y_i * P.
    Poly times_variable(int i) const;
    Poly pow(int k) const;

    double operator()(const Point& y) const;
    double operator()(std::span<const double> y) const;

    /// Drops coefficients below rel * max|coeff| (and exact zeros).
    void prune(double rel = 1e-15);
    std::string str() const;

private:
    void add_term(const MultiIndex& e, double c);
    void check_vars(const Poly& o) const;

    int vars_;
    std::map<MultiIndex, double> terms_;
};

/// Derivative of V_b g(X', X_n) = X_n^b g(X'/X_n) expanded as
///     d^alpha [V_a g] = sum_{beta'} V_{a-|alpha|} [P_{alpha,beta'} d^{beta'} g].
/// `terms` maps beta' (length n-1) to P_{alpha,beta'} (polynomial in Y' = X'/X_n).
struct DerivExpansion {
    MultiIndex alpha;
    double level = 0.0;
    std::map<MultiIndex, Poly> terms;

    int n() const { return alpha.size(); }
};

/// alpha = 0: level a, single term (0, 1).
DerivExpansion base_expansion(int n, double a);
/// Applies d/dX_j (0-based, j < n) to an expansion.
DerivExpansion differentiate(const DerivExpansion& e, int j);
/// Derivative expansion of d^alpha [V_a g]; coordinates differentiated in
/// increasing order.
DerivExpansion deriv_expansion(const MultiIndex& alpha, double a);
/// Same, with an explicit differentiation sequence (each entry a coordinate).
DerivExpansion deriv_expansion_along(std::span<const int> sequence, int n, double a);

/// Term-by-term comparison; equal within `abs_tol` per coefficient (0 for exact).
bool same_terms(const DerivExpansion& x, const DerivExpansion& y, double abs_tol = 0.0);

/// Evaluates sum X_n^{level} P(Y') d^{beta'} g(Y'), Y' = X'/X_n.
/// `Jet` provides `double partial(const MultiIndex&, const Point&) const` and
/// `int deriv_order() const`.
template <class Jet>
double eval_derivative(const DerivExpansion& e, const Jet& g, const Point& x)
{
    if (x.dim() != e.n())
        throw std::invalid_argument("eval_derivative: point dimension mismatch");
    if (g.deriv_order() < e.alpha.order())
        throw std::invalid_argument("eval_derivative: plane function lacks partials of order " +
                                    std::to_string(e.alpha.order()));
    const double xn = x.last();
    if (xn <= 1e-12)
        throw std::domain_error("eval_derivative: needs X_n > 1e-12");
    const Point y = x.head() * (1.0 / xn);
    double sum = 0.0;
    for (const auto& [beta, poly] : e.terms) {
        const double d = g.partial(beta, y);
        if (d != 0.0)
            sum += poly(y) * d;
    }
    return std::pow(xn, e.level) * sum;
}

} // namespace rsl
