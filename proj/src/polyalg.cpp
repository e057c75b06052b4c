#include "rsl/polyalg.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace rsl {

MultiIndex::MultiIndex(int size) : size_(size)
{
    if (size < 0 || size > kMaxDim)
        throw std::invalid_argument("MultiIndex: size out of range");
}

MultiIndex::MultiIndex(std::initializer_list<int> entries) : MultiIndex(static_cast<int>(entries.size()))
{
    int i = 0;
    for (int v : entries) {
        if (v < 0)
            throw std::invalid_argument("MultiIndex: negative entry");
        e_[i++] = v;
    }
}

int MultiIndex::order() const
{
    int s = 0;
    for (int i = 0; i < size_; ++i)
        s += e_[i];
    return s;
}

MultiIndex MultiIndex::plus_unit(int i) const
{
    if (i < 0 || i >= size_)
        throw std::invalid_argument("MultiIndex::plus_unit: index out of range");
    MultiIndex m = *this;
    ++m.e_[i];
    return m;
}

std::string MultiIndex::str() const
{
    std::ostringstream s;
    s << '(';
    for (int i = 0; i < size_; ++i)
        s << (i ? "," : "") << e_[i];
    s << ')';
    return s.str();
}

std::vector<MultiIndex> MultiIndex::with_order(int size, int order)
{
    std::vector<MultiIndex> out;
    MultiIndex cur(size);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == size - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    if (size == 0) {
        if (order == 0)
            out.push_back(cur);
        return out;
    }
    rec(0, order);
    return out;
}

// ---------------------------------------------------------------------------

Poly Poly::constant(int vars, double c)
{
    Poly p(vars);
    p.add_term(MultiIndex(vars), c);
    return p;
}

Poly Poly::variable(int vars, int i)
{
    Poly p(vars);
    p.add_term(MultiIndex(vars).plus_unit(i), 1.0);
    return p;
}

Poly Poly::monomial(const MultiIndex& exponent, double c)
{
    Poly p(exponent.size());
    p.add_term(exponent, c);
    return p;
}

void Poly::add_term(const MultiIndex& e, double c)
{
    if (c == 0.0)
        return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0)
            terms_.erase(it);
    }
}

void Poly::check_vars(const Poly& o) const
{
    if (o.vars_ != vars_)
        throw std::invalid_argument("Poly: variable count mismatch (" + std::to_string(vars_) +
                                    " vs " + std::to_string(o.vars_) + ")");
}

int Poly::degree() const
{
    int d = -1;
    for (const auto& [e, c] : terms_)
        d = std::max(d, e.order());
    return d;
}

double Poly::max_abs_coeff() const
{
    double m = 0.0;
    for (const auto& [e, c] : terms_)
        m = std::max(m, std::abs(c));
    return m;
}

double Poly::coeff(const MultiIndex& e) const
{
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
}

Poly& Poly::operator+=(const Poly& o)
{
    check_vars(o);
    for (const auto& [e, c] : o.terms_)
        add_term(e, c);
    return *this;
}

Poly& Poly::operator-=(const Poly& o)
{
    check_vars(o);
    for (const auto& [e, c] : o.terms_)
        add_term(e, -c);
    return *this;
}

Poly& Poly::operator*=(double c)
{
    if (c == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [e, v] : terms_)
        v *= c;
    return *this;
}

Poly operator*(const Poly& a, const Poly& b)
{
    a.check_vars(b);
    Poly out(a.vars_);
    for (const auto& [ea, ca] : a.terms_)
        for (const auto& [eb, cb] : b.terms_) {
            MultiIndex e(a.vars_);
            for (int i = 0; i < a.vars_; ++i)
                e[i] = ea[i] + eb[i];
            out.add_term(e, ca * cb);
        }
    return out;
}

Poly Poly::partial(int i) const
{
    if (i < 0 || i >= vars_)
        throw std::invalid_argument("Poly::partial: variable index out of range");
    Poly out(vars_);
    for (const auto& [e, c] : terms_) {
        if (e[i] == 0)
            continue;
        MultiIndex d = e;
        --d[i];
        out.add_term(d, c * e[i]);
    }
    return out;
}

Poly Poly::partial(const MultiIndex& beta) const
{
    if (beta.size() != vars_)
        throw std::invalid_argument("Poly::partial: multi-index size mismatch");
    Poly out = *this;
    for (int i = 0; i < vars_; ++i)
        for (int k = 0; k < beta[i]; ++k)
            out = out.partial(i);
    return out;
}

Poly Poly::times_variable(int i) const
{
    Poly out(vars_);
    for (const auto& [e, c] : terms_)
        out.terms_.emplace(e.plus_unit(i), c);
    return out;
}

Poly Poly::pow(int k) const
{
    if (k < 0)
        throw std::invalid_argument("Poly::pow: negative exponent");
    Poly out = constant(vars_, 1.0);
    for (int i = 0; i < k; ++i)
        out = out * *this;
    return out;
}

double Poly::operator()(std::span<const double> y) const
{
    if (static_cast<int>(y.size()) != vars_)
        throw std::invalid_argument("Poly: evaluation point has wrong dimension");
    constexpr int kTable = 24;
    std::array<std::array<double, kTable>, kMaxDim> powers;
    for (int i = 0; i < vars_; ++i) {
        powers[i][0] = 1.0;
        for (int k = 1; k < kTable; ++k)
            powers[i][k] = powers[i][k - 1] * y[i];
    }
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
        double t = c;
        for (int i = 0; i < vars_; ++i)
            t *= e[i] < kTable ? powers[i][e[i]] : std::pow(y[i], e[i]);
        sum += t;
    }
    return sum;
}

double Poly::operator()(const Point& y) const
{
    return (*this)(y.coords());
}

void Poly::prune(double rel)
{
    const double cut = rel * max_abs_coeff();
    std::erase_if(terms_, [cut](const auto& kv) { return std::abs(kv.second) < cut || kv.second == 0.0; });
}

std::string Poly::str() const
{
    if (terms_.empty())
        return "0";
    std::ostringstream s;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        s << (first ? "" : " + ") << c;
        for (int i = 0; i < vars_; ++i)
            if (e[i] > 0)
                s << "*Y" << (i + 1) << (e[i] > 1 ? "^" + std::to_string(e[i]) : "");
        first = false;
    }
    return s.str();
}

// ---------------------------------------------------------------------------
// Derivative recursion

namespace {

void accumulate(std::map<MultiIndex, Poly>& terms, const MultiIndex& beta, const Poly& p)
{
    if (p.is_zero())
        return;
    auto [it, inserted] = terms.try_emplace(beta, p);
    if (!inserted)
        it->second += p;
}

void merge(std::map<MultiIndex, Poly>& terms)
{
    for (auto& [beta, p] : terms)
        p.prune(1e-15);
    std::erase_if(terms, [](const auto& kv) { return kv.second.is_zero(); });
}

} // namespace

DerivExpansion base_expansion(int n, double a)
{
    if (n < 2)
        throw std::invalid_argument("deriv_expansion: n must be >= 2");
    DerivExpansion e;
    e.alpha = MultiIndex(n);
    e.level = a;
    e.terms.emplace(MultiIndex(n - 1), Poly::constant(n - 1, 1.0));
    return e;
}

DerivExpansion differentiate(const DerivExpansion& e, int j)
{
    const int n = e.n();
    if (j < 0 || j >= n)
        throw std::invalid_argument("differentiate: coordinate out of range");
    const int k = n - 1;
    DerivExpansion out;
    out.alpha = e.alpha.plus_unit(j);
    out.level = e.level - 1.0;
    const double b = e.level;
    for (const auto& [beta, q] : e.terms) {
        if (j < k) {
            // d/dX_j [X_n^b Q(Y) h(Y)] = X_n^{b-1} [Q d_j h + (d_j Q) h]
            accumulate(out.terms, beta.plus_unit(j), q);
            accumulate(out.terms, beta, q.partial(j));
        } else {
            // d/dX_n: X_n^{b-1} [(b Q - sum_i Y_i d_i Q) h - sum_i Y_i Q d_i h]
            Poly same = q * b;
            for (int i = 0; i < k; ++i) {
                same -= q.partial(i).times_variable(i);
                accumulate(out.terms, beta.plus_unit(i), q.times_variable(i) * -1.0);
            }
            accumulate(out.terms, beta, same);
        }
    }
    merge(out.terms);
    return out;
}

DerivExpansion deriv_expansion_along(std::span<const int> sequence, int n, double a)
{
    DerivExpansion e = base_expansion(n, a);
    for (int j : sequence)
        e = differentiate(e, j);
    return e;
}

DerivExpansion deriv_expansion(const MultiIndex& alpha, double a)
{
    std::vector<int> seq;
    for (int j = 0; j < alpha.size(); ++j)
        for (int c = 0; c < alpha[j]; ++c)
            seq.push_back(j);
    return deriv_expansion_along(seq, alpha.size(), a);
}

bool same_terms(const DerivExpansion& x, const DerivExpansion& y, double abs_tol)
{
    if (x.alpha != y.alpha || x.level != y.level || x.terms.size() != y.terms.size())
        return false;
    for (const auto& [beta, p] : x.terms) {
        auto it = y.terms.find(beta);
        if (it == y.terms.end())
            return false;
        if (abs_tol == 0.0) {
            if (!(p == it->second))
                return false;
            continue;
        }
        Poly diff = p - it->second;
        if (diff.max_abs_coeff() > abs_tol)
            return false;
    }
    return true;
}

} // namespace rsl
