#pragma once

#include "varbound/surd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace varbound {

enum class Block { X, Y, Z };

/// A single variable: x_i, y_j or z_{ji} (zero-based indices).
struct VarId {
    Block block = Block::X;
    int row = 0;  // i for x, j for y and z
    int col = 0;  // i for z_{ji}; unused otherwise

    static VarId x(int i) { return {Block::X, i, 0}; }
    static VarId y(int j) { return {Block::Y, j, 0}; }
    static VarId z(int j, int i) { return {Block::Z, j, i}; }
};

/// Dimensions of the variable blocks: x in R^n, y in R^m, z in R^{m x n}.
struct VarLayout {
    int n = 1;
    int m = 1;

    int size() const { return n + m + m * n; }
    int flat(VarId v) const;
    VarId var(int flat) const;
    std::string name(int flat) const;
    friend bool operator==(const VarLayout&, const VarLayout&) = default;
};

using Exponents = std::vector<std::uint16_t>;

/// Graded lexicographic order: total degree first, then lexicographic with
/// x1 as the most significant variable.
struct GrlexLess {
    bool operator()(const Exponents& a, const Exponents& b) const;
};

int total_degree(const Exponents& e);

/// Sparse multivariate polynomial in (x, y, z) with coefficients of type S
/// (double, or Surd for exact arithmetic). Values are immutable in spirit:
/// every operation returns a new polynomial and no zero term is ever stored.
template <class S>
class BasicPolynomial {
public:
    using Scalar = S;
    using TermMap = std::map<Exponents, S, GrlexLess>;

    BasicPolynomial() = default;
    explicit BasicPolynomial(VarLayout layout) : layout_(layout) {}

    static BasicPolynomial constant(VarLayout layout, S c) {
        BasicPolynomial p(layout);
        p.add_term(Exponents(layout.size(), 0), std::move(c));
        return p;
    }
    static BasicPolynomial variable(VarLayout layout, VarId v, int power = 1) {
        BasicPolynomial p(layout);
        Exponents e(layout.size(), 0);
        e[layout.flat(v)] = static_cast<std::uint16_t>(power);
        p.add_term(std::move(e), S(1));
        return p;
    }
    static BasicPolynomial monomial(VarLayout layout, Exponents e, S c = S(1)) {
        BasicPolynomial p(layout);
        p.add_term(std::move(e), std::move(c));
        return p;
    }

    const VarLayout& layout() const { return layout_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    S coefficient(const Exponents& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? S(0) : it->second;
    }

    int degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
        return d;
    }

    int degree_in(Block b) const {
        int d = 0;
        for (const auto& [e, c] : terms_) {
            int s = 0;
            for (int k = block_begin(b); k < block_end(b); ++k) s += e[k];
            d = std::max(d, s);
        }
        return d;
    }

    /// Degree in y and z jointly, the quantity bounded by the growth exponent.
    int degree_in_yz() const {
        int d = 0;
        for (const auto& [e, c] : terms_) {
            int s = 0;
            for (int k = layout_.n; k < layout_.size(); ++k) s += e[k];
            d = std::max(d, s);
        }
        return d;
    }

    bool depends_on(Block b) const { return degree_in(b) > 0; }

    void add_term(Exponents e, S c) {
        if (static_cast<int>(e.size()) != layout_.size())
            throw std::invalid_argument("monomial length does not match layout");
        if (is_zero_scalar(c)) return;
        auto [it, inserted] = terms_.try_emplace(std::move(e), c);
        if (!inserted) {
            it->second += c;
            if (is_zero_scalar(it->second)) terms_.erase(it);
        }
    }

    BasicPolynomial& operator+=(const BasicPolynomial& o) {
        check_layout(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    BasicPolynomial& operator-=(const BasicPolynomial& o) {
        check_layout(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    BasicPolynomial& operator*=(const S& s) {
        if (is_zero_scalar(s)) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }
    friend BasicPolynomial operator+(BasicPolynomial l, const BasicPolynomial& r) { return l += r; }
    friend BasicPolynomial operator-(BasicPolynomial l, const BasicPolynomial& r) { return l -= r; }
    friend BasicPolynomial operator*(BasicPolynomial l, const S& s) { return l *= s; }
    friend BasicPolynomial operator*(const S& s, BasicPolynomial l) { return l *= s; }
    BasicPolynomial operator-() const { return *this * S(-1); }

    friend BasicPolynomial operator*(const BasicPolynomial& l, const BasicPolynomial& r) {
        l.check_layout(r);
        BasicPolynomial out(l.layout_);
        Exponents e(l.layout_.size());
        for (const auto& [ea, ca] : l.terms_) {
            for (const auto& [eb, cb] : r.terms_) {
                for (std::size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
                out.add_term(e, ca * cb);
            }
        }
        return out;
    }

    BasicPolynomial pow(int k) const {
        BasicPolynomial out = constant(layout_, S(1));
        for (int i = 0; i < k; ++i) out = out * *this;
        return out;
    }

    friend bool operator==(const BasicPolynomial& l, const BasicPolynomial& r) {
        if (!(l.layout_ == r.layout_) || l.terms_.size() != r.terms_.size()) return false;
        auto it = r.terms_.begin();
        for (const auto& [e, c] : l.terms_) {
            if (it->first != e || !(it->second == c)) return false;
            ++it;
        }
        return true;
    }

    /// Formal partial derivative.
    BasicPolynomial partial(VarId v) const {
        const int k = layout_.flat(v);
        BasicPolynomial out(layout_);
        for (const auto& [e, c] : terms_) {
            if (e[k] == 0) continue;
            Exponents d = e;
            S coef = c * S(static_cast<int>(e[k]));
            d[k] -= 1;
            out.add_term(std::move(d), std::move(coef));
        }
        return out;
    }

    /// Evaluates at a flat point (x, y, z) in layout order. T may differ from
    /// S (for instance double coefficients evaluated at double points, or
    /// exact coefficients evaluated at exact points).
    template <class T>
    T eval_flat(std::span<const T> point) const {
        if (static_cast<int>(point.size()) != layout_.size())
            throw std::invalid_argument("point dimension does not match polynomial layout");
        T acc(0);
        for (const auto& [e, c] : terms_) {
            T t = convert_scalar<T>(c);
            for (std::size_t k = 0; k < e.size(); ++k) {
                for (int r = 0; r < e[k]; ++r) t *= point[k];
            }
            acc += t;
        }
        return acc;
    }

    /// Evaluates with the blocks given separately; z is row-major m x n.
    template <class T>
    T eval(std::span<const T> x, std::span<const T> y, std::span<const T> z) const {
        if (static_cast<int>(x.size()) != layout_.n || static_cast<int>(y.size()) != layout_.m ||
            static_cast<int>(z.size()) != layout_.m * layout_.n)
            throw std::invalid_argument("point dimension does not match polynomial layout");
        std::vector<T> flat;
        flat.reserve(layout_.size());
        flat.insert(flat.end(), x.begin(), x.end());
        flat.insert(flat.end(), y.begin(), y.end());
        flat.insert(flat.end(), z.begin(), z.end());
        return eval_flat<T>(std::span<const T>(flat));
    }

    double eval_double(std::span<const double> point) const {
        if (static_cast<int>(point.size()) != layout_.size())
            throw std::invalid_argument("point dimension does not match polynomial layout");
        double acc = 0.0;
        for (const auto& [e, c] : terms_) {
            double t = to_double(c);
            for (std::size_t k = 0; k < e.size(); ++k) {
                if (e[k] != 0) t *= int_pow(point[k], e[k]);
            }
            acc += t;
        }
        return acc;
    }

    /// Substitutes every variable by a polynomial (over possibly another
    /// layout). replacements.size() must equal layout().size().
    BasicPolynomial compose(const std::vector<BasicPolynomial>& replacements) const {
        if (static_cast<int>(replacements.size()) != layout_.size())
            throw std::invalid_argument("compose needs one replacement per variable");
        VarLayout target = replacements.empty() ? layout_ : replacements.front().layout();
        BasicPolynomial out(target);
        for (const auto& [e, c] : terms_) {
            BasicPolynomial t = constant(target, c);
            for (std::size_t k = 0; k < e.size(); ++k) {
                if (e[k] != 0) t = t * replacements[k].pow(e[k]);
            }
            out += t;
        }
        return out;
    }

    /// Exact integral over an axis-aligned box of a polynomial in x only.
    S integrate_box(std::span<const S> lo, std::span<const S> hi) const {
        if (depends_on(Block::Y) || depends_on(Block::Z))
            throw std::invalid_argument("integrate_box requires a polynomial in x only");
        if (static_cast<int>(lo.size()) != layout_.n || static_cast<int>(hi.size()) != layout_.n)
            throw std::invalid_argument("box dimension does not match polynomial layout");
        S acc(0);
        for (const auto& [e, c] : terms_) {
            S t = c;
            for (int i = 0; i < layout_.n; ++i) {
                const int a = e[i] + 1;
                S hp = power(hi[i], a);
                S lp = power(lo[i], a);
                t *= (hp - lp) / S(a);
            }
            acc += t;
        }
        return acc;
    }

    /// Integral over the facet of the box where axis fixed_axis is frozen at
    /// fixed_value (surface measure on an axis-aligned face).
    S integrate_facet(std::span<const S> lo, std::span<const S> hi, int fixed_axis,
                      const S& fixed_value) const {
        if (depends_on(Block::Y) || depends_on(Block::Z))
            throw std::invalid_argument("integrate_facet requires a polynomial in x only");
        S acc(0);
        for (const auto& [e, c] : terms_) {
            S t = c;
            for (int i = 0; i < layout_.n; ++i) {
                if (i == fixed_axis) {
                    t *= power(fixed_value, e[i]);
                    continue;
                }
                const int a = e[i] + 1;
                t *= (power(hi[i], a) - power(lo[i], a)) / S(a);
            }
            acc += t;
        }
        return acc;
    }

    template <class T>
    BasicPolynomial<T> cast() const {
        BasicPolynomial<T> out(layout_);
        for (const auto& [e, c] : terms_) out.add_term(e, convert_scalar<T>(c));
        return out;
    }

    /// Same polynomial re-expressed over a larger layout (extra variables
    /// absent). Variables keep their block and indices.
    BasicPolynomial embed(VarLayout target) const {
        if (target.n < layout_.n || target.m < layout_.m)
            throw std::invalid_argument("embed target layout is smaller");
        BasicPolynomial out(target);
        for (const auto& [e, c] : terms_) {
            Exponents t(target.size(), 0);
            for (int k = 0; k < layout_.size(); ++k) t[target.flat(layout_.var(k))] = e[k];
            out.add_term(std::move(t), c);
        }
        return out;
    }

    std::string to_string() const;

private:
    static bool is_zero_scalar(const S& s) { return varbound::is_zero(s); }

    int block_begin(Block b) const {
        switch (b) {
            case Block::X: return 0;
            case Block::Y: return layout_.n;
            case Block::Z: return layout_.n + layout_.m;
        }
        return 0;
    }
    int block_end(Block b) const {
        switch (b) {
            case Block::X: return layout_.n;
            case Block::Y: return layout_.n + layout_.m;
            case Block::Z: return layout_.size();
        }
        return 0;
    }

    void check_layout(const BasicPolynomial& o) const {
        if (!(layout_ == o.layout_)) throw std::invalid_argument("polynomial layouts differ");
    }

    static S power(const S& base, int k) {
        S r(1);
        for (int i = 0; i < k; ++i) r *= base;
        return r;
    }

    static double int_pow(double b, int k) {
        double r = 1.0;
        while (k > 0) {
            if (k & 1) r *= b;
            b *= b;
            k >>= 1;
        }
        return r;
    }

    template <class T, class U>
    static T convert_scalar(const U& u) {
        if constexpr (std::is_same_v<T, U>) {
            return u;
        } else if constexpr (std::is_same_v<T, double>) {
            return to_double(u);
        } else if constexpr (std::is_same_v<U, double>) {
            return T(mpq_class(u));
        } else {
            return T(u);
        }
    }

    VarLayout layout_{};
    TermMap terms_;
};

using Polynomial = BasicPolynomial<double>;
using ExactPolynomial = BasicPolynomial<Surd>;

/// Vector field phi: Omega x R^m -> R^n, one polynomial per component.
template <class S>
struct BasicPolyVector {
    std::vector<BasicPolynomial<S>> entries;

    std::size_t size() const { return entries.size(); }
    const BasicPolynomial<S>& operator[](std::size_t i) const { return entries[i]; }
    BasicPolynomial<S>& operator[](std::size_t i) { return entries[i]; }

    static BasicPolyVector zero(VarLayout layout, int count) {
        BasicPolyVector v;
        v.entries.assign(count, BasicPolynomial<S>(layout));
        return v;
    }
};

using PolyVector = BasicPolyVector<double>;
using ExactPolyVector = BasicPolyVector<Surd>;

/// Parses the term-list text format, e.g. "3/2*x1^2*z11 - y1 + sqrt(2)".
/// Parenthesized factors with integer powers, "(z11 - 1)^2", are expanded.
/// Whitespace is ignored. Variables must exist in the layout.
template <class S>
BasicPolynomial<S> parse_polynomial(std::string_view text, VarLayout layout);

/// All exponent vectors over the listed flat variable indices with total
/// degree <= max_degree, in graded order.
std::vector<Exponents> monomials_up_to(VarLayout layout, std::span<const int> vars, int max_degree);

}  // namespace varbound
