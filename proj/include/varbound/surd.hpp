#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace varbound {

/// Exact element a + b*sqrt(d) of a real quadratic field Q(sqrt(d)).
///
/// The radicand d is a squarefree integer >= 2, or 0 when the number is
/// rational. Arithmetic between two irrational numbers with different
/// radicands leaves the field and throws std::domain_error; this never
/// happens for the measures shipped with the project (all irrational atoms
/// live in Q(sqrt(2))).
class Surd {
public:
    Surd() = default;
    Surd(int v) : a_(v) {}  // NOLINT(google-explicit-constructor)
    Surd(long v) : a_(v) {}  // NOLINT(google-explicit-constructor)
    Surd(mpq_class v) : a_(std::move(v)) { a_.canonicalize(); }  // NOLINT
    Surd(mpq_class a, mpq_class b, std::int64_t radicand);

    /// sqrt(q) for a nonnegative rational q, reduced to b*sqrt(d) form.
    static Surd sqrt(const mpq_class& q);

    /// Parses "3", "-2/5", "0.125", "1e-3", "sqrt(1/2)", "-sqrt(2)".
    static Surd parse(std::string_view text);

    const mpq_class& rational_part() const { return a_; }
    const mpq_class& radical_part() const { return b_; }
    std::int64_t radicand() const { return d_; }
    bool is_rational() const { return d_ == 0 || sgn(b_) == 0; }
    bool is_zero() const { return sgn(a_) == 0 && sgn(b_) == 0; }
    int sign() const;
    double to_double() const;
    std::string to_string() const;

    Surd& operator+=(const Surd& o);
    Surd& operator-=(const Surd& o);
    Surd& operator*=(const Surd& o);
    Surd& operator/=(const Surd& o);
    Surd operator-() const;

    friend Surd operator+(Surd l, const Surd& r) { return l += r; }
    friend Surd operator-(Surd l, const Surd& r) { return l -= r; }
    friend Surd operator*(Surd l, const Surd& r) { return l *= r; }
    friend Surd operator/(Surd l, const Surd& r) { return l /= r; }
    friend bool operator==(const Surd& l, const Surd& r) { return (l - r).is_zero(); }
    friend bool operator<(const Surd& l, const Surd& r) { return (l - r).sign() < 0; }
    friend bool operator>(const Surd& l, const Surd& r) { return r < l; }
    friend bool operator<=(const Surd& l, const Surd& r) { return !(r < l); }
    friend bool operator>=(const Surd& l, const Surd& r) { return !(l < r); }

private:
    void normalize();
    std::int64_t common_radicand(const Surd& o) const;

    mpq_class a_{0};
    mpq_class b_{0};
    std::int64_t d_ = 0;
};

std::ostream& operator<<(std::ostream& os, const Surd& s);

/// Parses a rational literal ("3", "-2/5", "0.125", "1e-3") exactly.
mpq_class parse_rational(std::string_view text);

// Scalar traits shared by the templated numeric code.
inline double to_double(double v) { return v; }
inline double to_double(const Surd& v) { return v.to_double(); }
inline bool is_zero(double v) { return v == 0.0; }
inline bool is_zero(const Surd& v) { return v.is_zero(); }

template <class S>
S scalar_from_surd(const Surd& s);

template <>
inline double scalar_from_surd<double>(const Surd& s) { return s.to_double(); }
template <>
inline Surd scalar_from_surd<Surd>(const Surd& s) { return s; }

}  // namespace varbound
