#include "varbound/surd.hpp"

#include <cctype>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace varbound {

namespace {

// Nearest double to q (mpq get_d truncates toward zero).
double nearest_double(const mpq_class& q) {
    const double t = q.get_d();
    if (!std::isfinite(t)) return t;
    const double away = std::nextafter(t, sgn(q) >= 0 ? HUGE_VAL : -HUGE_VAL);
    if (!std::isfinite(away)) return t;
    const mpq_class dt = abs(q - mpq_class(t));
    const mpq_class da = abs(mpq_class(away) - q);
    return da < dt ? away : t;
}

// Splits n = s^2 * r with r squarefree; returns {s, r}. n must fit in int64.
std::pair<std::int64_t, std::int64_t> squarefree_split(std::int64_t n) {
    std::int64_t s = 1;
    std::int64_t r = 1;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        int k = 0;
        while (n % p == 0) {
            n /= p;
            ++k;
        }
        for (int i = 0; i < k / 2; ++i) s *= p;
        if (k % 2 == 1) r *= p;
    }
    r *= n;
    return {s, r};
}

std::string trim(std::string_view t) {
    std::size_t b = 0;
    std::size_t e = t.size();
    while (b < e && std::isspace(static_cast<unsigned char>(t[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(t[e - 1]))) --e;
    return std::string(t.substr(b, e - b));
}

}  // namespace

mpq_class parse_rational(std::string_view text) {
    std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument("empty number");
    if (auto slash = t.find('/'); slash != std::string::npos) {
        mpq_class num = parse_rational(t.substr(0, slash));
        mpq_class den = parse_rational(t.substr(slash + 1));
        if (sgn(den) == 0) throw std::invalid_argument("zero denominator in '" + t + "'");
        mpq_class q = num / den;
        q.canonicalize();
        return q;
    }
    bool neg = false;
    std::size_t i = 0;
    if (t[i] == '+' || t[i] == '-') {
        neg = t[i] == '-';
        ++i;
    }
    std::string digits;
    long exp10 = 0;
    bool seen_dot = false;
    bool any = false;
    for (; i < t.size(); ++i) {
        char c = t[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            any = true;
            if (seen_dot) --exp10;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (c == 'e' || c == 'E') {
            try {
                std::size_t used = 0;
                long e = std::stol(t.substr(i + 1), &used);
                if (used != t.size() - i - 1) throw std::invalid_argument("exp");
                exp10 += e;
            } catch (const std::exception&) {
                throw std::invalid_argument("bad exponent in number '" + t + "'");
            }
            i = t.size();
            break;
        } else {
            throw std::invalid_argument("bad number '" + t + "'");
        }
    }
    if (!any) throw std::invalid_argument("bad number '" + t + "'");
    mpz_class mant(digits, 10);
    mpq_class q(mant);
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    if (exp10 >= 0) {
        q *= p10;
    } else {
        q /= p10;
    }
    if (neg) q = -q;
    q.canonicalize();
    return q;
}

Surd::Surd(mpq_class a, mpq_class b, std::int64_t radicand)
    : a_(std::move(a)), b_(std::move(b)), d_(radicand) {
    a_.canonicalize();
    b_.canonicalize();
    if (d_ < 0) throw std::domain_error("negative radicand");
    if (d_ != 0) {
        auto [s, r] = squarefree_split(d_);
        b_ *= s;
        d_ = r;
    }
    normalize();
}

void Surd::normalize() {
    if (d_ == 1) {
        a_ += b_;
        b_ = 0;
        d_ = 0;
    }
    if (sgn(b_) == 0) d_ = 0;
    if (d_ == 0) b_ = 0;
}

Surd Surd::sqrt(const mpq_class& q) {
    if (sgn(q) < 0) throw std::domain_error("sqrt of negative rational");
    if (sgn(q) == 0) return Surd();
    // sqrt(p/r) = sqrt(p*r)/r
    mpz_class prod = q.get_num() * q.get_den();
    if (!prod.fits_slong_p()) throw std::overflow_error("radicand too large");
    auto [s, r] = squarefree_split(prod.get_si());
    mpq_class coef(mpz_class(s), q.get_den());
    coef.canonicalize();
    if (r == 1) return Surd(coef);
    return Surd(mpq_class(0), coef, r);
}

Surd Surd::parse(std::string_view text) {
    std::string t = trim(text);
    bool neg = false;
    std::size_t i = 0;
    if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
        neg = t[0] == '-';
        i = 1;
    }
    std::string rest = trim(std::string_view(t).substr(i));
    if (rest.rfind("sqrt(", 0) == 0 && rest.back() == ')') {
        Surd s = sqrt(parse_rational(rest.substr(5, rest.size() - 6)));
        return neg ? -s : s;
    }
    return Surd(parse_rational(t));
}

std::int64_t Surd::common_radicand(const Surd& o) const {
    bool mine = !is_rational();
    bool theirs = !o.is_rational();
    if (mine && theirs && d_ != o.d_) {
        throw std::domain_error("arithmetic mixes sqrt(" + std::to_string(d_) + ") and sqrt(" +
                                std::to_string(o.d_) + ")");
    }
    return mine ? d_ : (theirs ? o.d_ : 0);
}

Surd& Surd::operator+=(const Surd& o) {
    std::int64_t d = common_radicand(o);
    a_ += o.a_;
    b_ += o.b_;
    d_ = d;
    normalize();
    return *this;
}

Surd& Surd::operator-=(const Surd& o) {
    std::int64_t d = common_radicand(o);
    a_ -= o.a_;
    b_ -= o.b_;
    d_ = d;
    normalize();
    return *this;
}

Surd& Surd::operator*=(const Surd& o) {
    std::int64_t d = common_radicand(o);
    mpq_class a = a_ * o.a_ + b_ * o.b_ * d;
    mpq_class b = a_ * o.b_ + b_ * o.a_;
    a_ = a;
    b_ = b;
    d_ = d;
    normalize();
    return *this;
}

Surd& Surd::operator/=(const Surd& o) {
    if (o.is_zero()) throw std::domain_error("division by zero");
    // 1/(p + q sqrt d) = (p - q sqrt d)/(p^2 - q^2 d)
    mpq_class norm = o.a_ * o.a_ - o.b_ * o.b_ * o.d_;
    Surd conj(o.a_ / norm, -o.b_ / norm, o.d_);
    return *this *= conj;
}

Surd Surd::operator-() const {
    Surd r = *this;
    r.a_ = -r.a_;
    r.b_ = -r.b_;
    return r;
}

int Surd::sign() const {
    int sa = sgn(a_);
    int sb = d_ == 0 ? 0 : sgn(b_);
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // opposite signs: compare a^2 with b^2 d
    mpq_class lhs = a_ * a_;
    mpq_class rhs = b_ * b_ * d_;
    int c = cmp(lhs, rhs);
    if (c == 0) return 0;
    return c > 0 ? sa : sb;
}

double Surd::to_double() const {
    double v = nearest_double(a_);
    if (d_ != 0) v += nearest_double(b_) * std::sqrt(static_cast<double>(d_));
    return v;
}

std::string Surd::to_string() const {
    std::ostringstream os;
    if (d_ == 0 || sgn(b_) == 0) {
        os << a_.get_str();
        return os.str();
    }
    if (sgn(a_) != 0) os << a_.get_str() << (sgn(b_) > 0 ? "+" : "-");
    else if (sgn(b_) < 0) os << "-";
    mpq_class ab = abs(b_);
    if (ab != 1) os << ab.get_str() << "*";
    os << "sqrt(" << d_ << ")";
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Surd& s) { return os << s.to_string(); }

}  // namespace varbound
