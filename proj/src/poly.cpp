#include "varbound/poly.hpp"

#include <cctype>
#include <sstream>

namespace varbound {

int VarLayout::flat(VarId v) const {
    switch (v.block) {
        case Block::X:
            if (v.row < 0 || v.row >= n) break;
            return v.row;
        case Block::Y:
            if (v.row < 0 || v.row >= m) break;
            return n + v.row;
        case Block::Z:
            if (v.row < 0 || v.row >= m || v.col < 0 || v.col >= n) break;
            return n + m + v.row * n + v.col;
    }
    throw std::out_of_range("variable outside layout");
}

VarId VarLayout::var(int k) const {
    if (k < 0 || k >= size()) throw std::out_of_range("flat variable index outside layout");
    if (k < n) return VarId::x(k);
    if (k < n + m) return VarId::y(k - n);
    k -= n + m;
    return VarId::z(k / n, k % n);
}

std::string VarLayout::name(int k) const {
    VarId v = var(k);
    switch (v.block) {
        case Block::X: return "x" + std::to_string(v.row + 1);
        case Block::Y: return "y" + std::to_string(v.row + 1);
        case Block::Z:
            if (n <= 9 && m <= 9) return "z" + std::to_string(v.row + 1) + std::to_string(v.col + 1);
            return "z" + std::to_string(v.row + 1) + "_" + std::to_string(v.col + 1);
    }
    return "?";
}

int total_degree(const Exponents& e) {
    int d = 0;
    for (auto v : e) d += v;
    return d;
}

bool GrlexLess::operator()(const Exponents& a, const Exponents& b) const {
    int da = total_degree(a);
    int db = total_degree(b);
    if (da != db) return da < db;
    // Within a degree, monomials with more weight on earlier variables come first.
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [](auto l, auto r) { return l > r; });
}

namespace {

// Signed pieces of a coefficient; a Surd with both parts nonzero becomes two
// terms so that the output parses back as the same polynomial.
std::vector<std::pair<bool, std::string>> coefficient_pieces(double c) {
    std::ostringstream num;
    num.precision(17);
    num << std::abs(c);
    return {{c < 0, num.str()}};
}

std::vector<std::pair<bool, std::string>> coefficient_pieces(const Surd& c) {
    std::vector<std::pair<bool, std::string>> out;
    const mpq_class& a = c.rational_part();
    const mpq_class& b = c.radical_part();
    if (sgn(a) != 0 || c.is_rational()) out.push_back({sgn(a) < 0, mpq_class(abs(a)).get_str()});
    if (!c.is_rational()) {
        std::string r = "sqrt(" + std::to_string(c.radicand()) + ")";
        mpq_class ab = abs(b);
        out.push_back({sgn(b) < 0, ab == 1 ? r : ab.get_str() + "*" + r});
    }
    return out;
}

}  // namespace

template <class S>
std::string BasicPolynomial<S>::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        std::string mono;
        for (int k = 0; k < layout_.size(); ++k) {
            if (e[k] == 0) continue;
            mono += "*" + layout_.name(k);
            if (e[k] > 1) mono += "^" + std::to_string(e[k]);
        }
        for (const auto& [neg, cs] : coefficient_pieces(c)) {
            if (first) os << (neg ? "-" : "");
            else os << (neg ? " - " : " + ");
            first = false;
            os << cs << mono;
        }
    }
    return os.str();
}

template std::string BasicPolynomial<double>::to_string() const;
template std::string BasicPolynomial<Surd>::to_string() const;

namespace {

class TermParser {
public:
    TermParser(std::string_view text, VarLayout layout) : layout_(layout) {
        for (char c : text) {
            if (!std::isspace(static_cast<unsigned char>(c))) s_.push_back(c);
        }
    }

    template <class S>
    BasicPolynomial<S> parse() {
        if (s_.empty()) throw error("empty polynomial");
        ExactPolynomial p = parse_sum();
        if (pos_ < s_.size()) throw error(std::string("unexpected character '") + peek() + "'");
        return p.template cast<S>();
    }

private:
    char peek() const { return s_[pos_]; }

    std::invalid_argument error(const std::string& what) const {
        return std::invalid_argument("polynomial parse error at column " + std::to_string(pos_ + 1) +
                                     " of '" + s_ + "': " + what);
    }

    // sum := ['+'|'-'] product (('+'|'-') product)*
    ExactPolynomial parse_sum() {
        ExactPolynomial out(layout_);
        bool first = true;
        while (pos_ < s_.size() && peek() != ')') {
            bool neg = false;
            if (peek() == '+' || peek() == '-') {
                neg = peek() == '-';
                ++pos_;
            } else if (!first) {
                throw error("expected '+' or '-'");
            }
            first = false;
            ExactPolynomial t = parse_product();
            if (neg) out -= t;
            else out += t;
        }
        if (first) throw error("empty expression");
        return out;
    }

    // product := factor ('*' factor)*, with plain monomials accumulated directly
    ExactPolynomial parse_product() {
        Surd coef(1);
        Exponents e(layout_.size(), 0);
        ExactPolynomial rest = ExactPolynomial::constant(layout_, Surd(1));
        parse_factor(coef, e, rest);
        while (pos_ < s_.size() && peek() == '*') {
            ++pos_;
            parse_factor(coef, e, rest);
        }
        return rest * ExactPolynomial::monomial(layout_, std::move(e), coef);
    }

    int read_power() {
        if (pos_ >= s_.size() || peek() != '^') return 1;
        ++pos_;
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (start == pos_) throw error("expected integer exponent");
        return std::stoi(s_.substr(start, pos_ - start));
    }

    void parse_factor(Surd& coef, Exponents& e, ExactPolynomial& rest) {
        if (pos_ >= s_.size()) throw error("unexpected end");
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            coef *= Surd(parse_rational(read_number()));
            return;
        }
        if (s_.compare(pos_, 5, "sqrt(") == 0) {
            std::size_t close = s_.find(')', pos_);
            if (close == std::string::npos) throw error("unterminated sqrt(");
            coef *= Surd::parse(s_.substr(pos_, close - pos_ + 1));
            pos_ = close + 1;
            return;
        }
        if (c == '(') {
            ++pos_;
            ExactPolynomial inner = parse_sum();
            if (pos_ >= s_.size() || peek() != ')') throw error("missing ')'");
            ++pos_;
            rest = rest * inner.pow(read_power());
            return;
        }
        if (c == 'x' || c == 'y' || c == 'z') {
            int k = read_variable();
            e[k] = static_cast<std::uint16_t>(e[k] + read_power());
            return;
        }
        throw error(std::string("unexpected character '") + c + "'");
    }

    std::string read_number() {
        std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.'))
                ++pos_;
        };
        digits();
        if (pos_ < s_.size() && (peek() == 'e' || peek() == 'E')) {
            ++pos_;
            if (pos_ < s_.size() && (peek() == '+' || peek() == '-')) ++pos_;
            digits();
        }
        if (pos_ < s_.size() && peek() == '/') {
            ++pos_;
            digits();
        }
        return s_.substr(start, pos_ - start);
    }

    int read_variable() {
        char kind = peek();
        ++pos_;
        auto read_int = [&] {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            if (start == pos_) throw error("expected variable index");
            return s_.substr(start, pos_ - start);
        };
        std::string first = read_int();
        try {
            if (kind == 'x') return layout_.flat(VarId::x(std::stoi(first) - 1));
            if (kind == 'y') return layout_.flat(VarId::y(std::stoi(first) - 1));
            if (pos_ < s_.size() && peek() == '_') {
                ++pos_;
                std::string second = read_int();
                return layout_.flat(VarId::z(std::stoi(first) - 1, std::stoi(second) - 1));
            }
            if (first.size() != 2) throw error("z variables are written zji (or zj_i)");
            return layout_.flat(VarId::z(first[0] - '1', first[1] - '1'));
        } catch (const std::out_of_range&) {
            throw error(std::string("variable ") + kind + first + " not in layout");
        }
    }

    VarLayout layout_;
    std::string s_;
    std::size_t pos_ = 0;
};

}  // namespace

template <class S>
BasicPolynomial<S> parse_polynomial(std::string_view text, VarLayout layout) {
    return TermParser(text, layout).parse<S>();
}

template BasicPolynomial<double> parse_polynomial<double>(std::string_view, VarLayout);
template BasicPolynomial<Surd> parse_polynomial<Surd>(std::string_view, VarLayout);

std::vector<Exponents> monomials_up_to(VarLayout layout, std::span<const int> vars, int max_degree) {
    std::vector<Exponents> out;
    Exponents e(layout.size(), 0);
    // Enumerate by total degree, recursing over the listed variables.
    auto rec = [&](auto&& self, std::size_t idx, int remaining) -> void {
        if (idx == vars.size()) {
            if (remaining == 0) out.push_back(e);
            return;
        }
        for (int p = remaining; p >= 0; --p) {
            e[vars[idx]] = static_cast<std::uint16_t>(p);
            self(self, idx + 1, remaining - p);
        }
        e[vars[idx]] = 0;
    };
    for (int d = 0; d <= max_degree; ++d) rec(rec, 0, d);
    return out;
}

}  // namespace varbound
