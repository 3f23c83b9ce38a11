#include "henon/map_spec.hpp"

#include <cctype>
#include <cstdio>
#include <map>

namespace henon {

namespace {

class Parser {
public:
    explicit Parser(std::string text) {
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c))) s_.push_back(c);
    }

    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    bool eat(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw MapError(what + " at position " + std::to_string(pos_) + " in \"" + s_ + "\"");
    }

    bool at_number() const {
        char c = peek();
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
    }

    double number() {
        const std::size_t start = pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (eat('.'))
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (peek() == 'e' || peek() == 'E') {
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("malformed exponent");
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        const std::string lit = s_.substr(start, pos_ - start);
        if (lit.empty() || lit == ".") fail("expected a number");
        return std::stod(lit);
    }

    // Unsigned real or imaginary literal: "2.5", "2.5i", "i".
    cx unsigned_literal() {
        if (eat('i')) return {0.0, 1.0};
        const double v = number();
        if (eat('i')) return {0.0, v};
        return {v, 0.0};
    }

    // Signed sum of literals, optionally parenthesized: "0.3+0.1i", "(1-2i)".
    cx complex_sum(bool stop_at_paren) {
        cx total{0.0};
        bool first = true;
        while (!done() && !(stop_at_paren && peek() == ')')) {
            double sign = 1.0;
            if (eat('+')) sign = 1.0;
            else if (eat('-')) sign = -1.0;
            else if (!first) fail("expected + or -");
            if (eat('(')) {
                total += sign * complex_sum(true);
                if (!eat(')')) fail("missing )");
            } else {
                total += sign * unsigned_literal();
            }
            first = false;
        }
        if (first) fail("empty complex literal");
        return total;
    }

    // Polynomial in y as a map degree -> coefficient.
    std::map<int, cx> polynomial() {
        std::map<int, cx> terms;
        bool first = true;
        while (!done()) {
            double sign = 1.0;
            if (eat('+')) sign = 1.0;
            else if (eat('-')) sign = -1.0;
            else if (!first) fail("expected + or - between terms");
            cx coef{1.0};
            bool has_coef = false;
            if (eat('(')) {
                coef = complex_sum(true);
                if (!eat(')')) fail("missing )");
                has_coef = true;
            } else if (at_number() || (peek() == 'i')) {
                coef = unsigned_literal();
                has_coef = true;
            }
            if (has_coef) eat('*');
            int power = 0;
            if (eat('y')) {
                power = 1;
                if (eat('^')) {
                    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected exponent");
                    const double p = number();
                    power = static_cast<int>(p);
                    if (p != power) fail("non-integer exponent");
                }
            } else if (!has_coef) {
                fail("expected a term");
            }
            terms[power] += sign * coef;
            first = false;
        }
        if (first) fail("empty polynomial");
        return terms;
    }

private:
    std::string s_;
    std::size_t pos_ = 0;
};

}  // namespace

cx parse_complex(const std::string& text) {
    Parser p(text);
    cx v = p.complex_sum(false);
    if (!p.done()) p.fail("trailing characters");
    return v;
}

HenonFactor parse_factor(const std::string& text) {
    const auto semi = text.find(';');
    if (semi == std::string::npos) throw MapError("factor spec needs the form \"poly;a=value\": " + text);
    std::string rest = text.substr(semi + 1);
    std::string compact;
    for (char c : rest)
        if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
    if (compact.rfind("a=", 0) != 0) throw MapError("factor spec needs \"a=value\" after ';': " + text);
    const cx a = parse_complex(compact.substr(2));

    Parser pp(text.substr(0, semi));
    const std::map<int, cx> terms = pp.polynomial();
    int degree = 0;
    for (const auto& [k, c] : terms)
        if (c != cx{0.0}) degree = std::max(degree, k);
    if (degree < 2) throw MapError("factor polynomial must have degree >= 2: " + text);
    if (terms.at(degree) != cx{1.0}) throw MapError("factor polynomial must be monic: " + text);
    std::vector<cx> lower(static_cast<std::size_t>(degree), cx{0.0});
    for (const auto& [k, c] : terms)
        if (k < degree) lower[static_cast<std::size_t>(k)] = c;
    return make_factor(std::move(lower), degree, a);
}

HenonMap parse_map(const std::vector<std::string>& factor_specs) {
    if (factor_specs.empty()) throw MapError("at least one --map factor is required");
    std::vector<HenonFactor> fs;
    for (const auto& s : factor_specs) fs.push_back(parse_factor(s));
    return make_henon(std::move(fs));
}

std::string format_complex(cx z) {
    char buf[80];
    if (z.imag() == 0.0) std::snprintf(buf, sizeof buf, "%.17g", z.real());
    else std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
    return buf;
}

}  // namespace henon
