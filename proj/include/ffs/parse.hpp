#pragma once
/* Text input for polynomials.
 *
 * Accepted forms:
 *   F_q[t]:    "0x152a" (F_2 only: bit i is the coefficient of t^i),
 *              "1,0,2" (coefficients from t^0 up), or an expression in t
 *   F_q[t][x]: coefficient encodings joined by ';' (x^0 first), or an
 *              expression in t and x such as "x^6+(t^2+t+1)x^5+0x152a"
 * Expressions allow + - * ^, parentheses and juxtaposition.  Integers are
 * reduced mod p in a prime field and read as element codes otherwise.
 */

#include "bipoly.hpp"

#include <string>
#include <string_view>

namespace ffsel {

namespace detail {

class ExprParser {
  public:
    ExprParser(Field F, std::string_view s) : F_(F)
    {
        /* accept the unicode minus as well */
        for (size_t i = 0; i < s.size(); i++) {
            if (i + 2 < s.size() && (unsigned char)s[i] == 0xe2 && (unsigned char)s[i + 1] == 0x88 &&
                (unsigned char)s[i + 2] == 0x92) {
                src_.push_back('-');
                i += 2;
            } else if (!std::isspace((unsigned char)s[i])) {
                src_.push_back(s[i]);
            }
        }
    }

    BiPoly parse()
    {
        if (src_.empty()) fail("empty expression");
        BiPoly r = expr();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return r;
    }

  private:
    Field F_;
    std::string src_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string &msg) const
    {
        throw config_error("cannot parse polynomial \"" + src_ + "\": " + msg);
    }
    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

    BiPoly expr()
    {
        BiPoly r(F_);
        bool neg = false;
        if (peek() == '+' || peek() == '-') neg = src_[pos_++] == '-';
        r = term();
        if (neg) r = -r;
        while (peek() == '+' || peek() == '-') {
            bool minus = src_[pos_++] == '-';
            BiPoly t = term();
            r = minus ? r - t : r + t;
        }
        return r;
    }

    bool starts_atom() const
    {
        char c = peek();
        return c == '(' || c == '[' || c == 't' || c == 'x' || std::isdigit((unsigned char)c);
    }

    BiPoly term()
    {
        BiPoly r = factor();
        while (true) {
            if (peek() == '*') {
                pos_++;
                r = r * factor();
            } else if (starts_atom()) {
                r = r * factor();
            } else {
                break;
            }
        }
        return r;
    }

    uint64_t integer()
    {
        if (!std::isdigit((unsigned char)peek())) fail("expected an integer");
        uint64_t v = 0;
        while (std::isdigit((unsigned char)peek())) {
            v = v * 10 + (uint64_t)(src_[pos_++] - '0');
            if (v > (1ull << 40)) fail("integer too large");
        }
        return v;
    }

    BiPoly factor()
    {
        BiPoly a = atom();
        if (peek() == '^') {
            pos_++;
            uint64_t e = integer();
            BiPoly r = BiPoly::constant(UPoly::one(F_));
            BiPoly b = a;
            while (e) {
                if (e & 1) r = r * b;
                e >>= 1;
                if (e) b = b * b;
            }
            return r;
        }
        return a;
    }

    BiPoly constant_of(uint64_t v)
    {
        elem e;
        if (F_->prime_field()) e = (elem)(v % F_->p);
        else if (v < F_->q) e = (elem)v;
        else fail("integer " + std::to_string(v) + " is not an element code of F_" + std::to_string(F_->q));
        return BiPoly::constant(UPoly::constant(F_, e));
    }

    BiPoly atom()
    {
        char c = peek();
        if (c == '(') {
            pos_++;
            BiPoly r = expr();
            if (peek() != ')') fail("missing ')'");
            pos_++;
            return r;
        }
        if (c == '[') {
            pos_++;
            std::vector<elem> co;
            while (true) {
                uint64_t v = integer();
                if (v >= F_->q) fail("coefficient out of range");
                co.push_back((elem)v);
                if (peek() == ',') {
                    pos_++;
                    continue;
                }
                break;
            }
            if (peek() != ']') fail("missing ']'");
            pos_++;
            return BiPoly::constant(UPoly(F_, co));
        }
        if (c == 't') {
            pos_++;
            return BiPoly::constant(UPoly::monomial(F_, 1));
        }
        if (c == 'x') {
            pos_++;
            return BiPoly::xpow(F_, 1);
        }
        if (c == '0' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
            pos_ += 2;
            bigint v = 0;
            size_t st = pos_;
            while (std::isxdigit((unsigned char)peek())) {
                char h = (char)std::tolower((unsigned char)src_[pos_++]);
                v = v * 16 + (h <= '9' ? h - '0' : h - 'a' + 10);
            }
            if (pos_ == st) fail("empty hex literal");
            return BiPoly::constant(UPoly::from_code(F_, v));
        }
        if (std::isdigit((unsigned char)c)) return constant_of(integer());
        fail(c ? "unexpected '" + std::string(1, c) + "'" : "unexpected end");
    }
};

inline std::string trim(std::string_view s)
{
    size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) a++;
    while (b > a && std::isspace((unsigned char)s[b - 1])) b--;
    return std::string(s.substr(a, b - a));
}

} // namespace detail

inline UPoly parse_upoly(Field F, std::string_view text)
{
    std::string s = detail::trim(text);
    if (s.find(',') != std::string::npos) {
        std::vector<elem> co;
        size_t st = 0;
        while (st <= s.size()) {
            size_t e = s.find(',', st);
            if (e == std::string::npos) e = s.size();
            std::string tok = detail::trim(std::string_view(s).substr(st, e - st));
            if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
                throw config_error("bad coefficient list \"" + s + "\"");
            unsigned long v = std::stoul(tok);
            if (v >= F->q) throw config_error("coefficient " + tok + " out of range in \"" + s + "\"");
            co.push_back((elem)v);
            st = e + 1;
        }
        return UPoly(F, co);
    }
    BiPoly b = detail::ExprParser(F, s).parse();
    if (b.d() > 0) throw config_error("\"" + s + "\" involves x");
    return b.is_zero() ? UPoly(F) : b.c[0];
}

inline BiPoly parse_bipoly(Field F, std::string_view text)
{
    std::string s = detail::trim(text);
    if (s.find(';') != std::string::npos) {
        BiPoly r(F);
        size_t st = 0;
        while (st <= s.size()) {
            size_t e = s.find(';', st);
            if (e == std::string::npos) e = s.size();
            r.c.push_back(parse_upoly(F, std::string_view(s).substr(st, e - st)));
            st = e + 1;
        }
        r.normalize();
        return r;
    }
    return detail::ExprParser(F, s).parse();
}

} // namespace ffsel
