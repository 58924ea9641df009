#include "hjred/parser.hpp"

#include <cctype>

namespace hjred {

namespace {

class Parser {
  public:
    Parser(const std::string& text, const SymbolTable& table)
        : text_(text), table_(table) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        if (!accept(c)) fail(std::string("expected '") + c + "' " + what);
    }

    Expr parse_expr() {
        bool negate = accept('-');
        Expr acc = parse_term();
        if (negate) acc = neg(acc);
        while (true) {
            if (accept('+'))
                acc = add(acc, parse_term());
            else if (accept('-'))
                acc = sub(acc, parse_term());
            else
                break;
        }
        return acc;
    }

    Expr parse_term() {
        Expr acc = parse_factor();
        while (true) {
            if (accept('*'))
                acc = mul(acc, parse_factor());
            else if (accept('/'))
                acc = div(acc, parse_factor());
            else
                break;
        }
        return acc;
    }

    Expr parse_factor() {
        Expr a = parse_atom();
        if (accept('^')) {
            Rational q = parse_exponent();
            a = make_power(a, q);
        }
        if (peek('^')) fail("unexpected '^' (exponents do not chain)");
        return a;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return Expr::rational(parse_number());
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')', "to close parenthesis");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            std::string id = parse_ident();
            if (id == "sqrt") {
                expect('(', "after sqrt");
                Expr e = parse_expr();
                expect(')', "to close sqrt");
                return sqrt(e);
            }
            auto sid = table_.find(id);
            if (!sid) {
                pos_ = start;
                fail("unknown identifier '" + id + "'");
            }
            return Expr::symbol(*sid);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_'))
            ++pos_;
        return text_.substr(start, pos_ - start);
    }

    // decimal literal read exactly: "2" -> 2, "2.5" -> 5/2
    Rational parse_number() {
        std::size_t start = pos_;
        auto push_digit = [&](std::int64_t acc, char c) {
            if (acc > (INT64_MAX - 9) / 10) {
                pos_ = start;
                fail("numeric literal too large");
            }
            return acc * 10 + (c - '0');
        };
        std::int64_t ipart = 0;
        bool any = false;
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            ipart = push_digit(ipart, text_[pos_]);
            ++pos_;
            any = true;
        }
        Rational r(ipart);
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            std::int64_t frac = 0, scale = 1;
            bool fany = false;
            while (pos_ < text_.size() &&
                   std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                frac = push_digit(frac, text_[pos_]);
                if (scale > INT64_MAX / 10) {
                    pos_ = start;
                    fail("numeric literal too large");
                }
                scale *= 10;
                ++pos_;
                fany = true;
            }
            if (!fany && !any) fail("malformed number");
            r = r + Rational(frac, scale);
        } else if (!any) {
            fail("malformed number");
        }
        return r;
    }

    Rational parse_exponent() {
        skip_ws();
        if (pos_ >= text_.size()) fail("missing exponent");
        if (text_[pos_] == '(') {
            ++pos_;
            skip_ws();
            bool negate = accept('-');
            if (pos_ >= text_.size() ||
                !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                fail("malformed rational exponent");
            Rational num = parse_number();
            Rational out = num;
            if (accept('/')) {
                skip_ws();
                if (pos_ >= text_.size() ||
                    !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    fail("malformed rational exponent");
                Rational den = parse_number();
                if (!num.is_integer() || !den.is_integer() || den.is_zero())
                    fail("malformed rational exponent");
                out = num / den;
            }
            if (negate) out = -out;
            expect(')', "to close exponent");
            return out;
        }
        if (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')
            return parse_number();
        fail("malformed rational exponent");
    }

    const std::string& text_;
    const SymbolTable& table_;
    std::size_t pos_ = 0;
};

} // namespace

Expr parse(const std::string& text, const SymbolTable& table) {
    return Parser(text, table).run();
}

} // namespace hjred
