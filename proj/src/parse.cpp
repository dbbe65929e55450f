#include "herglotz/errors.hpp"
#include "herglotz/expr.hpp"

#include <cctype>
#include <charconv>
#include <system_error>

namespace herglotz {

namespace {

// Recursive descent over
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' factor)? | '-' factor
//   atom   := number | ident | func '(' expr ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expression parse_all()
    {
        Expression e = expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
        return e;
    }

private:
    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    char peek()
    {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    void expect(char c)
    {
        if (peek() != c) {
            if (pos_ >= src_.size())
                throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
        ++pos_;
    }

    Expression expr()
    {
        Expression lhs = term();
        for (char c = peek(); c == '+' || c == '-'; c = peek()) {
            ++pos_;
            Expression rhs = term();
            lhs = make_binary(c == '+' ? Op::add : Op::sub, lhs, rhs);
        }
        return lhs;
    }

    Expression term()
    {
        Expression lhs = factor();
        for (char c = peek(); c == '*' || c == '/'; c = peek()) {
            ++pos_;
            Expression rhs = factor();
            lhs = make_binary(c == '*' ? Op::mul : Op::div, lhs, rhs);
        }
        return lhs;
    }

    Expression factor()
    {
        if (peek() == '-') {
            ++pos_;
            return make_unary(Op::neg, factor());
        }
        Expression base = atom();
        if (peek() == '^') {
            ++pos_;
            return make_binary(Op::pow, base, factor());
        }
        return base;
    }

    Expression atom()
    {
        const char c = peek();
        const std::size_t start = pos_;
        if (c == '\0')
            throw ParseError("unexpected end of input", pos_);
        if (c == '(') {
            ++pos_;
            Expression inner = expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string_view name = src_.substr(start, pos_ - start);
            if (name == "sin" || name == "cos" || name == "exp" || name == "log" || name == "sqrt") {
                if (peek() != '(')
                    throw ParseError("function '" + std::string(name) + "' requires '('", pos_);
                ++pos_;
                Expression arg = expr();
                expect(')');
                const Op op = name == "sin"   ? Op::sin
                              : name == "cos" ? Op::cos
                              : name == "exp" ? Op::exp
                              : name == "log" ? Op::log
                                              : Op::sqrt;
                return make_unary(op, arg);
            }
            if (auto var = Variable::from_name(name))
                return Expression(*var);
            throw ParseError("unknown identifier '" + std::string(name) + "'", start);
        }
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    Expression number()
    {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0)
            throw ParseError("malformed number", start);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
                ++pos_;
            if (digits() == 0)
                pos_ = save; // 'e' belongs to whatever follows
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (ec != std::errc{} || ptr != src_.data() + pos_)
            throw ParseError("malformed number", start);
        return Expression(value);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace

Expression parse(std::string_view source)
{
    return Parser(source).parse_all();
}

} // namespace herglotz
