#pragma once

// Recursive-descent parser for polynomial expressions over a chart.
//
// Grammar:
//   expr     := term (('+'|'-') term)*
//   term     := factor ('*' factor)*
//   factor   := atom ('^' uint)?
//   atom     := rational | ident | '(' expr ')'
//   rational := int ('/' uint)?
//   ident    := [A-Za-z_][A-Za-z0-9_]*
//
// Normalization (including sign-correct reordering of odd coordinates and the
// vanishing of odd squares) happens through Poly's graded product.

#include "dgatlas/poly.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

namespace dgatlas {

struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

namespace detail {

class PolyParser {
public:
    PolyParser(std::string_view src, ChartPtr chart) : src_(src), chart_(std::move(chart)) {}

    Poly parse() {
        Poly p = expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
        return p;
    }

private:
    std::string_view src_;
    ChartPtr chart_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    Poly expr() {
        bool neg = false;
        skip_ws();
        if (eat('-'))
            neg = true;
        else
            eat('+');
        Poly acc = term();
        if (neg) acc = -acc;
        while (true) {
            skip_ws();
            if (eat('+'))
                acc += term();
            else if (eat('-'))
                acc -= term();
            else
                break;
        }
        return acc;
    }

    Poly term() {
        Poly acc = factor();
        while (eat('*')) acc = acc * factor();
        return acc;
    }

    Poly factor() {
        Poly base = atom();
        if (eat('^')) {
            unsigned long e = uint_lit();
            Poly acc = Poly::constant(chart_, 1);
            for (unsigned long k = 0; k < e; ++k) acc = acc * base;
            return acc;
        }
        return base;
    }

    Poly atom() {
        char c = peek();
        if (c == '(') {
            eat('(');
            Poly p = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return rational_lit();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            std::string id = ident();
            std::size_t i = chart_->find(id);
            if (i == Chart::npos) throw ParseError("unknown identifier '" + id + "'", start);
            return Poly::coordinate(chart_, i);
        }
        throw ParseError("expected atom", pos_);
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    std::string digits() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == start) throw ParseError("expected integer", pos_);
        return std::string(src_.substr(start, pos_ - start));
    }

    unsigned long uint_lit() { return std::stoul(digits()); }

    Poly rational_lit() {
        Int num(digits());
        Rat value(num);
        std::size_t save = pos_;
        if (eat('/')) {
            // A '/' is part of the literal only when followed by digits.
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                Int den(digits());
                value = Rat(num, den);
            } else {
                pos_ = save;
            }
        }
        return Poly::constant(chart_, value);
    }
};

}  // namespace detail

/// Parses src over the chart; throws ParseError with a position on bad input.
inline Poly parse_poly(std::string_view src, const ChartPtr& chart) {
    return detail::PolyParser(src, chart).parse();
}

/// Renders a Poly so that parse_poly(render(p)) == p.
inline std::string render(const Poly& p) { return p.str(); }

}  // namespace dgatlas
