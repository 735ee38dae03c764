#pragma once

// Minimal s-expression reader shared by the PDDL front end and the
// canonical axiom parser.  Atoms keep their source line/column so
// downstream passes can report positions.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsc {

struct parse_error : std::runtime_error {
    int line, col;
    parse_error(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                             std::to_string(col_) + ")"),
          line(line_), col(col_) {}
};

struct SNode {
    bool is_atom = false;
    std::string atom;            // valid when is_atom
    std::vector<SNode> list;     // valid when !is_atom
    int line = 0, col = 0;

    const SNode& at(size_t i) const {
        if (is_atom || i >= list.size())
            throw parse_error("expected a longer list", line, col);
        return list[i];
    }
    size_t size() const { return is_atom ? 0 : list.size(); }
    bool head_is(const std::string& kw) const {
        return !is_atom && !list.empty() && list[0].is_atom && list[0].atom == kw;
    }
};

namespace detail {

struct Lexer {
    const std::string& src;
    size_t pos = 0;
    int line = 1, col = 1;

    explicit Lexer(const std::string& s) : src(s) {}

    void advance() {
        if (pos < src.size() && src[pos] == '\n') { ++line; col = 1; }
        else ++col;
        ++pos;
    }
    void skip_ws() {
        while (pos < src.size()) {
            char c = src[pos];
            if (c == ';') {
                while (pos < src.size() && src[pos] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else break;
        }
    }
    bool done() { skip_ws(); return pos >= src.size(); }
};

inline SNode read_node(Lexer& lx) {
    lx.skip_ws();
    if (lx.pos >= lx.src.size())
        throw parse_error("unexpected end of input", lx.line, lx.col);
    SNode n;
    n.line = lx.line;
    n.col = lx.col;
    char c = lx.src[lx.pos];
    if (c == '(') {
        lx.advance();
        n.is_atom = false;
        while (true) {
            lx.skip_ws();
            if (lx.pos >= lx.src.size())
                throw parse_error("unbalanced parenthesis", n.line, n.col);
            if (lx.src[lx.pos] == ')') { lx.advance(); break; }
            n.list.push_back(read_node(lx));
        }
        return n;
    }
    if (c == ')')
        throw parse_error("unexpected ')'", lx.line, lx.col);
    n.is_atom = true;
    while (lx.pos < lx.src.size()) {
        char d = lx.src[lx.pos];
        if (d == '(' || d == ')' || d == ';' || d == ' ' || d == '\t' || d == '\r' || d == '\n')
            break;
        n.atom.push_back(d);
        lx.advance();
    }
    return n;
}

} // namespace detail

inline SNode parse_sexpr(const std::string& text) {
    detail::Lexer lx(text);
    SNode n = detail::read_node(lx);
    if (!lx.done())
        throw parse_error("trailing content after expression", lx.line, lx.col);
    return n;
}

inline std::vector<SNode> parse_sexprs(const std::string& text) {
    detail::Lexer lx(text);
    std::vector<SNode> out;
    while (!lx.done()) out.push_back(detail::read_node(lx));
    return out;
}

} // namespace hsc
