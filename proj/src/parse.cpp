#include "reachck/parse.hpp"

#include <cctype>
#include <set>

namespace reachck {

namespace {

enum class Tok { Ident, Keyword, Number, Location, Symbol, End };

struct Token {
    Tok kind;
    std::string text;
    Span span;
};

const std::set<std::string> kKeywords = {
    "unit", "true", "false", "fun", "tfun", "let", "in", "ref", "succ", "pred", "iszero", "if", "then", "else",
    "fresh", "mu", "forall", "Ref", "Unit", "Nat", "Bool", "Top", "Bot",
};

// Longest symbols first so that ":=" wins over ":".
const std::vector<std::string> kSymbols = {":=", "=>", "->", "<:", "(", ")", "[", "]", "{", "}", ",", ":",
                                            "^", ".", "*", "!", "&", "="};

std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
}

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Span sp{line, col, line, col};
        auto finish = [&](Tok k, std::size_t len) {
            std::string text = src.substr(i, len);
            advance(len);
            sp.endLine = line;
            sp.endCol = col;
            out.push_back({k, text, sp});
        };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
                ++j;
            std::string w = src.substr(i, j - i);
            finish(kKeywords.count(w) ? Tok::Keyword : Tok::Ident, j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            finish(Tok::Number, j - i);
            continue;
        }
        if (c == '@' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
            std::size_t j = i + 1;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            finish(Tok::Location, j - i);
            continue;
        }
        bool matched = false;
        for (const auto& s : kSymbols) {
            if (src.compare(i, s.size(), s) == 0) {
                finish(Tok::Symbol, s.size());
                matched = true;
                break;
            }
        }
        if (!matched)
            throw ParseError(Span{line, col, line, col + 1}, {}, "unexpected character '" + std::string(1, c) + "'");
    }
    out.push_back({Tok::End, "", Span{line, col, line, col}});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    TermP program() {
        TermP t = term();
        expectEnd();
        return t;
    }

    QType qtypeOnly() {
        QType q = qtype();
        expectEnd();
        return q;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const Token& prev() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }

    bool isSym(const std::string& s, std::size_t k = 0) const { return peek(k).kind == Tok::Symbol && peek(k).text == s; }
    bool isKw(const std::string& s, std::size_t k = 0) const { return peek(k).kind == Tok::Keyword && peek(k).text == s; }

    [[noreturn]] void error(std::vector<std::string> expected) const {
        std::string msg = "expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? " or " : "") + expected[i];
        msg += ", found " + describe(peek());
        throw ParseError(peek().span, std::move(expected), msg);
    }

    void expectEnd() {
        if (peek().kind != Tok::End) error({"end of input"});
    }

    const Token& sym(const std::string& s) {
        if (!isSym(s)) error({"'" + s + "'"});
        return toks_[pos_++];
    }

    const Token& kw(const std::string& s) {
        if (!isKw(s)) error({"'" + s + "'"});
        return toks_[pos_++];
    }

    bool acceptSym(const std::string& s) {
        if (!isSym(s)) return false;
        ++pos_;
        return true;
    }

    std::string ident() {
        if (peek().kind != Tok::Ident) error({"identifier"});
        return toks_[pos_++].text;
    }

    Span from(const Span& start) const {
        Span e = prev().span;
        return Span{start.startLine, start.startCol, e.endLine, e.endCol};
    }

    // ---------------------------------------------------------- terms

    TermP term() {
        Span st = peek().span;
        if (isKw("let")) {
            ++pos_;
            std::string x = ident();
            std::optional<QType> ann;
            if (acceptSym(":")) ann = qtype();
            sym("=");
            TermP bound = term();
            kw("in");
            TermP body = term();
            return mkLet(x, ann, bound, body, from(st));
        }
        if (isKw("fun")) {
            ++pos_;
            std::string f = ident();
            sym("(");
            std::string x = ident();
            std::optional<QType> dom, cod;
            if (acceptSym(":")) dom = qtype();
            sym(")");
            if (acceptSym(":")) cod = qtype();
            sym("=>");
            TermP body = term();
            return mkAbs(f, x, dom, cod, body, from(st));
        }
        if (isKw("tfun")) {
            ++pos_;
            std::string f = ident();
            sym("(");
            std::string X = ident();
            sym("^");
            std::string x = ident();
            sym("<:");
            QType bound = qtype();
            sym(")");
            sym("=>");
            TermP body = term();
            return mkTAbs(f, X, x, bound, body, from(st));
        }
        if (isKw("if")) {
            ++pos_;
            TermP c = term();
            kw("then");
            TermP a = term();
            kw("else");
            TermP b = term();
            return mkIf(c, a, b, from(st));
        }
        return assign();
    }

    TermP assign() {
        Span st = peek().span;
        TermP l = mul();
        if (acceptSym(":=")) {
            TermP r = term();
            return mkAssign(l, r, from(st));
        }
        return l;
    }

    TermP mul() {
        Span st = peek().span;
        TermP a = app();
        while (acceptSym("*")) {
            TermP b = app();
            a = mkMul(a, b, from(st));
        }
        return a;
    }

    bool startsPrefix() const {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Ident:
            case Tok::Number:
            case Tok::Location: return true;
            case Tok::Keyword:
                return t.text == "unit" || t.text == "true" || t.text == "false" || t.text == "ref" ||
                       t.text == "succ" || t.text == "pred" || t.text == "iszero";
            case Tok::Symbol: return t.text == "(" || t.text == "!";
            default: return false;
        }
    }

    TermP app() {
        Span st = peek().span;
        TermP f = prefix();
        while (true) {
            if (isSym("[")) {
                ++pos_;
                QType q = qtype();
                sym("]");
                f = mkTApp(f, q, from(st));
            } else if (startsPrefix()) {
                TermP a = prefix();
                f = mkApp(f, a, from(st));
            } else {
                return f;
            }
        }
    }

    TermP prefix() {
        Span st = peek().span;
        auto one = [&](TermP (*mk)(TermP, Span)) {
            ++pos_;
            TermP a = prefix();
            return mk(a, from(st));
        };
        if (isKw("ref")) return one(&mkRefNew);
        if (isSym("!")) return one(&mkDeref);
        if (isKw("succ")) return one(&mkSucc);
        if (isKw("pred")) return one(&mkPred);
        if (isKw("iszero")) return one(&mkIsZero);
        return atom();
    }

    TermP atom() {
        const Token& t = peek();
        Span st = t.span;
        switch (t.kind) {
            case Tok::Ident: ++pos_; return mkVar(t.text, st);
            case Tok::Number: ++pos_; return mkNat(Nat(t.text), st);
            case Tok::Location: ++pos_; return mkLoc(std::stoul(t.text.substr(1)), st);
            case Tok::Keyword:
                if (t.text == "unit") { ++pos_; return mkUnit(st); }
                if (t.text == "true") { ++pos_; return mkBool(true, st); }
                if (t.text == "false") { ++pos_; return mkBool(false, st); }
                break;
            case Tok::Symbol:
                if (t.text == "(") {
                    ++pos_;
                    TermP inner = term();
                    if (acceptSym(":")) {
                        QType q = qtype();
                        sym(")");
                        return mkAscribe(inner, q, from(st));
                    }
                    sym(")");
                    return inner;
                }
                break;
            default: break;
        }
        error({"term"});
    }

    // ---------------------------------------------------------- types

    QType qtype() {
        TypeP t = type();
        sym("^");
        return QType{t, qual()};
    }

    TypeP type() {
        const Token& t = peek();
        if (t.kind == Tok::Keyword) {
            if (t.text == "Unit") { ++pos_; return tUnit(); }
            if (t.text == "Nat") { ++pos_; return tNat(); }
            if (t.text == "Bool") { ++pos_; return tBool(); }
            if (t.text == "Top") { ++pos_; return tTop(); }
            if (t.text == "Bot") { ++pos_; return tBot(); }
            if (t.text == "Ref") {
                ++pos_;
                sym("[");
                QType q = qtype();
                sym("]");
                return tRef(q);
            }
            if (t.text == "mu") {
                ++pos_;
                std::string z = ident();
                sym(".");
                kw("Ref");
                sym("[");
                QType w = qtype();
                QType r = w;
                if (acceptSym(",")) r = qtype();
                sym("]");
                return tRef(z, w, r);
            }
            if (t.text == "forall") {
                ++pos_;
                std::string f = ident();
                sym("(");
                std::string X = ident();
                sym("^");
                std::string x = ident();
                sym("<:");
                QType bound = qtype();
                sym(")");
                sym(".");
                QType body = qtype();
                return tAll(f, X, x, bound, body);
            }
        }
        if (t.kind == Tok::Ident) {
            ++pos_;
            return tVar(t.text);
        }
        if (isSym("(")) {
            ++pos_;
            std::string f = ident();
            sym("(");
            std::string x = ident();
            sym(":");
            QType dom = qtype();
            sym(")");
            sym("->");
            QType cod = qtype();
            sym(")");
            return tFun(f, x, dom, cod);
        }
        error({"type"});
    }

    Qual qual() {
        sym("{");
        Qual q;
        if (acceptSym("}")) return q;
        do {
            const Token& t = peek();
            if (t.kind == Tok::Ident) {
                ++pos_;
                q.insert(Atom::var(t.text));
            } else if (isKw("fresh")) {
                ++pos_;
                q.insert(Atom::fresh());
            } else if (isSym("&")) {
                ++pos_;
                q.insert(Atom::var(ident()));
            } else if (t.kind == Tok::Location) {
                ++pos_;
                q.insert(Atom::location(std::stoul(t.text.substr(1))));
            } else {
                error({"identifier", "'fresh'", "location"});
            }
        } while (acceptSym(","));
        sym("}");
        return q;
    }
};

}  // namespace

TermP parseProgram(const std::string& text) { return Parser(lex(text)).program(); }
QType parseQType(const std::string& text) { return Parser(lex(text)).qtypeOnly(); }

}  // namespace reachck
