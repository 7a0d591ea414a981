#include <cctype>
#include <charconv>
#include <map>
#include <string>

#include "tflab/error.hpp"
#include "tflab/texpr.hpp"

namespace tflab::texpr {

namespace {

enum class Tok { Num, Ident, Sym, End };

struct Token {
    Tok kind;
    std::string text;
    u64 num = 0;
    std::size_t pos = 0;
};

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            int base = 10;
            if (c == '0' && i + 1 < s.size() && (s[i + 1] == 'x' || s[i + 1] == 'X')) {
                base = 16;
                i += 2;
            }
            std::size_t digits = i;
            while (i < s.size() && std::isxdigit(static_cast<unsigned char>(s[i]))) {
                if (base == 10 && !std::isdigit(static_cast<unsigned char>(s[i]))) break;
                ++i;
            }
            if (i == digits) throw ParseError("malformed number", start);
            u64 v = 0;
            auto [p, ec] = std::from_chars(s.data() + digits, s.data() + i, v, base);
            if (ec != std::errc()) throw ParseError("number does not fit in 64 bits", start);
            (void)p;
            out.push_back({Tok::Num, std::string(s.substr(start, i - start)), v, start});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), 0, start});
            continue;
        }
        static const char* multi[] = {">>>", "<<<", ">>", "<<", "**"};
        bool matched = false;
        for (const char* m : multi) {
            std::string_view mv(m);
            if (s.substr(i, mv.size()) == mv) {
                out.push_back({Tok::Sym, std::string(mv), 0, start});
                i += mv.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string_view("+-*%&^|~(),;=/").find(c) == std::string_view::npos) {
            throw ParseError(std::string("unexpected character '") + c + "'", start);
        }
        out.push_back({Tok::Sym, std::string(1, c), 0, start});
        ++i;
    }
    out.push_back({Tok::End, "", 0, s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(lex(text)) {}

    void definitions() {
        while (peek().kind == Tok::Ident && toks_[pos_ + 1].kind == Tok::Sym && toks_[pos_ + 1].text == "=") {
            Token name = next();
            if (is_reserved(name.text)) throw ParseError("cannot redefine '" + name.text + "'", name.pos);
            ++pos_;
            Expr body = expr();
            expect(";");
            defs_.insert_or_assign(name.text, body);
        }
    }

    std::vector<Expr> system() {
        definitions();
        std::vector<Expr> out;
        std::size_t close = outer_paren_with_comma();
        if (close != 0) {
            ++pos_;
            out.push_back(expr());
            while (accept(",")) out.push_back(expr());
            expect(")");
        } else {
            out.push_back(expr());
            while (accept(",")) out.push_back(expr());
        }
        accept(";");
        if (peek().kind != Tok::End) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
        return out;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::map<std::string, Expr> defs_;

    static bool is_reserved(const std::string& s) {
        return s == "x" || s == "y" || s == "z" || s == "inv" || s == "pow1p2" || s == "mahler" ||
               var_index(s).has_value();
    }

    static std::optional<unsigned> var_index(const std::string& s) {
        if (s == "x") return 0;
        if (s == "y") return 1;
        if (s == "z") return 2;
        if (s.size() >= 2 && s[0] == 'x') {
            unsigned v = 0;
            for (std::size_t i = 1; i < s.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
                v = v * 10 + static_cast<unsigned>(s[i] - '0');
                if (v >= 32) return std::nullopt;
            }
            if (s.size() > 2 && s[1] == '0') return std::nullopt;
            return v;
        }
        return std::nullopt;
    }

    const Token& peek() const { return toks_[pos_]; }
    Token next() { return toks_[pos_++]; }

    bool is_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }

    bool accept(const char* s) {
        if (is_sym(s)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(const char* s) {
        if (!accept(s)) {
            std::string got = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
            throw ParseError(std::string("expected '") + s + "' but found " + got, peek().pos);
        }
    }

    // Index of the ')' matching a leading '(' when a comma sits directly inside
    // and nothing but ';' follows; 0 otherwise.
    std::size_t outer_paren_with_comma() const {
        if (!is_sym("(")) return 0;
        int depth = 0;
        bool comma = false;
        for (std::size_t i = pos_; i < toks_.size(); ++i) {
            const Token& t = toks_[i];
            if (t.kind != Tok::Sym) continue;
            if (t.text == "(") ++depth;
            if (t.text == ")" && --depth == 0) {
                std::size_t j = i + 1;
                if (toks_[j].kind == Tok::Sym && toks_[j].text == ";") ++j;
                return comma && toks_[j].kind == Tok::End ? i : 0;
            }
            if (t.text == "," && depth == 1) comma = true;
        }
        return 0;
    }

    void reject_forbidden() {
        const Token& t = peek();
        if (t.kind != Tok::Sym) return;
        if (t.text == ">>") throw ParseError("right shift is not a T-function", t.pos);
        if (t.text == ">>>" || t.text == "<<<") throw ParseError("rotation is not a T-function", t.pos);
        if (t.text == "/") throw ParseError("division is not supported; use inv(e) for odd inversion", t.pos);
        if (t.text == "**") throw ParseError("'**' is not supported; use pow1p2(u, v) for (1+2u)^v", t.pos);
    }

    Expr expr() { return or_expr(); }

    Expr or_expr() {
        Expr e = xor_expr();
        while (accept("|")) e = e | xor_expr();
        reject_forbidden();
        return e;
    }

    Expr xor_expr() {
        Expr e = and_expr();
        while (accept("^")) e = e ^ and_expr();
        return e;
    }

    Expr and_expr() {
        Expr e = shift_expr();
        while (accept("&")) e = e & shift_expr();
        return e;
    }

    Expr shift_expr() {
        Expr e = add_expr();
        for (;;) {
            reject_forbidden();
            if (!accept("<<")) break;
            if (peek().kind != Tok::Num) throw ParseError("left shift needs a constant amount", peek().pos);
            Token t = next();
            if (t.num > 64) throw ParseError("shift amount above 64", t.pos);
            e = shl(e, static_cast<unsigned>(t.num));
        }
        return e;
    }

    Expr add_expr() {
        Expr e = mul_expr();
        for (;;) {
            if (accept("+")) e = e + mul_expr();
            else if (accept("-")) e = e - mul_expr();
            else break;
        }
        return e;
    }

    Expr mul_expr() {
        Expr e = unary();
        for (;;) {
            reject_forbidden();
            if (accept("*")) {
                e = e * unary();
            } else if (is_sym("%")) {
                std::size_t at = next().pos;
                e = mod2k(e, modulus_exponent(at));
            } else {
                break;
            }
        }
        return e;
    }

    unsigned modulus_exponent(std::size_t at) {
        if (peek().kind != Tok::Num) throw ParseError("modulus must be a power of two", at);
        Token base = next();
        if (base.num == 2 && accept("^")) {
            if (peek().kind != Tok::Num) throw ParseError("expected exponent after 2^", peek().pos);
            Token k = next();
            if (k.num > 64) throw ParseError("modulus exponent above 64", k.pos);
            return static_cast<unsigned>(k.num);
        }
        if (base.num == 0 || (base.num & (base.num - 1)) != 0) {
            throw ParseError("modulus must be a power of two", base.pos);
        }
        return static_cast<unsigned>(std::countr_zero(base.num));
    }

    Expr unary() {
        if (accept("~")) return ~unary();
        if (accept("-")) return -unary();
        return primary();
    }

    std::vector<Expr> call_args() {
        expect("(");
        std::vector<Expr> args;
        if (!is_sym(")")) {
            args.push_back(expr());
            while (accept(",")) args.push_back(expr());
        }
        expect(")");
        return args;
    }

    Expr primary() {
        reject_forbidden();
        Token t = peek();
        if (t.kind == Tok::Num) {
            ++pos_;
            return Expr::constant(t.num);
        }
        if (accept("(")) {
            Expr e = expr();
            expect(")");
            return e;
        }
        if (t.kind != Tok::Ident) {
            std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
            throw ParseError("expected an operand but found " + got, t.pos);
        }
        ++pos_;
        if (t.text == "rotl" || t.text == "rotr" || t.text == "rol" || t.text == "ror") {
            throw ParseError("rotation is not a T-function", t.pos);
        }
        if (auto v = var_index(t.text)) return Expr::var(*v);
        if (t.text == "inv") {
            auto a = call_args();
            if (a.size() != 1) throw ParseError("inv takes one argument", t.pos);
            return inv_odd(a[0]);
        }
        if (t.text == "pow1p2") {
            auto a = call_args();
            if (a.size() != 2) throw ParseError("pow1p2 takes two arguments", t.pos);
            return pow_odd_base(a[0], a[1]);
        }
        if (t.text == "mahler") {
            expect("(");
            Expr a = expr();
            expect(",");
            if (peek().kind != Tok::Num) throw ParseError("mahler index must be a literal", peek().pos);
            Token i = next();
            expect(")");
            if (i.num > 2 * word2::kMaxWidth) throw ParseError("mahler index above 128", i.pos);
            return mahler(a, static_cast<unsigned>(i.num));
        }
        auto it = defs_.find(t.text);
        if (it == defs_.end()) throw ParseError("unknown name '" + t.text + "'", t.pos);
        if (!is_sym("(")) return it->second;
        auto args = call_args();
        if (args.size() < arity(it->second)) {
            throw ParseError("'" + t.text + "' needs " + std::to_string(arity(it->second)) + " argument(s)", t.pos);
        }
        return compose(it->second, std::move(args));
    }
};

}  // namespace

Expr parse(std::string_view text) {
    auto sys = parse_system(text);
    if (sys.size() != 1) throw ParseError("expected a single expression", 0);
    return sys[0];
}

std::vector<Expr> parse_system(std::string_view text) {
    Parser p(text);
    return p.system();
}

}  // namespace tflab::texpr
