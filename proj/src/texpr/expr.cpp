#include <algorithm>
#include <map>
#include <string>

#include "tflab/error.hpp"
#include "tflab/texpr.hpp"

namespace tflab::texpr {

const char* op_name(Op op) {
    switch (op) {
        case Op::Var: return "var";
        case Op::Const: return "const";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Neg: return "neg";
        case Op::Xor: return "xor";
        case Op::And: return "and";
        case Op::Or: return "or";
        case Op::Not: return "not";
        case Op::Shl: return "shl";
        case Op::Mod2k: return "mod2k";
        case Op::InvOdd: return "inv";
        case Op::PowOddBase: return "pow1p2";
        case Op::Mahler: return "mahler";
        case Op::Compose: return "compose";
    }
    return "?";
}

namespace {

std::size_t expected_kids(Op op) {
    switch (op) {
        case Op::Var:
        case Op::Const: return 0;
        case Op::Neg:
        case Op::Not:
        case Op::Shl:
        case Op::Mod2k:
        case Op::InvOdd:
        case Op::Mahler: return 1;
        case Op::Compose: return static_cast<std::size_t>(-1);
        default: return 2;
    }
}

}  // namespace

Expr::Expr(NodePtr n) : node_(std::move(n)) {
    if (!node_) throw Error("null expression node");
}

Expr Expr::var(unsigned index) {
    if (index >= 32) throw DomainError("variable index must be below 32");
    return Expr(std::make_shared<const Node>(Node{Op::Var, 0, index, {}}));
}

Expr Expr::constant(u64 c) { return Expr(std::make_shared<const Node>(Node{Op::Const, c, 0, {}})); }

Expr Expr::make(Op op, std::vector<Expr> kids, unsigned param) {
    std::size_t want = expected_kids(op);
    if (op == Op::Compose) {
        if (kids.empty()) throw Error("compose needs a body");
        if (arity(kids[0]) > kids.size() - 1) {
            throw Error("compose body uses more variables than arguments supplied");
        }
    } else if (kids.size() != want) {
        throw Error(std::string("wrong operand count for ") + op_name(op));
    }
    if ((op == Op::Shl || op == Op::Mod2k) && param > 64) {
        throw DomainError("shift and modulus exponents are limited to 64");
    }
    if (op == Op::Mahler && param > 2 * word2::kMaxWidth) {
        throw DomainError("Mahler index beyond 128 is invisible at 64 bits");
    }
    std::vector<NodePtr> ptrs;
    ptrs.reserve(kids.size());
    for (auto& k : kids) ptrs.push_back(k.ptr());
    return Expr(std::make_shared<const Node>(Node{op, 0, param, std::move(ptrs)}));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(Op::Add, {a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(Op::Sub, {a, b}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(Op::Mul, {a, b}); }
Expr operator^(const Expr& a, const Expr& b) { return Expr::make(Op::Xor, {a, b}); }
Expr operator&(const Expr& a, const Expr& b) { return Expr::make(Op::And, {a, b}); }
Expr operator|(const Expr& a, const Expr& b) { return Expr::make(Op::Or, {a, b}); }
Expr operator-(const Expr& a) { return Expr::make(Op::Neg, {a}); }
Expr operator~(const Expr& a) { return Expr::make(Op::Not, {a}); }

Expr shl(const Expr& a, unsigned k) { return Expr::make(Op::Shl, {a}, k); }
Expr mod2k(const Expr& a, unsigned k) { return Expr::make(Op::Mod2k, {a}, k); }
Expr inv_odd(const Expr& a) { return Expr::make(Op::InvOdd, {a}); }
Expr pow_odd_base(const Expr& u, const Expr& v) { return Expr::make(Op::PowOddBase, {u, v}); }
Expr mahler(const Expr& a, unsigned i) { return Expr::make(Op::Mahler, {a}, i); }

Expr compose(const Expr& body, std::vector<Expr> args) {
    args.insert(args.begin(), body);
    return Expr::make(Op::Compose, std::move(args));
}

unsigned arity(const Expr& e) {
    const Node& n = e.node();
    if (n.op == Op::Var) return n.param + 1;
    if (n.op == Op::Const) return 0;
    unsigned a = 0;
    std::size_t first = n.op == Op::Compose ? 1 : 0;
    for (std::size_t i = first; i < n.kids.size(); ++i) a = std::max(a, arity(Expr(n.kids[i])));
    return a;
}

bool is_constant(const Expr& e) { return arity(e) == 0; }

std::size_t node_count(const Expr& e) {
    std::size_t c = 1;
    for (auto& k : e.node().kids) c += node_count(Expr(k));
    return c;
}

namespace {

using I128 = __int128;
using OptI = std::optional<I128>;

OptI signed_value_in(const Node& n, const std::vector<OptI>& env) {
    auto kid = [&](std::size_t i) { return signed_value_in(*n.kids[i], env); };
    I128 r;
    switch (n.op) {
        case Op::Var:
            if (n.param < env.size()) return env[n.param];
            return std::nullopt;
        case Op::Const: return static_cast<I128>(n.value);
        case Op::Neg: {
            auto a = kid(0);
            if (!a) return a;
            return -*a;
        }
        case Op::Not: {
            auto a = kid(0);
            if (!a) return a;
            return ~*a;
        }
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Xor:
        case Op::And:
        case Op::Or: {
            auto a = kid(0), b = kid(1);
            if (!a || !b) return std::nullopt;
            bool overflow = false;
            if (n.op == Op::Add) overflow = __builtin_add_overflow(*a, *b, &r);
            else if (n.op == Op::Sub) overflow = __builtin_sub_overflow(*a, *b, &r);
            else if (n.op == Op::Mul) overflow = __builtin_mul_overflow(*a, *b, &r);
            else if (n.op == Op::Xor) r = *a ^ *b;
            else if (n.op == Op::And) r = *a & *b;
            else r = *a | *b;
            if (overflow) return std::nullopt;
            return r;
        }
        case Op::Shl: {
            auto a = kid(0);
            if (!a || n.param >= 126) return std::nullopt;
            if (__builtin_mul_overflow(*a, static_cast<I128>(1) << n.param, &r)) return std::nullopt;
            return r;
        }
        case Op::Mod2k: {
            auto a = kid(0);
            if (!a) return a;
            if (n.param >= 126) return *a >= 0 ? a : std::nullopt;
            return *a & ((static_cast<I128>(1) << n.param) - 1);
        }
        case Op::Compose: {
            std::vector<OptI> inner;
            for (std::size_t i = 1; i < n.kids.size(); ++i) inner.push_back(kid(i));
            return signed_value_in(*n.kids[0], inner);
        }
        default: return std::nullopt;
    }
}

int precedence(Op op) {
    switch (op) {
        case Op::Or: return 1;
        case Op::Xor: return 2;
        case Op::And: return 3;
        case Op::Shl: return 4;
        case Op::Add:
        case Op::Sub: return 5;
        case Op::Mul:
        case Op::Mod2k: return 6;
        default: return 9;
    }
}

struct Printer {
    bool plain_x;

    std::string var_name(unsigned i) const {
        if (plain_x && i == 0) return "x";
        return "x" + std::to_string(i);
    }

    std::string wrap(const std::string& s, int inner, int outer) const {
        return inner < outer ? "(" + s + ")" : s;
    }

    // Returns text and its precedence level.
    std::pair<std::string, int> print(const Node& n, const std::vector<std::pair<std::string, int>>& env) const {
        auto sub = [&](std::size_t i) { return print(*n.kids[i], env); };
        int p = precedence(n.op);
        switch (n.op) {
            case Op::Var:
                if (!env.empty()) return env.at(n.param);
                return {var_name(n.param), 9};
            case Op::Const: return {std::to_string(n.value), 9};
            case Op::Neg:
            case Op::Not: {
                auto a = sub(0);
                return {std::string(n.op == Op::Neg ? "-" : "~") + wrap(a.first, a.second, 9), 8};
            }
            case Op::Shl: {
                auto a = sub(0);
                return {wrap(a.first, a.second, p) + " << " + std::to_string(n.param), p};
            }
            case Op::Mod2k: {
                auto a = sub(0);
                return {wrap(a.first, a.second, p) + " % 2^" + std::to_string(n.param), p};
            }
            case Op::InvOdd: return {"inv(" + sub(0).first + ")", 9};
            case Op::PowOddBase: return {"pow1p2(" + sub(0).first + ", " + sub(1).first + ")", 9};
            case Op::Mahler: return {"mahler(" + sub(0).first + ", " + std::to_string(n.param) + ")", 9};
            case Op::Compose: {
                std::vector<std::pair<std::string, int>> inner;
                for (std::size_t i = 1; i < n.kids.size(); ++i) inner.push_back(sub(i));
                if (inner.empty()) inner.push_back({"0", 9});
                return print(*n.kids[0], inner);
            }
            default: {
                static const std::map<Op, const char*> sym = {{Op::Add, " + "}, {Op::Sub, " - "},
                                                              {Op::Mul, "*"},   {Op::Xor, " ^ "},
                                                              {Op::And, " & "}, {Op::Or, " | "}};
                auto a = sub(0), b = sub(1);
                // Left associative: the right operand needs parentheses at equal level.
                return {wrap(a.first, a.second, p) + sym.at(n.op) + wrap(b.first, b.second, p + 1), p};
            }
        }
    }
};

}  // namespace

std::optional<__int128> signed_value(const Expr& e) {
    if (!is_constant(e)) return std::nullopt;
    return signed_value_in(e.node(), {});
}

std::string to_string(const Expr& e) {
    Printer p{arity(e) <= 1};
    return p.print(e.node(), {}).first;
}

std::string to_string(const std::vector<Expr>& system) {
    if (system.size() == 1) return to_string(system[0]);
    Printer p{false};
    std::string s = "(";
    for (std::size_t i = 0; i < system.size(); ++i) {
        if (i) s += ", ";
        s += p.print(system[i].node(), {}).first;
    }
    return s + ")";
}

}  // namespace tflab::texpr
