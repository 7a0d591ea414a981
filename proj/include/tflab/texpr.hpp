#pragma once

// Expression trees for (multivariate) T-functions over processor primitives.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tflab/bitseq.hpp"
#include "tflab/word.hpp"

namespace tflab::texpr {

using word2::u64;
using word2::Word;

enum class Op : std::uint8_t {
    Var,
    Const,
    Add,
    Sub,
    Mul,
    Neg,
    Xor,
    And,
    Or,
    Not,
    Shl,
    Mod2k,
    InvOdd,
    PowOddBase,  // (1 + 2u)^v
    Mahler,      // 2^floor(log2 i) * C(e, i), a single compatible Mahler term
    Compose,     // kids[0] is the body; its Var(i) refers to kids[i + 1]
};

const char* op_name(Op op);

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op;
    u64 value = 0;       // Const literal
    unsigned param = 0;  // Var index, shift amount, Mod2k exponent or Mahler index
    std::vector<NodePtr> kids;
};

class Expr {
public:
    explicit Expr(NodePtr n);

    static Expr var(unsigned index);
    static Expr constant(u64 c);
    static Expr make(Op op, std::vector<Expr> kids, unsigned param = 0);

    const Node& node() const { return *node_; }
    const NodePtr& ptr() const { return node_; }
    Op op() const { return node_->op; }
    std::size_t kid_count() const { return node_->kids.size(); }
    Expr kid(std::size_t i) const { return Expr(node_->kids.at(i)); }

private:
    NodePtr node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator^(const Expr& a, const Expr& b);
Expr operator&(const Expr& a, const Expr& b);
Expr operator|(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator~(const Expr& a);
inline Expr operator+(const Expr& a, u64 c) { return a + Expr::constant(c); }
inline Expr operator+(u64 c, const Expr& a) { return Expr::constant(c) + a; }
inline Expr operator*(u64 c, const Expr& a) { return Expr::constant(c) * a; }
inline Expr operator^(const Expr& a, u64 c) { return a ^ Expr::constant(c); }
inline Expr operator&(const Expr& a, u64 c) { return a & Expr::constant(c); }
inline Expr operator|(const Expr& a, u64 c) { return a | Expr::constant(c); }

Expr shl(const Expr& a, unsigned k);
Expr mod2k(const Expr& a, unsigned k);
Expr inv_odd(const Expr& a);
Expr pow_odd_base(const Expr& u, const Expr& v);
Expr mahler(const Expr& a, unsigned i);
Expr compose(const Expr& body, std::vector<Expr> args);

/// Highest variable index plus one; 0 for constant expressions.
unsigned arity(const Expr& e);
bool is_constant(const Expr& e);
std::size_t node_count(const Expr& e);

/// The value of a variable-free subtree as an ordinary integer, when it has
/// one (no odd inversion or exponentiation inside, no overflow of 127 bits).
std::optional<__int128> signed_value(const Expr& e);

/// Parseable text with Compose nodes expanded.
std::string to_string(const Expr& e);
std::string to_string(const std::vector<Expr>& system);

Expr parse(std::string_view text);
/// A comma separated list of expressions, optionally in parentheses, after
/// any `name = body;` definitions.
std::vector<Expr> parse_system(std::string_view text);

/// Value mod 2^width. env must cover every variable the expression uses.
u64 eval(const Expr& e, std::span<const u64> env, unsigned width);
Word eval(const Expr& e, std::span<const Word> env, unsigned width);
std::vector<Word> eval(const std::vector<Expr>& system, std::span<const Word> env, unsigned width);

// Boolean coordinate function phi_j, stored as a truth table over
// chi_0..chi_{j-1} with chi_0 in the lowest index bit.
struct AnfTable {
    unsigned bit = 0;
    BitSeq table;
    bool separated = true;

    std::size_t weight() const { return table.popcount(); }
    bool at(u64 chi) const { return table[chi]; }
};

inline constexpr unsigned kMaxAnfBit = 24;

/// Throws NotMeasurePreserving with a witness pair when tau_j does not
/// split as chi_j xor phi_j.
AnfTable coord_anf(const Expr& e, unsigned j, unsigned width);
bool anf_weight_odd(const AnfTable& t);

// Symbolic derivative. precision is the number of 2-adic digits for which
// the partials are valid; 0 means no rule applies, kExactPrecision means exact.
inline constexpr unsigned kExactPrecision = 1u << 20;

struct Derivative {
    std::vector<Expr> partials;
    unsigned precision = 0;
    std::string reason;  // why precision is limited, when it is
};

/// Partials with respect to x0..x{nvars-1}; never throws for missing rules.
Derivative derivative(const Expr& e, unsigned nvars);
/// The derivative modulo 2. Throws NotDifferentiable when no rule gives one.
Derivative deriv_mod2(const Expr& e);

/// Determinant over GF(2) of J[var][func] at the given point.
unsigned jacobian_det_mod2(const std::vector<Expr>& system, std::span<const u64> point);

struct DiffWitness {
    unsigned K = 0;
    std::vector<u64> u;
    std::vector<u64> h;
};

struct DiffCertificate {
    unsigned k = 0;
    unsigned structural_bound = 0;
    unsigned n_bound = 0;
    unsigned test_width = 0;
    bool verified = false;
    std::vector<std::vector<Expr>> partials;  // [func][var]
    unsigned precision = 0;
    std::vector<DiffWitness> rejected;  // failures that forced the bound up
};

/// Structural estimate of N_k before validation.
unsigned structural_bound(const Expr& e);

/// Conservative N_k bound for a square system, validated exhaustively for
/// every K from the bound up to test_width - k, then lowered to the
/// smallest K for which the relation still holds.
DiffCertificate n_bound(const std::vector<Expr>& system, unsigned k, unsigned test_width);
DiffCertificate n_bound(const Expr& e, unsigned k, unsigned test_width);

/// One exhaustive check of F(u + 2^K h) == F(u) + 2^K J(u) h mod 2^(K+k).
std::optional<DiffWitness> check_differential(const std::vector<Expr>& system,
                                              const std::vector<std::vector<Expr>>& partials,
                                              unsigned K, unsigned k);

}  // namespace tflab::texpr
