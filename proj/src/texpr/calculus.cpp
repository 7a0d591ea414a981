// Coordinate tables, symbolic derivatives and N_k certificates.

#include <algorithm>
#include <bit>
#include <string>

#include "tflab/error.hpp"
#include "tflab/kernels.hpp"
#include "tflab/program.hpp"
#include "tflab/texpr.hpp"

namespace tflab::texpr {

AnfTable coord_anf(const Expr& e, unsigned j, unsigned width) {
    word2::check_width(width);
    if (j >= width) throw DomainError("bit index " + std::to_string(j) + " not below width " + std::to_string(width));
    if (j > kMaxAnfBit) throw OverCap("truth tables are limited to bit 24");
    if (arity(e) > 1) throw DomainError("coord_anf needs a univariate expression");
    Program p(e, j + 1);
    const u64 half = u64{1} << j;
    AnfTable t{j, BitSeq(static_cast<std::size_t>(half)), true};
    for (u64 x = 0; x < half; ++x) {
        bool lo = (p(x) >> j) & 1;
        bool hi = (p(x + half) >> j) & 1;
        if (lo == hi) throw NotMeasurePreserving(j, x, x + half);
        t.table.set(static_cast<std::size_t>(x), lo);
    }
    return t;
}

bool anf_weight_odd(const AnfTable& t) { return (t.weight() & 1) == 1; }

namespace {

bool is_const_value(const Expr& e, u64 v) { return e.op() == Op::Const && e.node().value == v; }

Expr zero() { return Expr::constant(0); }
Expr one() { return Expr::constant(1); }

Expr dadd(const Expr& a, const Expr& b) {
    if (is_const_value(a, 0)) return b;
    if (is_const_value(b, 0)) return a;
    return a + b;
}

Expr dsub(const Expr& a, const Expr& b) {
    if (is_const_value(b, 0)) return a;
    if (is_const_value(a, 0)) return -b;
    return a - b;
}

Expr dmul(const Expr& a, const Expr& b) {
    if (is_const_value(a, 0) || is_const_value(b, 0)) return zero();
    if (is_const_value(a, 1)) return b;
    if (is_const_value(b, 1)) return a;
    return a * b;
}

Expr dneg(const Expr& a) {
    if (is_const_value(a, 0)) return a;
    return -a;
}

unsigned sat_add(unsigned a, unsigned b) { return std::min(kExactPrecision, a + b); }

struct D {
    std::vector<Expr> d;
    unsigned prec;
    std::string reason;
};

D zeros(unsigned nvars, unsigned prec = kExactPrecision) { return {std::vector<Expr>(nvars, zero()), prec, {}}; }

D weaker(D a, unsigned prec, std::string why) {
    if (prec < a.prec) {
        a.prec = prec;
        a.reason = std::move(why);
    }
    return a;
}

unsigned const_val2(const Expr& c) {
    u64 v = eval(c, std::span<const u64>(), 64);
    return v == 0 ? kExactPrecision : static_cast<unsigned>(std::countr_zero(v));
}

D diff(const Expr& e, unsigned nvars);

D combine(const D& a, const D& b, Expr (*op)(const Expr&, const Expr&), unsigned nvars) {
    D r = zeros(nvars, std::min(a.prec, b.prec));
    r.reason = a.prec <= b.prec ? a.reason : b.reason;
    for (unsigned v = 0; v < nvars; ++v) r.d[v] = op(a.d[v], b.d[v]);
    return r;
}

D scale(const D& a, const Expr& c, unsigned nvars) {
    D r = a;
    for (unsigned v = 0; v < nvars; ++v) r.d[v] = dmul(c, a.d[v]);
    return r;
}

// Masking u with a constant c, following the sign convention: negative
// constants arise only from Neg/Not of literals.
D mask_rule(Op op, const Expr& u, const Expr& c, unsigned nvars) {
    auto sv = signed_value(c);
    if (!sv) {
        return zeros(nvars, 0);
    }
    bool negative = *sv < 0;
    D du = diff(u, nvars);
    switch (op) {
        case Op::And:
            if (!negative) return zeros(nvars);
            return du;
        case Op::Or:
            if (!negative) return du;
            return zeros(nvars);
        default: {  // Xor
            if (!negative) return du;
            D r = du;
            for (auto& x : r.d) x = dneg(x);
            return r;
        }
    }
}

D diff(const Expr& e, unsigned nvars) {
    const Node& n = e.node();
    if (is_constant(e)) return zeros(nvars);
    auto kid = [&](std::size_t i) { return Expr(n.kids[i]); };
    switch (n.op) {
        case Op::Var: {
            D r = zeros(nvars);
            if (n.param < nvars) r.d[n.param] = one();
            return r;
        }
        case Op::Add: return combine(diff(kid(0), nvars), diff(kid(1), nvars), dadd, nvars);
        case Op::Sub: return combine(diff(kid(0), nvars), diff(kid(1), nvars), dsub, nvars);
        case Op::Mul: {
            Expr a = kid(0), b = kid(1);
            if (is_constant(a) || is_constant(b)) {
                Expr c = is_constant(a) ? a : b;
                Expr g = is_constant(a) ? b : a;
                unsigned s = const_val2(c);
                D dg = diff(g, nvars);
                if (dg.prec == 0) {
                    // 2^s g for compatible g changes by a multiple of 2^(K+s).
                    D r = zeros(nvars, s);
                    r.reason = dg.reason;
                    return r;
                }
                D r = scale(dg, c, nvars);
                r.prec = sat_add(dg.prec, s);
                return r;
            }
            D da = diff(a, nvars), db = diff(b, nvars);
            D r = zeros(nvars, std::min(da.prec, db.prec));
            r.reason = da.prec <= db.prec ? da.reason : db.reason;
            for (unsigned v = 0; v < nvars; ++v) r.d[v] = dadd(dmul(da.d[v], b), dmul(a, db.d[v]));
            return r;
        }
        case Op::Neg:
        case Op::Not: {
            D r = diff(kid(0), nvars);
            for (auto& x : r.d) x = dneg(x);
            return r;
        }
        case Op::Xor:
        case Op::And:
        case Op::Or: {
            Expr a = kid(0), b = kid(1);
            if (is_constant(a) || is_constant(b)) {
                D r = is_constant(b) ? mask_rule(n.op, a, b, nvars) : mask_rule(n.op, b, a, nvars);
                if (r.prec == 0 && r.reason.empty()) {
                    r.reason = std::string(op_name(n.op)) + " with a constant of undetermined sign";
                }
                return r;
            }
            if (n.op == Op::Xor) {
                D r = combine(diff(a, nvars), diff(b, nvars), dadd, nvars);
                // u xor v = u + v - 2(u and v); the last term is 0 only mod 2.
                return weaker(std::move(r), 1, "xor of two non-constant operands is differentiable only mod 2");
            }
            D r = zeros(nvars, 0);
            r.reason = std::string(op_name(n.op)) + " of two non-constant operands has no derivative";
            return r;
        }
        case Op::Shl: {
            D da = diff(kid(0), nvars);
            if (da.prec == 0) {
                D r = zeros(nvars, n.param);
                r.reason = da.reason;
                return r;
            }
            D r = scale(da, Expr::constant(n.param >= 64 ? 0 : u64{1} << n.param), nvars);
            r.prec = sat_add(da.prec, n.param);
            return r;
        }
        case Op::Mod2k: return zeros(nvars);
        case Op::InvOdd:
        case Op::PowOddBase:
        case Op::Mahler: {
            D r = zeros(nvars, 0);
            r.reason = std::string(op_name(n.op)) + " has no tabulated derivative";
            return r;
        }
        case Op::Compose: {
            const std::size_t nargs = n.kids.size() - 1;
            D body = diff(kid(0), static_cast<unsigned>(nargs));
            D r = zeros(nvars, body.prec);
            r.reason = body.reason;
            for (std::size_t i = 0; i < nargs; ++i) {
                D da = diff(kid(i + 1), nvars);
                if (da.prec < r.prec) {
                    r.prec = da.prec;
                    r.reason = da.reason;
                }
                std::vector<Expr> args;
                for (std::size_t t = 1; t < n.kids.size(); ++t) args.push_back(kid(t));
                Expr outer = is_constant(body.d[i]) ? body.d[i] : compose(body.d[i], args);
                for (unsigned v = 0; v < nvars; ++v) r.d[v] = dadd(r.d[v], dmul(outer, da.d[v]));
            }
            return r;
        }
        default: return zeros(nvars, 0);
    }
}

unsigned bit_length_abs(__int128 v) {
    if (v < 0) v = -v;
    unsigned b = 0;
    while (v > 0) {
        ++b;
        v >>= 1;
    }
    return b;
}

// Longest path weight: largest mask/modulus/special seen on the path plus the
// number of non-constant products along it.
using Ctx = std::vector<std::vector<std::pair<const Node*, int>>>;

unsigned path_bound(const Node& n, unsigned mask_seen, unsigned muls, const Ctx& ctxs, int ctx) {
    switch (n.op) {
        case Op::Const: return mask_seen + muls;
        case Op::Var: {
            if (ctx < 0) return mask_seen + muls;
            const auto& args = ctxs[static_cast<std::size_t>(ctx)];
            const auto& [arg, arg_ctx] = args.at(n.param);
            return path_bound(*arg, mask_seen, muls, ctxs, arg_ctx);
        }
        case Op::Compose: {
            auto extended = ctxs;
            std::vector<std::pair<const Node*, int>> args;
            for (std::size_t i = 1; i < n.kids.size(); ++i) args.emplace_back(n.kids[i].get(), ctx);
            extended.push_back(args);
            return path_bound(*n.kids[0], mask_seen, muls, extended, static_cast<int>(extended.size() - 1));
        }
        default: break;
    }
    unsigned here = mask_seen;
    unsigned add_mul = 0;
    if (n.op == Op::And || n.op == Op::Or || n.op == Op::Xor) {
        for (const auto& k : n.kids) {
            Expr ke(k);
            if (is_constant(ke)) {
                auto sv = signed_value(ke);
                here = std::max(here, sv ? bit_length_abs(*sv) : 64u);
            }
        }
    } else if (n.op == Op::Mod2k) {
        here = std::max(here, n.param);
    } else if (n.op == Op::InvOdd || n.op == Op::PowOddBase || n.op == Op::Mahler) {
        here = std::max(here, 3u);
    } else if (n.op == Op::Mul && !is_constant(Expr(n.kids[0])) && !is_constant(Expr(n.kids[1]))) {
        add_mul = 1;
    }
    unsigned best = here + muls + add_mul;
    for (const auto& k : n.kids) {
        if (is_constant(Expr(k))) continue;
        best = std::max(best, path_bound(*k, here, muls + add_mul, ctxs, ctx));
    }
    return best;
}

}  // namespace

Derivative derivative(const Expr& e, unsigned nvars) {
    D d = diff(e, nvars);
    return Derivative{std::move(d.d), d.prec, std::move(d.reason)};
}

Derivative deriv_mod2(const Expr& e) {
    Derivative d = derivative(e, std::max(1u, arity(e)));
    if (d.precision < 1) {
        throw NotDifferentiable("not differentiable modulo 2: " + (d.reason.empty() ? std::string("no rule") : d.reason));
    }
    return d;
}

unsigned jacobian_det_mod2(const std::vector<Expr>& system, std::span<const u64> point) {
    const std::size_t m = system.size();
    if (point.size() != m) throw DomainError("point dimension differs from the system size");
    for (const auto& f : system) {
        if (arity(f) > m) throw DomainError("system is not square");
    }
    // rows = variables, columns = functions
    std::vector<std::vector<unsigned>> J(m, std::vector<unsigned>(m));
    std::vector<u64> env(point.begin(), point.end());
    for (std::size_t f = 0; f < m; ++f) {
        Derivative d = derivative(system[f], static_cast<unsigned>(m));
        if (d.precision < 1) {
            throw NotDifferentiable("component " + std::to_string(f) + " is not differentiable modulo 2: " + d.reason);
        }
        for (std::size_t v = 0; v < m; ++v) J[v][f] = static_cast<unsigned>(eval(d.partials[v], env, 1) & 1);
    }
    std::size_t rank = 0;
    for (std::size_t col = 0; col < m && rank < m; ++col) {
        std::size_t piv = rank;
        while (piv < m && J[piv][col] == 0) ++piv;
        if (piv == m) return 0;
        std::swap(J[piv], J[rank]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r != rank && J[r][col]) {
                for (std::size_t c = 0; c < m; ++c) J[r][c] ^= J[rank][c];
            }
        }
        ++rank;
    }
    return rank == m ? 1 : 0;
}

unsigned structural_bound(const Expr& e) { return std::max(1u, path_bound(e.node(), 0, 0, {}, -1)); }

std::optional<DiffWitness> check_differential(const std::vector<Expr>& system,
                                              const std::vector<std::vector<Expr>>& partials, unsigned K,
                                              unsigned k) {
    std::vector<Expr> with_partials = system;
    for (const auto& row : partials) with_partials.insert(with_partials.end(), row.begin(), row.end());
    Program f(system, K + k);
    Program fd(with_partials, K + k);
    auto fail = kernels::differential_check(f, fd, K, k);
    if (!fail) return std::nullopt;
    return DiffWitness{K, std::move(fail->u), std::move(fail->h)};
}

DiffCertificate n_bound(const std::vector<Expr>& system, unsigned k, unsigned test_width) {
    if (k != 1 && k != 2) throw DomainError("n_bound supports k = 1 or 2");
    if (system.empty()) throw DomainError("empty system");
    const unsigned m = static_cast<unsigned>(system.size());
    for (const auto& f : system) {
        if (arity(f) > m) throw DomainError("system is not square");
    }
    if (test_width < k + 1 || test_width > word2::kMaxWidth) {
        throw DomainError("test width must leave room for at least K = 1");
    }
    DiffCertificate cert;
    cert.k = k;
    cert.test_width = test_width;
    cert.precision = kExactPrecision;
    for (const auto& f : system) {
        Derivative d = derivative(f, m);
        if (d.precision < k) {
            throw NotDifferentiable("derivative is valid only to " + std::to_string(d.precision) +
                                    " binary digit(s), modulo 2^" + std::to_string(k) + " needed: " + d.reason);
        }
        cert.precision = std::min(cert.precision, d.precision);
        cert.partials.push_back(std::move(d.partials));
        cert.structural_bound = std::max(cert.structural_bound, structural_bound(f));
    }
    const unsigned top = test_width - k;
    unsigned cur = cert.structural_bound;
    bool ok = false;
    while (cur <= top) {
        std::optional<DiffWitness> failure;
        for (unsigned K = cur; K <= top; ++K) {
            failure = check_differential(system, cert.partials, K, k);
            if (failure) break;
        }
        if (!failure) {
            ok = true;
            break;
        }
        cur = failure->K + 1;
        cert.rejected.push_back(std::move(*failure));
    }
    if (ok) {
        while (cur > 1 && !check_differential(system, cert.partials, cur - 1, k)) --cur;
    }
    cert.n_bound = cur;
    cert.verified = ok;
    return cert;
}

DiffCertificate n_bound(const Expr& e, unsigned k, unsigned test_width) {
    return n_bound(std::vector<Expr>{e}, k, test_width);
}

}  // namespace tflab::texpr
