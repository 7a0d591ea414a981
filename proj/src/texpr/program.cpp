#include "tflab/program.hpp"

#include <bit>
#include <map>
#include <string>

#include "tflab/error.hpp"

namespace tflab::texpr {

class Compiler {
public:
    Compiler(Program& prog) : p_(prog) {}

    std::uint32_t compile(const Node& n, int ctx) {
        auto key = std::make_pair(&n, ctx);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        std::uint32_t r = emit(n, ctx);
        memo_.emplace(key, r);
        return r;
    }

    std::vector<std::vector<std::uint32_t>> contexts;

private:
    Program& p_;
    std::map<std::pair<const Node*, int>, std::uint32_t> memo_;

    std::uint32_t fresh() { return p_.nregs_++; }

    std::uint32_t push(Op op, std::uint32_t a, std::uint32_t b, unsigned param, u64 imm, int table = -1) {
        std::uint32_t d = fresh();
        p_.code_.push_back({op, d, a, b, param, imm, table});
        return d;
    }

    std::uint32_t emit(const Node& n, int ctx) {
        switch (n.op) {
            case Op::Var: {
                if (ctx < 0) {
                    if (n.param >= p_.arity_) throw EvalError("variable outside the program's arity");
                    return n.param;
                }
                const auto& map = contexts[static_cast<std::size_t>(ctx)];
                if (n.param >= map.size()) throw EvalError("compose body refers to a missing argument");
                return map[n.param];
            }
            case Op::Const: return push(Op::Const, 0, 0, 0, n.value & p_.ring_.mask);
            case Op::Compose: {
                std::vector<std::uint32_t> args;
                for (std::size_t i = 1; i < n.kids.size(); ++i) args.push_back(compile(*n.kids[i], ctx));
                contexts.push_back(std::move(args));
                return compile(*n.kids[0], static_cast<int>(contexts.size() - 1));
            }
            case Op::PowOddBase: {
                const Node& base = *n.kids[0];
                std::uint32_t e = compile(*n.kids[1], ctx);
                if (base.op == Op::Const) {
                    p_.tables_.emplace_back(((1 + 2 * base.value) & p_.ring_.mask) | 1, p_.ring_.width);
                    return push(Op::PowOddBase, 0, e, 0, 0, static_cast<int>(p_.tables_.size() - 1));
                }
                std::uint32_t b = compile(base, ctx);
                return push(Op::PowOddBase, b, e, 0, 0);
            }
            default: {
                std::uint32_t a = compile(*n.kids[0], ctx);
                std::uint32_t b = n.kids.size() > 1 ? compile(*n.kids[1], ctx) : 0;
                return push(n.op, a, b, n.param, 0);
            }
        }
    }
};

Program::Program(const std::vector<Expr>& outputs, unsigned width) : ring_(width) {
    for (const auto& e : outputs) arity_ = std::max(arity_, texpr::arity(e));
    nregs_ = arity_;
    Compiler c(*this);
    for (const auto& e : outputs) out_regs_.push_back(c.compile(e.node(), -1));
}

void Program::run(const u64* env, u64* out) const {
    thread_local std::vector<u64> regs;
    if (regs.size() < nregs_) regs.resize(nregs_);
    u64* r = regs.data();
    const word2::Ring& R = ring_;
    for (unsigned i = 0; i < arity_; ++i) r[i] = env[i] & R.mask;
    for (const Instr& in : code_) {
        u64 a = r[in.a];
        u64 b = r[in.b];
        u64 v;
        switch (in.op) {
            case Op::Const: v = in.imm; break;
            case Op::Add: v = R.add(a, b); break;
            case Op::Sub: v = R.sub(a, b); break;
            case Op::Mul: v = R.mul(a, b); break;
            case Op::Neg: v = R.neg(a); break;
            case Op::Xor: v = R.bxor(a, b); break;
            case Op::And: v = R.band(a, b); break;
            case Op::Or: v = R.bor(a, b); break;
            case Op::Not: v = R.bnot(a); break;
            case Op::Shl: v = R.shl(a, in.param); break;
            case Op::Mod2k: v = R.mod2k(a, in.param); break;
            case Op::InvOdd:
                if ((a & 1) == 0) throw EvalError("inv applied to even value " + std::to_string(a));
                v = R.inv_odd(a);
                break;
            case Op::PowOddBase:
                v = in.table >= 0 ? tables_[static_cast<std::size_t>(in.table)].pow(b) : R.pow_odd_base(a, b);
                break;
            case Op::Mahler: {
                unsigned s = in.param == 0 ? 0 : static_cast<unsigned>(std::bit_width(in.param)) - 1;
                if (s >= R.width) {
                    v = 0;
                } else {
                    v = R.shl(word2::binom_trunc(a, in.param, R.width - s), s);
                }
                break;
            }
            default: throw EvalError("unexpected instruction");
        }
        r[in.dst] = v;
    }
    for (std::size_t i = 0; i < out_regs_.size(); ++i) out[i] = r[out_regs_[i]];
}

u64 Program::operator()(u64 x) const {
    u64 out[1];
    if (out_regs_.size() != 1) throw EvalError("program has more than one output");
    run(&x, out);
    return out[0];
}

u64 eval(const Expr& e, std::span<const u64> env, unsigned width) {
    Program p(e, width);
    if (env.size() < p.arity()) throw EvalError("environment shorter than the expression's arity");
    u64 out;
    p.run(env.data(), &out);
    return out;
}

Word eval(const Expr& e, std::span<const Word> env, unsigned width) {
    std::vector<u64> raw;
    for (const auto& w : env) {
        if (w.width() != width) throw WidthMismatch("input width differs from evaluation width");
        raw.push_back(w.value());
    }
    return Word(eval(e, std::span<const u64>(raw), width), width);
}

std::vector<Word> eval(const std::vector<Expr>& system, std::span<const Word> env, unsigned width) {
    std::vector<u64> raw;
    for (const auto& w : env) {
        if (w.width() != width) throw WidthMismatch("input width differs from evaluation width");
        raw.push_back(w.value());
    }
    Program p(system, width);
    if (raw.size() < p.arity()) throw EvalError("environment shorter than the system's arity");
    std::vector<u64> out(system.size());
    p.run(raw.data(), out.data());
    std::vector<Word> res;
    for (u64 v : out) res.emplace_back(v, width);
    return res;
}

}  // namespace tflab::texpr
