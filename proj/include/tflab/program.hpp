#pragma once

// Expressions flattened into a register program for a fixed width, used by
// every exhaustive loop.

#include <cstdint>
#include <span>
#include <vector>

#include "tflab/texpr.hpp"

namespace tflab::texpr {

class Program {
public:
    Program(const std::vector<Expr>& outputs, unsigned width);
    Program(const Expr& e, unsigned width) : Program(std::vector<Expr>{e}, width) {}

    unsigned width() const { return ring_.width; }
    u64 mask() const { return ring_.mask; }
    unsigned arity() const { return arity_; }
    std::size_t outputs() const { return out_regs_.size(); }

    /// env has arity() entries, out has outputs() entries. Safe to call from
    /// several threads at once.
    void run(const u64* env, u64* out) const;
    u64 operator()(u64 x) const;

private:
    struct Instr {
        Op op;
        std::uint32_t dst;
        std::uint32_t a;
        std::uint32_t b;
        unsigned param;
        u64 imm;
        int table;
    };
    friend class Compiler;

    word2::Ring ring_;
    unsigned arity_ = 0;
    std::uint32_t nregs_ = 0;
    std::vector<Instr> code_;
    std::vector<std::uint32_t> out_regs_;
    std::vector<word2::PowTable> tables_;
};

}  // namespace tflab::texpr
