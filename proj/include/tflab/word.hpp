#pragma once

// Truncated 2-adic integers: residues modulo 2^n for 1 <= n <= 64.

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "tflab/error.hpp"

namespace tflab::word2 {

using u64 = std::uint64_t;

inline constexpr unsigned kMaxWidth = 64;

constexpr u64 mask_for(unsigned width) {
    return width >= 64 ? ~u64{0} : (u64{1} << width) - 1;
}

void check_width(unsigned width);

/// Raw residue arithmetic modulo 2^width. The hot loops in kernels and the
/// compiled expression programs work on bare u64 values through a Ring.
struct Ring {
    explicit Ring(unsigned w);

    unsigned width;
    u64 mask;

    u64 reduce(u64 v) const { return v & mask; }
    u64 add(u64 a, u64 b) const { return (a + b) & mask; }
    u64 sub(u64 a, u64 b) const { return (a - b) & mask; }
    u64 mul(u64 a, u64 b) const { return (a * b) & mask; }
    u64 neg(u64 a) const { return (~a + 1) & mask; }
    u64 bxor(u64 a, u64 b) const { return (a ^ b) & mask; }
    u64 band(u64 a, u64 b) const { return a & b & mask; }
    u64 bor(u64 a, u64 b) const { return (a | b) & mask; }
    u64 bnot(u64 a) const { return ~a & mask; }
    u64 shl(u64 a, unsigned k) const { return k >= 64 ? 0 : (a << k) & mask; }
    u64 mod2k(u64 a, unsigned k) const { return a & mask_for(k) & mask; }

    u64 inv_odd(u64 v) const;
    u64 pow_odd_base(u64 u, u64 v) const;
    u64 binom(u64 x, u64 i) const;
};

class Word {
public:
    Word(u64 value, unsigned width);

    u64 value() const { return value_; }
    unsigned width() const { return width_; }

    friend bool operator==(const Word&, const Word&) = default;

private:
    u64 value_;
    unsigned width_;
};

Word add(const Word& x, const Word& y);
Word sub(const Word& x, const Word& y);
Word mul(const Word& x, const Word& y);
Word neg(const Word& x);
Word bxor(const Word& x, const Word& y);
Word band(const Word& x, const Word& y);
Word bor(const Word& x, const Word& y);
Word bnot(const Word& x);
Word shl(const Word& x, unsigned k);
Word mod2k(const Word& x, unsigned k);
/// delta_j(x), the j-th binary digit (bit 0 is least significant).
unsigned bit(const Word& x, unsigned j);

inline Word operator+(const Word& x, const Word& y) { return add(x, y); }
inline Word operator-(const Word& x, const Word& y) { return sub(x, y); }
inline Word operator*(const Word& x, const Word& y) { return mul(x, y); }
inline Word operator^(const Word& x, const Word& y) { return bxor(x, y); }
inline Word operator&(const Word& x, const Word& y) { return band(x, y); }
inline Word operator|(const Word& x, const Word& y) { return bor(x, y); }
inline Word operator~(const Word& x) { return bnot(x); }
inline Word operator-(const Word& x) { return neg(x); }

/// 2-adic valuation. An empty order means infinity (the zero word).
struct Valuation {
    std::optional<unsigned> order;

    bool infinite() const { return !order.has_value(); }
    /// ||x||_2 = 2^-order; zero for the zero word.
    double norm() const;

    friend bool operator==(const Valuation&, const Valuation&) = default;
};

Valuation val2(u64 x);
Valuation val2(const Word& x);

/// 2-adic distance between words, as the valuation of their difference.
Valuation dist2(const Word& x, const Word& y);

/// r with r * v == 1 (mod 2^width). Throws DomainError for even v.
Word inv_odd(const Word& v);

/// (1 + 2u)^v mod 2^width; the exponent is the canonical residue of v.
Word pow_odd_base(const Word& u, const Word& v);

/// C(x, i) mod 2^width for the canonical representative of x.
Word binom_mod(const Word& x, u64 i);

/// C(x, i) mod 2^bits for the integer x (not reduced first).
u64 binom_trunc(u64 x, u64 i, unsigned bits);

/// Exponent of 2 in i!: i minus the binary weight of i.
inline unsigned ord2_factorial(u64 i) { return static_cast<unsigned>(i - std::popcount(i)); }

/// Precomputed table a^(2^j) mod 2^width for a fixed odd base, so that a^v
/// costs at most `width` multiplications.
class PowTable {
public:
    PowTable(u64 odd_base, unsigned width);

    u64 pow(u64 exponent) const;
    u64 base() const { return squares_.empty() ? 1 : squares_[0]; }

private:
    Ring ring_;
    std::vector<u64> squares_;
};

}  // namespace tflab::word2
