#include "tflab/word.hpp"

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace tflab::word2 {

namespace {

using boost::multiprecision::cpp_int;
using uint256 = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<
    256, 256, boost::multiprecision::unsigned_magnitude, boost::multiprecision::unchecked, void>>;

void same_width(const Word& x, const Word& y) {
    if (x.width() != y.width()) {
        throw WidthMismatch("word widths differ: " + std::to_string(x.width()) + " vs " +
                            std::to_string(y.width()));
    }
}

// Odd part of i! modulo 2^64.
u64 odd_factorial_part(u64 i) {
    u64 acc = 1;
    for (u64 k = 2; k <= i; ++k) {
        acc *= k >> std::countr_zero(k);
    }
    return acc;
}

template <class Int>
u64 falling_product_shifted(u64 x, u64 i, unsigned work_bits, unsigned shift) {
    Int modulus = Int(1) << work_bits;
    Int acc = 1;
    for (u64 k = 0; k < i; ++k) {
        acc = (acc * Int(x - k)) % modulus;
    }
    acc >>= shift;
    return static_cast<u64>(acc & Int(~u64{0}));
}

}  // namespace

void check_width(unsigned width) {
    if (width < 1 || width > kMaxWidth) {
        throw DomainError("word width must be in 1..64, got " + std::to_string(width));
    }
}

Ring::Ring(unsigned w) : width(w), mask(mask_for(w)) { check_width(w); }

u64 Ring::inv_odd(u64 v) const {
    if ((v & 1) == 0) {
        throw DomainError("inv_odd: even input " + std::to_string(v & mask));
    }
    // v*v == 1 mod 8 for odd v; each Newton step doubles the correct bits.
    u64 r = v;
    for (int i = 0; i < 5; ++i) {
        r *= 2 - v * r;
    }
    return r & mask;
}

u64 Ring::pow_odd_base(u64 u, u64 v) const {
    u64 base = (1 + 2 * u) & mask;
    u64 result = 1;
    v &= mask;
    while (v != 0) {
        if (v & 1) result = (result * base) & mask;
        base = (base * base) & mask;
        v >>= 1;
    }
    return result & mask;
}

u64 Ring::binom(u64 x, u64 i) const { return binom_trunc(x & mask, i, width); }

u64 binom_trunc(u64 x, u64 i, unsigned bits) {
    check_width(bits);
    const u64 m = mask_for(bits);
    if (i == 0) return 1 & m;
    if (x < i) return 0;
    const unsigned e = ord2_factorial(i);
    const unsigned work_bits = bits + e;
    u64 numerator;
    if (work_bits <= 64) {
        u64 acc = 1;
        for (u64 k = 0; k < i; ++k) acc *= x - k;
        numerator = (acc & mask_for(work_bits)) >> e;
    } else if (work_bits <= 256) {
        numerator = falling_product_shifted<uint256>(x, i, work_bits, e);
    } else {
        numerator = falling_product_shifted<cpp_int>(x, i, work_bits, e);
    }
    return (numerator * Ring(64).inv_odd(odd_factorial_part(i) | 1)) & m;
}

Word::Word(u64 value, unsigned width) : value_(value & mask_for(width)), width_(width) {
    check_width(width);
}

Word add(const Word& x, const Word& y) {
    same_width(x, y);
    return Word(x.value() + y.value(), x.width());
}

Word sub(const Word& x, const Word& y) {
    same_width(x, y);
    return Word(x.value() - y.value(), x.width());
}

Word mul(const Word& x, const Word& y) {
    same_width(x, y);
    return Word(x.value() * y.value(), x.width());
}

Word neg(const Word& x) { return Word(~x.value() + 1, x.width()); }

Word bxor(const Word& x, const Word& y) {
    same_width(x, y);
    return Word(x.value() ^ y.value(), x.width());
}

Word band(const Word& x, const Word& y) {
    same_width(x, y);
    return Word(x.value() & y.value(), x.width());
}

Word bor(const Word& x, const Word& y) {
    same_width(x, y);
    return Word(x.value() | y.value(), x.width());
}

Word bnot(const Word& x) { return Word(~x.value(), x.width()); }

Word shl(const Word& x, unsigned k) { return Word(Ring(x.width()).shl(x.value(), k), x.width()); }

Word mod2k(const Word& x, unsigned k) { return Word(x.value() & mask_for(k), x.width()); }

unsigned bit(const Word& x, unsigned j) {
    if (j >= x.width()) {
        throw DomainError("bit index " + std::to_string(j) + " out of range for width " +
                          std::to_string(x.width()));
    }
    return static_cast<unsigned>((x.value() >> j) & 1);
}

double Valuation::norm() const {
    if (infinite()) return 0.0;
    double r = 1.0;
    for (unsigned i = 0; i < *order; ++i) r /= 2.0;
    return r;
}

Valuation val2(u64 x) {
    if (x == 0) return Valuation{};
    return Valuation{static_cast<unsigned>(std::countr_zero(x))};
}

Valuation val2(const Word& x) { return val2(x.value()); }

Valuation dist2(const Word& x, const Word& y) { return val2(sub(x, y)); }

Word inv_odd(const Word& v) { return Word(Ring(v.width()).inv_odd(v.value()), v.width()); }

Word pow_odd_base(const Word& u, const Word& v) {
    same_width(u, v);
    return Word(Ring(u.width()).pow_odd_base(u.value(), v.value()), u.width());
}

Word binom_mod(const Word& x, u64 i) { return Word(Ring(x.width()).binom(x.value(), i), x.width()); }

PowTable::PowTable(u64 odd_base, unsigned width) : ring_(width) {
    if ((odd_base & 1) == 0) throw DomainError("PowTable: base must be odd");
    u64 a = ring_.reduce(odd_base);
    squares_.reserve(width);
    for (unsigned j = 0; j < width; ++j) {
        squares_.push_back(a);
        a = ring_.mul(a, a);
    }
}

u64 PowTable::pow(u64 exponent) const {
    exponent &= ring_.mask;
    u64 r = 1;
    for (unsigned j = 0; exponent != 0; ++j, exponent >>= 1) {
        if (exponent & 1) r = ring_.mul(r, squares_[j]);
    }
    return ring_.reduce(r);
}

}  // namespace tflab::word2
