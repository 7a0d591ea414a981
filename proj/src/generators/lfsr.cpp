#include <array>
#include <bit>
#include <string>

#include "tflab/generators.hpp"

namespace tflab::generators {

namespace {

// One primitive polynomial per degree 2..32, lowest weight first found.
constexpr std::array<u64, 31> kPrimitive{
    0x3,     0x5,      0x9,       0x9,       0x21,      0x41,       0xc3,       0x21,
    0x81,    0x201,    0xc11,     0x1901,    0x3005,    0x4001,     0xa011,     0x4001,
    0x801,   0x64001,  0x20001,   0x80001,   0x200001,  0x40001,    0xc20001,   0x400001,
    0x3100001, 0x6400001, 0x2000001, 0x8000001, 0x30000081, 0x10000001, 0xc0000401,
};

// Multiplication in GF(2)[x] / (x^s + taps).
u64 mulmod(u64 a, u64 b, unsigned s, u64 taps) {
    const u64 top = u64{1} << s;
    u64 r = 0;
    while (b != 0) {
        if (b & 1) r ^= a;
        b >>= 1;
        a <<= 1;
        if (a & top) a ^= top | taps;
    }
    return r;
}

u64 pow_x(u64 e, unsigned s, u64 taps) {
    u64 r = 1, base = 2;
    while (e != 0) {
        if (e & 1) r = mulmod(r, base, s, taps);
        base = mulmod(base, base, s, taps);
        e >>= 1;
    }
    return r;
}

std::vector<u64> prime_factors(u64 n) {
    std::vector<u64> ps;
    for (u64 p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        ps.push_back(p);
        while (n % p == 0) n /= p;
    }
    if (n > 1) ps.push_back(n);
    return ps;
}

}  // namespace

unsigned Lfsr::next_bit() {
    const unsigned out = state & 1;
    const u64 fb = static_cast<u64>(std::popcount(state & taps) & 1);
    state = (state >> 1) | (fb << (cells - 1));
    return out;
}

u64 Lfsr::peek_word(unsigned n) const {
    Lfsr copy = *this;
    u64 w = 0;
    for (unsigned t = 0; t < n; ++t) w |= static_cast<u64>(copy.next_bit()) << t;
    return w;
}

u64 primitive_taps(unsigned degree) {
    if (degree < 2 || degree > 32) throw DomainError("primitive table covers degrees 2..32");
    return kPrimitive[degree - 2];
}

bool is_primitive(unsigned cells, u64 taps) {
    if (cells < 2 || cells > 32) return false;
    if ((taps & 1) == 0 || (taps >> cells) != 0) return false;
    const u64 order = (u64{1} << cells) - 1;
    if (pow_x(order, cells, taps) != 1) return false;
    for (u64 q : prime_factors(order)) {
        if (pow_x(order / q, cells, taps) == 1) return false;
    }
    return true;
}

Lfsr default_lfsr(unsigned cells, u64 state) {
    Lfsr l{cells, primitive_taps(cells), state & word2::mask_for(cells)};
    if (l.state == 0) throw DomainError("LFSR state must be nonzero");
    return l;
}

std::vector<u64> lfsr_words(Lfsr lfsr, unsigned n) {
    word2::check_width(n);
    if (lfsr.cells < 1 || lfsr.cells > 32) throw DomainError("LFSR cell count must be in 1..32");
    if (lfsr.state == 0) throw DomainError("LFSR state must be nonzero");
    std::vector<u64> words;
    words.reserve(lfsr.period());
    for (u64 j = 0; j < lfsr.period(); ++j) {
        words.push_back(lfsr.peek_word(n));
        lfsr.next_bit();
    }
    return words;
}

u64 bitrev(u64 x, unsigned n) {
    word2::check_width(n);
    u64 r = 0;
    for (unsigned j = 0; j < n; ++j) r |= ((x >> (n - j - 1)) & 1) << j;
    return r;
}

}  // namespace tflab::generators
