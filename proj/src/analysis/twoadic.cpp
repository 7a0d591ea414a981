#include <cmath>

#include "tflab/analysis.hpp"

namespace tflab::analysis {

namespace {

double log2_big(cpp_int v) {
    if (v < 0) v = -v;
    if (v == 0) return -INFINITY;
    const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(v)) + 1;
    if (bits <= 53) return std::log2(v.convert_to<double>());
    const unsigned drop = bits - 53;
    return std::log2((v >> drop).convert_to<double>()) + drop;
}

Phi2 reduced(cpp_int u, cpp_int v) {
    if (v < 0) {
        u = -u;
        v = -v;
    }
    const cpp_int g = gcd(abs(u), v);
    if (g > 1) {
        u /= g;
        v /= g;
    }
    const cpp_int au = abs(u);
    return Phi2{u, v, log2_big(au > v ? au : v)};
}

}  // namespace

std::string Phi2::fraction() const { return u.str() + "/" + v.str(); }

Phi2 two_adic_general(const BitSeq& period) {
    const std::size_t t = period.size();
    if (t == 0) throw DomainError("two_adic_general: empty period");
    cpp_int gamma = 0;
    for (std::size_t i = t; i-- > 0;) gamma = (gamma << 1) | (period[i] ? 1 : 0);
    if (gamma == 0) return Phi2{0, 1, 0.0};
    const cpp_int den = (cpp_int(1) << t) - 1;
    return reduced(-gamma, den);
}

Phi2 two_adic_coord(unsigned j, const cpp_int& gamma) {
    if (j > 24) throw DomainError("two_adic_coord: j too large");
    const std::size_t m = std::size_t{1} << j;
    if (gamma < 0 || gamma >= (cpp_int(1) << m)) throw DomainError("two_adic_coord: gamma out of range");
    // The period is gamma followed by its complement.
    const cpp_int big = cpp_int(1) << m;
    return reduced(-(big - gamma), big + 1);
}

std::vector<cpp_int> gamma_extract(std::span<const u64> seq, unsigned width, u64 m) {
    word2::check_width(width);
    if (width > 24) throw DomainError("gamma_extract: width too large");
    const u64 need = (u64{1} << (width - 1)) * m;
    if (seq.size() < need) throw DomainError("gamma_extract: sequence shorter than 2^(n-1) m");
    std::vector<cpp_int> out(width);
    for (unsigned j = 0; j < width; ++j) {
        const u64 len = (u64{1} << j) * m;
        cpp_int g = 0;
        for (u64 i = len; i-- > 0;) g = (g << 1) | ((seq[i] >> j) & 1);
        out[j] = g;
    }
    return out;
}

std::vector<u64> gamma_states(const std::vector<cpp_int>& gammas, unsigned width) {
    word2::check_width(width);
    if (width > 24) throw DomainError("gamma_construct: width too large");
    if (gammas.size() != width) throw DomainError("gamma_construct: need one gamma per coordinate");
    for (unsigned j = 0; j < width; ++j) {
        if (gammas[j] < 0 || gammas[j] >= (cpp_int(1) << (std::size_t{1} << j))) {
            throw DomainError("gamma_construct: gamma_" + std::to_string(j) + " needs at most 2^j bits");
        }
    }
    const u64 n = u64{1} << width;
    std::vector<u64> x(n, 0);
    for (unsigned j = 0; j < width; ++j) {
        const u64 half = u64{1} << j;
        std::vector<std::uint8_t> col(half);
        for (u64 i = 0; i < half; ++i) col[i] = bit_test(gammas[j], static_cast<unsigned>(i)) ? 1 : 0;
        for (u64 i = 0; i < n; ++i) x[i] |= static_cast<u64>(col[i % half] ^ ((i >> j) & 1)) << j;
    }
    return x;
}

std::vector<u64> gamma_construct(const std::vector<cpp_int>& gammas, unsigned width) {
    const std::vector<u64> x = gamma_states(gammas, width);
    std::vector<u64> table(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) table[x[i]] = x[(i + 1) % x.size()];
    return table;
}

}  // namespace tflab::analysis
