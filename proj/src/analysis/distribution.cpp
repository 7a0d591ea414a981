#include <bit>
#include <cmath>

#include "tflab/analysis.hpp"

namespace tflab::analysis {

u64 cyclic_period(const BitSeq& bits) {
    const u64 n = bits.size();
    for (u64 p = 1; p < n; ++p) {
        if (n % p != 0) continue;
        bool ok = true;
        for (u64 i = 0; i < n && ok; ++i) ok = bits[i] == bits[(i + p) % n];
        if (ok) return p;
    }
    return n;
}

CoordSeq coord_seq(std::span<const u64> seq, unsigned j, u64 m) {
    if (j >= 64) throw DomainError("coordinate index must be below 64");
    CoordSeq c;
    c.j = j;
    const std::size_t n = seq.size();
    c.bits = BitSeq(n);
    for (std::size_t i = 0; i < n; ++i) c.bits.set(i, (seq[i] >> j) & 1);
    c.period = n == 0 ? 0 : cyclic_period(c.bits);
    const u64 lag = (u64{1} << j) * m;
    c.half_negation = n > 0 && lag < n;
    for (std::size_t i = 0; i < n && c.half_negation; ++i) {
        c.half_negation = c.bits[(i + lag) % n] != c.bits[i];
    }
    return c;
}

KDist k_distribution(const BitSeq& bits, unsigned k, bool cyclic) {
    const std::size_t n = bits.size();
    if (k < 1 || n == 0 || k > static_cast<unsigned>(std::bit_width(n)) - 1) {
        throw DomainError("k must be between 1 and log2 of the sequence length");
    }
    KDist d;
    d.k = k;
    d.counts.assign(std::size_t{1} << k, 0);
    const std::size_t chains = cyclic ? n : n - k + 1;
    for (std::size_t i = 0; i < chains; ++i) {
        u64 w = 0;
        for (unsigned t = 0; t < k; ++t) w = (w << 1) | bits[(i + t) % n];
        ++d.counts[w];
    }
    d.strict = true;
    for (u64 c : d.counts) d.strict = d.strict && c == d.counts[0];
    return d;
}

Q1Result q1_check(const BitSeq& bits, bool cyclic) {
    Q1Result q;
    const std::size_t n = bits.size();
    if (n < 2) return q;
    const unsigned kmax = static_cast<unsigned>(std::bit_width(n)) - 1;
    for (unsigned k = 1; k <= kmax; ++k) {
        KDist d = k_distribution(bits, k, cyclic);
        const double chains = static_cast<double>(cyclic ? n : n - k + 1);
        const double bound = 1.0 / std::sqrt(static_cast<double>(n));
        const double expect = std::ldexp(1.0, -static_cast<int>(k));
        double dev = 0.0;
        for (u64 c : d.counts) dev = std::max(dev, std::abs(static_cast<double>(c) / chains - expect));
        if (dev > q.worst_deviation) {
            q.worst_deviation = dev;
            q.worst_k = k;
        }
        if (dev > bound + 1e-12) q.failing.push_back(k);
    }
    q.pass = q.failing.empty();
    return q;
}

}  // namespace tflab::analysis
