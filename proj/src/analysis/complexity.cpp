#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "tflab/analysis.hpp"

namespace tflab::analysis {

namespace {

// 64 bits of `v` starting at bit `pos`; bits past the end read as zero.
u64 window(const std::vector<u64>& v, std::size_t pos) {
    const std::size_t w = pos / 64, sh = pos % 64;
    u64 lo = w < v.size() ? v[w] >> sh : 0;
    if (sh != 0 && w + 1 < v.size()) lo |= v[w + 1] << (64 - sh);
    return lo;
}

// Serial O(N^2) Berlekamp-Massey on single bits, kept as the reference.
u64 lc_gf2_bytes(const BitSeq& s) {
    const std::size_t n = s.size();
    std::vector<std::uint8_t> c(n + 1, 0), b(n + 1, 0), t;
    c[0] = b[0] = 1;
    std::size_t l = 0;
    std::ptrdiff_t m = -1;
    for (std::size_t i = 0; i < n; ++i) {
        unsigned d = s[i];
        for (std::size_t k = 1; k <= l; ++k) d ^= c[k] & s[i - k];
        if (!d) continue;
        t = c;
        const std::size_t shift = i - static_cast<std::size_t>(m);
        for (std::size_t k = 0; k + shift <= n; ++k) c[k + shift] ^= b[k];
        if (2 * l <= i) {
            l = i + 1 - l;
            m = static_cast<std::ptrdiff_t>(i);
            b = t;
        }
    }
    return l;
}

unsigned parity(u64 x) { return static_cast<unsigned>(std::popcount(x) & 1); }

u64 lc_gf2_packed(const BitSeq& s) {
    const std::size_t n = s.size();
    const std::size_t words = n / 64 + 2;
    // r holds the sequence reversed so a run of earlier terms is contiguous.
    std::vector<u64> r(words, 0);
    for (std::size_t k = 0; k < n; ++k) {
        if (s[n - 1 - k]) r[k / 64] |= u64{1} << (k % 64);
    }
    std::vector<u64> c(words, 0), b(words, 0), t;
    c[0] = b[0] = 1;
    std::size_t l = 0;
    std::ptrdiff_t m = -1;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t o = n - 1 - i;
        unsigned d = 0;
        for (std::size_t q = 0; q <= l / 64; ++q) d ^= parity(c[q] & window(r, o + 64 * q));
        if (!d) continue;
        t = c;
        const std::size_t shift = i - static_cast<std::size_t>(m);
        const std::size_t ws = shift / 64, bs = shift % 64;
        for (std::size_t q = words; q-- > ws;) {
            const std::size_t src = q - ws;
            u64 v = b[src] << bs;
            if (bs != 0 && src > 0) v |= b[src - 1] >> (64 - bs);
            c[q] ^= v;
        }
        if (2 * l <= i) {
            l = i + 1 - l;
            m = static_cast<std::ptrdiff_t>(i);
            b = t;
        }
    }
    return l;
}

bool is_pow2(u64 x) { return x != 0 && (x & (x - 1)) == 0; }

// Stamp and Martin, for period length a power of two.
u64 stamp_martin(const BitSeq& s, u64 k) {
    std::size_t n = s.size();
    std::vector<std::uint8_t> a(n);
    std::vector<u64> cost(n, 1);
    for (std::size_t i = 0; i < n; ++i) a[i] = s[i];
    u64 lc = 0;
    while (n > 1) {
        n /= 2;
        u64 t = 0;
        std::vector<std::uint8_t> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = a[i] ^ a[i + n];
            if (b[i]) t += std::min(cost[i], cost[i + n]);
        }
        if (t <= k) {
            k -= t;
            for (std::size_t i = 0; i < n; ++i) {
                if (b[i]) {
                    if (cost[i] <= cost[i + n]) a[i] = a[i + n];
                    cost[i] = cost[i] > cost[i + n] ? cost[i] - cost[i + n] : cost[i + n] - cost[i];
                } else {
                    cost[i] += cost[i + n];
                }
            }
        } else {
            lc += n;
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = b[i];
                cost[i] = std::min(cost[i], cost[i + n]);
            }
        }
        a.resize(n);
        cost.resize(n);
    }
    if (a[0] == 1 && cost[0] > k) lc += 1;
    return lc;
}

LErrorResult exhaustive(const BitSeq& s, u64 ell) {
    LErrorResult r;
    r.method = "exhaustive";
    r.exact = true;
    r.value = lc_periodic(s);
    const std::size_t n = s.size();
    BitSeq cur = s;
    std::vector<std::size_t> idx;
    // Depth-first over increasing index sets of size <= ell.
    auto rec = [&](auto&& self, std::size_t start) -> void {
        if (r.value == 0) return;
        for (std::size_t i = start; i < n; ++i) {
            cur.flip(i);
            idx.push_back(i);
            r.value = std::min(r.value, lc_periodic(cur));
            if (idx.size() < ell) self(self, i + 1);
            idx.pop_back();
            cur.flip(i);
        }
    };
    if (ell > 0) rec(rec, 0);
    return r;
}

LErrorResult annealing(const BitSeq& s, u64 ell, std::uint64_t seed) {
    LErrorResult r;
    r.method = "annealing";
    const std::size_t n = s.size();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pos(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> flips;
    BitSeq cur = s;
    u64 cur_lc = lc_periodic(cur);
    r.value = cur_lc;
    const int steps = 4000;
    for (int it = 0; it < steps; ++it) {
        const double temp = 2.0 * (1.0 - static_cast<double>(it) / steps) + 1e-3;
        BitSeq next = cur;
        std::vector<std::size_t> nf = flips;
        // Move: toggle one position, staying within the flip budget.
        const std::size_t p = pos(rng);
        auto hit = std::find(nf.begin(), nf.end(), p);
        if (hit != nf.end()) {
            nf.erase(hit);
        } else if (nf.size() < ell) {
            nf.push_back(p);
        } else if (!nf.empty()) {
            const std::size_t drop = nf[pos(rng) % nf.size()];
            next.flip(drop);
            std::erase(nf, drop);
            nf.push_back(p);
        } else {
            continue;
        }
        next.flip(p);
        const u64 lc = lc_periodic(next);
        const double delta = static_cast<double>(lc) - static_cast<double>(cur_lc);
        if (delta <= 0 || unit(rng) < std::exp(-delta / temp)) {
            cur = std::move(next);
            flips = std::move(nf);
            cur_lc = lc;
            r.value = std::min(r.value, lc);
        }
    }
    return r;
}

u64 choose_capped(std::size_t n, u64 k, u64 cap) {
    u64 total = 0, term = 1;
    for (u64 i = 0; i <= k && i <= n; ++i) {
        if (i > 0) {
            const double next = static_cast<double>(term) * static_cast<double>(n - i + 1) / static_cast<double>(i);
            if (next > static_cast<double>(cap)) return cap + 1;
            term = term * (n - i + 1) / i;
        }
        total += term;
        if (total > cap) return cap + 1;
    }
    return total;
}

}  // namespace

u64 lc_gf2(const BitSeq& bits) {
    if (bits.size() < 256) return lc_gf2_bytes(bits);
    return lc_gf2_packed(bits);
}

u64 lc_periodic(const BitSeq& period) { return lc_gf2(period.repeated(2)); }

u64 lc_ring(std::span<const u64> seq, unsigned width) {
    const word2::Ring ring(width);
    const std::size_t n = seq.size();
    if (n == 0) return 0;
    for (std::size_t r = 0;; ++r) {
        const std::size_t cols = r + 1;
        std::vector<u64> a(n * cols);
        for (std::size_t i = 0; i < n; ++i) {
            a[i * cols] = 1;
            for (std::size_t j = 0; j < r; ++j) a[i * cols + 1 + j] = ring.reduce(seq[(i + j) % n]);
        }
        // Eliminate with pivots of least valuation. A relation with an odd
        // coefficient exists iff fewer than `cols` invariant factors are nonzero.
        std::size_t rank = 0;
        std::vector<bool> row_used(n, false), col_used(cols, false);
        for (std::size_t step = 0; step < cols; ++step) {
            unsigned best = 65;
            std::size_t pr = 0, pc = 0;
            for (std::size_t i = 0; i < n && best > 0; ++i) {
                if (row_used[i]) continue;
                for (std::size_t c = 0; c < cols; ++c) {
                    if (col_used[c] || a[i * cols + c] == 0) continue;
                    const unsigned v = static_cast<unsigned>(std::countr_zero(a[i * cols + c]));
                    if (v < best) {
                        best = v;
                        pr = i;
                        pc = c;
                        if (v == 0) break;
                    }
                }
            }
            if (best == 65) break;
            ++rank;
            row_used[pr] = true;
            col_used[pc] = true;
            const u64 piv = a[pr * cols + pc];
            const u64 uinv = ring.inv_odd(piv >> best);
            for (std::size_t i = 0; i < n; ++i) {
                if (row_used[i] || a[i * cols + pc] == 0) continue;
                const u64 f = ring.mul(a[i * cols + pc] >> best, uinv);
                for (std::size_t c = 0; c < cols; ++c) {
                    if (col_used[c] && c != pc) continue;
                    a[i * cols + c] = ring.sub(a[i * cols + c], ring.mul(f, a[pr * cols + c]));
                }
            }
        }
        if (rank < cols) return r;
    }
}

LErrorResult l_error_lc(const BitSeq& period, u64 ell, std::uint64_t seed) {
    const std::size_t n = period.size();
    if (n == 0) throw DomainError("l_error_lc: empty period");
    if (is_pow2(n)) {
        LErrorResult r;
        r.method = "stamp-martin";
        r.exact = true;
        r.value = stamp_martin(period, ell);
        if (n >= 2) {
            u64 w = 0;
            for (std::size_t i = 0; i < n / 2; ++i) w += period[i] != period[i + n / 2];
            if (w > ell) r.lower_bound = n / 2 + 1;
        }
        return r;
    }
    if (ell == 0) return LErrorResult{lc_periodic(period), true, "exhaustive", std::nullopt};
    if (n <= 32 && choose_capped(n, ell, 1u << 20) <= (1u << 20)) return exhaustive(period, ell);
    return annealing(period, ell, seed);
}

}  // namespace tflab::analysis
