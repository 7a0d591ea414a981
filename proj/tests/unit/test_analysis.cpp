#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "specs.hpp"
#include "tflab/analysis.hpp"
#include "tflab/ergodicity.hpp"

using namespace tflab;
using namespace tflab::analysis;
using ergodicity::Policy;
using ergodicity::Result;
using generators::GeneratorSpec;
using generators::OrdinarySpec;
using texpr::Expr;
using texpr::parse;

namespace {

const Expr x = Expr::var(0);

// Minimal recurrence length by trying every connection polynomial.
u64 lc_exhaustive(const BitSeq& s) {
    const std::size_t n = s.size();
    for (std::size_t l = 0; l <= n; ++l) {
        for (u64 c = 0; c < (u64{1} << l); ++c) {
            bool ok = true;
            for (std::size_t i = l; i < n && ok; ++i) {
                unsigned v = 0;
                for (std::size_t k = 1; k <= l; ++k) v ^= ((c >> (k - 1)) & 1) & s[i - k];
                ok = v == s[i];
            }
            if (ok) return l;
        }
    }
    return n;
}

u64 lc_periodic_oracle(const BitSeq& p) { return lc_exhaustive(p.repeated(2)); }

// Least r <= rmax admitting an affine relation with an odd coefficient, by
// enumerating every coefficient vector; rmax + 1 when none exists.
u64 lc_ring_exhaustive(const std::vector<u64>& seq, unsigned w, u64 rmax) {
    const u64 q = u64{1} << w, m = q - 1;
    const std::size_t n = seq.size();
    for (u64 r = 0; r <= rmax; ++r) {
        std::vector<u64> c(r + 1, 0);
        u64 total = 1;
        for (u64 i = 0; i <= r; ++i) total *= q;
        for (u64 code = 0; code < total; ++code) {
            u64 t = code;
            bool odd = false;
            for (auto& ci : c) {
                ci = t % q;
                t /= q;
                odd = odd || (ci & 1);
            }
            if (!odd) continue;
            bool ok = true;
            for (std::size_t i = 0; i < n && ok; ++i) {
                u64 acc = c[0];
                for (u64 j = 0; j < r; ++j) acc += c[j + 1] * seq[(i + j) % n];
                ok = (acc & m) == 0;
            }
            if (ok) return r;
        }
    }
    return rmax + 1;
}

std::vector<u64> orbit(const Expr& f, unsigned w, u64 len, u64 seed = 0) {
    std::vector<u64> out;
    u64 v = seed;
    for (u64 i = 0; i < len; ++i) {
        out.push_back(v);
        v = oracle::tree_eval(f, v, w);
    }
    return out;
}

BitSeq bits_of(const std::vector<u64>& seq, unsigned j) {
    BitSeq b(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) b.set(i, (seq[i] >> j) & 1);
    return b;
}

GeneratorSpec validated(GeneratorSpec s) {
    REQUIRE(generators::validate(s).result == Result::Proven);
    return s;
}

const std::vector<std::string> kErgodic = {"x + 1", "x + (x*x | 5)", "x + 3 + 4*(x*x)", "x + 5 + 4*((x*x*x) | 1)",
                                           "1 + x + 2*((((x+1)*(x+1)) ^ 3) - ((x*x) ^ 3))",
                                           "3 + x + 2*(((x+1) & 6) - (x & 6))"};

}  // namespace

TEST_CASE("period examples") {
    auto p = period(x + 1, 4, 0, 1000);
    CHECK(p.found);
    CHECK(p.preperiod == 0);
    CHECK(p.period == 16);

    auto w = period(validated(specs::example_lfsr(2, 4)), 10000);
    CHECK(w.found);
    CHECK(w.preperiod == 0);
    CHECK(w.period == 48);

    auto c = period(Expr::constant(5), 4, 0, 100);
    CHECK(c.found);
    CHECK(c.preperiod <= 1);
    CHECK(c.period == 1);

    CHECK_FALSE(period(x + 1, 16, 0, 1000).found);
}

TEST_CASE("data_period against direct search") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 300; ++t) {
        const std::size_t pre = rng() % 6, per = 1 + rng() % 7, reps = 2 + rng() % 3;
        std::vector<u64> cyc(per), seq;
        for (auto& v : cyc) v = rng() % 3;
        for (std::size_t i = 0; i < pre; ++i) seq.push_back(rng() % 3);
        for (std::size_t i = 0; i < per * reps + per + pre; ++i) seq.push_back(cyc[i % per]);
        auto r = data_period(seq);
        REQUIRE(r.found);
        // Oracle: least p, then least q, with seq periodic under p from q on
        // for at least two full periods.
        std::size_t best_p = 0, best_q = 0;
        for (std::size_t p = 1; p <= seq.size() / 2 && !best_p; ++p) {
            for (std::size_t q = 0; q + 2 * p <= seq.size() && !best_p; ++q) {
                bool ok = true;
                for (std::size_t i = q; i + p < seq.size() && ok; ++i) ok = seq[i] == seq[i + p];
                if (ok) {
                    best_p = p;
                    best_q = q;
                }
            }
        }
        CHECK(r.period == best_p);
        CHECK(r.preperiod == best_q);
    }
    CHECK_FALSE(data_period(std::vector<u64>{1, 2, 3, 4}).found);
}

TEST_CASE("coord_seq examples") {
    auto c = coord_seq(orbit(x + 1, 4, 16), 2);
    CHECK(c.period == 8);
    CHECK(c.half_negation);

    auto k = coord_seq(orbit(parse("x + (x*x | 5)"), 6, 64), 3);
    CHECK(c.bits.size() == 16);
    CHECK(k.period == 16);
    CHECK(k.half_negation);

    auto flat = coord_seq(std::vector<u64>(8, 3), 0);
    CHECK(flat.period == 1);
    CHECK_FALSE(flat.half_negation);
}

TEST_CASE("k_distribution examples") {
    // 0,1,3,2 repeating as 2-bit words: 00 01 11 10.
    std::vector<u64> w{0, 1, 3, 2};
    auto d = k_distribution(BitSeq::from_words_msb_first(w, 2), 2);
    CHECK(d.counts == std::vector<u64>{3, 1, 1, 3});
    CHECK_FALSE(d.strict);

    const BitSeq counter = BitSeq::from_words_msb_first(orbit(x + 1, 8, 256), 8);
    for (unsigned k = 1; k <= 8; ++k) CHECK(k_distribution(counter, k).strict);

    const BitSeq zeros(64);
    for (unsigned k = 1; k <= 6; ++k) CHECK_FALSE(k_distribution(zeros, k).strict);
    CHECK_THROWS_AS(k_distribution(zeros, 7), DomainError);
}

TEST_CASE("linear counting differs from cyclic") {
    const BitSeq s = BitSeq::from_string("0011");
    CHECK(k_distribution(s, 2, true).counts == std::vector<u64>{1, 1, 1, 1});
    CHECK(k_distribution(s, 2, false).counts == std::vector<u64>{1, 1, 0, 1});
}

TEST_CASE("q1_check examples") {
    auto q = q1_check(BitSeq::from_string("1111111100000111"));
    CHECK_FALSE(q.pass);
    CHECK(std::find(q.failing.begin(), q.failing.end(), 3u) != q.failing.end());

    OrdinarySpec o;
    o.width = 8;
    o.f = parse("x + (x*x | 5)");
    auto z = generators::keystream(validated(o), 256);
    CHECK(q1_check(BitSeq::from_words_msb_first(z, 8)).pass);

    auto two = q1_check(BitSeq::from_string("10"));
    CHECK(two.pass);
    CHECK(two.worst_deviation == 0.0);
}

TEST_CASE("strict k-distribution implies Q1") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 400; ++t) {
        const std::size_t n = 2 + rng() % 40;
        BitSeq s(n);
        for (std::size_t i = 0; i < n; ++i) s.set(i, rng() & 1);
        bool all_strict = true;
        for (unsigned k = 1; (std::size_t{1} << k) <= n; ++k) all_strict = all_strict && k_distribution(s, k).strict;
        if (all_strict) CHECK(q1_check(s).pass);
    }
    // Binary de Bruijn cycles are strict for every k up to their order.
    for (unsigned order = 1; order <= 10; ++order) {
        std::vector<unsigned> a(order + 1, 0);
        BitSeq s;
        auto db = [&](auto&& self, unsigned t, unsigned p) -> void {
            if (t > order) {
                if (order % p == 0)
                    for (unsigned i = 1; i <= p; ++i) s.push_back(a[i]);
                return;
            }
            a[t] = a[t - p];
            self(self, t + 1, p);
            if (a[t - p] == 0) {
                a[t] = 1;
                self(self, t + 1, t);
            }
        };
        db(db, 1, 1);
        REQUIRE(s.size() == (std::size_t{1} << order));
        for (unsigned k = 1; k <= order; ++k) CHECK(k_distribution(s, k).strict);
        CHECK(q1_check(s).pass);
    }
}

TEST_CASE("lc_gf2 against exhaustive recurrence search") {
    CHECK(lc_gf2(BitSeq::from_string("11111111")) == 1);
    CHECK(lc_gf2(BitSeq::from_string("0101010101")) == 2);
    CHECK(lc_gf2(BitSeq{}) == 0);
    for (std::size_t n = 1; n <= 10; ++n) {
        for (u64 v = 0; v < (u64{1} << n); ++v) {
            BitSeq s(n);
            for (std::size_t i = 0; i < n; ++i) s.set(i, (v >> i) & 1);
            REQUIRE(lc_gf2(s) == lc_exhaustive(s));
        }
    }
    std::mt19937_64 rng(3);
    for (int t = 0; t < 300; ++t) {
        BitSeq s(11 + rng() % 6);
        for (std::size_t i = 0; i < s.size(); ++i) s.set(i, rng() & 1);
        CHECK(lc_gf2(s) == lc_exhaustive(s));
    }
}

TEST_CASE("packed and byte Berlekamp-Massey agree on long inputs") {
    // Long inputs take the packed path; a repeated short period has the same
    // linear complexity as the period itself.
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        BitSeq p(12 + rng() % 5);
        for (std::size_t i = 0; i < p.size(); ++i) p.set(i, rng() & 1);
        CHECK(lc_gf2(p.repeated(40)) == lc_periodic_oracle(p));
    }
    // An m-sequence of an s-cell primitive LFSR has complexity s.
    for (unsigned s : {5u, 9u, 12u}) {
        auto l = generators::default_lfsr(s);
        BitSeq b(3 * ((1u << s) - 1));
        for (std::size_t i = 0; i < b.size(); ++i) b.set(i, l.next_bit());
        CHECK(lc_gf2(b) == s);
    }
}

TEST_CASE("coordinate sequence of an ergodic map has complexity 2^j + 1") {
    auto seq = orbit(parse("x + (x*x | 5)"), 8, 256);
    CHECK(lc_periodic(coord_seq(seq, 3).bits) == 9);
}

TEST_CASE("lc_ring examples and exhaustive cross-check") {
    CHECK(lc_ring(orbit(3 + 5 * x, 8, 256), 8) == 2);
    CHECK(lc_ring(std::vector<u64>(10, 7), 8) == 1);
    const u64 quad = lc_ring(orbit(parse("x + (x*x | 5)"), 8, 256), 8);
    CHECK(quad > 2);

    std::mt19937_64 rng(21);
    for (int t = 0; t < 120; ++t) {
        const unsigned w = 1 + rng() % 2;
        std::vector<u64> seq(1 + rng() % 8);
        for (auto& v : seq) v = rng() & oracle::mask(w);
        const u64 rmax = w == 1 ? 4 : 3;
        const u64 want = lc_ring_exhaustive(seq, w, rmax);
        const u64 got = lc_ring(seq, w);
        if (want <= rmax) {
            CHECK(got == want);
        } else {
            CHECK(got > rmax);
        }
    }
    // Width 3 at r <= 2 stays cheap for the oracle.
    for (int t = 0; t < 40; ++t) {
        std::vector<u64> seq(2 + rng() % 6);
        for (auto& v : seq) v = rng() & 7;
        const u64 want = lc_ring_exhaustive(seq, 3, 2);
        const u64 got = lc_ring(seq, 3);
        if (want <= 2) {
            CHECK(got == want);
        } else {
            CHECK(got > 2);
        }
    }
}

TEST_CASE("l_error_lc against exhaustive flips") {
    const BitSeq s = BitSeq::from_string("0110");
    u64 best = lc_periodic_oracle(s);
    for (std::size_t i = 0; i < 4; ++i) {
        BitSeq f = s;
        f.flip(i);
        best = std::min(best, lc_periodic_oracle(f));
    }
    CHECK(l_error_lc(s, 1).value == best);

    std::mt19937_64 rng(4);
    for (int t = 0; t < 150; ++t) {
        const std::size_t n = std::vector<std::size_t>{4, 8, 16, 6, 10, 12}[rng() % 6];
        BitSeq p(n);
        for (std::size_t i = 0; i < n; ++i) p.set(i, rng() & 1);
        const u64 ell = rng() % 3;
        u64 want = lc_periodic_oracle(p);
        for (std::size_t i = 0; i < n && ell >= 1; ++i) {
            BitSeq a = p;
            a.flip(i);
            want = std::min(want, lc_periodic_oracle(a));
            for (std::size_t k = i + 1; k < n && ell >= 2; ++k) {
                BitSeq b = a;
                b.flip(k);
                want = std::min(want, lc_periodic_oracle(b));
            }
        }
        auto r = l_error_lc(p, ell);
        CHECK(r.exact);
        CHECK(r.value == want);
        if (ell == 0) CHECK(r.value == lc_periodic(p));
    }
}

TEST_CASE("l_error_lc on coordinate sequences exceeds 2^j") {
    auto seq = orbit(parse("x + (x*x | 5)"), 7, 128);
    for (unsigned j = 0; j < 7; ++j) {
        auto c = coord_seq(seq, j);
        BitSeq per(c.period);
        for (std::size_t i = 0; i < per.size(); ++i) per.set(i, c.bits[i]);
        const u64 half = u64{1} << j;
        for (u64 ell = 0; ell < half; ++ell) {
            auto r = l_error_lc(per, ell);
            CHECK(r.value > half);
            REQUIRE(r.lower_bound);
            CHECK(*r.lower_bound == half + 1);
        }
    }
}

TEST_CASE("l_error_lc falls back to annealing on long periods") {
    std::mt19937_64 rng(8);
    BitSeq p(48);
    for (std::size_t i = 0; i < p.size(); ++i) p.set(i, rng() & 1);
    auto r = l_error_lc(p, 3, 17);
    CHECK(r.method == "annealing");
    CHECK_FALSE(r.exact);
    CHECK(r.value <= lc_periodic(p));
    CHECK(r.value == l_error_lc(p, 3, 17).value);
}

TEST_CASE("two-adic complexity examples") {
    auto p = two_adic_general(BitSeq::from_string("10"));
    CHECK(p.u == -1);
    CHECK(p.v == 3);
    CHECK(p.fraction() == "-1/3");
    CHECK(std::abs(p.log2 - std::log2(3.0)) < 1e-9);

    for (u64 g = 0; g < 16; ++g) CHECK(std::abs(two_adic_coord(2, g).log2 - std::log2(17.0)) < 1e-9);
    for (u64 g = 0; g < 4; ++g) CHECK(std::abs(two_adic_coord(1, g).log2 - std::log2(5.0)) < 1e-9);
    CHECK_THROWS_AS(two_adic_coord(1, 4), DomainError);
    CHECK(two_adic_general(BitSeq::from_string("000")).v == 1);
}

TEST_CASE("two-adic value reproduces the sequence") {
    // u/v = sum b_i 2^i as a 2-adic integer: v * sum_{i<K} b_i 2^i == u mod 2^K.
    std::mt19937_64 rng(2);
    for (int t = 0; t < 100; ++t) {
        BitSeq p(1 + rng() % 20);
        for (std::size_t i = 0; i < p.size(); ++i) p.set(i, rng() & 1);
        auto r = two_adic_general(p);
        const unsigned k = 64;
        oracle::cpp_int s = 0, mod = oracle::cpp_int(1) << k;
        for (unsigned i = 0; i < k; ++i)
            if (p[i % p.size()]) s += oracle::cpp_int(1) << i;
        oracle::cpp_int lhs = (r.v * s - r.u) % mod;
        if (lhs < 0) lhs += mod;
        CHECK(lhs == 0);
    }
}

TEST_CASE("two-adic modes agree on coordinate sequences") {
    for (const auto& src : kErgodic) {
        auto seq = orbit(parse(src), 6, 64);
        auto gammas = gamma_extract(seq, 6);
        for (unsigned j = 0; j <= 4; ++j) {
            auto c = coord_seq(seq, j);
            BitSeq per(c.period);
            for (std::size_t i = 0; i < per.size(); ++i) per.set(i, c.bits[i]);
            auto g = two_adic_general(per);
            auto f = two_adic_coord(j, gammas[j]);
            CHECK(g.u == f.u);
            CHECK(g.v == f.v);
        }
    }
}

TEST_CASE("gamma extract and construct") {
    std::vector<cpp_int> zeros(3, 0);
    auto table = gamma_construct(zeros, 3);
    CHECK(ergodicity::cycle_structure(table, 3).single_cycle);
    CHECK(gamma_extract(gamma_states(zeros, 3), 3) == zeros);

    auto g = gamma_extract(orbit(x + 1, 3, 8), 3);
    CHECK(g[0] == 0);
    CHECK(g[1] == 0);  // delta_1 of 0 and 1
    CHECK(g[2] == 0);
    auto h = gamma_extract(orbit(x + 1, 3, 8, 1), 3);
    CHECK(h[0] == 1);
    CHECK(h[1] == 2);  // delta_1 of 1 and 2

    std::mt19937_64 rng(13);
    for (int t = 0; t < 20; ++t) {
        std::vector<cpp_int> gs(4);
        for (unsigned j = 0; j < 4; ++j) gs[j] = rng() & ((u64{1} << (1u << j)) - 1);
        auto tab = gamma_construct(gs, 4);
        CHECK(ergodicity::cycle_structure(tab, 4).single_cycle);
        CHECK(gamma_extract(gamma_states(gs, 4), 4) == gs);
    }
    CHECK_THROWS_AS(gamma_construct({0, 4}, 2), DomainError);
    CHECK_THROWS_AS(gamma_construct({0}, 2), DomainError);
}

TEST_CASE("gamma of a wreath state sequence uses 2^j m terms") {
    GeneratorSpec w = validated(specs::example_lfsr(2, 4));
    auto seq = generators::state_sequence(w, 48);
    auto g = gamma_extract(seq, 4, 3);
    for (unsigned j = 0; j < 4; ++j) {
        cpp_int want = 0;
        for (u64 i = 0; i < (u64{3} << j); ++i)
            if ((seq[i] >> j) & 1) want += cpp_int(1) << i;
        CHECK(g[j] == want);
    }
}

TEST_CASE("pair_scatter examples") {
    auto lcg = pair_scatter(orbit(3 + 5 * x, 8, 256), 8, 5);
    REQUIRE(lcg.line_count);
    CHECK(*lcg.line_count == 1);
    CHECK(lcg.points.size() == 255);

    auto ks = pair_scatter(orbit(parse("x + (x*x | 5)"), 8, 256), 8);
    CHECK(ks.points.size() == 255);
    CHECK_FALSE(ks.line_count);

    auto flat = pair_scatter(std::vector<u64>(9, 4), 8);
    CHECK(flat.points.size() == 1);

    CHECK(scatter_csv(pair_scatter(std::vector<u64>{}, 8), 8) == "x,y\n");
    CHECK(scatter_csv(pair_scatter(std::vector<u64>{1, 2}, 2), 2) == "x,y\n0.25,0.5\n");
}

TEST_CASE("dyadic_decimal is exact") {
    CHECK(dyadic_decimal(0, 8) == "0");
    CHECK(dyadic_decimal(1, 1) == "0.5");
    CHECK(dyadic_decimal(3, 3) == "0.375");
    CHECK(dyadic_decimal(1, 10) == "0.0009765625");
    CHECK(dyadic_decimal(255, 8) == "0.99609375");
    CHECK_THROWS_AS(dyadic_decimal(4, 2), DomainError);
}

TEST_CASE("single-cycle T-function laws") {
    for (const auto& src : kErgodic) {
        for (unsigned n : {6u, 8u, 10u}) {
            const Expr f = parse(src);
            REQUIRE(oracle::single_cycle(f, n));
            auto seq = orbit(f, n, u64{1} << n);
            for (unsigned j = 0; j < n; ++j) {
                auto c = coord_seq(seq, j);
                CHECK(c.period == (u64{2} << j));
                CHECK(c.half_negation);
                CHECK(lc_periodic(c.bits) == (u64{1} << j) + 1);
            }
            const BitSeq stream = BitSeq::from_words_msb_first(seq, n);
            for (unsigned k = 1; k <= n; ++k) CHECK(k_distribution(stream, k).strict);
        }
    }
}

TEST_CASE("wreath coordinate period and complexity bounds") {
    struct Case {
        generators::WreathSpec spec;
        unsigned k;
        u64 r;
    };
    std::vector<Case> cases{{specs::example_lfsr(2, 6), 0, 3},
                            {specs::example_even({1, 0, 0, 0}, 6), 2, 1},
                            {specs::example_lfsr(3, 6, x + 1), 0, 7}};
    for (auto& cs : cases) {
        GeneratorSpec g = validated(cs.spec);
        const u64 m = (u64{1} << cs.k) * cs.r;
        auto seq = generators::state_sequence(g, 64 * m);
        for (unsigned j = 0; j < 6; ++j) {
            auto c = coord_seq(seq, j, m);
            const u64 base = u64{2} << (cs.k + j);
            REQUIRE(c.period % base == 0);
            CHECK(cs.r % (c.period / base) == 0);
            const u64 lc = lc_periodic(c.bits);
            CHECK(lc >= (u64{1} << (cs.k + j)) + 1);
            CHECK(lc <= (u64{1} << (cs.k + j)) * cs.r + 1);
        }
    }
}

TEST_CASE("bit-reversal outputs have high linear complexity") {
    for (unsigned n : {6u, 8u, 10u}) {
        const Expr h = parse("x + (x*x | 5)");
        auto hv = ergodicity::verify_ergodic(h, Policy::derivative());
        OrdinarySpec o;
        o.width = n;
        o.f = x + 1;
        o.output = generators::bitrev_output(h, hv, n);
        auto z = generators::keystream(validated(o), u64{1} << n);
        for (unsigned j = 0; j < n; ++j) CHECK(lc_periodic(bits_of(z, j)) > (u64{1} << (n - 1)));
    }
}

TEST_CASE("analyze report") {
    auto dir = std::filesystem::temp_directory_path() / "tflab_analysis_test";
    std::filesystem::create_directories(dir);
    AnalyzeOptions opt;
    opt.scatter_csv = dir / "pairs.csv";
    auto seq = orbit(parse("x + (x*x | 5)"), 6, 128);
    auto rep = analyze(seq, 6, opt);
    CHECK(rep.period.found);
    CHECK(rep.period.period == 64);
    CHECK(rep.uniform_ok);
    CHECK(rep.coords.size() == 6);
    CHECK(rep.q1.pass);
    REQUIRE(rep.lc_ring);
    REQUIRE(rep.phi2);
    auto j = rep.to_json();
    CHECK(j["period"]["len"] == 64);
    CHECK(j["coords"][5]["lc"] == 33);
    CHECK(j["files"]["scatter_csv"] == opt.scatter_csv->string());
    std::ifstream in(*opt.scatter_csv);
    std::string head;
    std::getline(in, head);
    CHECK(head == "x,y");

    // One full cycle without repetition is still analysed cyclically.
    auto once = analyze(std::span<const u64>(seq).first(64), 6);
    CHECK_FALSE(once.period.found);
    CHECK(once.uniform_ok);
    CHECK(once.to_json()["coords"] == j["coords"]);
    std::filesystem::remove_all(dir);
}
