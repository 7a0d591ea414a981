#include "doctest.h"

#include <cstdint>
#include <vector>

#include "corpus.hpp"
#include "oracles.hpp"
#include "tflab/ergodicity.hpp"
#include "tflab/error.hpp"

using namespace tflab;
using namespace tflab::ergodicity;
using texpr::parse;

namespace {

const Expr x = Expr::var(0);

std::vector<cpp_int> ints(std::initializer_list<long> v) {
    std::vector<cpp_int> r;
    for (long c : v) r.emplace_back(c);
    return r;
}

u64 ev(const Expr& e, u64 v, unsigned w) { return texpr::eval(e, std::vector<u64>{v}, w); }

// The oracle's view: ergodic (or bijective) at every width up to n.
bool oracle_holds(const Expr& e, Property p, unsigned n) {
    for (unsigned w = 1; w <= n; ++w) {
        auto c = oracle::cycles(e, w);
        if (!c.bijective) return false;
        if (p == Property::Ergodic && c.count != 1) return false;
    }
    return true;
}

std::vector<Policy> all_policies() {
    return {Policy::brute(10), Policy::derivative(10), Policy::anf(9), Policy::falling_factorial(),
            Policy::b2class()};
}

}  // namespace

TEST_CASE("cycle_structure examples") {
    auto r = cycle_structure(x + 1, 2);
    CHECK(r.single_cycle);
    CHECK(r.cycle_count == 1);
    CHECK(r.cycle_lengths.at(4) == 1);

    auto rc = cycle_structure(x + 2 * x * x, 2);
    CHECK(rc.bijective);
    CHECK_FALSE(rc.single_cycle);
    CHECK(ev(x + 2 * x * x, 1, 2) == 3);
    CHECK(ev(x + 2 * x * x, 3, 2) == 1);
    CHECK(rc.cycle_lengths.at(1) == 2);
    CHECK(rc.cycle_lengths.at(2) == 1);

    auto nb = cycle_structure(x + x * x, 1);
    CHECK_FALSE(nb.bijective);
    REQUIRE(nb.collision);
    CHECK(nb.collision->first == 0);
    CHECK(nb.collision->second == 1);
}

TEST_CASE("cycle_structure invariants over the corpus") {
    for (const auto& s : corpus::expressions()) {
        CAPTURE(s);
        Expr e = parse(s);
        for (unsigned w = 1; w <= 8; ++w) {
            auto r = cycle_structure(e, w);
            auto o = oracle::cycles(e, w);
            CHECK(r.bijective == o.bijective);
            if (r.bijective) {
                u64 total = 0;
                for (auto [len, cnt] : r.cycle_lengths) total += len * cnt;
                CHECK(total == (u64{1} << w));
                CHECK(r.cycle_count == o.count);
            }
            CHECK(r.single_cycle == (r.bijective && r.cycle_count == 1));
        }
    }
}

TEST_CASE("cycle_structure respects the oracle cap") {
    set_oracle_cap(10);
    CHECK_THROWS_AS(cycle_structure(x + 1, 11), OverCap);
    set_oracle_cap(24);
    CHECK_NOTHROW(cycle_structure(x + 1, 11));
}

TEST_CASE("verify_ergodic examples") {
    Verdict v = verify_ergodic(parse("x + (x*x | 5)"), Policy::derivative());
    CHECK(v.result == Result::Proven);
    CHECK(v.theorem == "erg_Der");
    CHECK(v.witness["N"] == 2);
    CHECK(*v.modulus_checked == 16);

    Expr expgen = parse("3*x + pow1p2(1, x)");
    Verdict b = verify_ergodic(expgen, Policy::brute(12));
    CHECK(b.result == Result::Unknown);
    CHECK(*b.depth == 12);
    for (unsigned w = 1; w <= 12; ++w) CHECK(oracle::single_cycle(expgen, w));
    Verdict c = verify_ergodic(expgen, Policy::b2class());
    CHECK(c.result == Result::Proven);
    CHECK(*c.modulus_checked == 8);
    CHECK(c.theorem == "ergPolGen");

    Expr invers = parse("-inv(2*x + 1) - x");
    for (u64 v8 = 0; v8 < 8; ++v8) CHECK(ev(invers, v8, 3) == ((7 + v8 - 4 * v8 * v8) & 7));
    Verdict i = verify_ergodic(invers, Policy::b2class());
    CHECK(i.result == Result::Proven);
    CHECK(*i.modulus_checked == 8);
}

TEST_CASE("verify_ergodic refutations carry a failing modulus") {
    Verdict v = verify_ergodic(parse("x + (x*x | 3)"), Policy::brute(8));
    CHECK(v.result == Result::Refuted);
    REQUIRE(v.modulus_checked);
    CHECK_FALSE(oracle::single_cycle(parse("x + (x*x | 3)"), std::countr_zero(*v.modulus_checked)));
    CHECK(verify_ergodic(parse("x + (x*x | 3)"), Policy::derivative()).result == Result::Refuted);
    CHECK(verify_ergodic(parse("x + 2*x*x"), Policy::anf(6)).result == Result::Refuted);
}

TEST_CASE("policy prerequisites") {
    CHECK_THROWS_AS(verify_ergodic(parse("x ^ (x*x | 1)"), Policy::b2class()), PolicyInapplicable);
    CHECK_THROWS_AS(verify_ergodic(parse("x ^ 5"), Policy::falling_factorial()), PolicyInapplicable);
    CHECK_THROWS_AS(verify_ergodic(parse("x + (x*x & x)"), Policy::derivative()), PolicyInapplicable);
    try {
        verify_ergodic(parse("x0 + x1"), Policy::brute(4));
        FAIL("bivariate accepted");
    } catch (const PolicyInapplicable& e) {
        CHECK(std::string(e.what()).find("univariate") != std::string::npos);
    }
}

TEST_CASE("verify_measure_preserving examples") {
    Verdict a = verify_measure_preserving(parse("x + 2*x*x"), Policy::derivative());
    CHECK(a.result == Result::Proven);
    CHECK(a.theorem == "MHL-bj");
    Verdict b = verify_measure_preserving(parse("x ^ (x*x | 1)"), Policy::derivative());
    CHECK(b.result == Result::Proven);
    Verdict c = verify_measure_preserving(parse("x + (x*x*x | 1)"), Policy::derivative());
    CHECK(c.result == Result::Refuted);
    // x + (x^3 | 1) is x + 1 mod 2; the first collision is mod 4 (1 and 3).
    CHECK(*c.modulus_checked == 4);
    CHECK(oracle::cycles(parse("x + (x*x*x | 1)"), 1).bijective);
    CHECK_FALSE(oracle::cycles(parse("x + (x*x*x | 1)"), 2).bijective);
    CHECK(verify_measure_preserving(parse("x + 2*x*x"), Policy::b2class()).result == Result::Proven);
    CHECK(verify_measure_preserving(parse("x*x + 1"), Policy::b2class()).result == Result::Refuted);
}

TEST_CASE("verdict JSON round trip") {
    Verdict v = verify_ergodic(parse("x + (x*x | 5)"), Policy::derivative());
    auto j = v.to_json();
    CHECK(j["property"] == "ergodic");
    CHECK(j["result"] == "proven");
    CHECK(j["theorem"] == "erg_Der");
    Verdict back = Verdict::from_json(j);
    CHECK(back.to_json() == j);
}

TEST_CASE("proven verdicts agree with the oracle over the corpus") {
    oracle::ExprGen gen(20240611);
    std::vector<Expr> exprs;
    for (const auto& s : corpus::expressions()) exprs.push_back(parse(s));
    for (int i = 0; i < 150; ++i) exprs.push_back(gen(3));
    int proven = 0;
    for (const auto& e : exprs) {
        CAPTURE(texpr::to_string(e));
        if (texpr::arity(e) > 1) continue;
        for (Property p : {Property::Ergodic, Property::MeasurePreserving}) {
            for (const auto& pol : all_policies()) {
                Verdict v;
                try {
                    v = verify(e, p, pol);
                } catch (const PolicyInapplicable&) {
                    continue;
                }
                if (v.result == Result::Proven) {
                    ++proven;
                    CHECK(oracle_holds(e, p, 12));
                }
                if (v.result == Result::Refuted) {
                    CHECK_FALSE(oracle_holds(e, p, 12));
                }
            }
        }
    }
    CHECK(proven > 20);
}

TEST_CASE("proven measure preservation has derivative 1 mod 2") {
    oracle::ExprGen gen(77);
    int seen = 0;
    for (int i = 0; i < 300; ++i) {
        Expr e = gen(3);
        Verdict v;
        try {
            v = verify_measure_preserving(e, Policy::derivative());
        } catch (const PolicyInapplicable&) {
            continue;
        }
        if (v.result != Result::Proven) continue;
        ++seen;
        Expr d = texpr::deriv_mod2(e).partials.at(0);
        for (u64 u = 0; u < 16; ++u) CHECK(ev(d, u, 1) == 1);
    }
    CHECK(seen > 0);
}

TEST_CASE("falling factorial basis conversion") {
    // x^2 = x(x-1) + x
    auto ff = to_falling(ints({0, 0, 1}));
    CHECK(ff == ints({0, 1, 1}));
    CHECK(from_falling(ints({0, 3, 2})) == ints({0, 1, 2}));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        std::vector<cpp_int> p;
        for (int k = 0; k < 9; ++k) p.emplace_back(static_cast<long>(rng() % 41) - 20);
        CHECK(from_falling(to_falling(p)) == p);
    }
    CHECK_THROWS_AS(to_falling(std::vector<cpp_int>(34, 1)), DomainError);
}

TEST_CASE("classify_poly_ff examples") {
    CHECK(classify_poly_ff(ints({1, 1})) == PolyClass::Ergodic);
    CHECK(classify_poly_ff(ints({0, 3, 2})) == PolyClass::MeasurePreservingOnly);
    CHECK(classify_poly_ff(ints({1, 2})) == PolyClass::Neither);
    CHECK(oracle::cycles(x + 2 * x * x, 4).bijective);
    CHECK_FALSE(oracle::cycles(1 + 2 * x, 1).bijective);
}

TEST_CASE("classify_poly_modp examples") {
    CHECK(classify_poly_modp(2, ints({0, 1, 2})) == PolyClass::MeasurePreservingOnly);
    CHECK(classify_poly_modp(5, ints({1, 1})) == PolyClass::Ergodic);
    CHECK(classify_poly_modp(3, ints({0, 0, 0, 1})) == PolyClass::Neither);
    CHECK(classify_poly_modp(2, ints({1, 5})) == PolyClass::Ergodic);
    CHECK_THROWS_AS(classify_poly_modp(4, ints({1, 1})), DomainError);
}

TEST_CASE("classify_rational_poly") {
    using R = cpp_rational;
    Verdict v = classify_rational_poly({R(1), R(5)}, 2);
    CHECK(v.result == Result::Proven);
    CHECK(v.theorem == "Qpol");
    CHECK(*v.modulus_checked == 8);
    try {
        classify_rational_poly({R(0), R(1, 2)}, 2);
        FAIL("x/2 accepted");
    } catch (const NonIntegerValued& e) {
        CHECK(e.witness == 1);
    }
    // 1 + x + 2*C(x,2) = 1 + x^2
    Verdict q = classify_rational_poly({R(1), R(0), R(1)}, 2);
    CHECK(*q.modulus_checked == 16);
    CHECK(q.result == Result::Refuted);
    // C(x,2) is integer valued but not compatible.
    Verdict c = classify_rational_poly({R(0), R(-1, 2), R(1, 2)}, 2, Property::MeasurePreserving);
    CHECK(c.result == Result::Refuted);
    CHECK(c.witness.contains("incompatible"));
    // 1 + x + 4 C(x,2) is ergodic by the Mahler form.
    CHECK(classify_rational_poly({R(1), R(-1), R(2)}, 2).result == Result::Proven);
}

TEST_CASE("klimov_shamir_C") {
    for (u64 C : {5, 7}) {
        auto r = klimov_shamir_C(C, 8);
        CHECK(r.criterion == KsClass::SingleCycle);
        CHECK(r.agrees);
    }
    auto a = klimov_shamir_C(4, 6);
    CHECK(a.criterion == KsClass::NotInvertible);
    CHECK(a.oracle == KsClass::NotInvertible);
    auto b = klimov_shamir_C(3, 6);
    CHECK(b.criterion == KsClass::InvertibleOnly);
    CHECK(b.oracle == KsClass::InvertibleOnly);
    for (u64 C = 0; C < 64; ++C) CHECK(klimov_shamir_C(C, 7).agrees);
}

TEST_CASE("permutation_poly") {
    CHECK(permutation_poly(ints({0, 1, 2})));
    CHECK_FALSE(permutation_poly(ints({0, 1, 1})));
    CHECK_FALSE(permutation_poly(ints({0, 1, 0, 1})));
    CHECK_FALSE(oracle::cycles(x + x * x * x, 2).bijective);
}

TEST_CASE("polynomial criteria agree with brute force") {
    // Degree <= 4, coefficients 0..15. Ergodic polynomials are exactly those
    // transitive mod 8 and permutations those bijective mod 4, so width 6
    // enumeration is a safe ground truth.
    const unsigned w = 6;
    const u64 n = u64{1} << w, m = n - 1;
    std::vector<u64> t(n);
    int anf_checked = 0;
    for (u64 code = 0; code < (u64{1} << 20); ++code) {
        u64 a[5];
        for (int i = 0; i < 5; ++i) a[i] = (code >> (4 * i)) & 15;
        std::vector<bool> hit(n, false);
        bool bij = true;
        for (u64 z = 0; z < n; ++z) {
            u64 y = (((((a[4] * z + a[3]) * z + a[2]) * z) + a[1]) * z + a[0]) & m;
            t[z] = y;
            if (hit[y]) bij = false;
            hit[y] = true;
        }
        bool cyc = false;
        if (bij) {
            u64 len = 1;
            for (u64 y = t[0]; y != 0; y = t[y]) ++len;
            cyc = len == n;
        }
        const PolyClass truth = cyc ? PolyClass::Ergodic : bij ? PolyClass::MeasurePreservingOnly : PolyClass::Neither;
        std::vector<cpp_int> mono(a, a + 5);
        CHECK(permutation_poly(mono) == bij);
        // The mod-p classifier and the FF basis are cpp_int heavy; sample them.
        if (code % 7 == 0) {
            CHECK(classify_poly_ff(to_falling(mono)) == truth);
            CHECK(classify_poly_modp(2, mono) == truth);
        }
        if (code % 997 == 0) {
            Expr e = Expr::constant(a[0]) + a[1] * x + a[2] * x * x + a[3] * x * x * x + a[4] * x * x * x * x;
            Verdict ve = verify_ergodic(e, Policy::anf(5));
            CHECK((ve.result != Result::Refuted) == cyc);
            Verdict vm = verify_measure_preserving(e, Policy::anf(5));
            CHECK((vm.result != Result::Refuted) == bij);
            ++anf_checked;
        }
    }
    CHECK(anf_checked > 1000);
}

TEST_CASE("Hull-Dobell: a + bx is ergodic iff transitive mod 4") {
    for (u64 a = 0; a < 16; ++a) {
        for (u64 b = 0; b < 16; ++b) {
            Expr f = a + b * x;
            auto big = cycle_structure(f, 10);
            auto small = cycle_structure(f, 2);
            CHECK(big.single_cycle == small.single_cycle);
            CHECK(big.single_cycle == ((a & 1) == 1 && (b & 3) == 1));
        }
    }
}

TEST_CASE("xor-add chains are ergodic iff transitive mod 4") {
    for (u64 code = 0; code < 4096; ++code) {
        u64 c0 = code & 7, d0 = (code >> 3) & 7, c1 = (code >> 6) & 7, d1 = (code >> 9) & 7;
        Expr f = (((x + c0) ^ d0) + c1) ^ d1;
        CHECK(cycle_structure(f, 10).single_cycle == cycle_structure(f, 2).single_cycle);
    }
}

TEST_CASE("make_from_gadget constructions") {
    auto d = make_from_gadget(DeltaErgodic{1}, x * x);
    CHECK(d.verdict.result == Result::Proven);
    CHECK(d.verdict.theorem == "Delta");
    for (u64 v = 0; v < 256; ++v) CHECK(ev(d.expr, v, 8) == ((3 + 5 * v) & 255));
    for (unsigned w = 1; w <= 12; ++w) CHECK(oracle::single_cycle(d.expr, w));

    auto d2 = make_from_gadget(DeltaErgodic{1}, x ^ (2 * x + 1));
    for (unsigned w = 1; w <= 12; ++w) CHECK(oracle::single_cycle(d2.expr, w));

    CHECK_THROWS_AS(make_from_gadget(DeltaErgodic{2}, x), DomainError);
    CHECK_THROWS_AS(make_from_gadget(AffineMP{1, 4}, x), DomainError);

    auto ks = verify_ergodic(parse("x + (x*x | 5)"), Policy::derivative());
    Construction f{parse("x + (x*x | 5)"), ks};
    oracle::ExprGen gen(99);
    for (LiftMode mode : {LiftMode::ComposeAdd, LiftMode::ComposeXor, LiftMode::Add, LiftMode::Xor}) {
        for (int i = 0; i < 3; ++i) {
            auto l = make_from_gadget(Lift{mode, f}, gen(3));
            CHECK(l.verdict.theorem == "compBool");
            for (unsigned w = 1; w <= 10; ++w) CHECK(oracle::single_cycle(l.expr, w));
        }
    }

    auto a = make_from_gadget(AffineMP{7, 3}, x * x * x);
    CHECK(oracle_holds(a.expr, Property::MeasurePreserving, 12));
    auto mp_lift = make_from_gadget(Lift{LiftMode::Xor, a}, x | 3);
    CHECK(mp_lift.verdict.property == Property::MeasurePreserving);
    CHECK(oracle_holds(mp_lift.expr, Property::MeasurePreserving, 12));
}

TEST_CASE("Mahler constructions") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<u64> c;
        for (int i = 0; i < 9; ++i) c.push_back(rng() % 8);
        auto e = make_from_gadget(MahlerErgodic{c}, x);
        CHECK(e.verdict.theorem == "ergBin");
        CHECK(oracle_holds(e.expr, Property::Ergodic, 11));
        auto m = make_from_gadget(MahlerMP{c}, x);
        CHECK(oracle_holds(m.expr, Property::MeasurePreserving, 11));
    }
}

TEST_CASE("multivar_check_bijective") {
    auto ex = texpr::parse_system("x ^ 2*(x & y), (y + 3*x*x*x) ^ x");
    Verdict a = multivar_check_bijective(ex, 5);
    CHECK(a.result == Result::Proven);
    CHECK(system_cycle_structure(ex, 5).bijective);
    CHECK(multivar_check_bijective(texpr::parse_system("x0, x1"), 4).result == Result::Proven);
    Verdict c = multivar_check_bijective(texpr::parse_system("x + y, x + y"), 4);
    CHECK(c.result == Result::Refuted);
    // Bijective mod 2 but with a singular Jacobian mod 2.
    Verdict s = multivar_check_bijective(texpr::parse_system("x + 2*y, y + 2*x*x"), 4);
    CHECK(s.result == (system_cycle_structure(texpr::parse_system("x + 2*y, y + 2*x*x"), 4).bijective
                           ? Result::Proven
                           : Result::Refuted));
}

TEST_CASE("multivar_pack reads as the interleaved univariate map") {
    Construction succ{x + 1, verify_ergodic(x + 1, Policy::derivative())};
    REQUIRE(succ.verdict.result == Result::Proven);
    auto F = multivar_pack(succ, 2);
    REQUIRE(F.size() == 2);
    auto r = system_cycle_structure(F, 2);
    CHECK(r.single_cycle);
    CHECK(r.cycle_lengths.at(16) == 1);
    for (unsigned m = 2; m <= 4; ++m) {
        auto G = multivar_pack(succ, m);
        const unsigned w = 12 / m;
        for (u64 wide = 0; wide < (u64{1} << (m * w)); wide += 37) {
            auto xs = deinterleave(wide, m, w);
            std::vector<word2::Word> env;
            for (u64 v : xs) env.emplace_back(v, w);
            auto out = texpr::eval(G, env, w);
            std::vector<u64> ys;
            for (const auto& o : out) ys.push_back(o.value());
            CHECK(interleave(ys, w) == ((wide + 1) & word2::mask_for(m * w)));
        }
    }
    auto one = multivar_pack(succ, 1);
    CHECK(texpr::to_string(one[0]) == texpr::to_string(succ.expr));

    // A general ergodic h also packs into a single cycle.
    auto h = make_from_gadget(DeltaErgodic{3}, x * x * x);
    auto H = multivar_pack(h, 2);
    CHECK(system_cycle_structure(H, 5).single_cycle);

    CHECK_THROWS_AS(multivar_pack(Construction{x * x, Verdict{}}, 2), DomainError);
}

TEST_CASE("multivariate ergodic family") {
    Construction succ{x + 1, verify_ergodic(x + 1, Policy::derivative())};
    Construction id{x, verify_measure_preserving(x, Policy::derivative())};
    REQUIRE(id.verdict.result == Result::Proven);
    std::vector<std::vector<Construction>> f{{succ, succ}, {succ, succ}};
    std::vector<std::vector<Construction>> g{{}, {id}};
    for (bool use_xor : {false, true}) {
        auto F = multivar_family(f, g, use_xor);
        auto r = system_cycle_structure(F, 3);
        CHECK(r.single_cycle);
        CHECK(r.cycle_lengths.at(64) == 1);
    }
    auto h = make_from_gadget(DeltaErgodic{1}, x * x);
    auto a = make_from_gadget(AffineMP{0, 5}, x * x);
    std::vector<std::vector<Construction>> f3{{succ, h, succ}, {h, h, succ}, {succ, succ, h}};
    std::vector<std::vector<Construction>> g3{{}, {a}, {id, a}};
    CHECK(system_cycle_structure(multivar_family(f3, g3, false), 4).single_cycle);
    CHECK_THROWS_AS(multivar_family(f, {{}, {}}, false), DomainError);
}
