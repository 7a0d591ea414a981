#include <map>
#include <string>

#include "tflab/generators.hpp"
#include "tflab/kernels.hpp"

namespace tflab::generators {

using ergodicity::Property;
using ergodicity::Result;

namespace {

Verdict refuted(const char* method, const std::string& why, nlohmann::json witness = nlohmann::json::object()) {
    Verdict v;
    v.property = Property::Ergodic;
    v.result = Result::Refuted;
    v.method = method;
    witness["failed"] = why;
    v.witness = std::move(witness);
    return v;
}

// Shortest period of the cyclic sequence b.
std::size_t cyclic_period(const std::vector<unsigned>& b) {
    const std::size_t m = b.size();
    for (std::size_t p = 1; p < m; ++p) {
        if (m % p != 0) continue;
        bool ok = true;
        for (std::size_t j = 0; j < m && ok; ++j) ok = b[j] == b[(j + p) % m];
        if (ok) return p;
    }
    return m;
}

u64 eval_at(const Expr& e, u64 x, unsigned w) { return texpr::eval(e, std::span<const u64>(&x, 1), w); }

}  // namespace

std::vector<u64> Control::words(unsigned n) const {
    const u64 m = word2::mask_for(n);
    if (lfsr) return lfsr_words(*lfsr, n);
    std::vector<u64> w;
    for (u64 c : consts) w.push_back(c & m);
    return w;
}

std::size_t WreathSpec::clocks() const {
    if (combine == Explicit) return exprs.size();
    return control.lfsr ? static_cast<std::size_t>(control.lfsr->period()) : control.consts.size();
}

std::vector<Expr> WreathSpec::clock_maps() const {
    const std::size_t m = clocks();
    if (m == 0) throw SpecError("wreath product needs at least one clock");
    if (combine == Explicit) return exprs;
    if (exprs.size() != 1 && exprs.size() != m) {
        throw SpecError("need one shared clock map or one per clock, got " + std::to_string(exprs.size()));
    }
    const auto c = control.words(width);
    std::vector<Expr> g;
    for (std::size_t j = 0; j < m; ++j) {
        const Expr& h = exprs.size() == 1 ? exprs[0] : exprs[j];
        g.push_back(combine == Add ? Expr::constant(c[j]) + h : h ^ c[j]);
    }
    return g;
}

Verdict wreath_check(const WreathSpec& spec, unsigned k_max) {
    word2::check_width(spec.width);
    const auto g = spec.clock_maps();
    const std::size_t m = g.size();
    if (k_max == 0) k_max = spec.width;

    // Every clock map must be measure preserving with a proof.
    std::map<std::string, Verdict> proofs;
    nlohmann::json theorems = nlohmann::json::array();
    for (std::size_t j = 0; j < m; ++j) {
        const std::string key = texpr::to_string(g[j]);
        auto it = proofs.find(key);
        if (it == proofs.end()) {
            Verdict v = ergodicity::verify_auto(g[j], Property::MeasurePreserving, std::min(spec.width, 12u));
            it = proofs.emplace(key, v).first;
        }
        if (it->second.result != Result::Proven) {
            throw SpecError("clock " + std::to_string(j) + " (" + key + ") has no measure-preservation proof");
        }
        theorems.push_back(it->second.theorem);
    }

    std::vector<unsigned> b(m);
    unsigned parity = 0;
    for (std::size_t j = 0; j < m; ++j) {
        b[j] = static_cast<unsigned>(eval_at(g[j], 0, 1));
        parity ^= b[j];
    }
    const std::size_t period = cyclic_period(b);
    if (period != m) {
        return refuted("wreath", "condition 1", {{"condition", 1}, {"period", period}, {"clocks", m}});
    }
    if (parity != 1) return refuted("wreath", "condition 2", {{"condition", 2}});

    ergodicity::require_cap(k_max + 1, "wreath condition 3");
    nlohmann::json anf = nlohmann::json::array();
    for (unsigned k = 1; k <= k_max; ++k) {
        const u64 modulus_mask = word2::mask_for(k + 1);
        u64 total = 0;
        for (const auto& gj : g) total += kernels::shifted_sum(texpr::Program(gj, k + 1));
        total &= modulus_mask;
        if (total != (u64{1} << k)) {
            return refuted("wreath", "condition 3",
                           {{"condition", 3}, {"k", k}, {"sum_mod", total}, {"expected", u64{1} << k}});
        }
        // Same condition read off the coordinate functions.
        if (k < texpr::kMaxAnfBit && k <= 16) {
            unsigned odd = 0;
            for (const auto& gj : g) odd += texpr::anf_weight_odd(texpr::coord_anf(gj, k, k + 1)) ? 1 : 0;
            anf.push_back(odd & 1);
        }
    }

    Verdict v;
    v.property = Property::Ergodic;
    v.result = Result::Proven;
    v.method = "wreath";
    v.theorem = "WP";
    v.depth = k_max;
    v.modulus_checked = u64{1} << std::min(k_max + 1, 63u);
    v.witness = {{"clocks", m}, {"period", (u64{1} << spec.width) * m}, {"clock_theorems", theorems},
                 {"anf_odd_count_parity", anf}};
    return v;
}

Verdict abc_validate(const AbcSpec& s) {
    const unsigned n = s.width;
    word2::check_width(n);
    const u64 mask = word2::mask_for(n);
    if ((s.d & 1) == 0) return refuted("abc", "d must be odd (||d||_2 = 1)", {{"d", s.d}});
    if (s.dj.size() != n) {
        return refuted("abc", "need exactly one d_j per bit", {{"count", s.dj.size()}});
    }
    if ((s.dj[0] & 3) != 1) return refuted("abc", "d_0 must be 1 mod 4", {{"d0", s.dj[0]}});
    for (unsigned j = 1; j < n; ++j) {
        const u64 v = s.dj[j] & mask;
        if (v == 0 || static_cast<unsigned>(std::countr_zero(v)) != j) {
            return refuted("abc", "ord_2(d_j) must equal j", {{"j", j}, {"dj", s.dj[j]}});
        }
    }
    if (!is_primitive(s.lfsr.cells, s.lfsr.taps)) {
        return refuted("abc", "LFSR taps are not primitive", {{"cells", s.lfsr.cells}, {"taps", s.lfsr.taps}});
    }
    if ((s.lfsr.state & word2::mask_for(s.lfsr.cells)) == 0) return refuted("abc", "LFSR state is all zero");

    WreathSpec w;
    w.width = n;
    w.exprs = {s.h()};
    w.combine = WreathSpec::Add;
    const u64 right = word2::mask_for(s.right_bits());
    for (u64 c : lfsr_words(s.lfsr, n)) w.control.consts.push_back(n >= 2 ? c & right : 0);
    Verdict wv = wreath_check(w, n);
    if (wv.result != Result::Proven) {
        return refuted("abc", "clock family fails the wreath conditions", {{"wreath", wv.to_json()}});
    }
    Verdict v;
    v.property = Property::Ergodic;
    v.result = Result::Proven;
    v.method = "abc";
    v.theorem = "erg_sum";
    v.depth = wv.depth;
    v.modulus_checked = wv.modulus_checked;
    v.witness = {{"period", (u64{1} << n) * s.lfsr.period()}, {"wreath", wv.to_json()}};
    return v;
}

Verdict validate(GeneratorSpec& spec) {
    return std::visit(
        [](auto& s) -> Verdict {
            using T = std::decay_t<decltype(s)>;
            Verdict v;
            if constexpr (std::is_same_v<T, OrdinarySpec>) {
                word2::check_width(s.width);
                v = ergodicity::verify_auto(s.f, Property::Ergodic, std::min(s.width, 12u));
            } else if constexpr (std::is_same_v<T, WreathSpec>) {
                if (s.control.lfsr && (s.control.lfsr->state & word2::mask_for(s.control.lfsr->cells)) == 0) {
                    throw SpecError("LFSR control state is all zero");
                }
                v = wreath_check(s, s.depth);
            } else {
                v = abc_validate(s);
            }
            s.verdict = v;
            return v;
        },
        spec);
}

bool is_validated(const GeneratorSpec& spec) {
    return std::visit(
        [](const auto& s) { return s.verdict && s.verdict->result == Result::Proven; }, spec);
}

}  // namespace tflab::generators
