#include <bit>
#include <string>

#include "tflab/ergodicity.hpp"

namespace tflab::ergodicity {

namespace {

Verdict by_construction(Property p, const char* theorem, nlohmann::json witness) {
    Verdict v;
    v.property = p;
    v.result = Result::Proven;
    v.method = "construction";
    v.theorem = theorem;
    v.witness = std::move(witness);
    return v;
}

void require_univariate(const Expr& g) {
    if (texpr::arity(g) > 1) throw DomainError("gadget g must be univariate");
}

unsigned floor_log2(u64 i) { return static_cast<unsigned>(std::bit_width(i)) - 1; }

Construction delta(const DeltaErgodic& m, const Expr& g) {
    if ((m.c & 1) == 0) throw DomainError("DeltaErgodic needs an odd constant");
    require_univariate(g);
    const Expr x = Expr::var(0);
    Expr e = m.c + x + 2 * (texpr::compose(g, {x + 1}) - g);
    return {e, by_construction(Property::Ergodic, "Delta", {{"c", m.c}, {"g", texpr::to_string(g)}})};
}

Construction affine(const AffineMP& m, const Expr& g) {
    if ((m.c & 1) == 0) throw DomainError("AffineMP needs an odd multiplier");
    require_univariate(g);
    const Expr x = Expr::var(0);
    Expr e = m.d + m.c * x + 2 * g;
    return {e, by_construction(Property::MeasurePreserving, "Delta",
                               {{"d", m.d}, {"c", m.c}, {"g", texpr::to_string(g)}})};
}

Construction mahler_erg(const MahlerErgodic& m) {
    const Expr x = Expr::var(0);
    Expr e = 1 + x;
    for (std::size_t k = 0; k < m.coeffs.size(); ++k) {
        const u64 i = k + 1;
        if (m.coeffs[k] == 0) continue;
        // c_i 2^(floor log2(i+1) + 1) C(x,i) over the 2^floor(log2 i) already in the node.
        const unsigned extra = floor_log2(i + 1) + 1 - floor_log2(i);
        e = e + (m.coeffs[k] << extra) * texpr::mahler(x, static_cast<unsigned>(i));
    }
    return {e, by_construction(Property::Ergodic, "ergBin", {{"coefficients", m.coeffs}})};
}

Construction mahler_mp(const MahlerMP& m) {
    const Expr x = Expr::var(0);
    Expr e = x;
    if (!m.coeffs.empty() && m.coeffs[0] != 0) e = m.coeffs[0] + e;
    for (std::size_t i = 1; i < m.coeffs.size(); ++i) {
        if (m.coeffs[i] == 0) continue;
        e = e + (m.coeffs[i] << 1) * texpr::mahler(x, static_cast<unsigned>(i));
    }
    return {e, by_construction(Property::MeasurePreserving, "ergBin", {{"coefficients", m.coeffs}})};
}

Construction lift(const Lift& m, const Expr& g) {
    require_univariate(g);
    const Verdict& fv = m.f.verdict;
    if (fv.result != Result::Proven) throw DomainError("Lift needs f with a proven verdict");
    const bool erg = fv.property == Property::Ergodic;
    // Ergodic f tolerates 4g, measure-preserving f tolerates 2g.
    const Expr s = (erg ? 4 : 2) * g;
    const Expr x = Expr::var(0);
    const Expr& f = m.f.expr;
    Expr e = f;
    const char* name = "";
    switch (m.mode) {
        case LiftMode::ComposeAdd: e = texpr::compose(f, {x + s}); name = "f(x+cg)"; break;
        case LiftMode::ComposeXor: e = texpr::compose(f, {x ^ s}); name = "f(x^cg)"; break;
        case LiftMode::Add: e = f + s; name = "f+cg"; break;
        case LiftMode::Xor: e = f ^ s; name = "f^cg"; break;
    }
    return {e, by_construction(fv.property, "compBool",
                               {{"mode", name}, {"c", erg ? 4 : 2}, {"f", texpr::to_string(f)},
                                {"g", texpr::to_string(g)}, {"f_theorem", fv.theorem}})};
}

}  // namespace

Construction make_from_gadget(const Gadget& mode, const Expr& g) {
    return std::visit(
        [&](const auto& m) -> Construction {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DeltaErgodic>) return delta(m, g);
            else if constexpr (std::is_same_v<T, AffineMP>) return affine(m, g);
            else if constexpr (std::is_same_v<T, MahlerErgodic>) return mahler_erg(m);
            else if constexpr (std::is_same_v<T, MahlerMP>) return mahler_mp(m);
            else return lift(m, g);
        },
        mode);
}

}  // namespace tflab::ergodicity
