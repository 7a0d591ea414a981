#include <string>

#include "internal.hpp"
#include "tflab/ergodicity.hpp"
#include "tflab/kernels.hpp"

namespace tflab::ergodicity {

using detail::pow2;

namespace {

Verdict brute_system(Verdict v, const std::vector<Expr>& F, unsigned width) {
    CycleReport r = system_cycle_structure(F, width);
    v.method = "brute";
    v.modulus_checked = pow2(width);
    v.witness = r.to_json();
    if (r.bijective) {
        v.result = Result::Unknown;
        v.depth = width;
    } else {
        v.result = Result::Refuted;
    }
    return v;
}

void require_proven(const Construction& c, Property p, const char* what) {
    if (c.verdict.result != Result::Proven) throw DomainError(std::string(what) + " lacks a proven verdict");
    if (p == Property::Ergodic && c.verdict.property != Property::Ergodic)
        throw DomainError(std::string(what) + " must be ergodic");
    if (texpr::arity(c.expr) > 1) throw DomainError(std::string(what) + " must be univariate");
}

Expr at_var(const Expr& f, unsigned r) { return texpr::compose(f, {Expr::var(r)}); }

}  // namespace

Verdict multivar_check_bijective(const std::vector<Expr>& F, unsigned width, unsigned test_width) {
    const unsigned m = static_cast<unsigned>(F.size());
    if (m == 0) throw DomainError("empty system");
    for (const auto& f : F) {
        if (texpr::arity(f) > m) throw DomainError("system is not square");
    }
    Verdict v;
    v.property = Property::MeasurePreserving;
    texpr::DiffCertificate cert;
    try {
        cert = texpr::n_bound(F, 1, test_width);
    } catch (const NotDifferentiable&) {
        return brute_system(std::move(v), F, width);
    } catch (const OverCap&) {
        return brute_system(std::move(v), F, width);
    }
    if (!cert.verified) return brute_system(std::move(v), F, width);

    v.method = "derivative";
    v.theorem = "MHL-bj";
    const unsigned N = cert.n_bound;
    v.witness = {{"N", N}, {"structural_bound", cert.structural_bound}, {"test_width", cert.test_width}};
    CycleReport r = system_cycle_structure(F, N);
    if (!r.bijective) {
        v.result = Result::Refuted;
        v.modulus_checked = pow2(N);
        v.witness["collision"] = {r.collision->first, r.collision->second};
        return v;
    }
    std::vector<u64> point(m);
    for (u64 packed = 0; packed < pow2(m); ++packed) {
        for (unsigned s = 0; s < m; ++s) point[s] = (packed >> s) & 1;
        if (texpr::jacobian_det_mod2(F, point) == 0) {
            v.result = Result::Refuted;
            v.modulus_checked = pow2(N + 1);
            v.witness["singular_jacobian_at"] = point;
            if (m * (N + 1) <= oracle_cap()) {
                CycleReport wide = system_cycle_structure(F, N + 1);
                if (wide.collision) v.witness["collision"] = {wide.collision->first, wide.collision->second};
            }
            return v;
        }
    }
    v.result = Result::Proven;
    v.modulus_checked = pow2(N);
    return v;
}

u64 interleave(const std::vector<u64>& xs, unsigned width) {
    const unsigned m = static_cast<unsigned>(xs.size());
    if (m * width > 64) throw DomainError("interleaved word exceeds 64 bits");
    u64 wide = 0;
    for (unsigned i = 0; i < width; ++i)
        for (unsigned s = 0; s < m; ++s) wide |= ((xs[s] >> i) & 1) << (i * m + s);
    return wide;
}

std::vector<u64> deinterleave(u64 wide, unsigned m, unsigned width) {
    if (m == 0 || m * width > 64) throw DomainError("interleaved word exceeds 64 bits");
    std::vector<u64> xs(m, 0);
    for (unsigned i = 0; i < width; ++i)
        for (unsigned s = 0; s < m; ++s) xs[s] |= ((wide >> (i * m + s)) & 1) << i;
    return xs;
}

std::vector<Expr> multivar_pack(const Construction& h, unsigned m) {
    require_proven(h, Property::Ergodic, "h");
    if (m == 0) throw DomainError("variable count must be positive");
    if (m == 1) return {h.expr};
    Expr all = Expr::var(0);
    for (unsigned r = 1; r < m; ++r) all = all & Expr::var(r);
    const Expr carry = texpr::compose(h.expr, {all}) ^ all;
    std::vector<Expr> F;
    Expr prefix = carry;
    for (unsigned s = 0; s < m; ++s) {
        F.push_back(Expr::var(s) ^ prefix);
        prefix = prefix & Expr::var(s);
    }
    return F;
}

std::vector<Expr> multivar_family(const std::vector<std::vector<Construction>>& f,
                                  const std::vector<std::vector<Construction>>& g, bool use_xor) {
    const std::size_t m = f.size();
    if (m == 0 || g.size() != m) throw DomainError("f and g must both have one row per component");
    std::vector<Expr> F;
    for (std::size_t j = 0; j < m; ++j) {
        if (f[j].size() != m) throw DomainError("each f row needs one ergodic map per variable");
        if (g[j].size() != j) throw DomainError("row j of g needs exactly j measure-preserving maps");
        std::optional<Expr> term;
        auto conj = [&](const Expr& e) { term = term ? *term & e : e; };
        for (std::size_t t = 0; t < j; ++t) {
            require_proven(g[j][t], Property::MeasurePreserving, "g");
            conj(at_var(g[j][t].expr, static_cast<unsigned>(t)));
        }
        for (std::size_t r = 0; r < m; ++r) {
            require_proven(f[j][r], Property::Ergodic, "f");
            const Expr xr = Expr::var(static_cast<unsigned>(r));
            conj(at_var(f[j][r].expr, static_cast<unsigned>(r)) ^ xr);
        }
        const Expr xj = Expr::var(static_cast<unsigned>(j));
        F.push_back(use_xor ? (xj ^ *term) : (xj + *term));
    }
    return F;
}

}  // namespace tflab::ergodicity
