#include <string>

#include "internal.hpp"
#include "tflab/ergodicity.hpp"

namespace tflab::ergodicity {

namespace {

constexpr std::size_t kMaxDegree = 32;

using Poly = std::vector<cpp_int>;

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

Poly padd(const Poly& a, const Poly& b, int sign) {
    Poly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += sign * b[i];
    trim(r);
    return r;
}

std::optional<Poly> pmul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return Poly{};
    if (a.size() + b.size() - 2 > kMaxDegree) return std::nullopt;
    Poly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}

std::optional<Poly> poly_of(const texpr::Node& n, const std::vector<Poly>& env) {
    using texpr::Op;
    auto kid = [&](std::size_t i) { return poly_of(*n.kids[i], env); };
    switch (n.op) {
        case Op::Var:
            if (n.param >= env.size()) return std::nullopt;
            return env[n.param];
        case Op::Const: {
            Poly p{cpp_int(n.value)};
            trim(p);
            return p;
        }
        case Op::Add:
        case Op::Sub: {
            auto a = kid(0), b = kid(1);
            if (!a || !b) return std::nullopt;
            return padd(*a, *b, n.op == Op::Add ? 1 : -1);
        }
        case Op::Mul: {
            auto a = kid(0), b = kid(1);
            if (!a || !b) return std::nullopt;
            return pmul(*a, *b);
        }
        case Op::Neg: {
            auto a = kid(0);
            if (!a) return std::nullopt;
            for (auto& c : *a) c = -c;
            return a;
        }
        case Op::Shl: {
            auto a = kid(0);
            if (!a) return std::nullopt;
            for (auto& c : *a) c <<= n.param;
            return a;
        }
        case Op::Compose: {
            std::vector<Poly> inner;
            for (std::size_t i = 1; i < n.kids.size(); ++i) {
                auto a = kid(i);
                if (!a) return std::nullopt;
                inner.push_back(std::move(*a));
            }
            return poly_of(*n.kids[0], inner);
        }
        default:
            return std::nullopt;
    }
}

cpp_int mod_pos(const cpp_int& a, const cpp_int& m) {
    cpp_int r = a % m;
    if (r < 0) r += m;
    return r;
}

// Values of an integer polynomial at 0..modulus-1, reduced.
std::vector<u64> poly_table(const std::vector<cpp_int>& coeffs, u64 modulus) {
    std::vector<u64> red;
    for (const auto& c : coeffs) red.push_back(static_cast<u64>(mod_pos(c, cpp_int(modulus))));
    std::vector<u64> t(modulus);
    for (u64 z = 0; z < modulus; ++z) {
        unsigned __int128 acc = 0;
        for (std::size_t i = red.size(); i-- > 0;) acc = (acc * z + red[i]) % modulus;
        t[z] = static_cast<u64>(acc);
    }
    return t;
}

bool single_cycle(const std::vector<u64>& t) {
    auto d = detail::decompose(t);
    return d.count == 1 && d.lengths.count(t.size()) == 1;
}

bool bijective(const std::vector<u64>& t) {
    std::vector<bool> seen(t.size(), false);
    for (u64 y : t) {
        if (seen[y]) return false;
        seen[y] = true;
    }
    return true;
}

unsigned bits_for(u64 modulus) { return static_cast<unsigned>(std::bit_width(modulus - 1)); }

}  // namespace

const char* to_string(PolyClass c) {
    switch (c) {
        case PolyClass::Ergodic: return "ergodic";
        case PolyClass::MeasurePreservingOnly: return "measure-preserving";
        case PolyClass::Neither: break;
    }
    return "neither";
}

PolyFF to_falling(const std::vector<cpp_int>& monomial) {
    if (monomial.size() > kMaxDegree + 1) throw DomainError("basis conversion is limited to degree 32");
    const std::size_t n = monomial.size();
    // S[k][i]: Stirling numbers of the second kind.
    std::vector<std::vector<cpp_int>> S(n, std::vector<cpp_int>(n, 0));
    if (n > 0) S[0][0] = 1;
    for (std::size_t k = 1; k < n; ++k)
        for (std::size_t i = 1; i <= k; ++i) S[k][i] = cpp_int(i) * S[k - 1][i] + S[k - 1][i - 1];
    PolyFF ff(n, 0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i <= k; ++i) ff[i] += monomial[k] * S[k][i];
    return ff;
}

std::vector<cpp_int> from_falling(const PolyFF& ff) {
    if (ff.size() > kMaxDegree + 1) throw DomainError("basis conversion is limited to degree 32");
    const std::size_t n = ff.size();
    // s[i][k]: signed Stirling numbers of the first kind.
    std::vector<std::vector<cpp_int>> s(n, std::vector<cpp_int>(n, 0));
    if (n > 0) s[0][0] = 1;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t k = 1; k <= i; ++k) s[i][k] = s[i - 1][k - 1] - cpp_int(i - 1) * s[i - 1][k];
    std::vector<cpp_int> mono(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k <= i; ++k) mono[k] += ff[i] * s[i][k];
    return mono;
}

std::optional<std::vector<cpp_int>> integer_polynomial(const Expr& e) {
    if (texpr::arity(e) > 1) return std::nullopt;
    return poly_of(e.node(), {Poly{0, 1}});
}

PolyClass classify_poly_ff(const PolyFF& p) {
    auto c = [&](std::size_t i) { return i < p.size() ? p[i] : cpp_int(0); };
    auto m = [](const cpp_int& v, int mod) { return static_cast<int>(mod_pos(v, mod)); };
    const bool mp = m(c(1), 2) == 1 && m(c(2), 2) == 0 && m(c(3), 2) == 0;
    const bool erg = m(c(0), 2) == 1 && m(c(1), 4) == 1 && m(c(2), 2) == 0 && m(c(3), 4) == 0;
    if (erg) return PolyClass::Ergodic;
    return mp ? PolyClass::MeasurePreservingOnly : PolyClass::Neither;
}

PolyClass classify_poly_modp(u64 p, const std::vector<cpp_int>& monomial) {
    if (p < 2) throw DomainError("p must be a prime");
    for (u64 d = 2; d * d <= p; ++d) {
        if (p % d == 0) throw DomainError("p must be a prime");
    }
    const unsigned erg_exp = p <= 3 ? 3 : 2;
    u64 erg_mod = 1;
    for (unsigned i = 0; i < erg_exp; ++i) erg_mod *= p;
    require_cap(bits_for(erg_mod), "polynomial classification");
    auto t = poly_table(monomial, erg_mod);
    if (single_cycle(t)) return PolyClass::Ergodic;
    const u64 mp_mod = p * p;
    std::vector<u64> small(mp_mod);
    for (u64 z = 0; z < mp_mod; ++z) small[z] = t[z] % mp_mod;
    return bijective(small) ? PolyClass::MeasurePreservingOnly : PolyClass::Neither;
}

Verdict classify_rational_poly(const std::vector<cpp_rational>& monomial, u64 p, Property property) {
    if (p < 2) throw DomainError("p must be a prime");
    std::size_t d = monomial.size();
    while (d > 0 && monomial[d - 1] == 0) --d;
    const u64 deg = d > 0 ? d - 1 : 0;
    unsigned k = 3;
    for (u64 q = p; q <= std::max<u64>(deg, 1); q *= p) ++k;
    u64 modulus = 1;
    for (unsigned i = 0; i < k; ++i) modulus *= p;
    require_cap(bits_for(modulus), "rational polynomial screening");

    std::vector<u64> t(modulus);
    for (u64 z = 0; z < modulus; ++z) {
        cpp_rational acc = 0;
        for (std::size_t i = d; i-- > 0;) acc = acc * z + monomial[i];
        if (denominator(acc) != 1) throw NonIntegerValued(z);
        t[z] = static_cast<u64>(mod_pos(numerator(acc), cpp_int(modulus)));
    }

    Verdict v;
    v.property = property;
    v.method = "rational-poly";
    v.theorem = "Qpol";
    v.modulus_checked = modulus;
    u64 pk = 1;
    for (unsigned i = 1; i < k; ++i) {
        pk *= p;
        for (u64 z = pk; z < modulus; ++z) {
            if (t[z] % pk != t[z % pk] % pk) {
                v.result = Result::Refuted;
                v.witness = {{"incompatible", {z, z % pk}}, {"modulus", pk}};
                return v;
            }
        }
    }
    const bool ok = property == Property::Ergodic ? single_cycle(t) : bijective(t);
    v.result = ok ? Result::Proven : Result::Refuted;
    v.witness = {{"exponent", k}};
    return v;
}

const char* to_string(KsClass c) {
    switch (c) {
        case KsClass::SingleCycle: return "single-cycle";
        case KsClass::InvertibleOnly: return "invertible";
        case KsClass::NotInvertible: break;
    }
    return "not-invertible";
}

KsResult klimov_shamir_C(u64 C, unsigned width) {
    word2::check_width(width);
    KsResult r;
    if ((C & 1) == 0) r.criterion = KsClass::NotInvertible;
    else if (((C >> 2) & 1) == 1) r.criterion = KsClass::SingleCycle;
    else r.criterion = KsClass::InvertibleOnly;
    if (width >= 3 && width <= oracle_cap()) {
        const Expr x = Expr::var(0);
        CycleReport rep = cycle_structure(x + ((x * x) | C), width);
        r.oracle = rep.single_cycle ? KsClass::SingleCycle
                   : rep.bijective  ? KsClass::InvertibleOnly
                                    : KsClass::NotInvertible;
        r.agrees = *r.oracle == r.criterion;
    }
    return r;
}

bool permutation_poly(const std::vector<cpp_int>& a) {
    if (a.size() < 2 || mod_pos(a[1], 2) != 1) return false;
    cpp_int even = 0, odd = 0;
    for (std::size_t i = 2; i < a.size(); ++i) (i % 2 == 0 ? even : odd) += a[i];
    return mod_pos(even, 2) == 0 && mod_pos(odd, 2) == 0;
}

}  // namespace tflab::ergodicity
