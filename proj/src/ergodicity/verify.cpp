#include <string>

#include "internal.hpp"
#include "tflab/ergodicity.hpp"
#include "tflab/kernels.hpp"

namespace tflab::ergodicity {

using detail::pow2;

const char* to_string(Property p) {
    return p == Property::Ergodic ? "ergodic" : "measure-preserving";
}

const char* to_string(Result r) {
    switch (r) {
        case Result::Proven: return "proven";
        case Result::Refuted: return "refuted";
        case Result::Unknown: break;
    }
    return "unknown";
}

nlohmann::json Verdict::to_json() const {
    nlohmann::json j{{"property", to_string(property)}, {"result", to_string(result)}, {"method", method}};
    j["modulus_checked"] = modulus_checked ? nlohmann::json(*modulus_checked) : nlohmann::json(nullptr);
    if (!theorem.empty()) j["theorem"] = theorem;
    if (!witness.is_null()) j["witness"] = witness;
    if (depth) j["depth"] = *depth;
    return j;
}

Verdict Verdict::from_json(const nlohmann::json& j) {
    Verdict v;
    const std::string prop = j.at("property").get<std::string>();
    if (prop == "ergodic") v.property = Property::Ergodic;
    else if (prop == "measure-preserving") v.property = Property::MeasurePreserving;
    else throw ParseError("unknown property '" + prop + "'", 0);
    const std::string res = j.at("result").get<std::string>();
    if (res == "proven") v.result = Result::Proven;
    else if (res == "refuted") v.result = Result::Refuted;
    else if (res == "unknown") v.result = Result::Unknown;
    else throw ParseError("unknown result '" + res + "'", 0);
    v.method = j.at("method").get<std::string>();
    if (j.contains("modulus_checked") && !j["modulus_checked"].is_null())
        v.modulus_checked = j["modulus_checked"].get<u64>();
    if (j.contains("theorem")) v.theorem = j["theorem"].get<std::string>();
    if (j.contains("witness")) v.witness = j["witness"];
    if (j.contains("depth")) v.depth = j["depth"].get<unsigned>();
    return v;
}

namespace {

bool is_ergodic(Property p) { return p == Property::Ergodic; }

Verdict base(Property p, const char* method) {
    Verdict v;
    v.property = p;
    v.method = method;
    return v;
}

void require_univariate(const Expr& f) {
    if (texpr::arity(f) > 1) throw PolicyInapplicable("univariate verifiers need an expression in x alone");
}

// Refutation found by enumeration at the smallest failing width.
Verdict refute_at(Verdict v, const std::vector<u64>& table, unsigned w) {
    auto t = detail::restrict_table(table, w);
    CycleReport r = detail::report(t, w);
    v.result = Result::Refuted;
    v.modulus_checked = pow2(w);
    v.witness = r.to_json();
    return v;
}

Verdict check_small_modulus(Verdict v, const Expr& f, unsigned bits, const char* theorem) {
    auto table = detail::univariate_table(f, bits);
    if (auto w = detail::first_failure(table, bits, is_ergodic(v.property))) {
        return refute_at(std::move(v), table, *w);
    }
    v.result = Result::Proven;
    v.theorem = theorem;
    v.modulus_checked = pow2(bits);
    return v;
}

Verdict by_brute(const Expr& f, Property p, unsigned n) {
    Verdict v = base(p, "brute");
    if (n < 1) throw PolicyInapplicable("brute force needs a width of at least 1");
    auto table = detail::univariate_table(f, n);
    if (auto w = detail::first_failure(table, n, is_ergodic(p))) return refute_at(std::move(v), table, *w);
    v.result = Result::Unknown;
    v.modulus_checked = pow2(n);
    v.depth = n;
    return v;
}

texpr::DiffCertificate certificate(const Expr& f, unsigned k, unsigned tw) {
    texpr::DiffCertificate cert;
    // Wide masks push the structural bound past small test widths.
    tw = std::max(tw, std::min(texpr::structural_bound(f) + k, 20u));
    try {
        cert = texpr::n_bound(f, k, tw);
    } catch (const NotDifferentiable& e) {
        throw PolicyInapplicable(std::string("no derivative certificate: ") + e.what());
    } catch (const OverCap& e) {
        throw PolicyInapplicable(std::string("certificate validation too large: ") + e.what());
    }
    if (!cert.verified) {
        throw PolicyInapplicable("N_" + std::to_string(k) + " bound could not be validated up to test width " +
                                 std::to_string(tw));
    }
    return cert;
}

nlohmann::json cert_json(const texpr::DiffCertificate& c) {
    return {{"k", c.k}, {"N", c.n_bound}, {"structural_bound", c.structural_bound}, {"test_width", c.test_width}};
}

Verdict by_derivative(const Expr& f, Property p, unsigned tw) {
    Verdict v = base(p, "derivative");
    if (is_ergodic(p)) {
        auto cert = certificate(f, 2, tw);
        const unsigned M = cert.n_bound + 2;
        v = check_small_modulus(std::move(v), f, M, "erg_Der");
        v.witness = cert_json(cert);
        return v;
    }
    auto cert = certificate(f, 1, tw);
    const unsigned N = cert.n_bound;
    auto table = detail::univariate_table(f, N);
    if (auto w = detail::first_failure(table, N, false)) return refute_at(std::move(v), table, *w);
    // The derivative mod 2 is a function of u mod 2.
    const auto& d = cert.partials.at(0).at(0);
    for (u64 u = 0; u < 2; ++u) {
        if (texpr::eval(d, std::span<const u64>(&u, 1), 1) == 0) {
            auto wide = detail::univariate_table(f, N + 1);
            auto col = kernels::find_collision(wide);
            v.result = Result::Refuted;
            v.theorem = "MHL-bj";
            v.modulus_checked = pow2(N + 1);
            v.witness = cert_json(cert);
            v.witness["even_derivative_at"] = u;
            if (col) v.witness["collision"] = {col->first, col->second};
            return v;
        }
    }
    v.result = Result::Proven;
    v.theorem = "MHL-bj";
    v.modulus_checked = pow2(N);
    v.witness = cert_json(cert);
    return v;
}

Verdict by_anf(const Expr& f, Property p, unsigned maxbit, unsigned tw) {
    Verdict v = base(p, "anf");
    if (maxbit >= texpr::kMaxAnfBit) throw PolicyInapplicable("ANF depth is limited to bits below 24");
    require_cap(maxbit + 1, "ANF tables");
    nlohmann::json weights = nlohmann::json::array();
    for (unsigned j = 0; j <= maxbit; ++j) {
        try {
            auto t = texpr::coord_anf(f, j, j + 1);
            weights.push_back(t.weight());
            if (is_ergodic(p) && !texpr::anf_weight_odd(t)) {
                v.result = Result::Refuted;
                v.theorem = "ergBool";
                v.modulus_checked = pow2(j + 1);
                v.witness = {{"bit", j}, {"weights", weights}};
                return v;
            }
        } catch (const NotMeasurePreserving& e) {
            v.result = Result::Refuted;
            v.theorem = "ergBool";
            v.modulus_checked = pow2(j + 1);
            v.witness = {{"bit", e.bit}, {"collision", {e.witness_a, e.witness_b}}};
            return v;
        }
    }
    v.witness = {{"weights", weights}};
    v.depth = maxbit + 1;
    v.modulus_checked = pow2(maxbit + 1);
    v.result = Result::Unknown;
    // All bits up to maxbit behave; this is a proof once it covers 2^(N_k + k).
    try {
        const unsigned k = is_ergodic(p) ? 2 : 1;
        auto cert = certificate(f, k, tw);
        v.witness["certificate"] = cert_json(cert);
        if (cert.n_bound + k <= maxbit + 1) {
            v.result = Result::Proven;
            v.theorem = "ergBool";
        }
    } catch (const PolicyInapplicable&) {
    }
    return v;
}

Verdict by_falling_factorial(const Expr& f, Property p) {
    Verdict v = base(p, "falling-factorial");
    auto poly = integer_polynomial(f);
    if (!poly) throw PolicyInapplicable("not an integer polynomial of degree at most 32");
    PolyFF ff = to_falling(*poly);
    PolyClass c = classify_poly_ff(ff);
    nlohmann::json coeffs = nlohmann::json::array();
    for (std::size_t i = 0; i < ff.size() && i < 4; ++i) coeffs.push_back(ff[i].str());
    v.theorem = "ergPol";
    v.witness = {{"ff_coefficients", coeffs}, {"class", to_string(c)}};
    const bool ok = is_ergodic(p) ? c == PolyClass::Ergodic : c != PolyClass::Neither;
    if (ok) {
        v.result = Result::Proven;
        return v;
    }
    // Counterexample modulus from the mod-8 / mod-4 criterion.
    const unsigned bits = is_ergodic(p) ? 3 : 2;
    auto table = detail::univariate_table(f, bits);
    auto w = detail::first_failure(table, bits, is_ergodic(p));
    v.result = Result::Refuted;
    if (w) v.modulus_checked = pow2(*w);
    return v;
}

bool b2_node(const texpr::Node& n) {
    switch (n.op) {
        case texpr::Op::Var:
        case texpr::Op::Const:
        case texpr::Op::Add:
        case texpr::Op::Sub:
        case texpr::Op::Mul:
        case texpr::Op::Neg:
        case texpr::Op::Shl:
        case texpr::Op::InvOdd:
        case texpr::Op::PowOddBase:
        case texpr::Op::Compose:
            break;
        default:
            return false;
    }
    for (const auto& k : n.kids) {
        if (!b2_node(*k)) return false;
    }
    return true;
}

Verdict by_b2class(const Expr& f, Property p) {
    if (!b2_node(f.node())) {
        throw PolicyInapplicable("B2 class admits only arithmetic nodes, odd inversion and odd-base powers");
    }
    Verdict v = base(p, "b2class");
    return check_small_modulus(std::move(v), f, is_ergodic(p) ? 3 : 2, "ergPolGen");
}

}  // namespace

Verdict verify(const Expr& f, Property property, const Policy& policy) {
    require_univariate(f);
    switch (policy.kind) {
        case Policy::Brute: return by_brute(f, property, policy.param);
        case Policy::Derivative: return by_derivative(f, property, policy.test_width);
        case Policy::Anf: return by_anf(f, property, policy.param, policy.test_width);
        case Policy::FallingFactorial: return by_falling_factorial(f, property);
        case Policy::B2Class: return by_b2class(f, property);
    }
    throw PolicyInapplicable("unknown policy");
}

Verdict verify_ergodic(const Expr& f, const Policy& policy) { return verify(f, Property::Ergodic, policy); }

Verdict verify_measure_preserving(const Expr& f, const Policy& policy) {
    return verify(f, Property::MeasurePreserving, policy);
}

Verdict verify_auto(const Expr& f, Property property, unsigned width, unsigned test_width) {
    const Policy order[] = {Policy::falling_factorial(), Policy::b2class(), Policy::derivative(test_width)};
    for (const auto& pol : order) {
        try {
            Verdict v = verify(f, property, pol);
            if (v.result != Result::Unknown) return v;
        } catch (const PolicyInapplicable&) {
        } catch (const OverCap&) {
        }
    }
    return verify(f, property, Policy::brute(width));
}

}  // namespace tflab::ergodicity
