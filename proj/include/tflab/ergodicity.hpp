#pragma once

// Verifiers and constructors for measure-preserving and ergodic T-functions.
// Exhaustive cycle enumeration is the common ground truth.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"
#include "tflab/texpr.hpp"

namespace tflab::ergodicity {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using texpr::Expr;
using word2::u64;

/// Largest width the exhaustive oracle accepts. Defaults to 24, or the
/// value of TFLAB_ORACLE_CAP when set.
unsigned oracle_cap();
void set_oracle_cap(unsigned bits);
/// Throws OverCap when 2^bits states would exceed the cap.
void require_cap(unsigned bits, const std::string& what);

struct CycleReport {
    unsigned width = 0;
    bool bijective = false;
    std::size_t cycle_count = 0;
    std::map<u64, std::size_t> cycle_lengths;  // length -> multiplicity
    bool single_cycle = false;
    std::optional<std::pair<u64, u64>> collision;

    nlohmann::json to_json() const;
};

/// Functional-graph decomposition of a successor table on 2^bits states.
CycleReport cycle_structure(const std::vector<u64>& table, unsigned bits);
CycleReport cycle_structure(const Expr& f, unsigned width);
/// Square system on (Z/2^width)^m, states packed x_0 + 2^width x_1 + ...
CycleReport system_cycle_structure(const std::vector<Expr>& F, unsigned width);

enum class Property { MeasurePreserving, Ergodic };
enum class Result { Proven, Refuted, Unknown };

const char* to_string(Property p);
const char* to_string(Result r);

struct Verdict {
    Property property = Property::Ergodic;
    Result result = Result::Unknown;
    std::string method;
    std::string theorem;  // empty when no criterion was applied
    std::optional<u64> modulus_checked;
    nlohmann::json witness;  // null when there is none
    std::optional<unsigned> depth;

    nlohmann::json to_json() const;
    static Verdict from_json(const nlohmann::json& j);
};

struct Policy {
    enum Kind { Brute, Derivative, Anf, FallingFactorial, B2Class } kind;
    unsigned param = 0;        // width for Brute, last bit for Anf
    unsigned test_width = 10;  // certificate validation width

    static Policy brute(unsigned n) { return {Brute, n, 10}; }
    static Policy derivative(unsigned tw = 10) { return {Derivative, 0, tw}; }
    static Policy anf(unsigned maxbit, unsigned tw = 10) { return {Anf, maxbit, tw}; }
    static Policy falling_factorial() { return {FallingFactorial, 0, 10}; }
    static Policy b2class() { return {B2Class, 0, 10}; }
};

/// Throws PolicyInapplicable when the policy's prerequisites fail.
Verdict verify_ergodic(const Expr& f, const Policy& policy);
Verdict verify_measure_preserving(const Expr& f, const Policy& policy);
Verdict verify(const Expr& f, Property property, const Policy& policy);
/// Tries the criteria in turn (derivative, falling factorial, B2 class, ANF)
/// and falls back to brute force up to `width`.
Verdict verify_auto(const Expr& f, Property property, unsigned width, unsigned test_width = 10);

enum class PolyClass { Ergodic, MeasurePreservingOnly, Neither };
const char* to_string(PolyClass c);

/// Coefficients in the descending factorial basis x(x-1)...(x-i+1).
using PolyFF = std::vector<cpp_int>;

/// Conversion between monomial and descending-factorial coefficients
/// (Stirling numbers), exact over the integers; degree up to 32.
PolyFF to_falling(const std::vector<cpp_int>& monomial);
std::vector<cpp_int> from_falling(const PolyFF& ff);

/// Integer monomial coefficients of a univariate polynomial expression, or
/// nothing when e uses non-arithmetic nodes or exceeds degree 32.
std::optional<std::vector<cpp_int>> integer_polynomial(const Expr& e);

PolyClass classify_poly_ff(const PolyFF& p);
PolyClass classify_poly_modp(u64 p, const std::vector<cpp_int>& monomial);
/// Exact screening of a rational polynomial at the modulus
/// p^(floor(log_p d) + 3). Throws NonIntegerValued.
Verdict classify_rational_poly(const std::vector<cpp_rational>& monomial, u64 p,
                               Property property = Property::Ergodic);

enum class KsClass { SingleCycle, InvertibleOnly, NotInvertible };
const char* to_string(KsClass c);

struct KsResult {
    KsClass criterion;
    std::optional<KsClass> oracle;  // set when width is within the cap
    bool agrees = true;
};

/// x + (x^2 | C) classified by bits 0 and 2 of C.
KsResult klimov_shamir_C(u64 C, unsigned width);

/// a1 odd, a2 + a4 + ... even, a3 + a5 + ... even.
bool permutation_poly(const std::vector<cpp_int>& coeffs);

struct Construction {
    Expr expr;
    Verdict verdict;
};

enum class LiftMode { ComposeAdd, ComposeXor, Add, Xor };  // f(x+4g), f(x^4g), f+4g, f^4g

struct DeltaErgodic { u64 c; };
struct AffineMP { u64 d; u64 c; };
struct MahlerErgodic { std::vector<u64> coeffs; };  // c_1, c_2, ...
struct MahlerMP { std::vector<u64> coeffs; };       // c_0 is the free constant
struct Lift { LiftMode mode; Construction f; };

using Gadget = std::variant<DeltaErgodic, AffineMP, MahlerErgodic, MahlerMP, Lift>;

/// Expression that is ergodic (or measure-preserving) by construction, with
/// the verdict naming the theorem instance. g is ignored by the Mahler modes.
Construction make_from_gadget(const Gadget& mode, const Expr& g);

/// Bijectivity of a square system via N_1 and the Jacobian modulo 2, with
/// an exhaustive fallback when no certificate is available.
Verdict multivar_check_bijective(const std::vector<Expr>& F, unsigned width, unsigned test_width = 8);

/// The m-variate form of an ergodic h; for h = x + 1 it is exactly the
/// bit-interleaved successor on mn-bit words.
std::vector<Expr> multivar_pack(const Construction& h, unsigned m);

/// f[j][r] ergodic, g[j][t] measure-preserving for t < j (g[j] has j entries).
std::vector<Expr> multivar_family(const std::vector<std::vector<Construction>>& f,
                                  const std::vector<std::vector<Construction>>& g, bool use_xor);

/// Bit interleaving used by multivar_pack: bit i*m + s of the wide word is
/// bit i of x_s.
u64 interleave(const std::vector<u64>& xs, unsigned width);
std::vector<u64> deinterleave(u64 wide, unsigned m, unsigned width);

}  // namespace tflab::ergodicity
