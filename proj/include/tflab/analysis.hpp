#pragma once

// Measurements on produced sequences: periods, coordinate structure,
// distribution, linear and 2-adic complexity, and the gamma construction.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"
#include "tflab/bitseq.hpp"
#include "tflab/generators.hpp"

namespace tflab::analysis {

using boost::multiprecision::cpp_int;
using word2::u64;

struct PeriodResult {
    bool found = false;  // false: cap exceeded or data too short
    u64 preperiod = 0;
    u64 period = 0;
};

/// Brent cycle detection over the generator's (state, clock) pairs.
PeriodResult period(const generators::GeneratorSpec& spec, u64 cap);
PeriodResult period(const texpr::Expr& f, unsigned width, u64 seed, u64 cap);
/// Eventual period of finite data, established only when the tail shows at
/// least two repetitions.
PeriodResult data_period(std::span<const u64> seq);

/// Shortest p dividing bits.size() with bits cyclically invariant under p.
u64 cyclic_period(const BitSeq& bits);

struct CoordSeq {
    unsigned j = 0;
    BitSeq bits;
    u64 period = 0;
    bool half_negation = false;  // delta_j(x_{i + 2^j m}) = delta_j(x_i) + 1, cyclically
};

/// seq is read as one full cycle.
CoordSeq coord_seq(std::span<const u64> seq, unsigned j, u64 m = 1);

struct KDist {
    unsigned k = 0;
    bool strict = false;
    std::vector<u64> counts;  // index = chain read first bit most significant
};

KDist k_distribution(const BitSeq& bits, unsigned k, bool cyclic = true);

struct Q1Result {
    bool pass = true;
    unsigned worst_k = 0;
    double worst_deviation = 0.0;  // max |nu(w)/N - 2^-k|
    std::vector<unsigned> failing;
};

Q1Result q1_check(const BitSeq& bits, bool cyclic = true);

/// Berlekamp-Massey.
u64 lc_gf2(const BitSeq& bits);
/// Linear complexity of the infinite sequence repeating `period`.
u64 lc_periodic(const BitSeq& period);

/// Smallest r with c + sum_{j<r} c_j z_{i+j} = 0 (mod 2^n) for all i, some
/// coefficient odd; seq is read as one full cycle.
u64 lc_ring(std::span<const u64> seq, unsigned width);

struct LErrorResult {
    u64 value = 0;       // best linear complexity found
    bool exact = false;  // value is the true minimum
    std::string method;  // "stamp-martin", "exhaustive", "annealing"
    std::optional<u64> lower_bound;  // analytic bound, when it applies
};

/// Minimum lc_gf2 of the period after at most `ell` bit flips.
LErrorResult l_error_lc(const BitSeq& period, u64 ell, std::uint64_t seed = 1);

struct Phi2 {
    cpp_int u;
    cpp_int v;  // value u/v in lowest terms, v > 0
    double log2 = 0.0;

    std::string fraction() const;
};

/// 2-adic value of the purely periodic sequence with this period and its
/// complexity log2 max(|u|, |v|).
Phi2 two_adic_general(const BitSeq& period);
/// Coordinate sequence j whose first half period reads as gamma.
Phi2 two_adic_coord(unsigned j, const cpp_int& gamma);

/// gamma_j = sum_{i < 2^j m} delta_j(x_i) 2^i for j < n.
std::vector<cpp_int> gamma_extract(std::span<const u64> seq, unsigned width, u64 m = 1);
/// Successor table of the single-cycle map built from gamma_0..gamma_{n-1}.
std::vector<u64> gamma_construct(const std::vector<cpp_int>& gammas, unsigned width);
/// States x_0..x_{2^n - 1} of the constructed cycle.
std::vector<u64> gamma_states(const std::vector<cpp_int>& gammas, unsigned width);

struct Scatter {
    std::vector<std::pair<u64, u64>> points;  // numerators over 2^n, distinct
    std::optional<u64> line_count;            // distinct x_{i+1} - b x_i
};

Scatter pair_scatter(std::span<const u64> seq, unsigned width, std::optional<u64> b = std::nullopt);
/// "x,y" header, then exact decimal expansions of the coordinates.
std::string scatter_csv(const Scatter& s, unsigned width);
/// Exact decimal digits of num / 2^width.
std::string dyadic_decimal(u64 num, unsigned width);

struct AnalyzeOptions {
    u64 m = 1;
    bool cyclic = true;
    bool with_lc_ring = true;
    std::optional<unsigned> phi2_coord;  // default: top coordinate, if small enough
    std::optional<std::filesystem::path> scatter_csv;
};

struct SeqReport {
    unsigned width = 0;
    std::size_t length = 0;
    PeriodResult period;
    bool uniform_ok = false;
    std::vector<CoordSeq> coords;
    std::vector<u64> coord_lc;
    Q1Result q1;
    std::vector<KDist> kdist;
    std::optional<u64> lc_ring;
    std::optional<Phi2> phi2;
    std::optional<unsigned> phi2_coord;
    std::optional<std::string> scatter_path;

    nlohmann::json to_json() const;
};

SeqReport analyze(std::span<const u64> seq, unsigned width, const AnalyzeOptions& opt = {});

}  // namespace tflab::analysis
