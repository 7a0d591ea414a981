#pragma once

// Keystream automata: ordinary generators, wreath products of clocked
// mappings with counter-dependent control, and the ABC template.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tflab/bitseq.hpp"
#include "tflab/ergodicity.hpp"
#include "tflab/program.hpp"

namespace tflab::generators {

using ergodicity::Verdict;
using texpr::Expr;
using word2::u64;

// Fibonacci LFSR over s cells. taps holds the characteristic polynomial
// x^s + sum taps_i x^i without its leading term, so the recurrence is
// a_{t+s} = sum_{i in taps} a_{t+i}. State bit i is a_{t+i}.
struct Lfsr {
    unsigned cells = 0;
    u64 taps = 0;
    u64 state = 1;

    unsigned next_bit();
    /// n consecutive output bits starting at the current step, first bit in
    /// bit 0. Does not advance.
    u64 peek_word(unsigned n) const;
    u64 period() const { return (u64{1} << cells) - 1; }
};

/// Built-in primitive polynomial (taps) for degree 2..32.
u64 primitive_taps(unsigned degree);
/// x has order 2^s - 1 modulo the characteristic polynomial.
bool is_primitive(unsigned cells, u64 taps);
Lfsr default_lfsr(unsigned cells, u64 state = 1);

/// The n-bit words c_0..c_{p-1} read from an LFSR, c_j starting at step j,
/// over one full period p = 2^s - 1.
std::vector<u64> lfsr_words(Lfsr lfsr, unsigned n);

/// delta_j(bitrev(x)) = delta_{n-j-1}(x).
u64 bitrev(u64 x, unsigned n);

struct Output {
    enum Kind { Identity, Top, BitRevThenH } kind = Identity;
    unsigned k = 0;          // Top: number of leading bits kept
    std::optional<Expr> h;   // BitRevThenH
    std::optional<Verdict> h_verdict;

    /// Output width for a state width n.
    unsigned bits(unsigned n) const { return kind == Top ? k : n; }
};

Output identity_output();
Output top_output(unsigned k);
/// Requires a proven ergodic verdict for h.
Output bitrev_output(const Expr& h, const Verdict& verdict, unsigned width);

struct OrdinarySpec {
    unsigned width = 8;
    Expr f = Expr::var(0);
    Output output;
    u64 seed = 0;
    std::optional<Verdict> verdict;  // f's certificate once validated
};

struct Control {
    std::vector<u64> consts;     // explicit c_0..c_{m-1}
    std::optional<Lfsr> lfsr;    // otherwise the words of this LFSR

    /// The constants as clocked, reduced to width n.
    std::vector<u64> words(unsigned n) const;
};

struct WreathSpec {
    enum Combine { Explicit, Add, Xor };
    unsigned width = 8;
    std::vector<Expr> exprs;  // Explicit: g_j; otherwise one shared h or one per clock
    Combine combine = Explicit;
    Control control;
    std::vector<Output> outputs;  // one shared or one per clock
    u64 seed = 0;
    unsigned depth = 0;  // k_max for condition 3 of wreath_check; 0 means the width
    std::optional<Verdict> verdict;

    std::size_t clocks() const;
    /// g_j, with the control constant folded in.
    std::vector<Expr> clock_maps() const;
};

struct AbcSpec {
    unsigned width = 8;
    Lfsr lfsr;
    u64 a[3] = {1, 0, 0};
    u64 b[2] = {0, 0};
    u64 d = 3;
    std::vector<u64> dj;  // d_0..d_{n-1}
    u64 seed = 0;
    std::optional<Verdict> verdict;

    /// ((((x + a0) ^ b0) + a1) ^ b1) + a2
    Expr h() const;
    unsigned right_bits() const { return width / 2; }
    /// S(x) = d + sum_j d_j delta_{n-j-1}(x)
    u64 output_S(u64 x) const;
    /// The conditions d odd, d_0 = 1 mod 4, ord_2(d_j) = j for all j.
    static std::vector<u64> canonical_dj(unsigned n);
};

using GeneratorSpec = std::variant<OrdinarySpec, WreathSpec, AbcSpec>;

/// The wreath-product conditions on the clock maps g_0..g_{m-1}, numbered
/// in refutation witnesses:
///   1. the bits g_j(0) mod 2 have shortest cyclic period m;
///   2. they sum to 1 mod 2;
///   3. sum_j sum_{z < 2^k} (g_j(z) - z) = 2^k mod 2^(k+1), for k = 1..k_max.
/// Throws SpecError when a clock map lacks a measure-preservation proof.
Verdict wreath_check(const WreathSpec& spec, unsigned k_max);
Verdict abc_validate(const AbcSpec& spec);

/// Runs the matching check and stores the verdict in the spec.
Verdict validate(GeneratorSpec& spec);
bool is_validated(const GeneratorSpec& spec);

class Generator {
public:
    /// Throws SpecError unless the spec carries a proven verdict (or checked
    /// is false, for measurements on arbitrary specs).
    explicit Generator(const GeneratorSpec& spec, bool checked = true);

    u64 next();
    u64 state() const { return x_; }
    unsigned width() const { return width_; }
    unsigned output_bits() const { return out_bits_; }
    std::uint64_t step() const { return step_; }
    std::size_t clocks() const { return abc_ ? abc_words_.size() : clocks_.size(); }
    /// State after one step from x at the given clock index; no side effects.
    u64 transition(u64 x, std::size_t clock) const;

private:
    struct Clock {
        texpr::Program update;
        Output output;
        std::optional<texpr::Program> out_prog;
    };
    u64 emit(std::size_t clock, u64 x) const;

    unsigned width_;
    unsigned out_bits_;
    u64 mask_;
    u64 x_;
    std::uint64_t step_ = 0;
    std::vector<Clock> clocks_;
    // ABC only
    bool abc_ = false;
    AbcSpec abc_spec_;
    std::vector<u64> abc_words_;
};

std::vector<u64> keystream(const GeneratorSpec& spec, std::size_t count);
/// Successive state words x_0, x_1, ... .
std::vector<u64> state_sequence(const GeneratorSpec& spec, std::size_t count);

/// Bitwise xor; throws DomainError when the keystream is shorter than data.
BitSeq xor_cipher(const BitSeq& keystream, const BitSeq& data);

/// words as `bits`-bit values, LSB first, concatenated.
BitSeq pack_bits(const std::vector<u64>& words, unsigned bits);

nlohmann::json spec_to_json(const GeneratorSpec& spec);
/// Parses and revalidates; an embedded verdict that no longer matches is a
/// SpecError.
GeneratorSpec spec_from_json(const nlohmann::json& j);
GeneratorSpec load_spec(const std::filesystem::path& path);
void save_spec(const GeneratorSpec& spec, const std::filesystem::path& path);

enum class StreamFormat { Raw, BitPacked };
void write_keystream(const std::vector<u64>& words, unsigned bits, StreamFormat fmt, const std::filesystem::path& path);
std::vector<u64> read_keystream(const std::filesystem::path& path, unsigned bits, StreamFormat fmt);

}  // namespace tflab::generators
