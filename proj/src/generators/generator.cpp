#include <fstream>
#include <string>

#include "tflab/generators.hpp"

namespace tflab::generators {

using ergodicity::Property;
using ergodicity::Result;

Output identity_output() { return Output{}; }

Output top_output(unsigned k) {
    if (k < 1 || k > 64) throw DomainError("top-k output needs 1 <= k <= 64");
    Output o;
    o.kind = Output::Top;
    o.k = k;
    return o;
}

Output bitrev_output(const Expr& h, const Verdict& verdict, unsigned width) {
    word2::check_width(width);
    if (texpr::arity(h) > 1) throw DomainError("bit-reversal output map must be univariate");
    if (verdict.result != Result::Proven || verdict.property != Property::Ergodic) {
        throw SpecError("bit-reversal output needs an ergodic map with a proven verdict");
    }
    Output o;
    o.kind = Output::BitRevThenH;
    o.h = h;
    o.h_verdict = verdict;
    return o;
}

Expr AbcSpec::h() const {
    const Expr x = Expr::var(0);
    return ((((x + a[0]) ^ b[0]) + a[1]) ^ b[1]) + a[2];
}

u64 AbcSpec::output_S(u64 x) const {
    u64 s = d;
    for (unsigned j = 0; j < width; ++j) {
        if ((x >> (width - j - 1)) & 1) s += dj[j];
    }
    return s & word2::mask_for(width);
}

std::vector<u64> AbcSpec::canonical_dj(unsigned n) {
    std::vector<u64> v(n);
    v[0] = 1;
    for (unsigned j = 1; j < n; ++j) v[j] = u64{1} << j;
    return v;
}

Generator::Generator(const GeneratorSpec& spec, bool checked) {
    if (checked && !is_validated(spec)) throw SpecError("spec has not been validated; refusing to emit keystream");
    std::visit(
        [this](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            width_ = s.width;
            mask_ = word2::mask_for(width_);
            x_ = s.seed & mask_;
            auto add_clock = [this](const Expr& g, const Output& o) {
                if (o.kind == Output::Top && o.k > width_) throw SpecError("top-k output wider than the state");
                if (o.kind == Output::BitRevThenH &&
                    (!o.h || !o.h_verdict || o.h_verdict->result != Result::Proven)) {
                    throw SpecError("bit-reversal output lacks a proven ergodic map");
                }
                Clock c{texpr::Program(g, width_), o, std::nullopt};
                if (o.kind == Output::BitRevThenH) c.out_prog.emplace(*o.h, width_);
                clocks_.push_back(std::move(c));
            };
            if constexpr (std::is_same_v<T, OrdinarySpec>) {
                add_clock(s.f, s.output);
                out_bits_ = s.output.bits(width_);
            } else if constexpr (std::is_same_v<T, WreathSpec>) {
                const auto g = s.clock_maps();
                if (s.outputs.size() > 1 && s.outputs.size() != g.size()) {
                    throw SpecError("need one shared output or one per clock");
                }
                const Output shared = s.outputs.empty() ? Output{} : s.outputs[0];
                for (std::size_t j = 0; j < g.size(); ++j) add_clock(g[j], s.outputs.size() > 1 ? s.outputs[j] : shared);
                out_bits_ = clocks_[0].output.bits(width_);
                for (const auto& c : clocks_) {
                    if (c.output.bits(width_) != out_bits_) throw SpecError("clock outputs differ in width");
                }
            } else {
                abc_ = true;
                abc_spec_ = s;
                abc_words_ = lfsr_words(s.lfsr, width_);
                add_clock(s.h(), Output{});
                out_bits_ = width_;
            }
        },
        spec);
}

u64 Generator::emit(std::size_t clock, u64 x) const {
    const Clock& c = clocks_[clock];
    switch (c.output.kind) {
        case Output::Identity: return x;
        case Output::Top: return x >> (width_ - c.output.k);
        case Output::BitRevThenH: return (*c.out_prog)(bitrev(x, width_));
    }
    return x;
}

u64 Generator::transition(u64 x, std::size_t clock) const {
    if (abc_) return ((abc_words_[clock] & word2::mask_for(width_ / 2)) + clocks_[0].update(x)) & mask_;
    return clocks_[clock].update(x);
}

u64 Generator::next() {
    u64 z;
    if (abc_) {
        const u64 w = abc_words_[step_ % abc_words_.size()];
        const u64 right = word2::mask_for(width_ / 2);
        z = ((w & ~right) + abc_spec_.output_S(x_)) & mask_;
        x_ = ((w & right) + clocks_[0].update(x_)) & mask_;
    } else {
        const std::size_t j = step_ % clocks_.size();
        z = emit(j, x_);
        x_ = clocks_[j].update(x_);
    }
    ++step_;
    return z;
}

std::vector<u64> keystream(const GeneratorSpec& spec, std::size_t count) {
    Generator g(spec);
    std::vector<u64> out(count);
    for (auto& z : out) z = g.next();
    return out;
}

std::vector<u64> state_sequence(const GeneratorSpec& spec, std::size_t count) {
    Generator g(spec);
    std::vector<u64> out(count);
    for (auto& x : out) {
        x = g.state();
        g.next();
    }
    return out;
}

BitSeq xor_cipher(const BitSeq& keystream, const BitSeq& data) {
    if (keystream.size() < data.size()) {
        throw DomainError("keystream underrun: " + std::to_string(keystream.size()) + " bits for " +
                          std::to_string(data.size()) + " bits of data");
    }
    BitSeq out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.set(i, data[i] != keystream[i]);
    return out;
}

BitSeq pack_bits(const std::vector<u64>& words, unsigned bits) {
    word2::check_width(bits);
    BitSeq s(words.size() * bits);
    std::size_t pos = 0;
    for (u64 w : words)
        for (unsigned b = 0; b < bits; ++b) s.set(pos++, (w >> b) & 1);
    return s;
}

void write_keystream(const std::vector<u64>& words, unsigned bits, StreamFormat fmt,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    if (fmt == StreamFormat::BitPacked) {
        const BitSeq packed = pack_bits(words, bits);
        const auto& bytes = packed.bytes();
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    } else {
        const unsigned nbytes = (bits + 7) / 8;
        for (u64 w : words)
            for (unsigned i = 0; i < nbytes; ++i) out.put(static_cast<char>((w >> (8 * i)) & 0xff));
    }
    if (!out) throw Error("write failed for " + path.string());
}

std::vector<u64> read_keystream(const std::filesystem::path& path, unsigned bits, StreamFormat fmt) {
    word2::check_width(bits);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<u64> words;
    if (fmt == StreamFormat::BitPacked) {
        const std::size_t total = bytes.size() * 8 / bits;
        for (std::size_t k = 0; k < total; ++k) {
            u64 w = 0;
            for (unsigned b = 0; b < bits; ++b) {
                const std::size_t i = k * bits + b;
                w |= static_cast<u64>((bytes[i >> 3] >> (i & 7)) & 1) << b;
            }
            words.push_back(w);
        }
    } else {
        const unsigned nbytes = (bits + 7) / 8;
        if (bytes.size() % nbytes != 0) throw ParseError("raw keystream length is not a whole number of words", bytes.size());
        for (std::size_t k = 0; k < bytes.size(); k += nbytes) {
            u64 w = 0;
            for (unsigned i = 0; i < nbytes; ++i) w |= static_cast<u64>(bytes[k + i]) << (8 * i);
            words.push_back(w & word2::mask_for(bits));
        }
    }
    return words;
}

}  // namespace tflab::generators
