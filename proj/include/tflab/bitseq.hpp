#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tflab {

// Packed bit string, LSB-first within each byte. Pad bits past size() are
// kept at zero so byte-wise comparison is exact.
class BitSeq {
public:
    BitSeq() = default;
    explicit BitSeq(std::size_t n) : bytes_((n + 7) / 8, 0), size_(n) {}

    /// Parses a string of '0'/'1' characters; anything else is rejected.
    static BitSeq from_string(std::string_view s);
    /// Concatenates words, each written most-significant bit first.
    static BitSeq from_words_msb_first(std::span<const std::uint64_t> words, unsigned width);

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool operator[](std::size_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1; }
    void set(std::size_t i, bool v) {
        std::uint8_t m = static_cast<std::uint8_t>(1u << (i & 7));
        if (v) bytes_[i >> 3] |= m; else bytes_[i >> 3] &= static_cast<std::uint8_t>(~m);
    }
    void flip(std::size_t i) { bytes_[i >> 3] ^= static_cast<std::uint8_t>(1u << (i & 7)); }
    void push_back(bool v);

    std::size_t popcount() const;
    std::string to_string() const;
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    /// The sequence repeated `times` times.
    BitSeq repeated(std::size_t times) const;

    friend bool operator==(const BitSeq&, const BitSeq&) = default;

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t size_ = 0;
};

}  // namespace tflab
