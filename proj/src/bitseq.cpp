#include "tflab/bitseq.hpp"

#include <bit>

#include "tflab/error.hpp"

namespace tflab {

BitSeq BitSeq::from_string(std::string_view s) {
    BitSeq out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '1') {
            out.set(i, true);
        } else if (s[i] != '0') {
            throw ParseError("bit string may contain only 0 and 1", i);
        }
    }
    return out;
}

BitSeq BitSeq::from_words_msb_first(std::span<const std::uint64_t> words, unsigned width) {
    BitSeq out(words.size() * width);
    std::size_t pos = 0;
    for (std::uint64_t w : words) {
        for (unsigned b = width; b-- > 0;) out.set(pos++, (w >> b) & 1);
    }
    return out;
}

void BitSeq::push_back(bool v) {
    if ((size_ & 7) == 0) bytes_.push_back(0);
    ++size_;
    set(size_ - 1, v);
}

std::size_t BitSeq::popcount() const {
    std::size_t c = 0;
    for (std::uint8_t b : bytes_) c += static_cast<std::size_t>(std::popcount(b));
    return c;
}

std::string BitSeq::to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i) if ((*this)[i]) s[i] = '1';
    return s;
}

BitSeq BitSeq::repeated(std::size_t times) const {
    BitSeq out(size_ * times);
    for (std::size_t t = 0; t < times; ++t)
        for (std::size_t i = 0; i < size_; ++i) out.set(t * size_ + i, (*this)[i]);
    return out;
}

}  // namespace tflab
