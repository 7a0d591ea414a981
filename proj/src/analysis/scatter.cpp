#include <set>
#include <sstream>

#include "tflab/analysis.hpp"

namespace tflab::analysis {

Scatter pair_scatter(std::span<const u64> seq, unsigned width, std::optional<u64> b) {
    const word2::Ring ring(width);
    Scatter s;
    std::set<std::pair<u64, u64>> pts;
    std::set<u64> lines;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const u64 x = ring.reduce(seq[i]), y = ring.reduce(seq[i + 1]);
        pts.emplace(x, y);
        if (b) lines.insert(ring.sub(y, ring.mul(*b, x)));
    }
    s.points.assign(pts.begin(), pts.end());
    if (b) s.line_count = lines.size();
    return s;
}

std::string dyadic_decimal(u64 num, unsigned width) {
    word2::check_width(width);
    if (num == 0) return "0";
    if (width < 64 && num >> width) throw DomainError("dyadic_decimal: numerator not below 2^width");
    cpp_int five = 1;
    for (unsigned i = 0; i < width; ++i) five *= 5;
    std::string digits = (cpp_int(num) * five).str();
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    return "0." + digits;
}

std::string scatter_csv(const Scatter& s, unsigned width) {
    std::ostringstream out;
    out << "x,y\n";
    for (const auto& [x, y] : s.points) out << dyadic_decimal(x, width) << ',' << dyadic_decimal(y, width) << '\n';
    return out.str();
}

}  // namespace tflab::analysis
