#pragma once

#include <map>
#include <optional>
#include <vector>

#include "tflab/ergodicity.hpp"

namespace tflab::ergodicity::detail {

struct Decomposition {
    std::size_t count = 0;
    std::map<u64, std::size_t> lengths;
};

/// Cycles of the functional graph on 0..table.size()-1 (any size).
Decomposition decompose(const std::vector<u64>& table);
CycleReport report(const std::vector<u64>& table, unsigned bits);
std::vector<u64> restrict_table(const std::vector<u64>& table, unsigned bits);
/// Smallest width w <= bits where the map stops being bijective (or, with
/// need_cycle, transitive) mod 2^w.
std::optional<unsigned> first_failure(const std::vector<u64>& table, unsigned bits, bool need_cycle);
std::vector<u64> univariate_table(const Expr& f, unsigned width);

inline u64 pow2(unsigned k) { return k >= 64 ? 0 : u64{1} << k; }

}  // namespace tflab::ergodicity::detail
