#pragma once

// Exhaustive loops shared by the verifiers. Each kernel has a plain serial
// version, kept as the reference, and an OpenMP version used by default.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tflab/program.hpp"

namespace tflab::kernels {

using word2::u64;

/// Thread count for the parallel kernels; 0 restores the OpenMP default.
void set_jobs(int jobs);
int jobs();

/// f(x) for every x < 2^width of a univariate program.
std::vector<u64> successor_table_serial(const texpr::Program& f);
std::vector<u64> successor_table(const texpr::Program& f);

/// Successor table of an m-variate square system on (Z/2^w)^m, states packed
/// as x_0 + 2^w x_1 + ... .
std::vector<u64> system_table(const texpr::Program& f);

/// The smallest x < y with table[x] == table[y], if any.
std::optional<std::pair<u64, u64>> find_collision(const std::vector<u64>& table);

/// First (x, i) with table[x] != table[x mod 2^i] mod 2^i.
std::optional<std::pair<u64, unsigned>> compat_violation_serial(const std::vector<u64>& table, unsigned width);
std::optional<std::pair<u64, unsigned>> compat_violation(const std::vector<u64>& table, unsigned width);

struct DiffFailure {
    std::vector<u64> u;
    std::vector<u64> h;
};

/// Exhaustive check of F(u + 2^K h) == F(u) + 2^K J(u) h mod 2^(K+k).
/// f holds the m outputs; fd holds the same outputs followed by the m*m
/// partials in [func][var] order. Both are compiled at width K+k.
std::optional<DiffFailure> differential_check_serial(const texpr::Program& f, const texpr::Program& fd,
                                                     unsigned K, unsigned k);
std::optional<DiffFailure> differential_check(const texpr::Program& f, const texpr::Program& fd,
                                              unsigned K, unsigned k);

/// Sum over z < 2^(width-1) of f(z) - z, reduced mod 2^width.
u64 shifted_sum_serial(const texpr::Program& f);
u64 shifted_sum(const texpr::Program& f);

}  // namespace tflab::kernels
