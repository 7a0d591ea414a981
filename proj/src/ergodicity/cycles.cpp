#include <cstdlib>
#include <string>

#include "internal.hpp"
#include "tflab/ergodicity.hpp"
#include "tflab/kernels.hpp"

namespace tflab::ergodicity {

namespace {

unsigned cap_from_env() {
    if (const char* s = std::getenv("TFLAB_ORACLE_CAP")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(s, &end, 10);
        if (end != s && *end == '\0' && v >= 1 && v <= 40) return static_cast<unsigned>(v);
    }
    return 24;
}

unsigned& cap_storage() {
    static unsigned cap = cap_from_env();
    return cap;
}

}  // namespace

unsigned oracle_cap() { return cap_storage(); }

void set_oracle_cap(unsigned bits) {
    if (bits < 1 || bits > 40) throw DomainError("oracle cap must be in 1..40 bits");
    cap_storage() = bits;
}

void require_cap(unsigned bits, const std::string& what) {
    if (bits > oracle_cap()) {
        throw OverCap(what + " needs 2^" + std::to_string(bits) + " states, over the oracle cap 2^" +
                      std::to_string(oracle_cap()));
    }
}

nlohmann::json CycleReport::to_json() const {
    nlohmann::json lengths = nlohmann::json::array();
    for (auto [len, count] : cycle_lengths) lengths.push_back({len, count});
    nlohmann::json j{{"width", width},
                     {"bijective", bijective},
                     {"cycle_count", cycle_count},
                     {"cycle_lengths", lengths},
                     {"single_cycle", single_cycle}};
    if (collision) j["collision"] = {collision->first, collision->second};
    return j;
}

namespace detail {

Decomposition decompose(const std::vector<u64>& table) {
    const std::size_t n = table.size();
    Decomposition d;
    // 0 unseen, 1 on the current walk, 2 finished.
    std::vector<std::uint8_t> color(n, 0);
    std::vector<u64> walk;
    for (std::size_t start = 0; start < n; ++start) {
        if (color[start] != 0) continue;
        walk.clear();
        u64 x = start;
        while (color[x] == 0) {
            color[x] = 1;
            walk.push_back(x);
            x = table[x];
            if (x >= n) throw EvalError("successor table leaves the state space");
        }
        if (color[x] == 1) {
            u64 len = 1;
            for (u64 y = table[x]; y != x; y = table[y]) ++len;
            ++d.lengths[len];
            ++d.count;
        }
        for (u64 y : walk) color[y] = 2;
    }
    return d;
}

CycleReport report(const std::vector<u64>& table, unsigned bits) {
    CycleReport r;
    r.width = bits;
    r.collision = kernels::find_collision(table);
    r.bijective = !r.collision.has_value();
    Decomposition d = decompose(table);
    r.cycle_count = d.count;
    r.cycle_lengths = std::move(d.lengths);
    r.single_cycle = r.bijective && r.cycle_count == 1;
    return r;
}

std::vector<u64> restrict_table(const std::vector<u64>& table, unsigned bits) {
    const u64 m = word2::mask_for(bits);
    std::vector<u64> t(std::size_t{1} << bits);
    for (std::size_t x = 0; x < t.size(); ++x) t[x] = table[x] & m;
    return t;
}

std::optional<unsigned> first_failure(const std::vector<u64>& table, unsigned bits, bool need_cycle) {
    for (unsigned w = 1; w <= bits; ++w) {
        auto t = restrict_table(table, w);
        if (kernels::find_collision(t)) return w;
        if (need_cycle && decompose(t).count != 1) return w;
    }
    return std::nullopt;
}

std::vector<u64> univariate_table(const Expr& f, unsigned width) {
    if (texpr::arity(f) > 1) throw DomainError("expected a univariate expression");
    require_cap(width, "cycle enumeration");
    return kernels::successor_table(texpr::Program(f, width));
}

}  // namespace detail

CycleReport cycle_structure(const std::vector<u64>& table, unsigned bits) {
    if (table.size() != (std::size_t{1} << bits)) throw DomainError("table size is not 2^bits");
    return detail::report(table, bits);
}

CycleReport cycle_structure(const Expr& f, unsigned width) {
    return detail::report(detail::univariate_table(f, width), width);
}

CycleReport system_cycle_structure(const std::vector<Expr>& F, unsigned width) {
    const unsigned m = static_cast<unsigned>(F.size());
    require_cap(m * width, "system cycle enumeration");
    texpr::Program prog(F, width);
    if (prog.arity() > m) throw DomainError("system uses more variables than it has components");
    return detail::report(kernels::system_table(prog), m * width);
}

}  // namespace tflab::ergodicity
