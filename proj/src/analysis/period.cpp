#include <functional>
#include <utility>

#include "tflab/analysis.hpp"

namespace tflab::analysis {

namespace {

template <class State, class Step>
PeriodResult brent(State x0, Step step, u64 cap) {
    PeriodResult r;
    u64 power = 1, lam = 1;
    State tortoise = x0;
    State hare = step(x0);
    while (tortoise != hare) {
        if (power == lam) {
            tortoise = hare;
            power *= 2;
            lam = 0;
        }
        hare = step(hare);
        if (++lam > cap) return r;
    }
    tortoise = x0;
    hare = x0;
    for (u64 i = 0; i < lam; ++i) hare = step(hare);
    u64 mu = 0;
    while (tortoise != hare) {
        tortoise = step(tortoise);
        hare = step(hare);
        if (++mu > cap) return r;
    }
    r.found = true;
    r.preperiod = mu;
    r.period = lam;
    return r;
}

}  // namespace

PeriodResult period(const generators::GeneratorSpec& spec, u64 cap) {
    const generators::Generator g(spec, false);
    const std::size_t m = g.clocks();
    using State = std::pair<u64, std::size_t>;
    return brent(State{g.state(), 0},
                 [&](const State& s) { return State{g.transition(s.first, s.second), (s.second + 1) % m}; }, cap);
}

PeriodResult period(const texpr::Expr& f, unsigned width, u64 seed, u64 cap) {
    const texpr::Program p(f, width);
    return brent(seed & p.mask(), [&](u64 x) { return p(x); }, cap);
}

PeriodResult data_period(std::span<const u64> seq) {
    PeriodResult r;
    const std::size_t n = seq.size();
    // Least p whose periodic tail covers two full periods; q is where that
    // tail starts. Wrong candidates usually fail within a few terms.
    for (std::size_t p = 1; 2 * p <= n; ++p) {
        std::size_t q = n - p;
        while (q > 0 && seq[q - 1] == seq[q - 1 + p]) --q;
        if (q + 2 * p <= n) {
            r.found = true;
            r.preperiod = q;
            r.period = p;
            return r;
        }
    }
    return r;
}

}  // namespace tflab::analysis
