#include "tflab/kernels.hpp"

#include <atomic>
#include <omp.h>

#include "tflab/error.hpp"

namespace tflab::kernels {

namespace {

int g_jobs = 0;

void apply_jobs() {
    if (g_jobs > 0) omp_set_num_threads(g_jobs);
}

void unpack(u64 idx, unsigned m, unsigned bits, u64* out) {
    const u64 mask = word2::mask_for(bits);
    for (unsigned v = 0; v < m; ++v) out[v] = (idx >> (v * bits)) & mask;
}

void check_space(unsigned total_bits) {
    if (total_bits > 40) throw OverCap("exhaustive space of 2^" + std::to_string(total_bits) + " points is too large");
}

// One u-slice of the differential check; returns the failing h index or -1.
long long diff_at(const texpr::Program& f, const texpr::Program& fd, u64 ui, unsigned K, unsigned k,
                  std::vector<u64>& u, std::vector<u64>& v, std::vector<u64>& fu, std::vector<u64>& fv) {
    const unsigned m = static_cast<unsigned>(f.outputs());
    const unsigned w = K + k;
    const u64 mask = word2::mask_for(w);
    unpack(ui, m, w, u.data());
    fd.run(u.data(), fu.data());
    const u64 hcount = u64{1} << (m * k);
    for (u64 hi = 0; hi < hcount; ++hi) {
        u64 h[64];
        unpack(hi, m, k, h);
        for (unsigned t = 0; t < m; ++t) v[t] = (u[t] + (h[t] << K)) & mask;
        f.run(v.data(), fv.data());
        const std::size_t nf = f.outputs();
        for (std::size_t q = 0; q < nf; ++q) {
            u64 lin = 0;
            for (unsigned t = 0; t < m; ++t) lin += h[t] * fu[nf + q * m + t];
            u64 rhs = (fu[q] + (lin << K)) & mask;
            if (rhs != fv[q]) return static_cast<long long>(hi);
        }
    }
    return -1;
}

}  // namespace

void set_jobs(int jobs) {
    g_jobs = jobs < 0 ? 0 : jobs;
    if (g_jobs > 0) omp_set_num_threads(g_jobs);
}

int jobs() { return g_jobs > 0 ? g_jobs : omp_get_max_threads(); }

std::vector<u64> successor_table_serial(const texpr::Program& f) {
    check_space(f.width());
    const u64 n = u64{1} << f.width();
    std::vector<u64> t(n);
    for (u64 x = 0; x < n; ++x) t[x] = f(x);
    return t;
}

std::vector<u64> successor_table(const texpr::Program& f) {
    check_space(f.width());
    apply_jobs();
    const long long n = static_cast<long long>(u64{1} << f.width());
    std::vector<u64> t(static_cast<std::size_t>(n));
    std::atomic<bool> failed{false};
    std::string message;
#pragma omp parallel for schedule(static)
    for (long long x = 0; x < n; ++x) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
            t[static_cast<std::size_t>(x)] = f(static_cast<u64>(x));
        } catch (const std::exception& e) {
#pragma omp critical
            {
                if (!failed.exchange(true)) message = e.what();
            }
        }
    }
    if (failed) throw EvalError(message);
    return t;
}

std::vector<u64> system_table(const texpr::Program& f) {
    const unsigned m = f.outputs();
    const unsigned w = f.width();
    if (f.arity() > m) throw DomainError("system is not square");
    check_space(m * w);
    apply_jobs();
    const long long n = static_cast<long long>(u64{1} << (m * w));
    std::vector<u64> t(static_cast<std::size_t>(n));
    std::atomic<bool> failed{false};
    std::string message;
#pragma omp parallel
    {
        std::vector<u64> in(m), out(m);
#pragma omp for schedule(static)
        for (long long s = 0; s < n; ++s) {
            if (failed.load(std::memory_order_relaxed)) continue;
            try {
                unpack(static_cast<u64>(s), m, w, in.data());
                f.run(in.data(), out.data());
                u64 packed = 0;
                for (unsigned v = 0; v < m; ++v) packed |= out[v] << (v * w);
                t[static_cast<std::size_t>(s)] = packed;
            } catch (const std::exception& e) {
#pragma omp critical
                {
                    if (!failed.exchange(true)) message = e.what();
                }
            }
        }
    }
    if (failed) throw EvalError(message);
    return t;
}

std::optional<std::pair<u64, u64>> find_collision(const std::vector<u64>& table) {
    std::vector<u64> first(table.size(), ~u64{0});
    for (u64 x = 0; x < table.size(); ++x) {
        u64 y = table[x];
        if (y >= table.size()) throw DomainError("table value outside the state space");
        if (first[y] != ~u64{0}) return std::make_pair(first[y], x);
        first[y] = x;
    }
    return std::nullopt;
}

std::optional<std::pair<u64, unsigned>> compat_violation_serial(const std::vector<u64>& table, unsigned width) {
    for (u64 x = 0; x < table.size(); ++x) {
        for (unsigned i = 1; i < width; ++i) {
            u64 m = word2::mask_for(i);
            if (((table[x] ^ table[x & m]) & m) != 0) return std::make_pair(x, i);
        }
    }
    return std::nullopt;
}

std::optional<std::pair<u64, unsigned>> compat_violation(const std::vector<u64>& table, unsigned width) {
    apply_jobs();
    const long long n = static_cast<long long>(table.size());
    long long best = n;
#pragma omp parallel for reduction(min : best) schedule(static)
    for (long long x = 0; x < n; ++x) {
        if (x >= best) continue;
        for (unsigned i = 1; i < width; ++i) {
            u64 m = word2::mask_for(i);
            if (((table[static_cast<std::size_t>(x)] ^ table[static_cast<std::size_t>(x) & m]) & m) != 0) {
                best = x;
                break;
            }
        }
    }
    if (best == n) return std::nullopt;
    return compat_violation_serial(std::vector<u64>(table.begin(), table.begin() + best + 1), width);
}

std::optional<DiffFailure> differential_check_serial(const texpr::Program& f, const texpr::Program& fd,
                                                     unsigned K, unsigned k) {
    const unsigned m = static_cast<unsigned>(f.outputs());
    const unsigned w = K + k;
    check_space(m * (w + k));
    std::vector<u64> u(m), v(m), fu(fd.outputs()), fv(f.outputs());
    const u64 ucount = u64{1} << (m * w);
    for (u64 ui = 0; ui < ucount; ++ui) {
        long long hi = diff_at(f, fd, ui, K, k, u, v, fu, fv);
        if (hi >= 0) {
            DiffFailure d{std::vector<u64>(m), std::vector<u64>(m)};
            unpack(ui, m, w, d.u.data());
            unpack(static_cast<u64>(hi), m, k, d.h.data());
            return d;
        }
    }
    return std::nullopt;
}

std::optional<DiffFailure> differential_check(const texpr::Program& f, const texpr::Program& fd, unsigned K,
                                              unsigned k) {
    const unsigned m = static_cast<unsigned>(f.outputs());
    const unsigned w = K + k;
    check_space(m * (w + k));
    apply_jobs();
    const long long ucount = static_cast<long long>(u64{1} << (m * w));
    long long first_u = ucount;
#pragma omp parallel
    {
        std::vector<u64> u(m), v(m), fu(fd.outputs()), fv(f.outputs());
#pragma omp for reduction(min : first_u) schedule(dynamic, 256)
        for (long long ui = 0; ui < ucount; ++ui) {
            if (ui >= first_u) continue;
            if (diff_at(f, fd, static_cast<u64>(ui), K, k, u, v, fu, fv) >= 0) first_u = ui;
        }
    }
    if (first_u == ucount) return std::nullopt;
    std::vector<u64> u(m), v(m), fu(fd.outputs()), fv(f.outputs());
    long long hi = diff_at(f, fd, static_cast<u64>(first_u), K, k, u, v, fu, fv);
    DiffFailure d{std::vector<u64>(m), std::vector<u64>(m)};
    unpack(static_cast<u64>(first_u), m, w, d.u.data());
    unpack(static_cast<u64>(hi), m, k, d.h.data());
    return d;
}

u64 shifted_sum_serial(const texpr::Program& f) {
    const unsigned w = f.width();
    if (w < 1) throw DomainError("width must be positive");
    const u64 count = u64{1} << (w - 1);
    u64 s = 0;
    for (u64 z = 0; z < count; ++z) s += f(z) - z;
    return s & f.mask();
}

u64 shifted_sum(const texpr::Program& f) {
    const unsigned w = f.width();
    apply_jobs();
    const long long count = static_cast<long long>(u64{1} << (w - 1));
    u64 s = 0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (long long z = 0; z < count; ++z) s += f(static_cast<u64>(z)) - static_cast<u64>(z);
    return s & f.mask();
}

}  // namespace tflab::kernels
