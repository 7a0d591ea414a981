#include <bit>
#include <cmath>
#include <fstream>

#include "tflab/analysis.hpp"

namespace tflab::analysis {

namespace {

// Largest cycle handed to the ring elimination, and to the 2-adic reduction.
constexpr std::size_t kLcRingMax = 512;
constexpr std::size_t kPhi2Max = 1u << 16;

}  // namespace

SeqReport analyze(std::span<const u64> seq, unsigned width, const AnalyzeOptions& opt) {
    word2::check_width(width);
    SeqReport r;
    r.width = width;
    r.length = seq.size();
    r.period = data_period(seq);

    // The cycle the cyclic measures run on: the detected period, or the whole
    // input when it is read as one full cycle.
    std::span<const u64> cycle = seq;
    if (r.period.found) {
        cycle = seq.subspan(r.period.preperiod, r.period.period);
    } else if (!opt.cyclic) {
        cycle = {};
    }

    if (!cycle.empty() && width <= 24) {
        std::vector<u64> counts(std::size_t{1} << width, 0);
        for (u64 x : cycle) ++counts[x & word2::mask_for(width)];
        r.uniform_ok = true;
        for (u64 c : counts) r.uniform_ok = r.uniform_ok && c == counts[0];
    }

    if (!cycle.empty()) {
        for (unsigned j = 0; j < width; ++j) {
            r.coords.push_back(coord_seq(cycle, j, opt.m));
            r.coord_lc.push_back(lc_periodic(r.coords.back().bits));
        }
    }

    std::vector<u64> words(cycle.empty() ? seq.begin() : cycle.begin(), cycle.empty() ? seq.end() : cycle.end());
    for (u64& w : words) w &= word2::mask_for(width);
    const BitSeq stream = BitSeq::from_words_msb_first(words, width);
    if (stream.size() >= 2) {
        r.q1 = q1_check(stream, opt.cyclic);
        const unsigned kmax = std::min(8u, static_cast<unsigned>(std::bit_width(stream.size())) - 1);
        for (unsigned k = 1; k <= kmax; ++k) {
            KDist d = k_distribution(stream, k, opt.cyclic);
            d.counts.clear();
            r.kdist.push_back(std::move(d));
        }
    }

    if (opt.with_lc_ring && !cycle.empty() && cycle.size() <= kLcRingMax) r.lc_ring = lc_ring(cycle, width);

    if (!r.coords.empty()) {
        const unsigned j = opt.phi2_coord.value_or(width - 1);
        if (j >= width) throw DomainError("phi2 coordinate out of range");
        if (r.coords[j].period <= kPhi2Max) {
            BitSeq per(r.coords[j].period);
            for (std::size_t i = 0; i < per.size(); ++i) per.set(i, r.coords[j].bits[i]);
            r.phi2 = two_adic_general(per);
            r.phi2_coord = j;
        }
    }

    if (opt.scatter_csv) {
        std::ofstream out(*opt.scatter_csv);
        if (!out) throw Error("cannot write " + opt.scatter_csv->string());
        out << scatter_csv(pair_scatter(seq, width), width);
        r.scatter_path = opt.scatter_csv->string();
    }
    return r;
}

nlohmann::json SeqReport::to_json() const {
    using nlohmann::json;
    json j;
    j["width"] = width;
    j["length"] = length;
    j["period"] = period.found ? json{{"pre", period.preperiod}, {"len", period.period}}
                               : json{{"pre", nullptr}, {"len", nullptr}};
    j["uniform"] = {{"width", width}, {"counts_ok", uniform_ok}};
    j["coords"] = json::array();
    for (std::size_t i = 0; i < coords.size(); ++i) {
        j["coords"].push_back({{"j", coords[i].j},
                               {"period", coords[i].period},
                               {"half_negation", coords[i].half_negation},
                               {"lc", coord_lc[i]}});
    }
    j["q1"] = {{"pass", q1.pass}, {"worst_k", q1.worst_k}, {"worst_deviation", q1.worst_deviation},
               {"failing", q1.failing}};
    j["kdist"] = json::array();
    for (const KDist& d : kdist) j["kdist"].push_back({{"k", d.k}, {"strict", d.strict}});
    j["lc_ring"] = lc_ring ? json(*lc_ring) : json(nullptr);
    j["lc_ring_definition"] = "least r with an affine relation of length r, some coefficient odd";
    if (phi2) {
        j["phi2"] = {{"coord", *phi2_coord}, {"u", phi2->u.str()}, {"v", phi2->v.str()}, {"log2", std::round(phi2->log2 * 1e6) / 1e6}};
    } else {
        j["phi2"] = nullptr;
    }
    j["files"] = {{"scatter_csv", scatter_path ? json(*scatter_path) : json(nullptr)}};
    return j;
}

}  // namespace tflab::analysis
