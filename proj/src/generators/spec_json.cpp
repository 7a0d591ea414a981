#include <cstdio>
#include <fstream>
#include <string>

#include "tflab/generators.hpp"

namespace tflab::generators {

using nlohmann::json;

namespace {

std::string hex(u64 v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

u64 from_hex(const json& j, const char* what) {
    if (j.is_number_unsigned()) return j.get<u64>();
    if (!j.is_string()) throw SpecError(std::string(what) + ": expected a hex string");
    const std::string s = j.get<std::string>();
    std::size_t used = 0;
    u64 v = 0;
    try {
        v = std::stoull(s, &used, 16);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw SpecError(std::string(what) + ": bad hex value '" + s + "'");
    return v;
}

json output_json(const Output& o) {
    switch (o.kind) {
        case Output::Identity: return {{"kind", "identity"}};
        case Output::Top: return {{"kind", "top"}, {"params", {{"k", o.k}}}};
        case Output::BitRevThenH: {
            json p{{"h", texpr::to_string(*o.h)}};
            if (o.h_verdict) p["verdict"] = o.h_verdict->to_json();
            return {{"kind", "bitrev"}, {"params", p}};
        }
    }
    return {};
}

Output output_from(const json& j, unsigned width) {
    const std::string kind = j.value("kind", "identity");
    if (kind == "identity") return identity_output();
    if (kind == "top") return top_output(j.at("params").at("k").get<unsigned>());
    if (kind == "bitrev") {
        const json& p = j.at("params");
        Expr h = texpr::parse(p.at("h").get<std::string>());
        Verdict v = ergodicity::verify_auto(h, ergodicity::Property::Ergodic, std::min(width, 12u));
        if (p.contains("verdict") && Verdict::from_json(p["verdict"]).result != v.result) {
            throw SpecError("embedded verdict of the output map no longer holds");
        }
        return bitrev_output(h, v, width);
    }
    throw SpecError("unknown output kind '" + kind + "'");
}

json lfsr_json(const Lfsr& l) {
    return {{"cells", l.cells}, {"taps_hex", hex(l.taps)}, {"state_hex", hex(l.state)}};
}

Lfsr lfsr_from(const json& j) {
    Lfsr l;
    l.taps = from_hex(j.at("taps_hex"), "taps_hex");
    l.state = from_hex(j.at("state_hex"), "state_hex");
    l.cells = j.contains("cells") ? j["cells"].get<unsigned>() : static_cast<unsigned>(std::bit_width(l.taps));
    if (l.cells < 2 || l.cells > 32) throw SpecError("LFSR cells must be in 2..32");
    return l;
}

}  // namespace

json spec_to_json(const GeneratorSpec& spec) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            json j{{"width", s.width}, {"seed", hex(s.seed)}};
            if constexpr (std::is_same_v<T, OrdinarySpec>) {
                j["type"] = "ordinary";
                j["exprs"] = {texpr::to_string(s.f)};
                j["output"] = output_json(s.output);
            } else if constexpr (std::is_same_v<T, WreathSpec>) {
                j["type"] = "wreath";
                json ex = json::array();
                for (const auto& e : s.exprs) ex.push_back(texpr::to_string(e));
                j["exprs"] = ex;
                j["combine"] = s.combine == WreathSpec::Add ? "add" : s.combine == WreathSpec::Xor ? "xor" : "explicit";
                if (s.control.lfsr) {
                    j["control"] = {{"lfsr", lfsr_json(*s.control.lfsr)}};
                } else {
                    json c = json::array();
                    for (u64 v : s.control.consts) c.push_back(hex(v));
                    j["control"] = {{"consts", c}};
                }
                if (s.outputs.size() == 1) {
                    j["output"] = output_json(s.outputs[0]);
                } else if (!s.outputs.empty()) {
                    json o = json::array();
                    for (const auto& x : s.outputs) o.push_back(output_json(x));
                    j["outputs"] = o;
                }
                if (s.depth != 0) j["depth"] = s.depth;
            } else {
                j["type"] = "abc";
                j["control"] = {{"lfsr", lfsr_json(s.lfsr)}};
                json dj = json::array();
                for (u64 v : s.dj) dj.push_back(hex(v));
                j["abc"] = {{"a", {hex(s.a[0]), hex(s.a[1]), hex(s.a[2])}},
                            {"b", {hex(s.b[0]), hex(s.b[1])}},
                            {"d_hex", hex(s.d)},
                            {"dj_hex", dj}};
                j["output"] = {{"kind", "abc"}, {"params", {{"split", "right=floor(n/2) low bits, left=rest in place"}}}};
            }
            if (s.verdict) j["verdict"] = s.verdict->to_json();
            return j;
        },
        spec);
}

GeneratorSpec spec_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    const unsigned width = j.at("width").get<unsigned>();
    word2::check_width(width);
    const u64 seed = j.contains("seed") ? from_hex(j["seed"], "seed") : 0;
    auto exprs = [&]() {
        std::vector<Expr> v;
        for (const auto& e : j.at("exprs")) v.push_back(texpr::parse(e.get<std::string>()));
        return v;
    };
    GeneratorSpec spec;
    if (type == "ordinary") {
        OrdinarySpec s;
        s.width = width;
        s.seed = seed;
        auto ex = exprs();
        if (ex.size() != 1) throw SpecError("ordinary generator takes exactly one expression");
        s.f = ex[0];
        if (j.contains("output")) s.output = output_from(j["output"], width);
        spec = s;
    } else if (type == "wreath") {
        WreathSpec s;
        s.width = width;
        s.seed = seed;
        s.exprs = exprs();
        const std::string comb = j.value("combine", "explicit");
        if (comb == "add") s.combine = WreathSpec::Add;
        else if (comb == "xor") s.combine = WreathSpec::Xor;
        else if (comb == "explicit") s.combine = WreathSpec::Explicit;
        else throw SpecError("unknown combine mode '" + comb + "'");
        if (j.contains("control")) {
            const json& c = j["control"];
            if (c.contains("lfsr")) s.control.lfsr = lfsr_from(c["lfsr"]);
            if (c.contains("consts"))
                for (const auto& v : c["consts"]) s.control.consts.push_back(from_hex(v, "consts"));
        }
        if (j.contains("output")) s.outputs.push_back(output_from(j["output"], width));
        if (j.contains("outputs"))
            for (const auto& o : j["outputs"]) s.outputs.push_back(output_from(o, width));
        s.depth = j.value("depth", 0u);
        spec = s;
    } else if (type == "abc") {
        AbcSpec s;
        s.width = width;
        s.seed = seed;
        s.lfsr = lfsr_from(j.at("control").at("lfsr"));
        const json& a = j.at("abc");
        for (int i = 0; i < 3; ++i) s.a[i] = from_hex(a.at("a").at(i), "a");
        for (int i = 0; i < 2; ++i) s.b[i] = from_hex(a.at("b").at(i), "b");
        s.d = from_hex(a.at("d_hex"), "d_hex");
        for (const auto& v : a.at("dj_hex")) s.dj.push_back(from_hex(v, "dj_hex"));
        spec = s;
    } else {
        throw SpecError("unknown generator type '" + type + "'");
    }
    Verdict v = validate(spec);
    if (j.contains("verdict")) {
        Verdict old = Verdict::from_json(j["verdict"]);
        if (old.result != v.result || old.theorem != v.theorem) {
            throw SpecError("embedded verdict (" + std::string(ergodicity::to_string(old.result)) +
                            ") no longer holds: revalidation gives " + ergodicity::to_string(v.result));
        }
    }
    return spec;
}

GeneratorSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("spec file is not valid JSON: ") + e.what(), e.byte);
    }
    return spec_from_json(j);
}

void save_spec(const GeneratorSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << spec_to_json(spec).dump(2) << '\n';
}

}  // namespace tflab::generators
