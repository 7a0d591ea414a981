#include "tflab/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "tflab/analysis.hpp"
#include "tflab/ergodicity.hpp"
#include "tflab/generators.hpp"
#include "tflab/kernels.hpp"

namespace tflab::cli {

namespace {

using nlohmann::json;
using word2::u64;
namespace erg = ergodicity;
namespace gen = generators;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

class IoError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

// Longest sequence produced when --count is left to default to a full period.
constexpr u64 kMaxDefaultCount = u64{1} << 24;

int exit_code(erg::Result r) {
    switch (r) {
        case erg::Result::Proven: return kProven;
        case erg::Result::Refuted: return kRefuted;
        default: return kUnknown;
    }
}

void emit_json(const json& j, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << j.dump(2) << '\n';
}

u64 parse_u64(const std::string& s) {
    try {
        std::size_t pos = 0;
        const u64 v = std::stoull(s, &pos, 0);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("not an unsigned integer: '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        const auto a = cur.find_first_not_of(" \t"), b = cur.find_last_not_of(" \t");
        if (a == std::string::npos) throw UsageError("empty entry in list '" + s + "'");
        parts.push_back(cur.substr(a, b - a + 1));
    }
    if (parts.empty()) throw UsageError("empty list");
    return parts;
}

std::vector<cpp_int> int_list(const std::string& s) {
    std::vector<cpp_int> out;
    for (const auto& p : split(s)) {
        try {
            out.emplace_back(p);
        } catch (const std::exception&) {
            throw UsageError("not an integer: '" + p + "'");
        }
    }
    return out;
}

std::vector<cpp_rational> rational_list(const std::string& s) {
    std::vector<cpp_rational> out;
    for (const auto& p : split(s)) {
        const auto slash = p.find('/');
        try {
            if (slash == std::string::npos) {
                out.emplace_back(cpp_int(p));
            } else {
                const cpp_int den(p.substr(slash + 1));
                if (den == 0) throw UsageError("zero denominator in '" + p + "'");
                out.emplace_back(cpp_int(p.substr(0, slash)), den);
            }
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception&) {
            throw UsageError("not a rational: '" + p + "'");
        }
    }
    return out;
}

json big_list(const std::vector<cpp_int>& v) {
    json a = json::array();
    for (const auto& c : v) a.push_back(c.str());
    return a;
}

std::string hex_word(u64 v, unsigned bits) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%0*llx", static_cast<int>((bits + 3) / 4), static_cast<unsigned long long>(v));
    return buf;
}

std::vector<u64> read_hex(std::istream& in, unsigned bits) {
    std::vector<u64> words;
    std::string tok;
    const u64 mask = word2::mask_for(bits);
    while (in >> tok) {
        if (tok.rfind("0x", 0) == 0 || tok.rfind("0X", 0) == 0) tok = tok.substr(2);
        std::size_t pos = 0;
        u64 v = 0;
        try {
            v = std::stoull(tok, &pos, 16);
        } catch (const std::logic_error&) {
            pos = 0;
        }
        if (pos != tok.size() || tok.empty()) throw DomainError("bad hex word '" + tok + "'");
        if (v & ~mask) throw DomainError("word " + tok + " does not fit in " + std::to_string(bits) + " bits");
        words.push_back(v);
    }
    return words;
}

// Where a word sequence comes from: an expression orbit, a spec file, or data.
struct Source {
    std::string expr;
    std::string spec;
    std::string in;
    std::string format = "hex";
    unsigned width = 32;
    u64 seed = 0;
    std::optional<u64> count;

    void add_to(CLI::App* sub, bool with_in) {
        auto* e = sub->add_option("--expr", expr, "T-function of x, iterated from --seed");
        auto* s = sub->add_option("--spec", spec, "validated generator spec (JSON)");
        e->excludes(s);
        if (with_in) {
            auto* i = sub->add_option("--in", in, "input words ('-' for stdin)");
            i->excludes(e)->excludes(s);
        }
        sub->add_option("--format", format, "word file format")->check(CLI::IsMember({"hex", "raw", "packed"}));
        sub->add_option("--width", width, "word width n")->check(CLI::Range(1, 64));
        sub->add_option("--seed", seed, "initial state for --expr");
        sub->add_option("--count", count, "number of words (default: one full period)");
    }

    bool any() const { return !expr.empty() || !spec.empty() || !in.empty(); }
};

struct Words {
    std::vector<u64> words;
    unsigned bits = 0;
    std::optional<gen::GeneratorSpec> spec;
    std::optional<texpr::Expr> expr;
};

u64 full_count(u64 full, const std::optional<u64>& count) {
    if (count) return *count;
    if (full > kMaxDefaultCount) throw UsageError("full period is too long to default to; pass --count");
    return full;
}

std::vector<u64> orbit(const texpr::Expr& f, unsigned width, u64 seed, u64 count) {
    const texpr::Program p(f, width);
    std::vector<u64> out;
    out.reserve(count);
    u64 x = seed & p.mask();
    for (u64 i = 0; i < count; ++i) {
        out.push_back(x);
        x = p(x);
    }
    return out;
}

gen::GeneratorSpec load_spec_file(const std::string& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path);
    return gen::load_spec(path);
}

Words load_words(const Source& s) {
    Words w;
    if (!s.spec.empty()) {
        gen::GeneratorSpec spec = load_spec_file(s.spec);
        const gen::Generator g(spec);
        w.bits = g.output_bits();
        const u64 full = g.width() >= 40 ? ~u64{0} : (u64{1} << g.width()) * g.clocks();
        w.words = gen::keystream(spec, full_count(full, s.count));
        w.spec = std::move(spec);
    } else if (!s.expr.empty()) {
        w.expr = texpr::parse(s.expr);
        w.bits = s.width;
        const u64 full = s.width >= 40 ? ~u64{0} : u64{1} << s.width;
        w.words = orbit(*w.expr, s.width, s.seed, full_count(full, s.count));
    } else if (!s.in.empty()) {
        w.bits = s.width;
        if (s.format == "hex") {
            if (s.in == "-") {
                w.words = read_hex(std::cin, s.width);
            } else {
                std::ifstream f(s.in);
                if (!f) throw IoError("cannot read " + s.in);
                w.words = read_hex(f, s.width);
            }
        } else {
            if (!std::filesystem::exists(s.in)) throw IoError("no such file: " + s.in);
            w.words = gen::read_keystream(s.in, s.width, s.format == "raw" ? gen::StreamFormat::Raw
                                                                          : gen::StreamFormat::BitPacked);
        }
        if (s.count && *s.count < w.words.size()) w.words.resize(*s.count);
    } else {
        throw UsageError("one of --expr, --spec or --in is required");
    }
    return w;
}

std::string quote(const std::string& v) {
    if (!v.empty() && v.find_first_of(" \t'\"|&*^()<>;$\\!~") == std::string::npos) return v;
    std::string q = "'";
    for (char c : v) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

void emit_options(std::ostringstream& o, const CLI::App* a) {
    for (const CLI::Option* opt : a->get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames()[0] == "help") continue;
        const std::string name = "--" + opt->get_lnames()[0];
        if (opt->get_expected_min() == 0) {
            if (opt->count() > 0) o << ' ' << name;
            continue;
        }
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) o << ' ' << name << ' ' << quote(r);
        } else if (!opt->get_default_str().empty()) {
            o << ' ' << name << ' ' << quote(opt->get_default_str());
        }
    }
}

// A command line that replays this run, including the oracle cap in force.
std::string effective_config(const CLI::App& app, const CLI::App* sub) {
    std::ostringstream o;
    o << "TFLAB_ORACLE_CAP=" << erg::oracle_cap() << " tflab";
    emit_options(o, &app);
    o << ' ' << sub->get_name();
    emit_options(o, sub);
    return o.str();
}

// ---- verify

struct VerifyOpts {
    std::string expr;
    unsigned width = 32;
    std::string property = "ergodic";
    std::string method = "auto";
    unsigned test_width = 10;
    std::string out;
};

erg::Property parse_property(const std::string& s) {
    return s == "ergodic" ? erg::Property::Ergodic : erg::Property::MeasurePreserving;
}

int do_verify(const VerifyOpts& o, std::ostream& out) {
    const texpr::Expr f = texpr::parse(o.expr);
    const erg::Property prop = parse_property(o.property);
    erg::Verdict v;
    try {
        if (o.method == "auto") {
            v = erg::verify_auto(f, prop, o.width, o.test_width);
        } else if (o.method == "brute") {
            erg::require_cap(o.width, "brute-force verification");
            v = erg::verify(f, prop, erg::Policy::brute(o.width));
        } else if (o.method == "deriv") {
            v = erg::verify(f, prop, erg::Policy::derivative(o.test_width));
        } else if (o.method == "anf") {
            v = erg::verify(f, prop, erg::Policy::anf(o.width - 1, o.test_width));
        } else if (o.method == "ff") {
            v = erg::verify(f, prop, erg::Policy::falling_factorial());
        } else {
            v = erg::verify(f, prop, erg::Policy::b2class());
        }
    } catch (const PolicyInapplicable& e) {
        v.property = prop;
        v.result = erg::Result::Unknown;
        v.method = o.method;
        v.witness = {{"inapplicable", e.what()}};
    }
    json j = v.to_json();
    j["expr"] = texpr::to_string(f);
    j["width"] = o.width;
    emit_json(j, o.out, out);
    return exit_code(v.result);
}

// ---- classify

struct ClassifyOpts {
    std::string poly_ff;
    std::string poly;
    std::string rational;
    std::optional<u64> ks;
    u64 p = 2;
    unsigned width = 8;
    bool perm = false;
    std::string property = "ergodic";
    std::string out;
};

bool satisfies(erg::PolyClass c, erg::Property prop) {
    if (prop == erg::Property::Ergodic) return c == erg::PolyClass::Ergodic;
    return c != erg::PolyClass::Neither;
}

int do_classify(const ClassifyOpts& o, std::ostream& out) {
    const int given = !o.poly_ff.empty() + !o.poly.empty() + !o.rational.empty() + o.ks.has_value();
    if (given != 1) throw UsageError("give exactly one of --poly-ff, --poly, --rational, --ks");
    const erg::Property prop = parse_property(o.property);
    json j;
    int code = kRefuted;
    if (!o.poly_ff.empty()) {
        const auto ff = int_list(o.poly_ff);
        const erg::PolyClass c = erg::classify_poly_ff(ff);
        j = {{"basis", "falling"}, {"coeffs", big_list(ff)}, {"class", erg::to_string(c)}};
        code = satisfies(c, prop) ? kProven : kRefuted;
    } else if (!o.poly.empty()) {
        const auto mono = int_list(o.poly);
        j = {{"basis", "monomial"}, {"coeffs", big_list(mono)}, {"p", o.p}};
        if (o.perm) {
            const bool pp = erg::permutation_poly(mono);
            j["permutation"] = pp;
            code = pp ? kProven : kRefuted;
        } else {
            const erg::PolyClass c = erg::classify_poly_modp(o.p, mono);
            j["class"] = erg::to_string(c);
            code = satisfies(c, prop) ? kProven : kRefuted;
        }
    } else if (!o.rational.empty()) {
        const auto q = rational_list(o.rational);
        const erg::Verdict v = erg::classify_rational_poly(q, o.p, prop);
        j = v.to_json();
        code = exit_code(v.result);
    } else {
        const erg::KsResult r = erg::klimov_shamir_C(*o.ks, o.width);
        j = {{"C", *o.ks}, {"width", o.width}, {"class", erg::to_string(r.criterion)}, {"agrees", r.agrees}};
        j["oracle"] = r.oracle ? json(erg::to_string(*r.oracle)) : json(nullptr);
        const bool ok = r.criterion == erg::KsClass::SingleCycle ||
                        (prop == erg::Property::MeasurePreserving && r.criterion == erg::KsClass::InvertibleOnly);
        code = ok ? kProven : kRefuted;
    }
    emit_json(j, o.out, out);
    return code;
}

// ---- gen

struct GenOpts {
    Source src;
    bool hex = false;
    bool state = false;
    std::string out;
    std::string report;
    std::string save_spec;
};

int do_gen(GenOpts o, std::ostream& out) {
    if (o.hex) o.src.format = "hex";
    if (!o.src.in.empty()) throw UsageError("gen takes --expr or --spec");
    if (o.src.format != "hex" && o.out.empty()) throw UsageError("binary formats need --out");
    if (!o.src.count) throw UsageError("gen needs --count");
    gen::GeneratorSpec spec;
    if (!o.src.spec.empty()) {
        spec = load_spec_file(o.src.spec);
    } else if (!o.src.expr.empty()) {
        gen::OrdinarySpec os;
        os.width = o.src.width;
        os.f = texpr::parse(o.src.expr);
        os.seed = o.src.seed;
        spec = os;
        gen::validate(spec);
    } else {
        throw UsageError("one of --expr or --spec is required");
    }
    if (!gen::is_validated(spec)) {
        const auto& v = std::visit([](const auto& s) -> const std::optional<erg::Verdict>& { return s.verdict; }, spec);
        json j = {{"error", "spec is not validated; refusing to generate"}};
        if (v) j["verdict"] = v->to_json();
        out << j.dump(2) << '\n';
        return v ? exit_code(v->result) : kUnknown;
    }
    const gen::Generator g(spec);
    const unsigned bits = o.state ? g.width() : g.output_bits();
    const std::vector<u64> words = o.state ? gen::state_sequence(spec, *o.src.count) : gen::keystream(spec, *o.src.count);

    if (o.src.format == "hex") {
        std::ostringstream text;
        for (u64 w : words) text << hex_word(w, bits) << '\n';
        if (o.out.empty()) {
            out << text.str();
        } else {
            std::ofstream f(o.out);
            if (!f) throw IoError("cannot write " + o.out);
            f << text.str();
        }
    } else {
        gen::write_keystream(words, bits, o.src.format == "raw" ? gen::StreamFormat::Raw : gen::StreamFormat::BitPacked,
                             o.out);
    }
    if (!o.report.empty()) emit_json(analysis::analyze(words, bits).to_json(), o.report, out);
    if (!o.save_spec.empty()) gen::save_spec(spec, o.save_spec);
    return kProven;
}

// ---- analyze

struct AnalyzeOpts {
    Source src;
    u64 m = 1;
    bool linear = false;
    bool no_lc_ring = false;
    std::optional<unsigned> phi2_coord;
    std::string scatter;
    std::optional<u64> ell;
    std::optional<u64> period_cap;
    std::string out;
};

int do_analyze(const AnalyzeOpts& o, u64 rng_seed, std::ostream& out) {
    const Words w = load_words(o.src);
    analysis::AnalyzeOptions opt;
    opt.m = o.m;
    opt.cyclic = !o.linear;
    opt.with_lc_ring = !o.no_lc_ring;
    opt.phi2_coord = o.phi2_coord;
    if (!o.scatter.empty()) opt.scatter_csv = o.scatter;
    const analysis::SeqReport rep = analysis::analyze(w.words, w.bits, opt);
    json j = rep.to_json();
    if (o.ell) {
        json le = json::array();
        for (const auto& c : rep.coords) {
            BitSeq per(c.period);
            for (std::size_t i = 0; i < per.size(); ++i) per.set(i, c.bits[i]);
            const auto r = analysis::l_error_lc(per, *o.ell, rng_seed);
            le.push_back({{"j", c.j},
                          {"ell", *o.ell},
                          {"value", r.value},
                          {"exact", r.exact},
                          {"method", r.method},
                          {"lower_bound", r.lower_bound ? json(*r.lower_bound) : json(nullptr)}});
        }
        j["l_error"] = le;
    }
    if (o.period_cap) {
        analysis::PeriodResult p;
        if (w.spec) {
            p = analysis::period(*w.spec, *o.period_cap);
        } else if (w.expr) {
            p = analysis::period(*w.expr, o.src.width, o.src.seed, *o.period_cap);
        } else {
            throw UsageError("--period-cap needs --expr or --spec");
        }
        j["state_period"] = p.found ? json{{"pre", p.preperiod}, {"len", p.period}} : json("unknown: cap exceeded");
    }
    emit_json(j, o.out, out);
    return rep.q1.pass ? kProven : kRefuted;
}

// ---- plot

struct PlotOpts {
    Source src;
    bool pairs = false;
    std::string out = "pairs.csv";
    std::optional<u64> line_b;
    std::string pgm;
    unsigned pgm_bits = 8;
};

void write_pgm(const analysis::Scatter& s, unsigned width, unsigned k, const std::string& path) {
    const unsigned bits = std::min(k, width);
    const std::size_t side = std::size_t{1} << bits;
    std::vector<std::uint8_t> img(side * side, 0);
    for (const auto& [x, y] : s.points) {
        const u64 cx = x >> (width - bits), cy = y >> (width - bits);
        img[(side - 1 - cy) * side + cx] = 255;  // y grows upwards
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "P2\n" << side << ' ' << side << "\n255\n";
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) f << (c ? " " : "") << static_cast<int>(img[r * side + c]);
        f << '\n';
    }
}

int do_plot(const PlotOpts& o, std::ostream& out) {
    const Words w = load_words(o.src);
    std::optional<u64> b = o.line_b;
    if (!b && w.expr) {
        // Affine maps get the line-count statistic for their own multiplier.
        if (auto poly = erg::integer_polynomial(*w.expr); poly && poly->size() <= 2) {
            const cpp_int m = cpp_int(1) << w.bits;
            cpp_int c = poly->size() == 2 ? (*poly)[1] % m : cpp_int(0);
            if (c < 0) c += m;
            b = static_cast<u64>(c);
        }
    }
    const analysis::Scatter s = analysis::pair_scatter(w.words, w.bits, b);
    json j = {{"words", w.words.size()}, {"points", s.points.size()}};
    if (o.pairs || o.pgm.empty()) {
        std::ofstream f(o.out);
        if (!f) throw IoError("cannot write " + o.out);
        f << analysis::scatter_csv(s, w.bits);
        j["csv"] = o.out;
    }
    if (!o.pgm.empty()) {
        write_pgm(s, w.bits, o.pgm_bits, o.pgm);
        j["pgm"] = o.pgm;
    }
    if (s.line_count) {
        j["line_b"] = *b;
        j["line_count"] = *s.line_count;
    }
    out << j.dump(2) << '\n';
    return kProven;
}

// ---- abc

struct AbcOpts {
    unsigned width = 8;
    unsigned cells = 4;
    std::string state = "1";
    std::string taps;
    std::string a = "1,0,0";
    std::string b = "0,0";
    std::string d = "3";
    std::string dj;
    u64 seed = 0;
    std::string save;
    std::string out;
};

int do_abc(const AbcOpts& o, std::ostream& out) {
    gen::AbcSpec s;
    s.width = o.width;
    s.lfsr = gen::default_lfsr(o.cells, parse_u64(o.state));
    if (!o.taps.empty()) s.lfsr.taps = parse_u64(o.taps);
    const auto a = split(o.a), b = split(o.b);
    if (a.size() != 3 || b.size() != 2) throw UsageError("--a takes 3 values and --b takes 2");
    for (int i = 0; i < 3; ++i) s.a[i] = parse_u64(a[i]);
    for (int i = 0; i < 2; ++i) s.b[i] = parse_u64(b[i]);
    s.d = parse_u64(o.d);
    if (o.dj.empty()) {
        s.dj = gen::AbcSpec::canonical_dj(o.width);
    } else {
        for (const auto& v : split(o.dj)) s.dj.push_back(parse_u64(v));
    }
    s.seed = o.seed;
    gen::GeneratorSpec spec = s;
    const erg::Verdict v = gen::validate(spec);
    json j = v.to_json();
    if (v.result == erg::Result::Proven) {
        j["state_period"] = (u64{1} << o.width) * s.lfsr.period();
        if (!o.save.empty()) {
            gen::save_spec(spec, o.save);
            j["saved"] = o.save;
        }
    } else if (!o.save.empty()) {
        j["saved"] = nullptr;
    }
    emit_json(j, o.out, out);
    return exit_code(v.result);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Single-cycle T-functions: verification, generators and sequence analysis", "tflab"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();

    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    u64 rng_seed = 1;
    app.add_option("--jobs", jobs, "worker threads for the exhaustive kernels")->check(CLI::Range(1, 4096));
    app.add_option("--rng-seed", rng_seed, "seed for randomized searches");

    VerifyOpts vo;
    auto* verify = app.add_subcommand("verify", "prove or refute ergodicity / measure preservation");
    verify->add_option("--expr", vo.expr, "T-function of x")->required();
    verify->add_option("--width", vo.width, "width for brute force and auto fallback")->check(CLI::Range(1, 64));
    verify->add_option("--property", vo.property)->check(CLI::IsMember({"ergodic", "mp"}));
    verify->add_option("--method", vo.method)->check(CLI::IsMember({"auto", "deriv", "brute", "anf", "ff", "b2"}));
    verify->add_option("--test-width", vo.test_width, "certificate validation width")->check(CLI::Range(1, 24));
    verify->add_option("--out", vo.out, "write JSON here instead of stdout");

    ClassifyOpts co;
    auto* classify = app.add_subcommand("classify", "classify polynomials and Klimov-Shamir maps");
    classify->add_option("--poly-ff", co.poly_ff, "falling-factorial coefficients b0,b1,...");
    classify->add_option("--poly", co.poly, "monomial coefficients a0,a1,...");
    classify->add_option("--rational", co.rational, "rational monomial coefficients, e.g. 0,1/2,1/2");
    classify->add_option("--ks", co.ks, "C in x + (x*x | C)");
    classify->add_option("--p", co.p, "prime for --poly and --rational")->check(CLI::Range(2, 1 << 20));
    classify->add_option("--width", co.width, "width for the --ks oracle")->check(CLI::Range(1, 64));
    classify->add_flag("--perm", co.perm, "permutation-polynomial test for --poly");
    classify->add_option("--property", co.property)->check(CLI::IsMember({"ergodic", "mp"}));
    classify->add_option("--out", co.out);

    GenOpts go;
    auto* genc = app.add_subcommand("gen", "emit keystream words from a validated generator");
    go.src.add_to(genc, false);
    genc->add_flag("--hex", go.hex, "hex words, one per line (same as --format hex)");
    genc->add_flag("--state", go.state, "emit state words instead of outputs");
    genc->add_option("--out", go.out, "keystream file");
    genc->add_option("--report", go.report, "write the analysis report of the emitted words");
    genc->add_option("--save-spec", go.save_spec, "write the validated spec");

    AnalyzeOpts ao;
    auto* analyze = app.add_subcommand("analyze", "measure a word sequence");
    ao.src.add_to(analyze, true);
    analyze->add_option("--m", ao.m, "clock count for the half-negation lag 2^j m")->check(CLI::Range(1, 1 << 20));
    analyze->add_flag("--linear", ao.linear, "count k-chains without wrapping");
    analyze->add_flag("--no-lc-ring", ao.no_lc_ring);
    analyze->add_option("--phi2-coord", ao.phi2_coord, "coordinate for the 2-adic complexity");
    analyze->add_option("--scatter", ao.scatter, "write pair-scatter CSV");
    analyze->add_option("--ell", ao.ell, "l-error linear complexity per coordinate");
    analyze->add_option("--period-cap", ao.period_cap, "cycle-detect the generator state up to this many steps");
    analyze->add_option("--out", ao.out);

    PlotOpts po;
    auto* plot = app.add_subcommand("plot", "pair-scatter CSV and occupancy bitmap");
    po.src.add_to(plot, true);
    plot->add_flag("--pairs", po.pairs, "write the (x_i, x_{i+1}) scatter CSV");
    plot->add_option("--out", po.out, "CSV path");
    plot->add_option("--line-b", po.line_b, "count distinct x_{i+1} - b x_i");
    plot->add_option("--pgm", po.pgm, "write a 2^k x 2^k occupancy bitmap");
    plot->add_option("--pgm-bits", po.pgm_bits, "k for --pgm")->check(CLI::Range(1, 12));

    AbcOpts bo;
    auto* abc = app.add_subcommand("abc", "validate an ABC-template generator");
    abc->add_option("--width", bo.width)->check(CLI::Range(2, 32));
    abc->add_option("--cells", bo.cells, "LFSR length s")->check(CLI::Range(2, 32));
    abc->add_option("--state", bo.state, "initial LFSR state");
    abc->add_option("--taps", bo.taps, "LFSR taps (default: built-in primitive)");
    abc->add_option("--a", bo.a, "a0,a1,a2");
    abc->add_option("--b", bo.b, "b0,b1");
    abc->add_option("--d", bo.d);
    abc->add_option("--dj", bo.dj, "d_0,...,d_{n-1} (default: canonical)");
    abc->add_option("--seed", bo.seed, "initial state");
    abc->add_option("--save", bo.save, "write the validated spec");
    abc->add_option("--out", bo.out);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return 0;
        for (const CLI::App* sub : app.get_subcommands()) err << sub->help();
        return kUsage;
    }

    const CLI::App* sub = app.get_subcommands().front();
    kernels::set_jobs(jobs);
    err << "effective: " << effective_config(app, sub) << '\n';

    try {
        if (sub == verify) return do_verify(vo, out);
        if (sub == classify) return do_classify(co, out);
        if (sub == genc) return do_gen(go, out);
        if (sub == analyze) return do_analyze(ao, rng_seed, out);
        if (sub == plot) return do_plot(po, out);
        return do_abc(bo, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n' << sub->help();
        return kUsage;
    } catch (const OverCap& e) {
        err << "refused: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace tflab::cli
