#pragma once

// Command implementations behind tools/ringcf. Each command reads a JSON config,
// writes CSV/JSON outputs and returns a process exit code.

#include "constellation.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "rates.hpp"
#include "sweep.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringcf::app {

using json = nlohmann::ordered_json;

enum Exit { ok = 0, config_error = 2, budget_error = 3, verification_failure = 4 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- config document --------------------------------------------------------------

class Doc {
public:
    Doc() : j_(json::object()) {}

    static Doc parse(const std::string& text, std::string name) {
        Doc d;
        d.text_ = text;
        d.name_ = std::move(name);
        try {
            d.j_ = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(d.name_ + ":" + std::to_string(d.line_at(e.byte)) + ": " + e.what());
        }
        if (!d.j_.is_object()) throw ConfigError(d.name_ + ":1: top level must be an object");
        return d;
    }

    static Doc load(const std::string& path) {
        std::string text;
        try {
            text = read_file(path);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        return parse(text, path);
    }

    const json& root() const { return j_; }
    json& root() { return j_; }
    const std::string& name() const { return name_; }

    // Line of the first occurrence of "key" (best effort; 0 when unknown).
    size_t line_of(const std::string& key) const {
        const size_t pos = text_.find("\"" + key + "\"");
        return pos == std::string::npos ? 0 : line_at(pos + 1);
    }

    [[noreturn]] void fail(const std::string& path, const std::string& key, const std::string& msg) const {
        const size_t line = line_of(key);
        throw ConfigError(name_ + (line ? ":" + std::to_string(line) : std::string()) + ": " +
                          (path.empty() ? std::string() : path + ": ") + msg);
    }

private:
    size_t line_at(size_t byte) const {
        size_t line = 1;
        for (size_t i = 0; i < byte && i < text_.size(); ++i)
            if (text_[i] == '\n') ++line;
        return line;
    }

    json j_;
    std::string text_;
    std::string name_ = "<config>";
};

// A JSON object inside a Doc with path-aware accessors.
class Node {
public:
    Node(const Doc& doc, const json& j, std::string path) : doc_(&doc), j_(&j), path_(std::move(path)) {
        if (!j.is_object()) doc.fail(path_, last_key(), "must be an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            bool found = false;
            for (const char* k : keys) found = found || it.key() == k;
            if (!found) doc_->fail(path_, it.key(), "unknown key '" + it.key() + "'");
        }
    }

    bool has(const std::string& k) const { return j_->contains(k); }
    const json& raw(const std::string& k) const {
        if (!has(k)) doc_->fail(path_, last_key(), "missing required key '" + k + "'");
        return j_->at(k);
    }
    Node child(const std::string& k) const { return Node(*doc_, raw(k), sub(k)); }
    std::string sub(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    [[noreturn]] void fail(const std::string& k, const std::string& msg) const { doc_->fail(sub(k), k, msg); }

    int64_t integer(const std::string& k) const {
        const json& v = raw(k);
        if (!v.is_number_integer()) fail(k, "expected an integer");
        return v.get<int64_t>();
    }
    int64_t integer(const std::string& k, int64_t def) const { return has(k) ? integer(k) : def; }

    double number(const std::string& k) const {
        const json& v = raw(k);
        if (!v.is_number()) fail(k, "expected a number");
        return v.get<double>();
    }

    std::string string(const std::string& k) const {
        const json& v = raw(k);
        if (!v.is_string()) fail(k, "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& k, const std::string& def) const { return has(k) ? string(k) : def; }

    const Doc& doc() const { return *doc_; }
    const std::string& path() const { return path_; }

private:
    std::string last_key() const {
        const size_t p = path_.rfind('.');
        return p == std::string::npos ? path_ : path_.substr(p + 1);
    }

    const Doc* doc_;
    const json* j_;
    std::string path_;
};

struct Options {
    std::optional<std::string> config;
    std::optional<uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int64_t> samples;
    int threads = 0;
    bool quiet = false;
};

inline uint64_t require_seed(const Options& o, std::string_view command) {
    if (!o.seed) throw ConfigError(std::string(command) + ": --seed is required");
    return *o.seed;
}

// ---- constellation section ---------------------------------------------------------

inline std::vector<int64_t> int_array(const Node& n, const std::string& k, const json& v) {
    if (!v.is_array()) n.fail(k, "expected an array of integers");
    std::vector<int64_t> r;
    for (const json& x : v) {
        if (!x.is_number_integer()) n.fail(k, "expected an array of integers");
        r.push_back(x.get<int64_t>());
    }
    return r;
}

inline RingElement ring_element(const Node& n, const std::string& k, const json& v, Ring R) {
    if (v.is_number_integer()) return {R, v.get<int64_t>(), 0};
    const auto c = int_array(n, k, v);
    if (c.size() != 2) n.fail(k, "ring element must be an integer or [a, b]");
    if (R == Ring::integers && c[1] != 0) n.fail(k, "integer ring element must have b = 0");
    return {R, c[0], c[1]};
}

inline PrimeSpec prime_entry(const Node& parent, const json& e, Ring R, size_t idx) {
    const std::string k = "primes[" + std::to_string(idx) + "]";
    if (e.is_number_integer()) {
        const auto ps = classify_rational_prime(e.get<int64_t>(), R);
        return ps.front();
    }
    const Node n(parent.doc(), e, parent.sub(k));
    n.allow({"rational", "select", "element"});
    if (n.has("element")) {
        if (n.has("rational")) n.fail("element", "give either 'rational' or 'element'");
        return make_prime(ring_element(n, "element", n.raw("element"), R));
    }
    const auto ps = classify_rational_prime(n.integer("rational"), R);
    const int64_t sel = n.integer("select", 0);
    if (sel < 0 || size_t(sel) >= ps.size())
        n.fail("select", "prime " + std::to_string(n.integer("rational")) + " has " + std::to_string(ps.size()) +
                             " factor(s) in " + std::string(to_string(R)));
    return ps[size_t(sel)];
}

inline Labeling build_labeling(const Node& n) {
    n.allow({"ring", "primes", "labeling", "generators", "polys", "tie_break"});
    try {
        const Ring R = ring_from_string(n.string("ring"));
        const json& pj = n.raw("primes");
        if (!pj.is_array() || pj.empty()) n.fail("primes", "expected a non-empty array");
        std::vector<PrimeSpec> primes;
        for (size_t i = 0; i < pj.size(); ++i) primes.push_back(prime_entry(n, pj[i], R, i));
        const TieBreak tie = tie_break_from_string(n.string("tie_break", "lexicographic"));
        const LabelKind kind = label_kind_from_string(n.string("labeling", "crt-ring-iso"));
        std::vector<RingElement> gens;
        if (n.has("generators")) {
            if (kind != LabelKind::module_iso_custom) n.fail("generators", "only used with module-iso-custom");
            for (const json& g : n.raw("generators")) gens.push_back(ring_element(n, "generators", g, R));
        }
        std::vector<QuadPoly> polys;
        if (n.has("polys")) {
            size_t inert = 0;
            std::vector<int64_t> qs;
            for (const PrimeSpec& p : primes)
                if (!p.prime_field()) qs.push_back(p.rational_prime);
            for (const json& pv : n.raw("polys")) {
                const auto c = int_array(n, "polys", pv);
                if (c.size() != 2 || inert >= qs.size()) n.fail("polys", "expected [c1, c0] per inert prime");
                polys.push_back(QuadPoly{qs[inert++], c[0], c[1]});
            }
        }
        return Labeling(Constellation(primes, tie), kind, gens, polys);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::length_error&) {
        throw;
    } catch (const std::exception& e) {
        n.doc().fail(n.path(), n.path(), e.what());
    }
}

inline json labeling_json(const Labeling& lab) {
    json j;
    const Constellation& c = lab.constellation();
    j["ring"] = std::string(to_string(c.ring()));
    j["modulus"] = to_string(c.modulus());
    json ps = json::array();
    for (const PrimeSpec& p : c.primes()) {
        json e;
        e["element"] = to_string(p.element);
        e["rational_prime"] = p.rational_prime;
        e["behavior"] = std::string(to_string(p.behavior));
        ps.push_back(e);
    }
    j["primes"] = ps;
    j["kind"] = std::string(to_string(lab.kind()));
    json g = json::array();
    for (const RingElement& x : lab.generators()) g.push_back(to_string(x));
    j["generators"] = g;
    j["tie_break"] = c.tie_break() == TieBreak::lexicographic
                         ? "minimum norm, then smallest (Re, Im)"
                         : "minimum norm, smallest (Re, Im), then symmetric under x -> u conj(x)";
    j["basis"] = c.ring() == Ring::eisenstein ? "re, im are coefficients of (1, omega)"
                 : c.ring() == Ring::gaussian ? "re, im are coefficients of (1, j)"
                                              : "re is the integer, im = 0";
    return j;
}

// ---- constellation command ---------------------------------------------------------------

inline std::string prefix_for(const Options& o, const Node& root, const std::string& def) {
    if (o.out) return *o.out;
    return root.string("output", def);
}

inline int cmd_constellation(const Options& o) {
    if (!o.config) throw ConfigError("constellation: --config is required");
    const Doc doc = Doc::load(*o.config);
    const Node root(doc, doc.root(), "");
    root.allow({"constellation", "output"});
    const Labeling lab = build_labeling(root.child("constellation"));
    const std::string prefix = prefix_for(o, root, "constellation");

    std::vector<std::string> header{"re", "im"};
    for (size_t d = 0; d < lab.n_digits(); ++d) header.push_back("v" + std::to_string(d + 1));
    CsvTable t(header);
    for (int64_t k = 0; k < int64_t(lab.size()); ++k) {
        const Label v = lab.label_at(k);
        const RingElement& x = lab.map(v);
        std::vector<std::string> row{std::to_string(x.a), std::to_string(x.b)};
        for (int64_t d : v) row.push_back(std::to_string(d));
        t.row(row);
    }

    const HomReport rep = lab.verify_homomorphism();
    json vr;
    auto check_json = [&](const HomCheck& c) {
        json e;
        e["pass"] = c.pass;
        if (c.counterexample) {
            const auto& [u, v] = *c.counterexample;
            e["counterexample"] = {{"u", u}, {"v", v}, {"map_u", to_string(lab.map(u))}, {"map_v", to_string(lab.map(v))},
                                   {"demap_sum", lab.demap(lab.map(u) + lab.map(v))}, {"label_sum", lab.add(u, v)}};
        }
        return e;
    };
    vr["additive"] = check_json(rep.additive);
    if (rep.multiplicative) vr["multiplicative"] = check_json(*rep.multiplicative);

    json side = sidecar("constellation", doc.root(), prefix + ".csv", t.str());
    side["constellation"] = labeling_json(lab);
    side["points"] = lab.size();
    side["mean_energy"] = lab.constellation().mean_energy();
    side["verification"] = vr;
    write_file(prefix + ".csv", t.str());
    write_file(prefix + ".json", side.dump(2) + "\n");

    const bool must_pass = lab.kind() != LabelKind::naive_ungerboeck;
    const bool passed = rep.additive.pass && (!rep.multiplicative || rep.multiplicative->pass);
    if (!o.quiet) {
        std::cout << lab.size() << " points, " << to_string(lab.kind()) << ", additive "
                  << (rep.additive.pass ? "pass" : "FAIL");
        if (rep.multiplicative) std::cout << ", multiplicative " << (rep.multiplicative->pass ? "pass" : "FAIL");
        std::cout << "\n";
        if (rep.additive.counterexample) std::cout << "additive counterexample: " << vr["additive"]["counterexample"].dump() << "\n";
        std::cout << "wrote " << prefix << ".csv, " << prefix << ".json\n";
    }
    return must_pass && !passed ? verification_failure : ok;
}

// ---- rates command -----------------------------------------------------------------

inline cplx complex_value(const Node& n, const std::string& k, const json& v) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    n.fail(k, "complex value must be a number or [re, im]");
}

inline std::vector<double> snr_grid(const Node& root) {
    const json& v = root.raw("snr_db");
    std::vector<double> g;
    if (v.is_array()) {
        for (const json& x : v) {
            if (!x.is_number()) root.fail("snr_db", "expected numbers");
            g.push_back(x.get<double>());
        }
        return g;
    }
    const Node n = root.child("snr_db");
    n.allow({"start", "stop", "step"});
    const double a = n.number("start"), b = n.number("stop"), s = n.number("step");
    if (!(s > 0)) n.fail("step", "must be positive");
    for (int64_t k = 0; a + double(k) * s <= b + 1e-9 * s; ++k) g.push_back(a + double(k) * s);
    return g;
}

inline ChannelSpec channel_spec(const Node& root, uint64_t seed) {
    const Node n = root.child("channel");
    n.allow({"h", "random", "seed"});
    ChannelSpec c;
    if (n.has("h") == n.has("random")) n.fail("h", "give exactly one of 'h' (fixed) or 'random' (count)");
    if (n.has("h")) {
        const json& hs = n.raw("h");
        if (!hs.is_array() || hs.empty()) n.fail("h", "expected a list of [h1, h2] realizations");
        for (const json& r : hs) {
            if (!r.is_array() || r.size() != 2) n.fail("h", "each realization is [h1, h2]");
            c.fixed.push_back({complex_value(n, "h", r[0]), complex_value(n, "h", r[1])});
        }
    } else {
        c.random_count = n.integer("random");
        if (c.random_count < 0) n.fail("random", "must be non-negative");
        c.random_seed = n.has("seed") ? uint64_t(n.integer("seed")) : derive_seed(seed, 0x636861ULL);
    }
    return c;
}

inline std::array<int64_t, 2> int_pair(const Node& n, const std::string& k, const json& v) {
    const auto c = int_array(n, k, v);
    if (c.size() != 2) n.fail(k, "expected [x, y]");
    return {c[0], c[1]};
}

inline CoeffSpec coeff_spec(const Node& root, const Labeling& lab) {
    CoeffSpec s;
    if (!root.has("coefficients")) return s;
    const json& v = root.raw("coefficients");
    if (v.is_string()) {
        if (v.get<std::string>() != "search") root.fail("coefficients", "expected \"search\" or an object");
        return s;
    }
    const Node n = root.child("coefficients");
    n.allow({"levels", "direct", "B1", "B2"});
    if (n.has("levels")) {
        LevelCoeffs b;
        for (const json& e : n.raw("levels")) b.push_back(int_pair(n, "levels", e));
        if (b.size() != lab.n_digits()) n.fail("levels", "need one [b1, b2] pair per level");
        s.levels = b;
    }
    if (n.has("direct")) {
        const json& d = n.raw("direct");
        if (!d.is_array() || d.size() != 2) n.fail("direct", "expected [b1 label, b2 label]");
        std::array<Label, 2> b{int_array(n, "direct", d[0]), int_array(n, "direct", d[1])};
        if (b[0].size() != lab.n_digits() || b[1].size() != lab.n_digits()) n.fail("direct", "label length mismatch");
        s.direct = b;
    }
    for (const char* k : {"B1", "B2"}) {
        if (!n.has(k)) continue;
        const json& m = n.raw(k);
        if (!m.is_array() || m.size() != 2) n.fail(k, "expected a 2x2 matrix");
        Mat2 M{int_pair(n, k, m[0]), int_pair(n, k, m[1])};
        (std::string(k) == "B1" ? s.B1 : s.B2) = M;
    }
    return s;
}

inline SweepConfig sweep_config(const Node& root, const Labeling& lab, const Options& o, uint64_t seed) {
    SweepConfig c;
    c.snr_db = snr_grid(root);
    c.channel = channel_spec(root, seed);
    const json& m = root.raw("modes");
    if (!m.is_array() || m.empty()) root.fail("modes", "expected a non-empty list");
    for (const json& x : m) {
        if (!x.is_string()) root.fail("modes", "expected strings");
        try {
            c.modes.push_back(rate_mode_from_string(x.get<std::string>()));
        } catch (const std::exception& e) {
            root.fail("modes", e.what());
        }
    }
    c.coeffs = coeff_spec(root, lab);
    c.n_samples = o.samples ? *o.samples : root.integer("n_samples", 200000);
    if (c.n_samples <= 0) root.fail("n_samples", "must be positive");
    c.seed = seed;
    return c;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    CsvTable t({"snr_db", "realization", "mode", "level", "rate", "stderr", "n_samples", "coeffs"});
    for (const SweepRow& r : rows)
        t.row({format_double(r.snr_db), std::to_string(r.realization), std::string(to_string(r.mode)),
               r.level ? std::to_string(r.level) : "sum", format_double(r.rate.value), format_double(r.rate.stderr),
               std::to_string(r.rate.n_samples), r.coeffs});
    return t.str();
}

inline int cmd_rates(const Options& o) {
    const uint64_t seed = require_seed(o, "rates");
    if (!o.config) throw ConfigError("rates: --config is required");
    const Doc doc = Doc::load(*o.config);
    const Node root(doc, doc.root(), "");
    root.allow({"constellation", "channel", "snr_db", "modes", "coefficients", "n_samples", "output"});
    const Labeling lab = build_labeling(root.child("constellation"));
    const SweepConfig cfg = sweep_config(root, lab, o, seed);
    const std::string prefix = prefix_for(o, root, "rates");
    std::vector<SweepRow> rows;
    try {
        rows = sweep(lab, cfg, o.threads);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("rates: ") + e.what());
    }
    const std::string csv = sweep_csv(rows);
    json side = sidecar("rates", doc.root(), prefix + ".csv", csv);
    side["constellation"] = labeling_json(lab);
    side["seed"] = seed;
    side["cell_seed_rule"] = "derive_seed(seed, snr_index * realizations + realization)";
    side["n_samples"] = cfg.n_samples;
    if (!cfg.channel.fixed.empty() || cfg.channel.random_count) {
        json hs = json::array();
        for (size_t r = 0; r < cfg.channel.realizations(); ++r) {
            const auto h = cfg.channel.gains(r);
            hs.push_back({{h[0].real(), h[0].imag()}, {h[1].real(), h[1].imag()}});
        }
        side["channel_realizations"] = hs;
        if (cfg.channel.fixed.empty()) side["channel_seed"] = cfg.channel.random_seed;
    }
    write_file(prefix + ".csv", csv);
    write_file(prefix + ".json", side.dump(2) + "\n");
    if (!o.quiet) std::cout << rows.size() << " rows, wrote " << prefix << ".csv, " << prefix << ".json\n";
    return ok;
}

// ---- lattice-demo command ----------------------------------------------------------------

struct DemoLattice {
    ProductLattice lattice;
    std::vector<std::vector<IntVec>> messages;  // per user, per level
    IntVec channel;
};

inline DemoLattice worked_example() {
    DemoLattice d;
    d.lattice = ProductLattice({2, 3}, {LinearCode(2, {{1}, {1}}), LinearCode(3, {{1}, {2}})}, 1.0);
    d.messages = {{{1}, {1}}, {{0}, {2}}};
    d.channel = {3, 4};
    return d;
}

inline json demo_report(const DemoLattice& d) {
    const ProductLattice& L = d.lattice;
    json j;
    j["primes"] = L.primes();
    j["dimension"] = L.dim();
    std::vector<IntVec> xs;
    json users = json::array();
    for (const auto& m : d.messages) {
        xs.push_back(L.encode(m));
        users.push_back({{"messages", m}, {"x", xs.back()}});
    }
    j["users"] = users;
    IntVec y(L.dim(), 0);
    for (size_t k = 0; k < xs.size(); ++k)
        for (size_t i = 0; i < y.size(); ++i) y[i] = detail::add(y[i], detail::mul(d.channel.at(k), xs[k][i]));
    j["channel"] = d.channel;
    j["y"] = y;
    const auto dec = L.decompose(y);
    j["level_words"] = dec.words;
    j["carry"] = dec.carry;
    j["y_is_member"] = L.is_member(y);
    return j;
}

inline DemoLattice demo_from(const Node& n) {
    n.allow({"primes", "generators", "messages", "channel"});
    DemoLattice d;
    const auto primes = int_array(n, "primes", n.raw("primes"));
    const json& gs = n.raw("generators");
    if (!gs.is_array() || gs.size() != primes.size()) n.fail("generators", "need one N x m matrix per prime");
    std::vector<LinearCode> codes;
    try {
        for (size_t l = 0; l < primes.size(); ++l) {
            IntMat G;
            for (const json& row : gs[l]) G.push_back(int_array(n, "generators", row));
            codes.push_back(LinearCode(primes[l], G));
        }
        d.lattice = ProductLattice(primes, codes, 1.0);
    } catch (const std::invalid_argument& e) {
        n.fail("generators", e.what());
    }
    for (const json& u : n.raw("messages")) {
        std::vector<IntVec> m;
        for (const json& w : u) m.push_back(int_array(n, "messages", w));
        if (m.size() != primes.size()) n.fail("messages", "need one message per level for every user");
        for (size_t l = 0; l < m.size(); ++l)
            if (m[l].size() != codes[l].dimension()) n.fail("messages", "message length must equal code dimension");
        d.messages.push_back(m);
    }
    d.channel = int_array(n, "channel", n.raw("channel"));
    if (d.channel.size() != d.messages.size()) n.fail("channel", "need one integer gain per user");
    return d;
}

// Sum of two random lattice points decomposes into code words again.
inline json closure_check(const ProductLattice& L, int64_t pairs, uint64_t seed) {
    std::mt19937_64 rng(seed);
    int64_t passed = 0;
    for (int64_t t = 0; t < pairs; ++t) {
        IntVec s(L.dim(), 0);
        for (int u = 0; u < 2; ++u) {
            std::vector<IntVec> msg;
            for (const LinearCode& c : L.codes()) {
                IntVec w(c.dimension());
                for (auto& x : w) x = int64_t(rng() % uint64_t(c.q()));
                msg.push_back(w);
            }
            const IntVec x = L.encode(msg);
            const int64_t shift = int64_t(rng() % 7) - 3;  // arbitrary multiple of Z^N
            for (size_t i = 0; i < s.size(); ++i) s[i] += x[i] + shift * L.modulus();
        }
        passed += L.is_member(s) ? 1 : 0;
    }
    return {{"pairs", pairs}, {"passed", passed}};
}

inline int cmd_lattice_demo(const Options& o) {
    const uint64_t seed = require_seed(o, "lattice-demo");
    Doc doc;
    if (o.config) doc = Doc::load(*o.config);
    const Node root(doc, doc.root(), "");
    root.allow({"lattice", "second_moment", "closure_pairs", "output"});

    json rep;
    rep["worked_example"] = demo_report(worked_example());
    std::optional<DemoLattice> user;
    if (root.has("lattice")) {
        user = demo_from(root.child("lattice"));
        rep["lattice"] = demo_report(*user);
    }
    const ProductLattice& subject = user ? user->lattice : worked_example().lattice;
    const int64_t pairs = root.integer("closure_pairs", 200);
    rep["closure"] = closure_check(subject, pairs, derive_seed(seed, 1));

    std::vector<int64_t> dims{1};
    int64_t n_mc = o.samples ? *o.samples : 100000;
    if (root.has("second_moment")) {
        const Node s = root.child("second_moment");
        s.allow({"dims", "n_samples"});
        if (s.has("dims")) dims = int_array(s, "dims", s.raw("dims"));
        if (!o.samples) n_mc = s.integer("n_samples", n_mc);
    }
    json sm = json::array();
    for (size_t k = 0; k < dims.size(); ++k) {
        if (dims[k] <= 0 || dims[k] > 16) root.fail("second_moment", "dims must be in 1..16");
        const ProductLattice Z({}, {}, 1.0, size_t(dims[k]));
        const SecondMoment m = second_moment_mc(Z, n_mc, derive_seed(seed, 100 + k), o.threads);
        sm.push_back({{"lattice", "Z^" + std::to_string(dims[k])}, {"G", m.G}, {"stderr", m.stderr_G},
                      {"n_samples", m.n_samples}, {"reference", 1.0 / 12.0}});
    }
    if (user) {
        const SecondMoment m = second_moment_mc(user->lattice, n_mc, derive_seed(seed, 99), o.threads);
        sm.push_back({{"lattice", "user"}, {"G", m.G}, {"stderr", m.stderr_G}, {"n_samples", m.n_samples}});
    }
    rep["second_moment"] = sm;
    rep["seed"] = seed;

    const std::string prefix = prefix_for(o, root, "lattice_demo");
    const std::string body = rep.dump(2) + "\n";
    json side = sidecar("lattice-demo", doc.root(), prefix + ".json", body);
    side["report"] = rep;
    write_file(prefix + ".json", side.dump(2) + "\n");
    if (!o.quiet) std::cout << body;
    return ok;
}

// ---- verify command ------------------------------------------------------------------

struct GoldenCheck {
    std::string name;
    std::string expected;
    std::string observed;
    bool pass = false;
};

inline std::string vec_text(const IntVec& v) {
    std::string s = "[";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "]";
}

inline std::vector<GoldenCheck> golden_checks(uint64_t seed, int threads) {
    std::vector<GoldenCheck> out;
    auto add = [&](std::string name, std::string expected, std::string observed) {
        const bool pass = expected == observed;
        out.push_back({std::move(name), std::move(expected), std::move(observed), pass});
    };

    // integer lattice worked example
    const json ex = demo_report(worked_example());
    add("lattice.x1", "[1,5]", vec_text(ex["users"][0]["x"].get<IntVec>()));
    add("lattice.x2", "[2,4]", vec_text(ex["users"][1]["x"].get<IntVec>()));
    add("lattice.y", "[11,31]", vec_text(ex["y"].get<IntVec>()));
    add("lattice.level1", "[1,1]", vec_text(ex["level_words"][0].get<IntVec>()));
    add("lattice.level2", "[2,1]", vec_text(ex["level_words"][1].get<IntVec>()));

    // 21-point constellation
    const Ring E = Ring::eisenstein;
    const PrimeSpec p1 = make_prime({E, 1, 2}), p2 = make_prime({E, 3, 2});
    const Labeling l21(Constellation({p1, p2}), LabelKind::module_iso_custom,
                       {RingElement{E, 2} * p2.element, RingElement{E, 3} * p1.element});
    add("21pt.map(1,1)", "1", to_string(l21.map({1, 1})));
    add("21pt.map(2,6)", "-1", to_string(l21.map({2, 6})));
    add("21pt.demap(1-w)", "[0,6]", vec_text(l21.demap(RingElement{E, 1, -1})));

    // homomorphism suites
    const auto s7 = classify_rational_prime(7, E);
    struct Suite {
        std::string name;
        std::vector<PrimeSpec> primes;
    };
    const std::vector<Suite> suites{
        {"21pt", {p1, p2}},
        {"25pt", classify_rational_prime(5, E)},
        {"49pt", {s7[0], s7[1]}},
        {"147pt", {classify_rational_prime(3, E)[0], s7[0], s7[1]}},
        {"65pt", {make_prime({Ring::gaussian, 1, 2}), make_prime({Ring::gaussian, 3, 2})}},
        {"12pt", {classify_rational_prime(3, E)[0], classify_rational_prime(2, E)[0]}},
    };
    for (const Suite& s : suites) {
        const Constellation c(s.primes);
        const HomReport ring = Labeling(c, LabelKind::crt_ring_iso).verify_homomorphism();
        add(s.name + ".crt-ring-iso", "additive,multiplicative",
            std::string(ring.additive.pass ? "additive" : "-") + "," +
                (ring.multiplicative && ring.multiplicative->pass ? "multiplicative" : "-"));
        const HomReport gen = Labeling(c, LabelKind::module_iso_general).verify_homomorphism();
        add(s.name + ".module-iso-general", "additive", gen.additive.pass ? "additive" : "-");
    }
    const HomReport naive = make_naive_ungerboeck(Constellation({s7[0], s7[1]})).verify_homomorphism();
    add("49pt.naive-ungerboeck", "counterexample", naive.additive.counterexample ? "counterexample" : "-");

    // closed-form computation rates
    for (double P : {0.5, 1.0, 10.0, 100.0, 1e4}) {
        const double r1 = computation_rate({cplx{1}}, {cplx{1}}, P);
        const double r2 = computation_rate({cplx{1}, cplx{1}}, {cplx{1}, cplx{1}}, P);
        const bool pass = std::abs(r1 - std::log2(1 + P)) <= 1e-12 && std::abs(r2 - std::log2(0.5 + P)) <= 1e-12;
        out.push_back({"rate.P=" + format_double(P), "log2(1+P),log2(1/2+P)",
                       format_double(r1) + "," + format_double(r2), pass});
    }

    // Monte-Carlo checks
    const Labeling l25(Constellation(classify_rational_prime(5, E)), LabelKind::extfield_ring_iso);
    const RateEstimate d = mi_direct(l25, ChannelConfig{{1.0, 1.0}, 1e4}, {0, 1}, {0, 1}, 20000, derive_seed(seed, 1), threads);
    out.push_back({"25pt.direct@40dB", "log2(25) +- 0.05", format_double(d.value),
                   std::abs(d.value - std::log2(25.0)) <= 0.05});
    const SecondMoment g = second_moment_mc(ProductLattice({}, {}, 1.0, 1), 100000, derive_seed(seed, 2), threads);
    out.push_back({"G(Z)", "1/12 +- 3 stderr", format_double(g.G), std::abs(g.G - 1.0 / 12.0) <= 3 * g.stderr_G});
    return out;
}

inline int cmd_verify(const Options& o) {
    const uint64_t seed = require_seed(o, "verify");
    Doc doc;
    if (o.config) doc = Doc::load(*o.config);
    const Node root(doc, doc.root(), "");
    root.allow({"output"});
    const auto checks = golden_checks(seed, o.threads);
    CsvTable t({"check", "expected", "observed", "pass"});
    bool all = true;
    for (const GoldenCheck& c : checks) {
        t.row({c.name, c.expected, c.observed, c.pass ? "true" : "false"});
        all = all && c.pass;
        if (!o.quiet) std::cout << (c.pass ? "ok   " : "FAIL ") << c.name << "  " << c.observed << "\n";
    }
    const std::string prefix = prefix_for(o, root, "verify");
    json side = sidecar("verify", doc.root(), prefix + ".csv", t.str());
    side["seed"] = seed;
    write_file(prefix + ".csv", t.str());
    write_file(prefix + ".json", side.dump(2) + "\n");
    return all ? ok : verification_failure;
}

// Runs a command and maps exceptions to exit codes.
template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::length_error& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return budget_error;
    } catch (const VerificationError& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return verification_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace ringcf::app
