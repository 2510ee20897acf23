// io.hpp: run configuration parsing and bit-stable CSV/JSON emission.
//
// Config text format: one `key = value` per line, '#' starts a comment, dotted
// namespaces (model.delta, sweep.axis1.name, output.format). Lists are comma
// separated. A JSON object with the same keys (flat or nested) is also accepted.

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dqdnoise/error.hpp"
#include "dqdnoise/noise.hpp"
#include "dqdnoise/steady.hpp"
#include "dqdnoise/sweep.hpp"

namespace dqdnoise {

inline constexpr const char* kUnitsNote = "units: hbar = k_B = e = 1, energies in units of omega_b (default omega_b = 1)";
inline constexpr const char* kSpectrumSchema = "dqdnoise.spectrum.v1";
inline constexpr const char* kSweepSchema = "dqdnoise.sweep.v1";
inline constexpr const char* kSteadySchema = "dqdnoise.steady.v1";

enum class OutputFormat { csv, json };
enum class CheckLevel { fast, full };

inline std::string_view to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }
inline std::string_view to_string(CheckLevel c) { return c == CheckLevel::fast ? "fast" : "full"; }

struct SpectrumConfig {
    ChannelPair pair{Channel::e, Channel::e};
    Normalization normalization{Normalization::fano};
    double start{0.2};
    double stop{1.8};
    int count{161};
    double t_max{0.0}; // macdonald horizon; 0 picks 16 / slowest relaxation rate
    double dt{0.05};

    bool operator==(const SpectrumConfig&) const = default;
};

struct RunConfig {
    std::string preset;
    ModelParams model;
    std::optional<SweepSpec> sweep;
    SpectrumConfig spectrum;
    std::string output_path; // empty: stdout
    OutputFormat format{OutputFormat::csv};
    std::vector<NoiseMethod> methods{NoiseMethod::resolvent};
    CheckLevel check{CheckLevel::fast};
    int workers{0}; // 0: unset, the caller falls back to default_workers()

    bool operator==(const RunConfig&) const = default;
};

// 17 significant digits round-trips binary64.
inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const std::string item = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

struct Entry {
    std::string value;
    int line{0};
};

class KeyReader {
public:
    KeyReader(std::map<std::string, Entry> entries, std::string source)
        : entries_(std::move(entries)), source_(std::move(source)) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        std::ostringstream os;
        os << source_ << ": " << key;
        if (auto it = entries_.find(key); it != entries_.end() && it->second.line > 0) os << " (line " << it->second.line << ")";
        os << ": " << msg;
        throw ConfigError(os.str());
    }

    const std::string& raw(const std::string& key) {
        used_.insert(key);
        return entries_.at(key).value;
    }

    double number(const std::string& key) {
        const std::string& s = raw(key);
        double v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) fail(key, "expected a number, got '" + s + "'");
        return v;
    }

    int integer(const std::string& key) {
        const std::string& s = raw(key);
        int v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) fail(key, "expected an integer, got '" + s + "'");
        return v;
    }

    bool boolean(const std::string& key) {
        const std::string& s = raw(key);
        if (s == "true") return true;
        if (s == "false") return false;
        fail(key, "expected true or false, got '" + s + "'");
    }

    std::vector<double> numbers(const std::string& key) {
        std::vector<double> out;
        for (const std::string& item : split_list(raw(key))) {
            double v = 0;
            const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
            if (r.ec != std::errc{} || r.ptr != item.data() + item.size()) fail(key, "expected numbers, got '" + item + "'");
            out.push_back(v);
        }
        return out;
    }

    void reject_unused() const {
        for (const auto& [k, e] : entries_)
            if (!used_.count(k)) fail(k, "unknown key");
    }

private:
    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
    std::string source_;
};

inline std::map<std::string, Entry> parse_key_values(std::string_view text, const std::string& source) {
    std::map<std::string, Entry> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ": line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError(source + ": line " + std::to_string(line_no) + ": empty key");
        if (out.count(key))
            throw ConfigError(source + ": " + key + " (line " + std::to_string(line_no) + "): duplicate key");
        out[key] = {value, line_no};
    }
    return out;
}

inline int line_of(std::string_view text, std::size_t byte) {
    int line = 1;
    for (std::size_t k = 0; k < std::min(byte, text.size()); ++k)
        if (text[k] == '\n') ++line;
    return line;
}

inline void flatten_json(const nlohmann::ordered_json& j, const std::string& prefix, std::string_view text,
                         std::map<std::string, Entry>& out, const std::string& source) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        const auto where = text.find("\"" + it.key() + "\"");
        const int line = where == std::string_view::npos ? 0 : line_of(text, where);
        const auto& v = it.value();
        if (v.is_object()) {
            flatten_json(v, key, text, out, source);
            continue;
        }
        std::string s;
        if (v.is_string()) {
            s = v.get<std::string>();
        } else if (v.is_array()) {
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (k) s += ",";
                s += v[k].is_string() ? v[k].get<std::string>()
                                      : (v[k].is_number() ? format_double(v[k].get<double>()) : v[k].dump());
            }
        } else if (v.is_boolean()) {
            s = v.get<bool>() ? "true" : "false";
        } else if (v.is_number_integer()) {
            s = std::to_string(v.get<long long>());
        } else if (v.is_number()) {
            s = format_double(v.get<double>());
        } else {
            throw ConfigError(source + ": " + key + " (line " + std::to_string(line) + "): unsupported value");
        }
        out[key] = {s, line};
    }
}

inline const std::vector<std::string>& model_keys() {
    static const std::vector<std::string> k{"epsilon", "delta",   "g",           "omega_b", "gamma_L",
                                            "gamma_R", "gamma_b", "temperature", "n_fock"};
    return k;
}

inline double& model_field(ModelParams& p, std::string_view name) {
    if (name == "epsilon") return p.epsilon;
    if (name == "delta") return p.delta;
    if (name == "g") return p.g;
    if (name == "omega_b") return p.omega_b;
    if (name == "gamma_L") return p.gamma_L;
    if (name == "gamma_R") return p.gamma_R;
    if (name == "gamma_b") return p.gamma_b;
    return p.temperature;
}

inline RunConfig build_config(KeyReader& r) {
    RunConfig c;

    // model.* keys
    ModelParams model;
    bool any_model = false;
    for (const std::string& name : model_keys()) {
        const std::string key = "model." + name;
        if (!r.has(key)) continue;
        any_model = true;
        if (name == "n_fock") model.n_fock = r.integer(key);
        else model_field(model, name) = r.number(key);
    }
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        r.fail("model", e.what());
    }

    if (r.has("preset")) {
        c.preset = r.raw("preset");
        try {
            c.sweep = preset(c.preset);
        } catch (const std::invalid_argument& e) {
            r.fail("preset", e.what());
        }
        for (const std::string& name : model_keys()) {
            const std::string key = "model." + name;
            if (!r.has(key)) continue;
            const bool differs = name == "n_fock" ? true : model_field(model, name) != model_field(c.sweep->base, name);
            if (differs)
                r.fail(key, "conflicts with preset '" + c.preset + "'; use either the preset or explicit model keys, not both");
        }
        c.model = c.sweep->base;
        for (const char* k : {"sweep.axis1.name", "sweep.axis2.name", "sweep.quantities", "sweep.omega"})
            if (r.has(k)) r.fail(k, "conflicts with preset '" + c.preset + "'; presets fix the grid");
    } else {
        c.model = model;
        (void)any_model;
    }

    // sweep.* keys
    if (!c.sweep && r.has("sweep.axis1.name")) {
        SweepSpec s;
        s.base = c.model;
        c.sweep = s;
    }
    if (c.sweep) {
        SweepSpec& s = *c.sweep;
        if (c.preset.empty()) {
            s.axes.clear();
            for (const char* ax : {"sweep.axis1", "sweep.axis2"}) {
                const std::string base = ax;
                if (!r.has(base + ".name")) {
                    for (const char* f : {".start", ".stop", ".count", ".values"})
                        if (r.has(base + f)) r.fail(base + f, "axis has no name");
                    continue;
                }
                AxisSpec a;
                try {
                    a.axis = axis_from_string(r.raw(base + ".name"));
                } catch (const std::invalid_argument& e) {
                    r.fail(base + ".name", e.what());
                }
                if (r.has(base + ".values")) {
                    a.values = r.numbers(base + ".values");
                    if (a.values.size() < 2) r.fail(base + ".values", "counts >= 2");
                    for (const char* f : {".start", ".stop", ".count"})
                        if (r.has(base + f)) r.fail(base + f, "give either values or start/stop/count");
                } else {
                    for (const char* f : {".start", ".stop", ".count"})
                        if (!r.has(base + f)) r.fail(base + f, "missing (or give " + base + ".values)");
                    a.start = r.number(base + ".start");
                    a.stop = r.number(base + ".stop");
                    a.count = r.integer(base + ".count");
                    if (a.count < 2) r.fail(base + ".count", "counts >= 2");
                }
                s.axes.push_back(a);
            }
            if (s.axes.size() == 2 && s.axes[0].axis == s.axes[1].axis) r.fail("sweep.axis2.name", "axis parameters must be distinct");
            if (r.has("sweep.quantities")) {
                s.quantities.clear();
                for (const std::string& q : split_list(r.raw("sweep.quantities"))) {
                    try {
                        s.quantities.push_back(quantity_from_string(q));
                    } catch (const std::invalid_argument& e) {
                        r.fail("sweep.quantities", e.what());
                    }
                }
                if (s.quantities.empty()) r.fail("sweep.quantities", "empty list");
            }
            if (r.has("sweep.omega")) s.omega = r.number("sweep.omega");
        }
        if (r.has("sweep.cutoff_start")) s.cutoff_start = r.integer("sweep.cutoff_start");
        if (r.has("sweep.cutoff_max")) s.cutoff_max = r.integer("sweep.cutoff_max");
        if (r.has("sweep.fixed_cutoff")) s.fixed_cutoff = r.integer("sweep.fixed_cutoff");
        if (r.has("sweep.fail_fast")) s.fail_fast = r.boolean("sweep.fail_fast");
        try {
            s.validate();
        } catch (const std::invalid_argument& e) {
            r.fail("sweep", e.what());
        }
    } else {
        for (const char* k : {"sweep.axis2.name", "sweep.quantities", "sweep.omega", "sweep.cutoff_start", "sweep.cutoff_max",
                              "sweep.fixed_cutoff", "sweep.fail_fast"})
            if (r.has(k)) r.fail(k, "sweep keys need sweep.axis1.name or a preset");
    }

    // spectrum.* keys
    SpectrumConfig& sp = c.spectrum;
    if (r.has("spectrum.pair")) {
        try {
            sp.pair = pair_from_string(r.raw("spectrum.pair"));
        } catch (const std::invalid_argument& e) {
            r.fail("spectrum.pair", e.what());
        }
    }
    if (r.has("spectrum.normalization")) {
        try {
            sp.normalization = normalization_from_string(r.raw("spectrum.normalization"));
        } catch (const std::invalid_argument& e) {
            r.fail("spectrum.normalization", e.what());
        }
    }
    if (sp.normalization == Normalization::fano && !sp.pair.diagonal())
        r.fail("spectrum.normalization", "fano normalization needs i = j; use raw for cross pairs");
    if (r.has("spectrum.start")) sp.start = r.number("spectrum.start");
    if (r.has("spectrum.stop")) sp.stop = r.number("spectrum.stop");
    if (r.has("spectrum.count")) {
        sp.count = r.integer("spectrum.count");
        if (sp.count < 2) r.fail("spectrum.count", "counts >= 2");
    }
    if (r.has("spectrum.t_max")) {
        sp.t_max = r.number("spectrum.t_max");
        if (sp.t_max < 0) r.fail("spectrum.t_max", "must be >= 0");
    }
    if (r.has("spectrum.dt")) {
        sp.dt = r.number("spectrum.dt");
        if (!(sp.dt > 0)) r.fail("spectrum.dt", "must be > 0");
    }

    // output, methods, check, workers
    if (r.has("output.path")) c.output_path = r.raw("output.path");
    if (r.has("output.format")) {
        const std::string& f = r.raw("output.format");
        if (f == "csv") c.format = OutputFormat::csv;
        else if (f == "json") c.format = OutputFormat::json;
        else r.fail("output.format", "expected csv or json, got '" + f + "'");
    }
    if (r.has("methods")) {
        c.methods.clear();
        for (const std::string& m : split_list(r.raw("methods"))) {
            try {
                const NoiseMethod nm = method_from_string(m);
                if (std::find(c.methods.begin(), c.methods.end(), nm) == c.methods.end()) c.methods.push_back(nm);
            } catch (const std::invalid_argument& e) {
                r.fail("methods", e.what());
            }
        }
        if (c.methods.empty()) r.fail("methods", "empty list");
    }
    if (r.has("check")) {
        const std::string& l = r.raw("check");
        if (l == "fast") c.check = CheckLevel::fast;
        else if (l == "full") c.check = CheckLevel::full;
        else r.fail("check", "expected fast or full, got '" + l + "'");
    }
    if (r.has("workers")) {
        c.workers = r.integer("workers");
        if (c.workers < 1) r.fail("workers", "must be >= 1");
    }
    r.reject_unused();
    return c;
}

} // namespace detail

// Parses either the key-value text format or a JSON object (detected by a leading '{').
inline RunConfig parse_config_text(std::string_view text, const std::string& source = "<config>") {
    std::map<std::string, detail::Entry> entries;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(source + ": line " + std::to_string(detail::line_of(text, e.byte)) + ": invalid JSON: " + e.what());
        }
        if (!j.is_object()) throw ConfigError(source + ": JSON config must be an object");
        detail::flatten_json(j, "", text, entries, source);
    } else {
        entries = detail::parse_key_values(text, source);
    }
    detail::KeyReader reader(std::move(entries), source);
    return detail::build_config(reader);
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

inline std::string join_numbers(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ",";
        s += format_double(v[k]);
    }
    return s;
}

// Key-value text that parses back to an equal RunConfig.
inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    auto kv = [&os](std::string_view k, const std::string& v) { os << k << " = " << v << "\n"; };
    if (!c.preset.empty()) {
        kv("preset", c.preset);
    } else {
        const ModelParams& m = c.model;
        kv("model.epsilon", format_double(m.epsilon));
        kv("model.delta", format_double(m.delta));
        kv("model.g", format_double(m.g));
        kv("model.omega_b", format_double(m.omega_b));
        kv("model.gamma_L", format_double(m.gamma_L));
        kv("model.gamma_R", format_double(m.gamma_R));
        kv("model.gamma_b", format_double(m.gamma_b));
        kv("model.temperature", format_double(m.temperature));
        kv("model.n_fock", std::to_string(m.n_fock));
    }
    if (c.sweep) {
        const SweepSpec& s = *c.sweep;
        if (c.preset.empty()) {
            for (std::size_t k = 0; k < s.axes.size(); ++k) {
                const std::string base = "sweep.axis" + std::to_string(k + 1);
                const AxisSpec& a = s.axes[k];
                kv(base + ".name", std::string(to_string(a.axis)));
                if (!a.values.empty()) {
                    kv(base + ".values", join_numbers(a.values));
                } else {
                    kv(base + ".start", format_double(a.start));
                    kv(base + ".stop", format_double(a.stop));
                    kv(base + ".count", std::to_string(a.count));
                }
            }
            std::string q;
            for (std::size_t k = 0; k < s.quantities.size(); ++k) q += (k ? "," : "") + std::string(to_string(s.quantities[k]));
            kv("sweep.quantities", q);
            kv("sweep.omega", format_double(s.omega));
        }
        kv("sweep.cutoff_start", std::to_string(s.cutoff_start));
        kv("sweep.cutoff_max", std::to_string(s.cutoff_max));
        if (s.fixed_cutoff) kv("sweep.fixed_cutoff", std::to_string(*s.fixed_cutoff));
        kv("sweep.fail_fast", s.fail_fast ? "true" : "false");
    }
    const SpectrumConfig& sp = c.spectrum;
    kv("spectrum.pair", sp.pair.name());
    kv("spectrum.normalization", std::string(to_string(sp.normalization)));
    kv("spectrum.start", format_double(sp.start));
    kv("spectrum.stop", format_double(sp.stop));
    kv("spectrum.count", std::to_string(sp.count));
    kv("spectrum.t_max", format_double(sp.t_max));
    kv("spectrum.dt", format_double(sp.dt));
    if (!c.output_path.empty()) kv("output.path", c.output_path);
    kv("output.format", std::string(to_string(c.format)));
    std::string m;
    for (std::size_t k = 0; k < c.methods.size(); ++k) m += (k ? "," : "") + std::string(to_string(c.methods[k]));
    kv("methods", m);
    kv("check", std::string(to_string(c.check)));
    if (c.workers > 0) kv("workers", std::to_string(c.workers));
    return os.str();
}

// JSON emission with 17-significant-digit numbers; key order is insertion order.
inline void write_json(std::ostream& os, const nlohmann::ordered_json& j, int indent = 0) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    const std::string pad_in(static_cast<std::size_t>(indent + 2), ' ');
    switch (j.type()) {
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad_in << nlohmann::json(it.key()).dump() << ": ";
            write_json(os, it.value(), indent + 2);
        }
        os << "\n" << pad << "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        // numeric arrays stay on one line
        bool flat = std::all_of(j.begin(), j.end(), [](const auto& v) { return v.is_primitive(); });
        os << "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
            if (k) os << (flat ? ", " : ",");
            if (!flat) os << "\n" << pad_in;
            write_json(os, j[k], indent + 2);
        }
        if (!flat && !j.empty()) os << "\n" << pad;
        os << "]";
        return;
    }
    case nlohmann::json::value_t::number_float: os << format_double(j.get<double>()); return;
    default: os << j.dump(); return;
    }
}

inline std::string to_json_text(const nlohmann::ordered_json& j) {
    std::ostringstream os;
    write_json(os, j);
    os << "\n";
    return os.str();
}

inline nlohmann::ordered_json model_json(const ModelParams& p) {
    nlohmann::ordered_json j;
    j["epsilon"] = p.epsilon;
    j["delta"] = p.delta;
    j["g"] = p.g;
    j["omega_b"] = p.omega_b;
    j["gamma_L"] = p.gamma_L;
    j["gamma_R"] = p.gamma_R;
    j["gamma_b"] = p.gamma_b;
    j["temperature"] = p.temperature;
    j["n_fock"] = p.n_fock;
    return j;
}

inline std::string pair_label(ChannelPair p) { return std::string(to_string(p.i)) + ":" + std::string(to_string(p.j)); }

inline std::string spectra_csv(const std::vector<NoiseSpectrum>& spectra) {
    std::ostringstream os;
    os << "#schema=" << kSpectrumSchema << " columns=omega,value,method,pair,normalization\n";
    os << "omega,value,method,pair,normalization\n";
    for (const NoiseSpectrum& s : spectra)
        for (std::size_t k = 0; k < s.omegas.size(); ++k)
            os << format_double(s.omegas[k]) << "," << format_double(s.values[k]) << "," << to_string(s.method) << ","
               << pair_label(s.pair) << "," << to_string(s.normalization) << "\n";
    return os.str();
}

inline std::string spectra_json(const std::vector<NoiseSpectrum>& spectra, const ModelParams& p) {
    nlohmann::ordered_json j;
    j["schema"] = kSpectrumSchema;
    j["model"] = model_json(p);
    j["spectra"] = nlohmann::ordered_json::array();
    for (const NoiseSpectrum& s : spectra) {
        nlohmann::ordered_json e;
        e["pair"] = pair_label(s.pair);
        e["method"] = std::string(to_string(s.method));
        e["normalization"] = std::string(to_string(s.normalization));
        e["omega"] = s.omegas;
        e["values"] = s.values;
        j["spectra"].push_back(e);
    }
    return to_json_text(j);
}

inline std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : "null"; }

inline std::string grid_csv(const GridResult& g) {
    std::ostringstream os;
    os << "#schema=" << kSweepSchema << " preset=" << (g.spec.preset.empty() ? "none" : g.spec.preset)
       << " cutoff=" << g.cutoff_used << " convergence=" << format_double(g.convergence.max_change) << "\n";
    for (const AxisSpec& a : g.spec.axes) os << to_string(a.axis) << ",";
    for (std::size_t k = 0; k < g.spec.quantities.size(); ++k) os << (k ? "," : "") << to_string(g.spec.quantities[k]);
    os << "\n";
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
            os << format_double(g.axis_values[0][i]) << ",";
            if (g.axis_values.size() == 2) os << format_double(g.axis_values[1][j]) << ",";
            for (std::size_t k = 0; k < g.spec.quantities.size(); ++k)
                os << (k ? "," : "") << optional_text(g.at(g.spec.quantities[k], i, j));
            os << "\n";
        }
    return os.str();
}

inline std::string grid_json(const GridResult& g) {
    nlohmann::ordered_json j;
    j["schema"] = kSweepSchema;
    j["preset"] = g.spec.preset.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(g.spec.preset);
    j["model"] = model_json(g.spec.base);
    j["omega"] = g.spec.omega;
    j["axes"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < g.spec.axes.size(); ++k) {
        nlohmann::ordered_json a;
        a["name"] = std::string(to_string(g.spec.axes[k].axis));
        a["values"] = g.axis_values[k];
        j["axes"].push_back(a);
    }
    nlohmann::ordered_json data;
    for (Quantity q : g.spec.quantities) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < g.rows(); ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (std::size_t c = 0; c < g.cols(); ++c) {
                const auto v = g.at(q, i, c);
                row.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
            }
            rows.push_back(row);
        }
        data[std::string(to_string(q))] = rows;
    }
    j["data"] = data;
    j["cutoff_used"] = g.cutoff_used;
    nlohmann::ordered_json conv;
    conv["max_change"] = g.convergence.max_change;
    conv["ladder"] = g.convergence.ladder;
    conv["monotone"] = g.convergence.monotone;
    j["convergence"] = conv;
    j["failures"] = g.failures;
    return to_json_text(j);
}

inline std::string moment_json(const MomentReport& r, const ModelParams& p) {
    nlohmann::ordered_json j;
    j["schema"] = kSteadySchema;
    j["model"] = model_json(p);
    j["current_e"] = r.current_e;
    j["current_b"] = r.current_b;
    j["current_in"] = r.current_in;
    j["mean_n"] = r.mean_n;
    j["mean_n2"] = r.mean_n2;
    j["fano_q"] = r.fano_q;
    j["vacuum"] = r.vacuum;
    j["quad_min"] = {{"phi_star", r.quad_min.phi_star}, {"value", r.quad_min.value}};
    j["mean_a"] = {{"re", r.mean_a.real()}, {"im", r.mean_a.imag()}};
    j["mean_a2"] = {{"re", r.mean_a2.real()}, {"im", r.mean_a2.imag()}};
    j["residual"] = r.residual;
    j["min_eigenvalue"] = r.min_eigenvalue;
    return to_json_text(j);
}

} // namespace dqdnoise
