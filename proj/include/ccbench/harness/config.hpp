#pragma once

// Experiment configuration: a flat map of dotted keys (env.*, method.*, run.*,
// output.*, sweep.*) to scalars or lists, stored on disk as a YAML mapping.
//
//   env.kind: trace_conditioning
//   env.isi_preset: medium
//   method.kind: lstm
//   method.engine: tbptt
//   method.truncation: 20
//   method.step_size: 0.001
//   run.steps: 500000
//   run.n_runs: 10
//   run.seed: 7
//   output.dir: out/lstm_t20
//
// Presets (env.isi_preset, env.difficulty) are expanded on load; serialized
// configs always carry explicit values, so parse(serialize(c)) == c.

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include "ccbench/envs.hpp"
#include "ccbench/learn.hpp"

namespace ccbench::harness {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scalar formatting and parsing (locale independent)

inline std::string format_number(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t v) { return std::to_string(v); }

inline double parse_double(const std::string& key, const std::string& s)
{
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw config_error("config key '" + key + "': expected a number, got '" + s + "'");
    return v;
}

inline std::int64_t parse_int(const std::string& key, const std::string& s)
{
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        // accept integral values written in float notation, e.g. 2e6
        const double d = parse_double(key, s);
        if (d != static_cast<double>(static_cast<std::int64_t>(d)))
            throw config_error("config key '" + key + "': expected an integer, got '" + s + "'");
        return static_cast<std::int64_t>(d);
    }
    return v;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& s)
{
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw config_error("config key '" + key + "': expected an unsigned integer, got '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& s)
{
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw config_error("config key '" + key + "': expected a boolean, got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Raw key/value documents

/// A config value: one scalar, or a list when `is_list`.
struct config_value {
    std::vector<std::string> items;
    bool is_list = false;

    const std::string& scalar(const std::string& key) const
    {
        if (is_list || items.size() != 1)
            throw config_error("config key '" + key + "': expected a single value");
        return items.front();
    }
    bool operator==(const config_value&) const = default;
};

using config_map = std::map<std::string, config_value>;

inline config_map parse_config_text(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw config_error(std::string("malformed config: ") + e.what());
    }
    config_map out;
    if (root.IsNull()) return out;
    if (!root.IsMap()) throw config_error("malformed config: expected a mapping of dotted keys");
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        config_value cv;
        if (v.IsSequence()) {
            cv.is_list = true;
            for (const auto& item : v) {
                if (!item.IsScalar()) throw config_error("config key '" + key + "': nested lists are not supported");
                cv.items.push_back(item.as<std::string>());
            }
        } else if (v.IsScalar()) {
            cv.items.push_back(v.as<std::string>());
        } else {
            throw config_error("config key '" + key + "': expected a scalar or a list");
        }
        if (!out.emplace(key, std::move(cv)).second) throw config_error("duplicate config key '" + key + "'");
    }
    return out;
}

inline config_map load_config_file(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) throw config_error("config not found: " + path.string());
    std::ifstream in(path);
    if (!in) throw config_error("config not readable: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string emit_config_text(const config_map& m)
{
    YAML::Emitter e;
    e << YAML::BeginMap;
    for (const auto& [key, v] : m) {
        e << YAML::Key << key << YAML::Value;
        if (v.is_list) {
            e << YAML::Flow << YAML::BeginSeq;
            for (const auto& item : v.items) e << item;
            e << YAML::EndSeq;
        } else {
            e << v.items.front();
        }
    }
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Typed experiment configuration

enum class method_kind { presence, tile_coded, microstimulus, esn, vanilla, lstm, gru };

inline bool is_recurrent(method_kind k)
{
    return k == method_kind::vanilla || k == method_kind::lstm || k == method_kind::gru;
}

inline std::string to_string(method_kind k)
{
    switch (k) {
    case method_kind::presence: return "presence";
    case method_kind::tile_coded: return "tile_coded";
    case method_kind::microstimulus: return "microstimulus";
    case method_kind::esn: return "esn";
    case method_kind::vanilla: return "vanilla";
    case method_kind::lstm: return "lstm";
    case method_kind::gru: return "gru";
    }
    return "?";
}

inline method_kind parse_method_kind(const std::string& s)
{
    for (auto k : {method_kind::presence, method_kind::tile_coded, method_kind::microstimulus,
                   method_kind::esn, method_kind::vanilla, method_kind::lstm, method_kind::gru})
        if (to_string(k) == s) return k;
    throw config_error("config key 'method.kind': unknown method '" + s + "'");
}

inline cell_kind to_cell_kind(method_kind k)
{
    switch (k) {
    case method_kind::vanilla: return cell_kind::vanilla;
    case method_kind::gru: return cell_kind::gru;
    default: return cell_kind::lstm;
    }
}

struct method_spec {
    method_kind kind = method_kind::presence;
    double step_size = 1e-3;
    double lambda = 0.9;
    /// Stimulating-trace decay; 0 means 1 - 1/E[ISI].
    double trace_decay = 0.0;
    int n_tilings = 2;
    int n_tiles = 8;
    int n_rbfs = 8;
    double sigma = 0.8;
    int hidden = 10;
    double spectral_radius = 0.99;
    double input_scaling = 0.1;
    double density = 0.1;
    gradient_engine engine = gradient_engine::tbptt;
    int truncation = 10;
    bool augment = false;

    bool operator==(const method_spec&) const = default;
};

struct experiment_config {
    env_config env = trace_conditioning_config{};
    method_spec method;
    std::int64_t steps = 2'000'000;
    int n_runs = 30;
    std::uint64_t seed = 0;
    std::int64_t curve_bin = 10'000;
    double tail_epsilon = 1e-6;
    int profile_trials = 0;
    int profile_before = 10;
    /// Steps after CS onset in profiles; 0 means ISI upper bound + 20.
    int profile_after = 0;
    std::string output_dir = "out";

    bool operator==(const experiment_config&) const = default;
};

inline std::string problem_kind_name(const env_config& e)
{
    switch (e.index()) {
    case 0: return "trace_conditioning";
    case 1: return "noisy_patterning";
    default: return "trace_patterning";
    }
}

namespace detail {

inline isi_preset parse_isi_preset(const std::string& s)
{
    if (s == "short") return isi_preset::short_isi;
    if (s == "medium") return isi_preset::medium_isi;
    if (s == "long") return isi_preset::long_isi;
    throw config_error("config key 'env.isi_preset': expected short, medium or long, got '" + s + "'");
}

inline difficulty parse_difficulty(const std::string& s)
{
    if (s == "easy") return difficulty::easy;
    if (s == "medium") return difficulty::medium;
    if (s == "hard") return difficulty::hard;
    throw config_error("config key 'env.difficulty': expected easy, medium or hard, got '" + s + "'");
}

/// Tracks which keys were consumed so leftovers can be reported.
class reader {
public:
    explicit reader(const config_map& m) : m_(m) {}

    const config_value* find(const std::string& key)
    {
        auto it = m_.find(key);
        if (it == m_.end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }
    bool has(const std::string& key) const { return m_.count(key) != 0; }

    template <class T, class Parse>
    void get(const std::string& key, T& out, Parse parse)
    {
        if (const auto* v = find(key)) out = static_cast<T>(parse(key, v->scalar(key)));
    }
    void get_int(const std::string& key, int& out) { get(key, out, parse_int); }
    void get_int(const std::string& key, std::int64_t& out) { get(key, out, parse_int); }
    void get_double(const std::string& key, double& out) { get(key, out, parse_double); }

    void check_all_used() const
    {
        for (const auto& [key, v] : m_) {
            if (used_.count(key) || key.rfind("sweep.", 0) == 0) continue;
            throw config_error("unknown config key '" + key + "'");
        }
    }

private:
    const config_map& m_;
    std::set<std::string> used_;
};

inline void read_schedule(reader& r, int& isi_low, int& isi_high, int& iti_low, int& iti_high,
                          int& cs_dur, int& us_dur)
{
    if (const auto* p = r.find("env.isi_preset")) {
        std::tie(isi_low, isi_high) = isi_bounds(parse_isi_preset(p->scalar("env.isi_preset")));
    }
    r.get_int("env.isi_low", isi_low);
    r.get_int("env.isi_high", isi_high);
    r.get_int("env.iti_low", iti_low);
    r.get_int("env.iti_high", iti_high);
    r.get_int("env.cs_duration", cs_dur);
    r.get_int("env.us_duration", us_dur);
}

inline void read_patterns(reader& r, int& n_cs, int& n_patterns, int& n_distractors, double& noise)
{
    if (const auto* d = r.find("env.difficulty")) {
        const auto p = noisy_patterning_preset(parse_difficulty(d->scalar("env.difficulty")));
        n_cs = p.n_cs;
        n_patterns = p.n_patterns;
        n_distractors = p.n_distractors;
        noise = p.noise;
    }
    r.get_int("env.n_cs", n_cs);
    r.get_int("env.n_patterns", n_patterns);
    r.get_int("env.n_distractors", n_distractors);
    r.get_double("env.noise", noise);
}

} // namespace detail

/// Builds a typed config from a key map; unknown keys and bad values throw
/// config_error naming the key. sweep.* keys are ignored here.
inline experiment_config from_map(const config_map& m)
{
    detail::reader r(m);
    experiment_config c;

    std::string env_kind = "trace_conditioning";
    if (const auto* v = r.find("env.kind")) env_kind = v->scalar("env.kind");
    if (env_kind == "trace_conditioning") {
        trace_conditioning_config e;
        detail::read_schedule(r, e.isi_low, e.isi_high, e.iti_low, e.iti_high, e.cs_duration,
                              e.us_duration);
        if (const auto* v = r.find("env.distractor_means")) {
            e.distractor_means.clear();
            for (const auto& s : v->items) e.distractor_means.push_back(parse_double("env.distractor_means", s));
        }
        r.get_int("env.distractor_duration", e.distractor_duration);
        c.env = e;
    } else if (env_kind == "noisy_patterning") {
        noisy_patterning_config e;
        detail::read_patterns(r, e.n_cs, e.n_patterns, e.n_distractors, e.noise);
        r.get_int("env.isi", e.isi);
        r.get_int("env.iti_low", e.iti_low);
        r.get_int("env.iti_high", e.iti_high);
        r.get_int("env.cs_duration", e.cs_duration);
        r.get_int("env.us_duration", e.us_duration);
        c.env = e;
    } else if (env_kind == "trace_patterning") {
        trace_patterning_config e;
        detail::read_patterns(r, e.n_cs, e.n_patterns, e.n_distractors, e.noise);
        detail::read_schedule(r, e.isi_low, e.isi_high, e.iti_low, e.iti_high, e.cs_duration,
                              e.us_duration);
        c.env = e;
    } else {
        throw config_error("config key 'env.kind': unknown problem '" + env_kind + "'");
    }
    try {
        validate(c.env);
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }

    auto& mth = c.method;
    if (const auto* v = r.find("method.kind")) mth.kind = parse_method_kind(v->scalar("method.kind"));
    const bool rnn = is_recurrent(mth.kind);
    mth.lambda = rnn ? 0.0 : 0.9;
    mth.hidden = mth.kind == method_kind::esn ? 100 : 10;
    r.get_double("method.step_size", mth.step_size);
    r.get_double("method.lambda", mth.lambda);
    r.get_double("method.trace_decay", mth.trace_decay);
    r.get_int("method.n_tilings", mth.n_tilings);
    r.get_int("method.n_tiles", mth.n_tiles);
    r.get_int("method.n_rbfs", mth.n_rbfs);
    r.get_double("method.sigma", mth.sigma);
    r.get_int("method.hidden", mth.hidden);
    r.get_double("method.spectral_radius", mth.spectral_radius);
    r.get_double("method.input_scaling", mth.input_scaling);
    r.get_double("method.density", mth.density);
    if (const auto* v = r.find("method.engine")) {
        const auto& s = v->scalar("method.engine");
        if (s == "tbptt") mth.engine = gradient_engine::tbptt;
        else if (s == "rtrl") mth.engine = gradient_engine::rtrl;
        else throw config_error("config key 'method.engine': expected tbptt or rtrl, got '" + s + "'");
    }
    r.get_int("method.truncation", mth.truncation);
    r.get(std::string("method.augment"), mth.augment, parse_bool);

    if (!(mth.step_size > 0.0)) throw config_error("config key 'method.step_size': must be > 0");
    if (rnn && mth.lambda != 0.0) throw config_error("config key 'method.lambda': recurrent learners use lambda = 0");
    if (mth.lambda < 0.0 || mth.lambda > 1.0) throw config_error("config key 'method.lambda': must be in [0,1]");
    if (mth.trace_decay < 0.0 || mth.trace_decay >= 1.0) throw config_error("config key 'method.trace_decay': must be in [0,1)");
    if (mth.hidden < 1) throw config_error("config key 'method.hidden': must be >= 1");
    if (mth.truncation < 1) throw config_error("config key 'method.truncation': must be >= 1");
    if (mth.n_tilings < 1) throw config_error("config key 'method.n_tilings': must be >= 1");
    if (mth.n_tiles < 2) throw config_error("config key 'method.n_tiles': must be >= 2");
    if (mth.n_rbfs < 1) throw config_error("config key 'method.n_rbfs': must be >= 1");
    if (!(mth.sigma > 0.0)) throw config_error("config key 'method.sigma': must be > 0");
    if (!(mth.spectral_radius > 0.0 && mth.spectral_radius < 1.0)) throw config_error("config key 'method.spectral_radius': must be in (0,1)");
    if (!(mth.density > 0.0 && mth.density <= 1.0)) throw config_error("config key 'method.density': must be in (0,1]");

    r.get_int("run.steps", c.steps);
    r.get_int("run.n_runs", c.n_runs);
    r.get("run.seed", c.seed, parse_uint);
    r.get_int("run.curve_bin", c.curve_bin);
    r.get_double("run.tail_epsilon", c.tail_epsilon);
    r.get_int("run.profile_trials", c.profile_trials);
    r.get_int("run.profile_before", c.profile_before);
    r.get_int("run.profile_after", c.profile_after);
    if (const auto* v = r.find("output.dir")) c.output_dir = v->scalar("output.dir");
    if (c.steps < 1) throw config_error("config key 'run.steps': must be >= 1");
    if (c.n_runs < 1) throw config_error("config key 'run.n_runs': must be >= 1");
    if (c.curve_bin < 1) throw config_error("config key 'run.curve_bin': must be >= 1");
    if (!(c.tail_epsilon > 0.0 && c.tail_epsilon < 1.0)) throw config_error("config key 'run.tail_epsilon': must be in (0,1)");

    r.check_all_used();
    return c;
}

inline config_map to_map(const experiment_config& c)
{
    config_map m;
    auto put = [&](const std::string& k, std::string v) { m[k] = config_value{{std::move(v)}, false}; };
    auto put_i = [&](const std::string& k, std::int64_t v) { put(k, format_number(v)); };
    auto put_d = [&](const std::string& k, double v) { put(k, format_number(v)); };

    put("env.kind", problem_kind_name(c.env));
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            put_i("env.iti_low", e.iti_low);
            put_i("env.iti_high", e.iti_high);
            put_i("env.cs_duration", e.cs_duration);
            put_i("env.us_duration", e.us_duration);
            if constexpr (std::is_same_v<T, trace_conditioning_config>) {
                put_i("env.isi_low", e.isi_low);
                put_i("env.isi_high", e.isi_high);
                config_value means{{}, true};
                for (double d : e.distractor_means) means.items.push_back(format_number(d));
                m["env.distractor_means"] = means;
                put_i("env.distractor_duration", e.distractor_duration);
            } else {
                put_i("env.n_cs", e.n_cs);
                put_i("env.n_patterns", e.n_patterns);
                put_i("env.n_distractors", e.n_distractors);
                put_d("env.noise", e.noise);
                if constexpr (std::is_same_v<T, noisy_patterning_config>) {
                    put_i("env.isi", e.isi);
                } else {
                    put_i("env.isi_low", e.isi_low);
                    put_i("env.isi_high", e.isi_high);
                }
            }
        },
        c.env);

    const auto& mth = c.method;
    put("method.kind", to_string(mth.kind));
    put_d("method.step_size", mth.step_size);
    put_d("method.lambda", mth.lambda);
    put_d("method.trace_decay", mth.trace_decay);
    put_i("method.n_tilings", mth.n_tilings);
    put_i("method.n_tiles", mth.n_tiles);
    put_i("method.n_rbfs", mth.n_rbfs);
    put_d("method.sigma", mth.sigma);
    put_i("method.hidden", mth.hidden);
    put_d("method.spectral_radius", mth.spectral_radius);
    put_d("method.input_scaling", mth.input_scaling);
    put_d("method.density", mth.density);
    put("method.engine", mth.engine == gradient_engine::tbptt ? "tbptt" : "rtrl");
    put_i("method.truncation", mth.truncation);
    put("method.augment", mth.augment ? "true" : "false");

    put_i("run.steps", c.steps);
    put_i("run.n_runs", c.n_runs);
    put("run.seed", std::to_string(c.seed));
    put_i("run.curve_bin", c.curve_bin);
    put_d("run.tail_epsilon", c.tail_epsilon);
    put_i("run.profile_trials", c.profile_trials);
    put_i("run.profile_before", c.profile_before);
    put_i("run.profile_after", c.profile_after);
    put("output.dir", c.output_dir);
    return m;
}

inline std::string serialize(const experiment_config& c) { return emit_config_text(to_map(c)); }

inline experiment_config parse(const std::string& text) { return from_map(parse_config_text(text)); }

/// FNV-1a over the canonical key=value lines, excluding output.dir.
inline std::string digest(const experiment_config& c)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [key, v] : to_map(c)) {
        if (key == "output.dir") continue;
        feed(key);
        feed("=");
        for (std::size_t i = 0; i < v.items.size(); ++i) {
            if (i) feed(",");
            feed(v.items[i]);
        }
        feed("\n");
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i, h >>= 4) buf[i] = hex[h & 0xF];
    buf[16] = '\0';
    return buf;
}

/// Short human-readable problem label (no commas).
inline std::string problem_label(const env_config& e)
{
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, trace_conditioning_config>) {
                return "trace_conditioning/isi" + std::to_string(x.isi_low) + "-" + std::to_string(x.isi_high);
            } else {
                std::string s = std::is_same_v<T, noisy_patterning_config> ? "noisy_patterning" : "trace_patterning";
                s += "/cs" + std::to_string(x.n_cs) + "-p" + std::to_string(x.n_patterns) + "-d" +
                     std::to_string(x.n_distractors) + "-x" + format_number(x.noise);
                if constexpr (std::is_same_v<T, trace_patterning_config>)
                    s += "/isi" + std::to_string(x.isi_low) + "-" + std::to_string(x.isi_high);
                return s;
            }
        },
        e);
}

inline std::string method_label(const method_spec& m)
{
    std::string s = to_string(m.kind);
    switch (m.kind) {
    case method_kind::presence: break;
    case method_kind::tile_coded:
        s += "/tilings" + std::to_string(m.n_tilings) + "-tiles" + std::to_string(m.n_tiles);
        break;
    case method_kind::microstimulus: s += "/rbfs" + std::to_string(m.n_rbfs); break;
    case method_kind::esn:
        s += "/h" + std::to_string(m.hidden) + "-rho" + format_number(m.spectral_radius) + "-in" +
             format_number(m.input_scaling) + "-dens" + format_number(m.density);
        break;
    default:
        s += "/h" + std::to_string(m.hidden) + "/" +
             (m.engine == gradient_engine::rtrl ? std::string("rtrl") : "tbptt" + std::to_string(m.truncation));
        if (m.augment) s += "+traces";
        break;
    }
    s += "/a" + format_number(m.step_size);
    return s;
}

} // namespace ccbench::harness
