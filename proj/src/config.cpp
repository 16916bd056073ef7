#include "stnet/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stnet {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        std::uint64_t r = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': expected integer, got '" + v + "'");
    }
}

double parse_f64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': expected number, got '" + v + "'");
    }
}

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value, got '" + s + "'");
        }
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        }
        kv[key] = val;
    }
    return kv;
}

std::map<std::string, std::string> load_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_kv_text(ss.str());
}

RunConfig config_from_kv(const std::map<std::string, std::string>& kv) {
    RunConfig cfg;
    for (const auto& [key, v] : kv) {
        if (key == "seed") {
            cfg.seed = parse_u64(key, v);
        } else if (key == "n_agents") {
            cfg.n_agents = static_cast<std::uint32_t>(parse_u64(key, v));
        } else if (key == "corpus") {
            cfg.corpus_path = v;
        } else if (key == "synth.n_docs") {
            cfg.synth.n_docs = parse_u64(key, v);
        } else if (key == "synth.hotspots") {
            cfg.synth.n_hotspots = static_cast<std::uint32_t>(parse_u64(key, v));
        } else if (key == "synth.sigma") {
            cfg.synth.hotspot_sigma = parse_f64(key, v);
        } else if (key == "synth.vocab") {
            cfg.synth.vocab_size = static_cast<std::uint32_t>(parse_u64(key, v));
        } else if (key == "synth.terms_per_doc") {
            cfg.synth.terms_per_doc = static_cast<std::uint32_t>(parse_u64(key, v));
        } else if (key == "replication") {
            cfg.replication = parse_f64(key, v);
        } else if (key == "capacity") {
            cfg.overlay.capacity = static_cast<std::uint32_t>(parse_u64(key, v));
            if (cfg.overlay.capacity < 1)
                throw std::invalid_argument("config key 'capacity': must be >= 1");
        } else if (key == "max_depth") {
            cfg.overlay.max_depth = static_cast<int>(parse_u64(key, v));
            if (cfg.overlay.max_depth < 1 || cfg.overlay.max_depth > kMaxDepthLimit)
                throw std::invalid_argument("config key 'max_depth': must be in [1," +
                                            std::to_string(kMaxDepthLimit) + "]");
        } else if (key == "merge_fraction") {
            cfg.overlay.merge_fraction = parse_f64(key, v);
            if (cfg.overlay.merge_fraction <= 0.0 || cfg.overlay.merge_fraction > 1.0)
                throw std::invalid_argument("config key 'merge_fraction': must be in (0,1]");
        } else if (key == "eps") {
            cfg.agent.eps = parse_f64(key, v);
            if (cfg.agent.eps <= 0.0) throw std::invalid_argument("config key 'eps': must be > 0");
        } else if (key == "min_pts") {
            cfg.agent.min_pts = static_cast<int>(parse_u64(key, v));
            if (cfg.agent.min_pts < 1)
                throw std::invalid_argument("config key 'min_pts': must be >= 1");
        } else if (key == "summary_k") {
            if (parse_u64(key, v) != kSummaryK)
                throw std::invalid_argument(
                    "config key 'summary_k': fixed at " + std::to_string(kSummaryK) +
                    " in this build (baked into the flag codec)");
        } else if (key == "vicinity_r") {
            cfg.agent.vicinity_r = parse_f64(key, v);
        } else if (key == "ttl") {
            cfg.agent.ttl = static_cast<std::uint32_t>(parse_u64(key, v));
        } else if (key == "fanout") {
            cfg.agent.fanout = static_cast<std::uint32_t>(parse_u64(key, v));
        } else if (key == "sw.k_local") {
            cfg.smallworld.k_local = static_cast<std::uint32_t>(parse_u64(key, v));
        } else if (key == "sw.q_long") {
            cfg.smallworld.q_long = static_cast<std::uint32_t>(parse_u64(key, v));
        } else if (key == "sw.alpha") {
            cfg.smallworld.alpha = parse_f64(key, v);
            if (cfg.smallworld.alpha < 0.0)
                throw std::invalid_argument("config key 'sw.alpha': must be >= 0");
        } else if (key == "latency") {
            cfg.latency = LatencyModel::parse(v);
        } else if (key == "n_queries") {
            cfg.n_queries = static_cast<std::uint32_t>(parse_u64(key, v));
        } else if (key == "event_limit") {
            cfg.event_limit = parse_u64(key, v);
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
    // streams used by the library are derived from the run seed
    cfg.synth.seed = cfg.seed;
    cfg.smallworld.seed = cfg.seed;
    return cfg;
}

std::map<std::string, std::string> RunConfig::to_kv() const {
    std::map<std::string, std::string> kv;
    kv["seed"] = std::to_string(seed);
    kv["n_agents"] = std::to_string(n_agents);
    kv["corpus"] = corpus_path;
    kv["synth.n_docs"] = std::to_string(synth.n_docs);
    kv["synth.hotspots"] = std::to_string(synth.n_hotspots);
    kv["synth.sigma"] = fmt_double(synth.hotspot_sigma);
    kv["synth.vocab"] = std::to_string(synth.vocab_size);
    kv["synth.terms_per_doc"] = std::to_string(synth.terms_per_doc);
    kv["replication"] = fmt_double(replication);
    kv["capacity"] = std::to_string(overlay.capacity);
    kv["max_depth"] = std::to_string(overlay.max_depth);
    kv["merge_fraction"] = fmt_double(overlay.merge_fraction);
    kv["eps"] = fmt_double(agent.eps);
    kv["min_pts"] = std::to_string(agent.min_pts);
    kv["summary_k"] = std::to_string(kSummaryK);
    kv["vicinity_r"] = fmt_double(agent.vicinity_r);
    kv["ttl"] = std::to_string(agent.ttl);
    kv["fanout"] = std::to_string(agent.fanout);
    kv["sw.k_local"] = std::to_string(smallworld.k_local);
    kv["sw.q_long"] = std::to_string(smallworld.q_long);
    kv["sw.alpha"] = fmt_double(smallworld.alpha);
    kv["latency"] = latency.to_string();
    kv["n_queries"] = std::to_string(n_queries);
    kv["event_limit"] = std::to_string(event_limit);
    return kv;
}

std::string render_manifest(const RunConfig& cfg, const std::string& command,
                            const std::map<std::string, std::string>& outputs) {
    std::ostringstream out;
    out << "# stnet run manifest\n";
    out << "artifact_version=" << kArtifactVersion << "\n";
    out << "command=" << command << "\n";
    for (const auto& [k, v] : outputs) out << "out." << k << "=" << v << "\n";
    for (const auto& [k, v] : cfg.to_kv()) out << k << "=" << v << "\n";
    return out.str();
}

}  // namespace stnet
