#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "stnet/agents.hpp"
#include "stnet/corpus.hpp"
#include "stnet/peer.hpp"
#include "stnet/simnet.hpp"
#include "stnet/smallworld.hpp"

// Flat key=value run configuration. Every module constant is surfaced here;
// unknown keys are rejected so typos fail fast. The resolved config renders
// back to sorted key=value lines, which is what the manifest records.

namespace stnet {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct RunConfig {
    std::uint64_t seed = 42;
    std::uint32_t n_agents = 200;
    std::string corpus_path;  // empty -> generate synthetically
    SyntheticConfig synth;
    double replication = 1.5;
    OverlayConfig overlay;
    AgentParams agent;
    SmallWorldConfig smallworld{4, 2, 2.0, 0};
    LatencyModel latency;
    std::uint32_t n_queries = 100;
    std::uint64_t event_limit = 20'000'000;

    std::map<std::string, std::string> to_kv() const;
};

// key=value per line, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_kv_text(const std::string& text);
std::map<std::string, std::string> load_kv_file(const std::string& path);

// Applies kv entries over the defaults; throws std::invalid_argument naming
// the key on unknown keys or bad values.
RunConfig config_from_kv(const std::map<std::string, std::string>& kv);

std::string render_manifest(const RunConfig& cfg, const std::string& command,
                            const std::map<std::string, std::string>& outputs);

}  // namespace stnet
