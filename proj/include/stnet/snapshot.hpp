#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stnet/agents.hpp"
#include "stnet/peer.hpp"

// Binary snapshot of a finished run: per-agent IR state plus each peer's
// overlay node. Enough to rebuild the world and replay ad-hoc queries.

namespace stnet {

struct NodeSnap {
    SectorPath path;
    std::uint64_t parent = 0;  // 0 = none (root)
    struct Child {
        bool materialized = false;
        PeerAddress addr = 0;
        std::uint32_t last_count = 0;
        bool has_children = false;
    };
    std::array<Child, 4> children;
    std::vector<Flag> stored;
};

struct AgentSnap {
    AgentId id = 0;
    Point location;
    PeerAddress gateway = 0;
    std::vector<InfoItem> items;
    std::vector<ExpertiseFlag> profile_flags;
    std::vector<std::vector<std::uint64_t>> profile_members;
    std::vector<Flag> link_flags;
    std::optional<NodeSnap> node;
};

struct SnapshotData {
    std::map<std::string, std::string> config_kv;
    std::vector<AgentSnap> agents;
};

std::vector<std::uint8_t> encode_snapshot(const SnapshotData& s);
SnapshotData decode_snapshot(const std::vector<std::uint8_t>& bytes);

void save_snapshot(const std::string& path, const SnapshotData& s);
SnapshotData load_snapshot(const std::string& path);

}  // namespace stnet
