#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "stnet/flags.hpp"
#include "stnet/messages.hpp"
#include "stnet/simnet.hpp"

// The quadtree overlay role of a peer: at most one managed node per peer.
// The network structure follows the tree: child quadrants are either
// materialized (managed by another peer, found among the stored location
// flags) or virtual (content stays with this node). Flags live at the node
// of their smallest covering sector, truncated at the first virtual child.

namespace stnet {

struct OverlayConfig {
    std::uint32_t capacity = 16;
    int max_depth = kDefaultMaxDepth;
    double merge_fraction = 0.5;
};

struct ChildSlot {
    bool materialized = false;
    PeerAddress addr = 0;
    std::uint32_t last_count = 0;  // stored count last reported by the child
    bool has_children = false;
};

struct NodeState {
    SectorPath path;
    BoundingBox sector;
    std::optional<PeerAddress> parent;
    std::array<ChildSlot, 4> children;
    std::map<FlagId, Flag> stored;
    std::uint32_t capacity = 16;

    bool over_capacity() const { return stored.size() > capacity; }
    std::uint32_t materialized_children() const;
};

struct RouteDecision {
    enum class Action { Deliver, ToParent, ToChild };
    Action action = Action::Deliver;
    int child = -1;

    bool operator==(const RouteDecision&) const = default;
};

// One routing step: up until the node's path prefixes the target, down while
// the next-digit child is materialized, deliver at the boundary.
RouteDecision route_step(const NodeState& node, const SectorPath& target);

struct ChildCandidate {
    AgentId owner = 0;
    PeerAddress contact = 0;
};

// Scans the node's stored location flags for a resident peer per child
// quadrant; smallest owner id wins, the node's own manager is excluded.
// Purely local: no messages are needed to find child peers.
std::array<std::optional<ChildCandidate>, 4> select_child_peers(const NodeState& node,
                                                                PeerAddress self);

// Local flag filter shared by point and range queries; location flags skip
// the temporal test.
bool flag_matches(const Flag& f, std::uint8_t kind_mask, const BoundingBox& query_mbb,
                  const TimeInterval& query_time);

// Verifies the placement invariant for one node; returns false and fills
// `why` on violation.
bool check_node_invariant(const NodeState& node, int max_depth, std::string* why);

class PeerRole {
  public:
    PeerRole(PeerAddress self, OverlayConfig cfg, PeerAddress bootstrap);

    // Makes this peer the root manager; called once at simulation start.
    void adopt_root();

    // Installs node state rebuilt from a snapshot.
    void restore_node(NodeState n) { node_ = std::move(n); }

    bool manages_node() const { return node_.has_value(); }
    const NodeState* node() const { return node_ ? &*node_ : nullptr; }
    NodeState* mutable_node() { return node_ ? &*node_ : nullptr; }
    PeerAddress self() const { return self_; }

    // Handles every overlay message kind. Routed requests are forwarded per
    // route_step; the rest are split/merge coordination.
    void handle_overlay(const MessageEnvelope& env, Simnet& net);

    // Merge maintenance trigger: reclaims leaf children when the known flag
    // count of this node plus its children drops below
    // merge_fraction * capacity (strict). Returns true when reclaim
    // messages were sent.
    bool try_merge(Simnet& net);

  private:
    template <typename P>
    void route_request(const MessageEnvelope& env, P payload, Simnet& net);

    void deliver_insert(const InsertPayload& p, Simnet& net);
    void deliver_delete(const DeletePayload& p, Simnet& net);
    void deliver_point_query(const PointQueryPayload& p, Simnet& net);
    void deliver_range_query(const RangeQueryPayload& p, Simnet& net);
    void on_split_assign(const MessageEnvelope& env, Simnet& net);
    void on_split_ack(const MessageEnvelope& env, Simnet& net);
    void on_transfer(const MessageEnvelope& env, Simnet& net);
    void on_transfer_ack(const MessageEnvelope& env, Simnet& net);
    void on_merge_reclaim(const MessageEnvelope& env, Simnet& net);
    void on_merge_ack(const MessageEnvelope& env, Simnet& net);
    void on_count_report(const MessageEnvelope& env, Simnet& net);
    void maybe_split(Simnet& net);

    // Tells the parent this node's current occupancy (after shrinking).
    void report_count(Simnet& net);

    void send_to(Simnet& net, PeerAddress dst, MsgKind kind, const SectorPath& target,
                 std::vector<std::uint8_t> payload);

    PeerAddress self_;
    OverlayConfig cfg_;
    PeerAddress bootstrap_;
    std::optional<NodeState> node_;
    std::optional<PeerAddress> last_parent_;  // kept after merging away

    struct PendingAssign {
        std::uint64_t split_id = 0;
        PeerAddress addr = 0;
    };
    struct PendingTransfer {
        std::uint64_t split_id = 0;
        std::vector<FlagId> ids;
    };
    std::array<std::optional<PendingAssign>, 4> pending_assign_;
    std::array<std::optional<PendingTransfer>, 4> pending_transfer_;
    std::array<std::optional<std::uint64_t>, 4> pending_merge_;
};

}  // namespace stnet
