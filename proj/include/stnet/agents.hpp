#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "stnet/flags.hpp"
#include "stnet/messages.hpp"
#include "stnet/peer.hpp"
#include "stnet/simnet.hpp"

// The IR layer on top of the overlay: items are clustered into expertise
// profiles, profiles/links/location are published as flags, and queries run
// in two phases — a DSTI range lookup for candidate experts, then direct
// ASKs that may be forwarded along expert links.

namespace stnet {

constexpr double kLinkDiscount = 0.5;
constexpr double kDefaultVicinityR = 0.05;

struct InfoItem {
    std::uint64_t item_id = 0;
    SpatioTemporalRef st_ref;
    std::vector<std::string> terms;  // sorted, unique
};

struct ExpertiseProfile {
    std::vector<std::uint64_t> member_items;
    ExpertiseFlag flag;
};

Point item_centroid(const InfoItem& item);

// One profile per DBSCAN cluster over item centroids; noise items become
// singleton profiles. Flag ids are assigned at publish time: the location
// flag is the owner's counter 0, profiles take 1..n in profile order.
std::vector<ExpertiseProfile> build_profiles(AgentId owner, const std::vector<InfoItem>& items,
                                             double eps, int min_pts);

struct IrQuery {
    std::vector<std::string> terms;  // sorted, unique; may be empty with st_ref
    std::optional<SpatioTemporalRef> st_ref;
    std::uint32_t fanout = 10;
    std::uint32_t ttl = 2;
};

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Pinned spatial factor: disjoint mbbs score 0; positive-area overlap scores
// area(intersection)/area(query); any remaining intersecting case (point
// query or point flag) counts as membership and scores 1.
double spatial_factor(const BoundingBox& flag_mbb, const BoundingBox& q_mbb);

// J * S * T against the original query; S and T are neutral 1 when the query
// carries no st_ref, J is neutral 1 when it has no terms.
double score_candidate(const ExpertiseFlag& flag, const IrQuery& q);
double score_link(const ExpertLinkFlag& flag, const IrQuery& q);  // no term factor
double score_item(const InfoItem& item, const IrQuery& q);        // item as a 1-item flag

struct RankedCandidate {
    AgentId agent = 0;
    double score = 0.0;
    FlagId source_flag = 0;
};

// Candidates from phase-1 flags: expertise flags propose their owner,
// link flags propose their target at score * weight * kLinkDiscount.
// Zero scores are dropped; order is (score desc, agent asc, flag asc).
std::vector<RankedCandidate> rank_candidates(const std::vector<Flag>& flags, const IrQuery& q);

struct ResultItem {
    ItemRecord item;
    AgentId owner = 0;
    double score = 0.0;
};

struct QueryOutcome {
    std::uint64_t query_id = 0;
    AgentId querier = 0;
    IrQuery query;
    bool fallback_used = false;
    BoundingBox effective_box;
    TimeInterval effective_time;
    double t_issued = 0.0;
    double t_phase1 = 0.0;
    double t_done = 0.0;
    std::uint32_t nodes_contacted = 0;
    std::uint32_t flags_found = 0;
    std::vector<FlagId> phase1_flags;  // sorted ids of the flags found
    std::uint32_t candidates = 0;
    std::vector<AgentId> asked;
    std::uint32_t answers = 0;
    std::uint32_t duplicate_answers = 0;
    std::uint32_t forwards = 0;
    std::vector<ResultItem> results;
};

struct AgentParams {
    double eps = 0.05;
    int min_pts = 2;
    // Expertise summaries are lossy (top-K terms over a cluster MBB), so the
    // candidate ranking carries false positives; asking the top 10 instead of
    // a handful keeps rare single-holder terms reachable.
    std::uint32_t fanout = 10;
    std::uint32_t ttl = 2;
    double vicinity_r = kDefaultVicinityR;
};

// A full participant: overlay peer role plus the IR agent role, driven by
// simnet events. Workload methods (join/publish/issue) send the first
// message; the caller runs the net to quiescence between workload steps.
class SimAgent : public MessageHandler {
  public:
    SimAgent(AgentId id, Point location, OverlayConfig overlay, AgentParams params,
             PeerAddress bootstrap);

    AgentId id() const { return id_; }
    const Point& location() const { return location_; }
    PeerRole& peer() { return peer_; }
    const PeerRole& peer_role() const { return peer_; }

    void set_items(std::vector<InfoItem> items) { items_ = std::move(items); }
    const std::vector<InfoItem>& items() const { return items_; }
    void set_profiles(std::vector<ExpertiseProfile> profiles);
    const std::vector<ExpertiseProfile>& profiles() const { return profiles_; }
    void set_link_flags(std::vector<Flag> links) { link_flags_ = std::move(links); }
    const std::vector<Flag>& link_flags() const { return link_flags_; }

    Flag location_flag() const;  // owner counter 0

    // Join = routed publish of the location flag; gateway is learned from
    // the ack. Publish sends one INSERT per profile/link flag.
    void join(Simnet& net);
    void publish_all(Simnet& net);
    void publish_flag(const Flag& f, Simnet& net);
    // Deletes own flags of one kind by covering-path-targeted DELETEs.
    void delete_own(FlagKind kind, Simnet& net);

    std::uint64_t issue_query(const IrQuery& q, Simnet& net);

    // Raw range lookup: collects the matching flags and stops after phase 1.
    std::uint64_t issue_probe(std::uint8_t kind_mask, const Geometry& g, const TimeInterval& t,
                              Simnet& net);
    const std::map<std::uint64_t, std::vector<Flag>>& probe_results() const {
        return probe_results_;
    }

    // Rebuilds post-run state from a snapshot; the node is restored through
    // peer().restore_node().
    void restore(PeerAddress gateway, bool joined);

    bool joined() const { return joined_; }
    PeerAddress gateway() const { return gateway_; }
    std::uint32_t pending_ops() const { return pending_ops_; }
    const std::map<FlagId, SectorPath>& acked_paths() const { return acked_paths_; }
    const std::optional<QueryOutcome>& last_outcome() const { return last_outcome_; }

    std::function<void(const QueryOutcome&)> on_query_done;

    void handle(const MessageEnvelope& env, Simnet& net) override;

  private:
    struct QueryContext {
        QueryOutcome out;
        std::uint32_t outstanding = 0;
        int phase = 1;
        bool probe = false;
        std::map<std::uint64_t, ResultItem> best_items;
        std::vector<Flag> found;
    };

    void on_insert_ack(const MessageEnvelope& env, Simnet& net);
    void on_delete_ack(const MessageEnvelope& env, Simnet& net);
    void on_query_result(const MessageEnvelope& env, Simnet& net);
    void on_ask(const MessageEnvelope& env, Simnet& net);
    void on_answer(const MessageEnvelope& env, Simnet& net);
    void start_phase2(QueryContext& ctx, Simnet& net);
    void finish_query(QueryContext& ctx, Simnet& net);
    void send_routed(Simnet& net, MsgKind kind, const SectorPath& target,
                     std::vector<std::uint8_t> payload);

    AgentId id_;
    Point location_;
    AgentParams params_;
    PeerRole peer_;
    OverlayConfig overlay_;
    PeerAddress gateway_;
    bool joined_ = false;
    FlagId location_flag_id_ = 0;

    std::vector<InfoItem> items_;
    std::vector<ExpertiseProfile> profiles_;
    std::vector<Flag> link_flags_;

    std::uint32_t pending_ops_ = 0;  // unacked inserts/deletes
    std::map<FlagId, SectorPath> acked_paths_;
    std::uint32_t query_counter_ = 0;
    std::map<std::uint64_t, QueryContext> queries_;
    std::map<std::uint64_t, std::vector<Flag>> probe_results_;
    std::set<std::uint64_t> answered_;
    std::optional<QueryOutcome> last_outcome_;
};

}  // namespace stnet
