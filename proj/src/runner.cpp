#include "stnet/runner.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stnet {

namespace {

constexpr std::uint32_t kLinkCounterBase = 0x80000000u;  // above any profile counter
constexpr PeerAddress kBootstrap = 1;

}  // namespace

World::World(const RunConfig& cfg) : cfg_(cfg) {
    if (cfg_.n_agents < 1) throw std::invalid_argument("World: need at least one agent");
    net_ = std::make_unique<Simnet>(cfg_.seed, cfg_.latency, cfg_.event_limit);
}

SimAgent& World::agent(AgentId id) {
    if (id < 1 || id > agents_.size()) throw std::out_of_range("unknown agent id");
    return *agents_[id - 1];
}

void World::build() {
    corpus_ = cfg_.corpus_path.empty() ? generate_synthetic(cfg_.synth)
                                       : load_corpus(cfg_.corpus_path);
    corpus_items_ = records_to_items(corpus_);
    Assignment assign = assign_to_agents(corpus_, cfg_.n_agents, cfg_.replication, cfg_.seed);

    std::map<std::uint64_t, const InfoItem*> by_doc;
    for (const auto& it : corpus_items_) by_doc[it.item_id] = &it;

    agents_.clear();
    agents_.reserve(cfg_.n_agents);
    for (std::uint32_t i = 1; i <= cfg_.n_agents; ++i) {
        auto a = std::make_unique<SimAgent>(i, assign.locations.at(i), cfg_.overlay, cfg_.agent,
                                            kBootstrap);
        net_->register_handler(i, a.get());
        std::vector<InfoItem> items;
        for (std::uint64_t d : assign.items_of.at(i)) items.push_back(*by_doc.at(d));
        a->set_items(std::move(items));
        agents_.push_back(std::move(a));
    }
    agents_.front()->peer().adopt_root();

    // profiles in parallel: pure per-agent work
    std::vector<std::vector<ExpertiseProfile>> profs(agents_.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        profs[i] = build_profiles(agents_[i]->id(), agents_[i]->items(), cfg_.agent.eps,
                                  cfg_.agent.min_pts);
    }
    for (std::size_t i = 0; i < agents_.size(); ++i) agents_[i]->set_profiles(std::move(profs[i]));

    if (agents_.size() >= 2 && (cfg_.smallworld.k_local > 0 || cfg_.smallworld.q_long > 0)) {
        std::vector<AgentSite> sites;
        std::map<AgentId, Point> locs;
        for (const auto& a : agents_) {
            sites.push_back({a->id(), a->location()});
            locs[a->id()] = a->location();
        }
        links_ = generate_links(sites, cfg_.smallworld);
        auto link_flags = to_expert_link_flags(links_, locs, kLinkCounterBase);
        std::map<AgentId, std::vector<Flag>> by_owner;
        for (auto& f : link_flags) by_owner[f.owner()].push_back(std::move(f));
        for (auto& a : agents_) {
            auto it = by_owner.find(a->id());
            if (it != by_owner.end()) a->set_link_flags(std::move(it->second));
        }
    }
}

void World::join_all() {
    for (auto& a : agents_) {
        a->join(*net_);
        ++flags_published_;
        quiesce();
        if (!a->joined()) throw std::logic_error("join did not complete for agent");
    }
}

void World::publish_all() {
    for (auto& a : agents_) {
        a->publish_all(*net_);
        flags_published_ += a->profiles().size() + a->link_flags().size();
        quiesce();
        if (a->pending_ops() != 0) throw std::logic_error("publish left unacked inserts");
    }
}

std::vector<WorkloadQuery> World::make_workload() const {
    std::vector<WorkloadQuery> out;
    if (corpus_.empty()) return out;
    for (std::uint32_t qi = 0; qi < cfg_.n_queries; ++qi) {
        RngStream rng(cfg_.seed, "workload.query", qi);
        WorkloadQuery wq;
        wq.querier = 1 + static_cast<AgentId>(rng.next_below(cfg_.n_agents));
        const CorpusRecord& doc = corpus_[rng.next_below(corpus_.size())];
        std::uint32_t want = 1 + static_cast<std::uint32_t>(rng.next_below(2));
        std::set<std::string> terms;
        while (terms.size() < want && terms.size() < doc.terms.size()) {
            terms.insert(doc.terms[rng.next_below(doc.terms.size())]);
        }
        wq.q.terms.assign(terms.begin(), terms.end());
        if (qi % 2 == 1) {
            const CorpusRecord& at = corpus_[rng.next_below(corpus_.size())];
            Point c = lonlat_to_unit(at.lon, at.lat);
            double w = 0.08 + 0.12 * rng.next_unit();
            BoundingBox box;
            box.min = Point{std::max(0.0, c.x - w / 2), std::max(0.0, c.y - w / 2)};
            box.max = Point{std::min(1.0, c.x + w / 2), std::min(1.0, c.y + w / 2)};
            TimeInterval t{0.0, 1.0};
            if (rng.next_unit() < 0.5) {
                t.start = rng.next_unit() * 0.7;
                t.end = t.start + 0.3;
            }
            wq.q.st_ref = SpatioTemporalRef{box, t};
        }
        wq.q.fanout = cfg_.agent.fanout;
        wq.q.ttl = cfg_.agent.ttl;
        out.push_back(std::move(wq));
    }
    return out;
}

const QueryOutcome& World::run_query(const WorkloadQuery& wq) {
    SimAgent& a = agent(wq.querier);
    std::uint64_t qid = a.issue_query(wq.q, *net_);
    quiesce();
    if (!a.last_outcome() || a.last_outcome()->query_id != qid) {
        throw std::logic_error("query did not complete");
    }
    outcomes_.push_back(*a.last_outcome());
    return outcomes_.back();
}

void World::run_all() {
    build();
    join_all();
    publish_all();
    for (const auto& wq : make_workload()) run_query(wq);
}

std::map<FlagId, Flag> World::stored_flags() const {
    std::map<FlagId, Flag> out;
    for (const auto& a : agents_) {
        const NodeState* n = a->peer_role().node();
        if (!n) continue;
        for (const auto& [id, f] : n->stored) out.emplace(id, f);
    }
    return out;
}

std::string World::metrics_jsonl() const {
    using json = nlohmann::ordered_json;
    std::ostringstream out;
    std::uint32_t nonempty = 0;
    for (const QueryOutcome& o : outcomes_) {
        json j;
        j["type"] = "query";
        j["query_id"] = o.query_id;
        j["querier"] = o.querier;
        j["terms"] = o.query.terms;
        j["fallback"] = o.fallback_used;
        j["box"] = {o.effective_box.min.x, o.effective_box.min.y, o.effective_box.max.x,
                    o.effective_box.max.y};
        j["time"] = {o.effective_time.start, o.effective_time.end};
        j["fanout"] = o.query.fanout;
        j["ttl"] = o.query.ttl;
        j["t_issued"] = o.t_issued;
        j["t_phase1"] = o.t_phase1;
        j["t_done"] = o.t_done;
        j["nodes_contacted"] = o.nodes_contacted;
        j["flags_found"] = o.flags_found;
        j["phase1_flags"] = o.phase1_flags;
        j["candidates"] = o.candidates;
        j["asked"] = o.asked;
        j["answers"] = o.answers;
        j["duplicate_answers"] = o.duplicate_answers;
        j["forwards"] = o.forwards;
        json results = json::array();
        for (const ResultItem& r : o.results) {
            results.push_back({{"item", r.item.item_id}, {"owner", r.owner}, {"score", r.score}});
        }
        j["results"] = results;
        j["n_results"] = o.results.size();
        if (!o.results.empty()) ++nonempty;
        out << j.dump() << "\n";
    }

    const Metrics& m = net_->metrics();
    json s;
    s["type"] = "summary";
    s["agents"] = agents_.size();
    s["docs"] = corpus_.size();
    s["flags_published"] = flags_published_;
    s["queries"] = outcomes_.size();
    s["queries_nonempty"] = nonempty;
    json sent = json::object();
    json delivered = json::object();
    for (int k = 0; k < static_cast<int>(kNumMsgKinds); ++k) {
        if (m.sent_by_kind[static_cast<std::size_t>(k)] == 0 &&
            m.delivered_by_kind[static_cast<std::size_t>(k)] == 0)
            continue;
        sent[msg_kind_name(static_cast<MsgKind>(k))] = m.sent_by_kind[static_cast<std::size_t>(k)];
        delivered[msg_kind_name(static_cast<MsgKind>(k))] =
            m.delivered_by_kind[static_cast<std::size_t>(k)];
    }
    s["sent"] = sent;
    s["delivered"] = delivered;
    s["events"] = m.events;
    s["splits"] = m.splits.size();
    s["merges"] = m.merges.size();
    std::uint32_t split_max = 0;
    std::uint32_t split_lookup = 0;
    for (const auto& r : m.splits) {
        split_max = std::max(split_max, r.total_msgs());
        split_lookup += r.lookup_msgs;
    }
    s["split_max_msgs"] = split_max;
    s["split_lookup_msgs"] = split_lookup;
    s["routes"] = m.routes.size();
    s["route_bound_violations"] = m.route_bound_violations();
    s["sim_time"] = net_->now();
    out << s.dump() << "\n";
    return out.str();
}

SnapshotData World::snapshot() const {
    SnapshotData s;
    s.config_kv = cfg_.to_kv();
    for (const auto& a : agents_) {
        AgentSnap snap;
        snap.id = a->id();
        snap.location = a->location();
        snap.gateway = a->gateway();
        snap.items = a->items();
        for (const auto& p : a->profiles()) {
            snap.profile_flags.push_back(p.flag);
            snap.profile_members.push_back(p.member_items);
        }
        snap.link_flags = a->link_flags();
        if (const NodeState* n = a->peer_role().node()) {
            NodeSnap ns;
            ns.path = n->path;
            ns.parent = n->parent ? *n->parent : 0;
            for (int i = 0; i < 4; ++i) {
                const ChildSlot& c = n->children[static_cast<std::size_t>(i)];
                ns.children[static_cast<std::size_t>(i)] =
                    NodeSnap::Child{c.materialized, c.addr, c.last_count, c.has_children};
            }
            for (const auto& [id, f] : n->stored) ns.stored.push_back(f);
            snap.node = std::move(ns);
        }
        s.agents.push_back(std::move(snap));
    }
    return s;
}

World::World(const SnapshotData& snap) : cfg_(config_from_kv(snap.config_kv)) {
    net_ = std::make_unique<Simnet>(cfg_.seed, cfg_.latency, cfg_.event_limit);
    agents_.reserve(snap.agents.size());
    for (const AgentSnap& as : snap.agents) {
        auto a = std::make_unique<SimAgent>(as.id, as.location, cfg_.overlay, cfg_.agent,
                                            kBootstrap);
        net_->register_handler(as.id, a.get());
        a->set_items(as.items);
        std::vector<ExpertiseProfile> profs;
        for (std::size_t i = 0; i < as.profile_flags.size(); ++i) {
            profs.push_back(ExpertiseProfile{as.profile_members[i], as.profile_flags[i]});
        }
        a->set_profiles(std::move(profs));
        a->set_link_flags(as.link_flags);
        a->restore(as.gateway, true);
        if (as.node) {
            NodeState n;
            n.path = as.node->path;
            n.sector = sector_of_path(n.path);
            if (as.node->parent != 0) n.parent = as.node->parent;
            for (int i = 0; i < 4; ++i) {
                const auto& c = as.node->children[static_cast<std::size_t>(i)];
                n.children[static_cast<std::size_t>(i)] =
                    ChildSlot{c.materialized, c.addr, c.last_count, c.has_children};
            }
            for (const Flag& f : as.node->stored) n.stored.emplace(f.flag_id, f);
            n.capacity = cfg_.overlay.capacity;
            a->peer().restore_node(std::move(n));
        }
        agents_.push_back(std::move(a));
    }
}

}  // namespace stnet
