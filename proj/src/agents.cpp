#include "stnet/agents.hpp"

#include <algorithm>
#include <cmath>

#include "stnet/clustering.hpp"

namespace stnet {

Point item_centroid(const InfoItem& item) {
    BoundingBox b = mbb_of(item.st_ref.geometry);
    return Point{(b.min.x + b.max.x) / 2.0, (b.min.y + b.max.y) / 2.0};
}

std::vector<ExpertiseProfile> build_profiles(AgentId owner, const std::vector<InfoItem>& items,
                                             double eps, int min_pts) {
    std::vector<ExpertiseProfile> out;
    if (items.empty()) return out;
    std::vector<Point> centroids(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) centroids[i] = item_centroid(items[i]);
    auto clusters = dbscan(centroids, eps, min_pts);
    for (const auto& cluster : clusters) {
        ExpertiseProfile p;
        BoundingBox box = mbb_of(items[cluster.front()].st_ref.geometry);
        TimeInterval span = items[cluster.front()].st_ref.time;
        std::map<std::string, std::uint32_t> freq;
        for (std::size_t idx : cluster) {
            const InfoItem& it = items[idx];
            p.member_items.push_back(it.item_id);
            BoundingBox b = mbb_of(it.st_ref.geometry);
            box.min.x = std::min(box.min.x, b.min.x);
            box.min.y = std::min(box.min.y, b.min.y);
            box.max.x = std::max(box.max.x, b.max.x);
            box.max.y = std::max(box.max.y, b.max.y);
            span.start = std::min(span.start, it.st_ref.time.start);
            span.end = std::max(span.end, it.st_ref.time.end);
            for (const auto& t : it.terms) freq[t]++;
        }
        std::sort(p.member_items.begin(), p.member_items.end());
        // top-K terms by frequency, ties lexicographic; stored sorted
        std::vector<std::pair<std::string, std::uint32_t>> by_freq(freq.begin(), freq.end());
        std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (by_freq.size() > kSummaryK) by_freq.resize(kSummaryK);
        for (auto& [t, c] : by_freq) p.flag.summary.terms.push_back(t);
        std::sort(p.flag.summary.terms.begin(), p.flag.summary.terms.end());
        p.flag.owner = owner;
        p.flag.st_ref.geometry = box;
        p.flag.st_ref.time = span;
        p.flag.item_count = static_cast<std::uint32_t>(cluster.size());
        out.push_back(std::move(p));
    }
    return out;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib)
            ++ia;
        else if (*ib < *ia)
            ++ib;
        else {
            ++inter;
            ++ia;
            ++ib;
        }
    }
    std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double spatial_factor(const BoundingBox& flag_mbb, const BoundingBox& q_mbb) {
    if (!boxes_intersect(flag_mbb, q_mbb)) return 0.0;
    double aq = q_mbb.area();
    double ai = intersection_area(flag_mbb, q_mbb);
    if (aq > 0.0 && ai > 0.0) return ai / aq;
    return 1.0;  // membership: intersecting, but one side is degenerate
}

namespace {

double space_time_factor(const SpatioTemporalRef& flag_ref, const IrQuery& q) {
    if (!q.st_ref) return 1.0;
    double s = spatial_factor(mbb_of(flag_ref.geometry), mbb_of(q.st_ref->geometry));
    if (s <= 0.0) return 0.0;
    double t = time_overlap_fraction(q.st_ref->time, flag_ref.time);
    return s * t;
}

}  // namespace

double score_candidate(const ExpertiseFlag& flag, const IrQuery& q) {
    double j = q.terms.empty() ? 1.0 : jaccard(q.terms, flag.summary.terms);
    if (j <= 0.0) return 0.0;
    return j * space_time_factor(flag.st_ref, q);
}

double score_link(const ExpertLinkFlag& flag, const IrQuery& q) {
    return space_time_factor(flag.st_ref, q);
}

double score_item(const InfoItem& item, const IrQuery& q) {
    TopicSummary s = TopicSummary::from_terms(item.terms);
    double j = q.terms.empty() ? 1.0 : jaccard(q.terms, s.terms);
    if (j <= 0.0) return 0.0;
    return j * space_time_factor(item.st_ref, q);
}

std::vector<RankedCandidate> rank_candidates(const std::vector<Flag>& flags, const IrQuery& q) {
    std::vector<RankedCandidate> out;
    for (const Flag& f : flags) {
        if (const auto* e = std::get_if<ExpertiseFlag>(&f.body)) {
            double s = score_candidate(*e, q);
            if (s > 0.0) out.push_back({e->owner, s, f.flag_id});
        } else if (const auto* l = std::get_if<ExpertLinkFlag>(&f.body)) {
            double s = score_link(*l, q) * l->weight * kLinkDiscount;
            if (s > 0.0) out.push_back({l->target, s, f.flag_id});
        }
    }
    std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.agent != b.agent) return a.agent < b.agent;
        return a.source_flag < b.source_flag;
    });
    return out;
}

SimAgent::SimAgent(AgentId id, Point location, OverlayConfig overlay, AgentParams params,
                   PeerAddress bootstrap)
    : id_(id),
      location_(location),
      params_(params),
      peer_(id, overlay, bootstrap),
      overlay_(overlay),
      gateway_(bootstrap) {}

void SimAgent::set_profiles(std::vector<ExpertiseProfile> profiles) {
    profiles_ = std::move(profiles);
}

Flag SimAgent::location_flag() const {
    AgentLocationFlag f;
    f.owner = id_;
    f.location = location_;
    f.contact = id_;
    return Flag{make_flag_id(id_, 0), f};
}

void SimAgent::send_routed(Simnet& net, MsgKind kind, const SectorPath& target,
                           std::vector<std::uint8_t> payload) {
    MessageEnvelope env;
    env.kind = kind;
    env.target_path = target;
    env.src = id_;
    env.dst = gateway_;
    env.payload = std::move(payload);
    net.send(env);
}

void SimAgent::join(Simnet& net) {
    Flag f = location_flag();
    location_flag_id_ = f.flag_id;
    InsertPayload p;
    p.reply_to = id_;
    p.flag = f;
    ++pending_ops_;
    send_routed(net, MsgKind::Join, smallest_covering_path(flag_routing_geometry(f), overlay_.max_depth),
                p.encode());
}

void SimAgent::publish_flag(const Flag& f, Simnet& net) {
    InsertPayload p;
    p.reply_to = id_;
    p.flag = f;
    ++pending_ops_;
    send_routed(net, MsgKind::Insert, smallest_covering_path(flag_routing_geometry(f), overlay_.max_depth),
                p.encode());
}

void SimAgent::publish_all(Simnet& net) {
    std::uint32_t counter = 1;  // 0 is the location flag
    for (const auto& p : profiles_) {
        publish_flag(Flag{make_flag_id(id_, counter++), p.flag}, net);
    }
    for (const auto& f : link_flags_) publish_flag(f, net);
}

void SimAgent::delete_own(FlagKind kind, Simnet& net) {
    std::map<std::string, std::pair<SectorPath, std::vector<FlagId>>> groups;
    auto add = [&](const Flag& f) {
        SectorPath cov = smallest_covering_path(flag_routing_geometry(f), overlay_.max_depth);
        auto& g = groups[cov.to_string()];
        g.first = cov;
        g.second.push_back(f.flag_id);
    };
    if (kind == FlagKind::Expertise) {
        std::uint32_t counter = 1;
        for (const auto& p : profiles_) add(Flag{make_flag_id(id_, counter++), p.flag});
    } else if (kind == FlagKind::ExpertLink) {
        for (const auto& f : link_flags_) add(f);
    } else {
        add(location_flag());
    }
    for (auto& [key, g] : groups) {
        DeletePayload p;
        p.reply_to = id_;
        p.owner = id_;
        p.kind = kind;
        p.ids = std::move(g.second);
        ++pending_ops_;
        send_routed(net, MsgKind::Delete, g.first, p.encode());
    }
}

std::uint64_t SimAgent::issue_query(const IrQuery& q, Simnet& net) {
    QueryContext ctx;
    std::uint64_t qid = make_flag_id(id_, ++query_counter_);
    ctx.out.query_id = qid;
    ctx.out.querier = id_;
    ctx.out.query = q;
    ctx.out.t_issued = net.now();

    Geometry geom;
    TimeInterval time;
    if (q.st_ref) {
        geom = q.st_ref->geometry;
        time = q.st_ref->time;
        ctx.out.fallback_used = false;
    } else {
        // Exactly centered on the agent, even near the unit-square edge; the
        // overhang is harmless since all flags live inside [0,1]^2.
        double r = params_.vicinity_r;
        BoundingBox box{{location_.x - r, location_.y - r}, {location_.x + r, location_.y + r}};
        geom = box;
        time = TimeInterval{0.0, 1.0};
        ctx.out.fallback_used = true;
    }
    ctx.out.effective_box = mbb_of(geom);
    ctx.out.effective_time = time;

    RangeQueryPayload p;
    p.query_id = qid;
    p.reply_to = id_;
    p.kind_mask = kKindMaskExpertise | kKindMaskExpertLink;
    p.mode = QueryMode::Initial;
    p.geometry = geom;
    p.time = time;
    ctx.outstanding = 1;
    ctx.phase = 1;
    queries_.emplace(qid, std::move(ctx));
    send_routed(net, MsgKind::RangeQuery, smallest_covering_path(geom, overlay_.max_depth),
                p.encode());
    return qid;
}

std::uint64_t SimAgent::issue_probe(std::uint8_t kind_mask, const Geometry& g,
                                    const TimeInterval& t, Simnet& net) {
    QueryContext ctx;
    std::uint64_t qid = make_flag_id(id_, ++query_counter_);
    ctx.out.query_id = qid;
    ctx.out.querier = id_;
    ctx.out.t_issued = net.now();
    ctx.out.effective_box = mbb_of(g);
    ctx.out.effective_time = t;
    ctx.probe = true;
    ctx.outstanding = 1;
    ctx.phase = 1;
    RangeQueryPayload p;
    p.query_id = qid;
    p.reply_to = id_;
    p.kind_mask = kind_mask;
    p.mode = QueryMode::Initial;
    p.geometry = g;
    p.time = t;
    queries_.emplace(qid, std::move(ctx));
    send_routed(net, MsgKind::RangeQuery, smallest_covering_path(g, overlay_.max_depth),
                p.encode());
    return qid;
}

void SimAgent::restore(PeerAddress gateway, bool joined) {
    gateway_ = gateway;
    joined_ = joined;
    location_flag_id_ = make_flag_id(id_, 0);
}

void SimAgent::handle(const MessageEnvelope& env, Simnet& net) {
    switch (env.kind) {
        case MsgKind::InsertAck:
            on_insert_ack(env, net);
            return;
        case MsgKind::DeleteAck:
            on_delete_ack(env, net);
            return;
        case MsgKind::QueryResult:
            on_query_result(env, net);
            return;
        case MsgKind::Ask:
            on_ask(env, net);
            return;
        case MsgKind::Answer:
            on_answer(env, net);
            return;
        default:
            peer_.handle_overlay(env, net);
            return;
    }
}

void SimAgent::on_insert_ack(const MessageEnvelope& env, Simnet&) {
    InsertAckPayload p = InsertAckPayload::decode(env.payload);
    if (pending_ops_ > 0) --pending_ops_;
    acked_paths_[p.flag_id] = p.stored_path;
    if (p.flag_id == location_flag_id_) {
        joined_ = true;
        gateway_ = p.store_addr;
    }
}

void SimAgent::on_delete_ack(const MessageEnvelope& env, Simnet&) {
    DeleteAckPayload p = DeleteAckPayload::decode(env.payload);
    (void)p;
    if (pending_ops_ > 0) --pending_ops_;
}

void SimAgent::on_query_result(const MessageEnvelope& env, Simnet& net) {
    QueryResultPayload p = QueryResultPayload::decode(env.payload);
    auto it = queries_.find(p.query_id);
    if (it == queries_.end() || it->second.phase != 1) return;
    QueryContext& ctx = it->second;
    ctx.out.nodes_contacted++;
    ctx.outstanding += p.n_contacted;
    ctx.outstanding--;
    for (auto& f : p.flags) ctx.found.push_back(std::move(f));
    if (ctx.outstanding == 0) {
        ctx.out.t_phase1 = net.now();
        ctx.out.flags_found = static_cast<std::uint32_t>(ctx.found.size());
        for (const Flag& f : ctx.found) ctx.out.phase1_flags.push_back(f.flag_id);
        std::sort(ctx.out.phase1_flags.begin(), ctx.out.phase1_flags.end());
        if (ctx.probe) {
            probe_results_[p.query_id] = std::move(ctx.found);
            queries_.erase(p.query_id);
            return;
        }
        start_phase2(ctx, net);
    }
}

void SimAgent::start_phase2(QueryContext& ctx, Simnet& net) {
    auto cands = rank_candidates(ctx.found, ctx.out.query);
    ctx.out.candidates = static_cast<std::uint32_t>(cands.size());
    std::set<AgentId> seen;
    for (const auto& c : cands) {
        if (ctx.out.asked.size() >= ctx.out.query.fanout) break;
        if (!seen.insert(c.agent).second) continue;
        ctx.out.asked.push_back(c.agent);
    }
    if (ctx.out.asked.empty()) {
        finish_query(ctx, net);
        return;
    }
    ctx.phase = 2;
    ctx.outstanding = static_cast<std::uint32_t>(ctx.out.asked.size());
    AskPayload ask;
    ask.query_id = ctx.out.query_id;
    ask.reply_to = id_;
    ask.ttl = params_.ttl;
    ask.terms = ctx.out.query.terms;
    ask.has_st_ref = ctx.out.query.st_ref.has_value();
    if (ask.has_st_ref) {
        ask.geometry = ctx.out.query.st_ref->geometry;
        ask.time = ctx.out.query.st_ref->time;
    }
    for (AgentId target : ctx.out.asked) {
        MessageEnvelope env;
        env.kind = MsgKind::Ask;
        env.src = id_;
        env.dst = target;
        env.payload = ask.encode();
        net.send(env);
    }
}

void SimAgent::on_ask(const MessageEnvelope& env, Simnet& net) {
    AskPayload p = AskPayload::decode(env.payload);
    AnswerPayload ans;
    ans.query_id = p.query_id;
    ans.responder = id_;
    if (!answered_.insert(p.query_id).second) {
        ans.duplicate = true;
        ans.n_forwards = 0;
        MessageEnvelope out;
        out.kind = MsgKind::Answer;
        out.src = id_;
        out.dst = p.reply_to;
        out.payload = ans.encode();
        net.send(out);
        return;
    }
    IrQuery q;
    q.terms = p.terms;
    if (p.has_st_ref) q.st_ref = SpatioTemporalRef{p.geometry, p.time};
    for (const InfoItem& it : items_) {
        double s = score_item(it, q);
        if (s <= 0.0) continue;
        AnswerItem ai;
        ai.item.item_id = it.item_id;
        ai.item.st_ref = it.st_ref;
        ai.item.terms = it.terms;
        ai.item_owner = id_;
        ai.score = s;
        ans.items.push_back(std::move(ai));
    }
    // forward along the single best link, if any scores above zero
    std::optional<AgentId> fwd;
    double best = 0.0;
    if (p.ttl > 0) {
        for (const Flag& f : link_flags_) {
            const auto* l = std::get_if<ExpertLinkFlag>(&f.body);
            if (!l || l->target == id_) continue;
            double s = score_link(*l, q) * l->weight;
            if (s > best || (s == best && s > 0.0 && fwd && l->target < *fwd)) {
                best = s;
                fwd = l->target;
            }
        }
        if (best <= 0.0) fwd.reset();
    }
    ans.n_forwards = fwd ? 1 : 0;
    ans.duplicate = false;
    MessageEnvelope out;
    out.kind = MsgKind::Answer;
    out.src = id_;
    out.dst = p.reply_to;
    out.payload = ans.encode();
    net.send(out);
    if (fwd) {
        AskPayload f = p;
        f.ttl = p.ttl - 1;
        MessageEnvelope fe;
        fe.kind = MsgKind::Ask;
        fe.src = id_;
        fe.dst = *fwd;
        fe.payload = f.encode();
        net.send(fe);
    }
}

void SimAgent::on_answer(const MessageEnvelope& env, Simnet& net) {
    AnswerPayload p = AnswerPayload::decode(env.payload);
    auto it = queries_.find(p.query_id);
    if (it == queries_.end() || it->second.phase != 2) return;
    QueryContext& ctx = it->second;
    if (p.duplicate)
        ctx.out.duplicate_answers++;
    else
        ctx.out.answers++;
    ctx.out.forwards += p.n_forwards;
    for (auto& ai : p.items) {
        auto [slot, fresh] = ctx.best_items.try_emplace(
            ai.item.item_id, ResultItem{ai.item, ai.item_owner, ai.score});
        if (!fresh) {
            if (ai.score > slot->second.score ||
                (ai.score == slot->second.score && ai.item_owner < slot->second.owner)) {
                slot->second = ResultItem{ai.item, ai.item_owner, ai.score};
            }
        }
    }
    ctx.outstanding += p.n_forwards;
    ctx.outstanding--;
    if (ctx.outstanding == 0) finish_query(ctx, net);
}

void SimAgent::finish_query(QueryContext& ctx, Simnet& net) {
    ctx.out.t_done = net.now();
    for (auto& [id, r] : ctx.best_items) ctx.out.results.push_back(std::move(r));
    std::sort(ctx.out.results.begin(), ctx.out.results.end(),
              [](const ResultItem& a, const ResultItem& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.item.item_id < b.item.item_id;
              });
    QueryOutcome out = std::move(ctx.out);
    std::uint64_t qid = out.query_id;
    queries_.erase(qid);
    last_outcome_ = out;
    if (on_query_done) on_query_done(*last_outcome_);
}

}  // namespace stnet
