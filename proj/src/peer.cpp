#include "stnet/peer.hpp"

#include <algorithm>
#include <stdexcept>

namespace stnet {

std::uint32_t NodeState::materialized_children() const {
    std::uint32_t n = 0;
    for (const auto& c : children)
        if (c.materialized) ++n;
    return n;
}

RouteDecision route_step(const NodeState& node, const SectorPath& target) {
    if (!node.path.is_prefix_of(target)) {
        return {RouteDecision::Action::ToParent, -1};
    }
    if (node.path.depth() == target.depth()) {
        return {RouteDecision::Action::Deliver, -1};
    }
    int next = target.digits[node.path.depth()];
    if (node.children[static_cast<std::size_t>(next)].materialized) {
        return {RouteDecision::Action::ToChild, next};
    }
    return {RouteDecision::Action::Deliver, -1};
}

std::array<std::optional<ChildCandidate>, 4> select_child_peers(const NodeState& node,
                                                                PeerAddress self) {
    std::array<std::optional<ChildCandidate>, 4> out;
    for (const auto& [id, f] : node.stored) {
        const auto* loc = std::get_if<AgentLocationFlag>(&f.body);
        if (!loc) continue;
        if (loc->owner == self) continue;
        if (!covers(node.sector, Geometry{loc->location})) continue;
        int q = quadrant_index(loc->location, node.sector);
        auto& slot = out[static_cast<std::size_t>(q)];
        if (!slot || loc->owner < slot->owner) {
            slot = ChildCandidate{loc->owner, loc->contact};
        }
    }
    return out;
}

bool flag_matches(const Flag& f, std::uint8_t kind_mask, const BoundingBox& query_mbb,
                  const TimeInterval& query_time) {
    if (!(kind_mask & kind_mask_bit(f.kind()))) return false;
    BoundingBox fb = mbb_of(flag_routing_geometry(f));
    if (!boxes_intersect(fb, query_mbb)) return false;
    if (f.kind() != FlagKind::AgentLocation) {
        if (time_overlap_fraction(query_time, flag_time(f)) <= 0.0) return false;
    }
    return true;
}

bool check_node_invariant(const NodeState& node, int max_depth, std::string* why) {
    auto fail = [&](std::string msg) {
        if (why) *why = std::move(msg);
        return false;
    };
    for (const auto& [id, f] : node.stored) {
        SectorPath cov = smallest_covering_path(flag_routing_geometry(f), max_depth);
        if (!node.path.is_prefix_of(cov)) {
            return fail("flag " + std::to_string(id) + " not covered by node " +
                        node.path.to_string());
        }
        if (cov.depth() > node.path.depth()) {
            int next = cov.digits[node.path.depth()];
            if (node.children[static_cast<std::size_t>(next)].materialized) {
                return fail("flag " + std::to_string(id) + " belongs under materialized child " +
                            std::to_string(next) + " of node " + node.path.to_string());
            }
        }
    }
    return true;
}

PeerRole::PeerRole(PeerAddress self, OverlayConfig cfg, PeerAddress bootstrap)
    : self_(self), cfg_(cfg), bootstrap_(bootstrap) {}

void PeerRole::adopt_root() {
    NodeState n;
    n.path = SectorPath{};
    n.sector = sector_of_path(n.path);
    n.parent = std::nullopt;
    n.capacity = cfg_.capacity;
    node_ = std::move(n);
}

void PeerRole::send_to(Simnet& net, PeerAddress dst, MsgKind kind, const SectorPath& target,
                       std::vector<std::uint8_t> payload) {
    MessageEnvelope env;
    env.kind = kind;
    env.target_path = target;
    env.src = self_;
    env.dst = dst;
    env.payload = std::move(payload);
    net.send(env);
}

template <typename P>
void PeerRole::route_request(const MessageEnvelope& env, P payload, Simnet& net) {
    if (!node_) {
        // Not managing a node (never joined the tree, or merged away):
        // hand the request to the last known parent or the bootstrap peer.
        PeerAddress next = last_parent_ ? *last_parent_ : bootstrap_;
        if (next == self_) throw std::logic_error("routing loop at peer without node");
        payload.trace.hops = static_cast<std::uint16_t>(payload.trace.hops + 1);
        send_to(net, next, env.kind, env.target_path, payload.encode());
        return;
    }
    if (payload.trace.entry_depth < 0) {
        payload.trace.entry_depth = node_->path.depth();
        payload.trace.hops = 0;
    }
    RouteDecision d = route_step(*node_, env.target_path);
    if (d.action == RouteDecision::Action::Deliver) {
        RouteRecord rec;
        rec.kind = env.kind;
        rec.entry_depth = static_cast<std::uint16_t>(payload.trace.entry_depth);
        rec.target_depth = static_cast<std::uint16_t>(env.target_path.depth());
        rec.hops = payload.trace.hops;
        net.metrics().routes.push_back(rec);
        if constexpr (std::is_same_v<P, InsertPayload>) {
            deliver_insert(payload, net);
        } else if constexpr (std::is_same_v<P, DeletePayload>) {
            deliver_delete(payload, net);
        } else if constexpr (std::is_same_v<P, PointQueryPayload>) {
            deliver_point_query(payload, net);
        } else {
            static_assert(std::is_same_v<P, RangeQueryPayload>);
            deliver_range_query(payload, net);
        }
        return;
    }
    PeerAddress to;
    if (d.action == RouteDecision::Action::ToParent) {
        if (!node_->parent) throw std::logic_error("root cannot route to parent");
        to = *node_->parent;
    } else {
        ChildSlot& c = node_->children[static_cast<std::size_t>(d.child)];
        to = c.addr;
        // Flags headed into the subtree can only raise its occupancy, so
        // counting them here keeps the merge gate conservative between
        // explicit child reports.
        if constexpr (std::is_same_v<P, InsertPayload>) ++c.last_count;
    }
    payload.trace.hops = static_cast<std::uint16_t>(payload.trace.hops + 1);
    send_to(net, to, env.kind, env.target_path, payload.encode());
}

void PeerRole::handle_overlay(const MessageEnvelope& env, Simnet& net) {
    switch (env.kind) {
        case MsgKind::Insert:
        case MsgKind::Join:
            route_request(env, InsertPayload::decode(env.payload), net);
            return;
        case MsgKind::Delete:
            route_request(env, DeletePayload::decode(env.payload), net);
            return;
        case MsgKind::PointQuery:
            route_request(env, PointQueryPayload::decode(env.payload), net);
            return;
        case MsgKind::RangeQuery:
            route_request(env, RangeQueryPayload::decode(env.payload), net);
            return;
        case MsgKind::SplitAssign:
            on_split_assign(env, net);
            return;
        case MsgKind::SplitAck:
            on_split_ack(env, net);
            return;
        case MsgKind::Transfer:
            on_transfer(env, net);
            return;
        case MsgKind::TransferAck:
            on_transfer_ack(env, net);
            return;
        case MsgKind::MergeReclaim:
            on_merge_reclaim(env, net);
            return;
        case MsgKind::MergeAck:
            on_merge_ack(env, net);
            return;
        case MsgKind::CountReport:
            on_count_report(env, net);
            return;
        default:
            throw std::logic_error("peer received non-overlay message kind " +
                                   std::to_string(static_cast<int>(env.kind)));
    }
}

void PeerRole::deliver_insert(const InsertPayload& p, Simnet& net) {
    auto [it, fresh] = node_->stored.emplace(p.flag.flag_id, p.flag);
    InsertAckPayload ack;
    ack.flag_id = p.flag.flag_id;
    ack.stored_path = node_->path;
    ack.store_addr = self_;
    ack.duplicate = !fresh;
    send_to(net, p.reply_to, MsgKind::InsertAck, SectorPath{}, ack.encode());
    if (fresh && node_->over_capacity()) maybe_split(net);
}

void PeerRole::deliver_delete(const DeletePayload& p, Simnet& net) {
    std::uint32_t removed = 0;
    for (auto it = node_->stored.begin(); it != node_->stored.end();) {
        const Flag& f = it->second;
        bool match = f.owner() == p.owner && f.kind() == p.kind;
        if (match && !p.ids.empty()) {
            match = std::find(p.ids.begin(), p.ids.end(), it->first) != p.ids.end();
        }
        if (match) {
            it = node_->stored.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    DeleteAckPayload ack;
    ack.owner = p.owner;
    ack.removed = removed;
    send_to(net, p.reply_to, MsgKind::DeleteAck, SectorPath{}, ack.encode());
    if (removed > 0) report_count(net);
}

void PeerRole::report_count(Simnet& net) {
    if (!node_ || !node_->parent) return;
    CountReportPayload p;
    p.child_path = node_->path;
    p.stored_count = static_cast<std::uint32_t>(node_->stored.size());
    p.has_children = node_->materialized_children() > 0;
    send_to(net, *node_->parent, MsgKind::CountReport, SectorPath{}, p.encode());
}

void PeerRole::on_count_report(const MessageEnvelope& env, Simnet& net) {
    (void)net;
    CountReportPayload p = CountReportPayload::decode(env.payload);
    if (!node_ || p.child_path.depth() != node_->path.depth() + 1 ||
        !node_->path.is_prefix_of(p.child_path)) {
        return;  // stale: sent before a merge/split changed the topology
    }
    ChildSlot& c = node_->children[p.child_path.digits.back()];
    if (!c.materialized || c.addr != env.src) return;
    c.last_count = p.stored_count;
    c.has_children = p.has_children;
}

void PeerRole::deliver_point_query(const PointQueryPayload& p, Simnet& net) {
    QueryResultPayload res;
    res.query_id = p.query_id;
    res.responder = self_;
    res.responder_path = node_->path;
    res.n_contacted = 0;
    BoundingBox qb = mbb_of(p.geometry);
    for (const auto& [id, f] : node_->stored) {
        if (flag_matches(f, p.kind_mask, qb, p.time)) res.flags.push_back(f);
    }
    send_to(net, p.reply_to, MsgKind::QueryResult, SectorPath{}, res.encode());
}

void PeerRole::deliver_range_query(const RangeQueryPayload& p, Simnet& net) {
    std::uint32_t contacted = 0;
    BoundingBox qb = mbb_of(p.geometry);
    // Scatter down into every materialized child whose sector intersects the
    // query, unless this visit came up from a child.
    if (p.mode != QueryMode::Up) {
        for (int i = 0; i < 4; ++i) {
            const ChildSlot& c = node_->children[static_cast<std::size_t>(i)];
            if (!c.materialized) continue;
            SectorPath cp = node_->path.child(static_cast<std::uint8_t>(i));
            if (!boxes_intersect(sector_of_path(cp), qb)) continue;
            RangeQueryPayload down = p;
            down.mode = QueryMode::Down;
            down.trace = RouteTrace{};
            send_to(net, c.addr, MsgKind::RangeQuery, cp, down.encode());
            ++contacted;
        }
    }
    // Climb towards the root, unless this visit came down from the parent:
    // ancestors hold the flags whose extent straddles their child sectors.
    if (p.mode != QueryMode::Down && node_->parent) {
        RangeQueryPayload up = p;
        up.mode = QueryMode::Up;
        up.trace = RouteTrace{};
        send_to(net, *node_->parent, MsgKind::RangeQuery, node_->path.parent(), up.encode());
        ++contacted;
    }
    QueryResultPayload res;
    res.query_id = p.query_id;
    res.responder = self_;
    res.responder_path = node_->path;
    res.n_contacted = contacted;
    for (const auto& [id, f] : node_->stored) {
        if (flag_matches(f, p.kind_mask, qb, p.time)) res.flags.push_back(f);
    }
    send_to(net, p.reply_to, MsgKind::QueryResult, SectorPath{}, res.encode());
}

void PeerRole::maybe_split(Simnet& net) {
    if (!node_ || !node_->over_capacity()) return;
    if (static_cast<int>(node_->path.depth()) >= cfg_.max_depth) return;
    auto cands = select_child_peers(*node_, self_);
    std::uint64_t split_id = 0;
    for (int i = 0; i < 4; ++i) {
        auto& slot = node_->children[static_cast<std::size_t>(i)];
        if (slot.materialized) continue;
        if (pending_assign_[static_cast<std::size_t>(i)]) continue;
        const auto& cand = cands[static_cast<std::size_t>(i)];
        if (!cand) continue;
        if (split_id == 0) {
            split_id = net.alloc_split_id();
            SplitRecord& rec = net.metrics().split(split_id);
            rec.node_peer = self_;
            rec.node_path = node_->path.to_string();
        }
        pending_assign_[static_cast<std::size_t>(i)] = PendingAssign{split_id, cand->contact};
        SplitAssignPayload asg;
        asg.split_id = split_id;
        asg.parent = self_;
        asg.child_path = node_->path.child(static_cast<std::uint8_t>(i));
        send_to(net, cand->contact, MsgKind::SplitAssign, SectorPath{}, asg.encode());
        net.metrics().split(split_id).assigns++;
    }
}

void PeerRole::on_split_assign(const MessageEnvelope& env, Simnet& net) {
    SplitAssignPayload p = SplitAssignPayload::decode(env.payload);
    SplitAckPayload ack;
    ack.split_id = p.split_id;
    ack.child_path = p.child_path;
    if (node_) {
        // One node per peer: already managing, refuse.
        ack.accepted = false;
        send_to(net, p.parent, MsgKind::SplitAck, SectorPath{}, ack.encode());
        return;
    }
    NodeState n;
    n.path = p.child_path;
    n.sector = sector_of_path(n.path);
    n.parent = p.parent;
    n.capacity = cfg_.capacity;
    node_ = std::move(n);
    last_parent_.reset();
    ack.accepted = true;
    send_to(net, p.parent, MsgKind::SplitAck, SectorPath{}, ack.encode());
}

void PeerRole::on_split_ack(const MessageEnvelope& env, Simnet& net) {
    SplitAckPayload p = SplitAckPayload::decode(env.payload);
    if (!node_ || p.child_path.depth() != node_->path.depth() + 1 ||
        !node_->path.is_prefix_of(p.child_path)) {
        return;  // stale ack from before a merge/restructure
    }
    int digit = p.child_path.digits.back();
    auto& pending = pending_assign_[static_cast<std::size_t>(digit)];
    if (!pending || pending->split_id != p.split_id) return;
    PeerAddress child_addr = pending->addr;
    pending.reset();
    SplitRecord& rec = net.metrics().split(p.split_id);
    if (!p.accepted) {
        rec.nacks++;
        return;
    }
    rec.acks++;
    auto& slot = node_->children[static_cast<std::size_t>(digit)];
    slot.materialized = true;
    slot.addr = child_addr;
    slot.last_count = 0;
    slot.has_children = false;
    // Hand over every flag whose covering sector lies inside the new child.
    TransferPayload tr;
    tr.split_id = p.split_id;
    tr.child_path = p.child_path;
    std::vector<FlagId> moved_ids;
    for (const auto& [id, f] : node_->stored) {
        SectorPath cov = smallest_covering_path(flag_routing_geometry(f), cfg_.max_depth);
        if (cov.depth() <= node_->path.depth()) continue;
        if (!node_->path.is_prefix_of(cov)) continue;
        if (cov.digits[node_->path.depth()] != digit) continue;
        tr.flags.push_back(f);
        moved_ids.push_back(id);
    }
    if (tr.flags.empty()) return;
    pending_transfer_[static_cast<std::size_t>(digit)] =
        PendingTransfer{p.split_id, std::move(moved_ids)};
    rec.transfers++;
    rec.flags_moved += static_cast<std::uint32_t>(tr.flags.size());
    send_to(net, child_addr, MsgKind::Transfer, SectorPath{}, tr.encode());
}

void PeerRole::on_transfer(const MessageEnvelope& env, Simnet& net) {
    TransferPayload p = TransferPayload::decode(env.payload);
    if (!node_ || !(node_->path == p.child_path)) {
        throw std::logic_error("transfer delivered to wrong node");
    }
    std::uint32_t received = 0;
    for (const Flag& f : p.flags) {
        auto [it, fresh] = node_->stored.emplace(f.flag_id, f);
        if (fresh) ++received;
    }
    TransferAckPayload ack;
    ack.split_id = p.split_id;
    ack.child_path = p.child_path;
    ack.n_received = received;
    ack.stored_count = static_cast<std::uint32_t>(node_->stored.size());
    ack.has_children = node_->materialized_children() > 0;
    send_to(net, env.src, MsgKind::TransferAck, SectorPath{}, ack.encode());
    if (node_->over_capacity()) maybe_split(net);
}

void PeerRole::on_transfer_ack(const MessageEnvelope& env, Simnet& net) {
    TransferAckPayload p = TransferAckPayload::decode(env.payload);
    if (!node_ || p.child_path.depth() != node_->path.depth() + 1 ||
        !node_->path.is_prefix_of(p.child_path)) {
        return;
    }
    int digit = p.child_path.digits.back();
    auto& pending = pending_transfer_[static_cast<std::size_t>(digit)];
    if (!pending || pending->split_id != p.split_id) return;
    for (FlagId id : pending->ids) node_->stored.erase(id);
    pending.reset();
    auto& slot = node_->children[static_cast<std::size_t>(digit)];
    slot.last_count = p.stored_count;
    slot.has_children = p.has_children;
    net.metrics().split(p.split_id).transfer_acks++;
}

bool PeerRole::try_merge(Simnet& net) {
    if (!node_) return false;
    if (node_->materialized_children() == 0) return false;
    for (const auto& pending : pending_merge_)
        if (pending) return false;
    std::size_t known = node_->stored.size();
    for (const auto& c : node_->children)
        if (c.materialized) known += c.last_count;
    if (!(static_cast<double>(known) < cfg_.merge_fraction * cfg_.capacity)) return false;
    std::uint64_t merge_id = net.alloc_merge_id();
    MergeRecord& rec = net.metrics().merge(merge_id);
    rec.node_peer = self_;
    for (int i = 0; i < 4; ++i) {
        const auto& c = node_->children[static_cast<std::size_t>(i)];
        if (!c.materialized) continue;
        rec.children++;
        pending_merge_[static_cast<std::size_t>(i)] = merge_id;
        MergeReclaimPayload rp;
        rp.merge_id = merge_id;
        send_to(net, c.addr, MsgKind::MergeReclaim, SectorPath{}, rp.encode());
        rec.reclaims++;
    }
    return true;
}

void PeerRole::on_merge_reclaim(const MessageEnvelope& env, Simnet& net) {
    MergeReclaimPayload p = MergeReclaimPayload::decode(env.payload);
    if (!node_) return;  // already reclaimed
    MergeAckPayload ack;
    ack.merge_id = p.merge_id;
    ack.child_path = node_->path;
    if (node_->materialized_children() > 0) {
        // Only leaves may be reclaimed; an inner node refuses.
        ack.accepted = false;
        send_to(net, env.src, MsgKind::MergeAck, SectorPath{}, ack.encode());
        return;
    }
    ack.accepted = true;
    for (const auto& [id, f] : node_->stored) ack.flags.push_back(f);
    last_parent_ = node_->parent;
    node_.reset();
    send_to(net, env.src, MsgKind::MergeAck, SectorPath{}, ack.encode());
}

void PeerRole::on_merge_ack(const MessageEnvelope& env, Simnet& net) {
    MergeAckPayload p = MergeAckPayload::decode(env.payload);
    if (!node_ || p.child_path.depth() != node_->path.depth() + 1 ||
        !node_->path.is_prefix_of(p.child_path)) {
        return;
    }
    int digit = p.child_path.digits.back();
    auto& pending = pending_merge_[static_cast<std::size_t>(digit)];
    if (!pending || *pending != p.merge_id) return;
    pending.reset();
    MergeRecord& rec = net.metrics().merge(p.merge_id);
    if (!p.accepted) {
        rec.nacks++;
        return;
    }
    rec.acks++;
    rec.flags_absorbed += static_cast<std::uint32_t>(p.flags.size());
    for (const Flag& f : p.flags) node_->stored.emplace(f.flag_id, f);
    node_->children[static_cast<std::size_t>(digit)] = ChildSlot{};
    bool settled = true;
    for (const auto& pm : pending_merge_)
        if (pm) settled = false;
    if (settled) report_count(net);  // occupancy moved up a level
    if (node_->over_capacity()) maybe_split(net);
}

}  // namespace stnet
