#include "stnet/reference_index.hpp"

namespace stnet {

ReferenceIndex::ReferenceIndex(OverlayConfig cfg, AgentId root_manager) : cfg_(cfg) {
    root_ = std::make_unique<RefNode>();
    root_->path = SectorPath{};
    root_->sector = sector_of_path(root_->path);
    root_->manager = root_manager;
    managers_.insert(root_manager);
}

void ReferenceIndex::insert(const Flag& f) {
    SectorPath cov = smallest_covering_path(flag_routing_geometry(f), cfg_.max_depth);
    RefNode* node = root_.get();
    while (node->path.depth() < cov.depth()) {
        int d = cov.digits[node->path.depth()];
        if (!node->kids[static_cast<std::size_t>(d)]) break;
        node = node->kids[static_cast<std::size_t>(d)].get();
    }
    auto [it, fresh] = node->stored.emplace(f.flag_id, f);
    if (fresh && node->stored.size() > cfg_.capacity) split_round(node);
}

void ReferenceIndex::split_round(RefNode* node) {
    if (static_cast<int>(node->path.depth()) >= cfg_.max_depth) return;
    // Candidate discovery over the pre-transfer stored set, as the peer does.
    NodeState view;
    view.path = node->path;
    view.sector = node->sector;
    view.stored = node->stored;
    auto cands = select_child_peers(view, node->manager);
    for (int i = 0; i < 4; ++i) {
        if (node->kids[static_cast<std::size_t>(i)]) continue;
        const auto& cand = cands[static_cast<std::size_t>(i)];
        if (!cand) continue;
        if (managers_.count(cand->owner)) continue;  // occupied peer refuses
        managers_.insert(cand->owner);
        auto kid = std::make_unique<RefNode>();
        kid->path = node->path.child(static_cast<std::uint8_t>(i));
        kid->sector = sector_of_path(kid->path);
        kid->manager = cand->owner;
        RefNode* kp = kid.get();
        node->kids[static_cast<std::size_t>(i)] = std::move(kid);
        for (auto it = node->stored.begin(); it != node->stored.end();) {
            SectorPath cov = smallest_covering_path(flag_routing_geometry(it->second),
                                                    cfg_.max_depth);
            bool down = cov.depth() > node->path.depth() &&
                        node->path.is_prefix_of(cov) &&
                        cov.digits[node->path.depth()] == i;
            if (down) {
                kp->stored.emplace(it->first, it->second);
                it = node->stored.erase(it);
            } else {
                ++it;
            }
        }
        if (kp->stored.size() > cfg_.capacity) split_round(kp);
    }
}

std::map<FlagId, SectorPath> ReferenceIndex::placements() const {
    std::map<FlagId, SectorPath> out;
    std::vector<const RefNode*> stack{root_.get()};
    while (!stack.empty()) {
        const RefNode* n = stack.back();
        stack.pop_back();
        for (const auto& [id, f] : n->stored) out.emplace(id, n->path);
        for (const auto& k : n->kids)
            if (k) stack.push_back(k.get());
    }
    return out;
}

std::size_t ReferenceIndex::node_count() const {
    std::size_t n = 0;
    std::vector<const RefNode*> stack{root_.get()};
    while (!stack.empty()) {
        const RefNode* cur = stack.back();
        stack.pop_back();
        ++n;
        for (const auto& k : cur->kids)
            if (k) stack.push_back(k.get());
    }
    return n;
}

}  // namespace stnet
