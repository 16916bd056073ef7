#pragma once

#include <array>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "stnet/flags.hpp"
#include "stnet/peer.hpp"

// Centralized model of the overlay quadtree, used as the placement oracle.
// It replays the same rules the peers follow — insert at the smallest
// covering sector truncated at virtual children, one split round per
// over-capacity trigger, candidate = smallest-owner location flag per
// quadrant, occupied candidates refuse — but in one address space with no
// messages. Valid for quiesced insert-only histories (each insert settles
// before the next; one location flag per agent).

namespace stnet {

struct RefNode {
    SectorPath path;
    BoundingBox sector;
    AgentId manager = 0;
    std::map<FlagId, Flag> stored;
    std::array<std::unique_ptr<RefNode>, 4> kids;
};

class ReferenceIndex {
  public:
    ReferenceIndex(OverlayConfig cfg, AgentId root_manager);

    void insert(const Flag& f);

    const RefNode* root() const { return root_.get(); }

    // flag id -> path of the node holding it
    std::map<FlagId, SectorPath> placements() const;

    std::size_t node_count() const;

  private:
    void split_round(RefNode* node);

    OverlayConfig cfg_;
    std::unique_ptr<RefNode> root_;
    std::set<AgentId> managers_;
};

}  // namespace stnet
