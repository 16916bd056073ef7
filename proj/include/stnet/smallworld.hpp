#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "stnet/flags.hpp"
#include "stnet/rng.hpp"

// Kleinberg-style expert-link generation over agent locations in the unit
// square: k_local nearest neighbors plus q_long long-range contacts drawn
// from the harmonic d^-alpha distribution, all per-agent deterministic.

namespace stnet {

struct SmallWorldConfig {
    std::uint32_t k_local = 0;
    std::uint32_t q_long = 1;
    double alpha = 2.0;
    std::uint64_t seed = 0;
};

struct AgentSite {
    AgentId id = 0;
    Point location;
};

struct LinkRec {
    AgentId owner = 0;
    AgentId target = 0;
    double distance = 0.0;
    bool long_range = false;
};

// d(u,v)^-alpha normalized over candidates; zero-distance candidates are
// excluded before normalization.
double link_probability(const Point& u, const Point& v, double alpha,
                        const std::vector<Point>& candidates);

// Per-agent link lists; agents sorted by id internally so the output is
// independent of input order. The random stream for agent a is
// rng_stream("smallworld.agent", a), making parallel generation exact.
std::vector<LinkRec> generate_links(const std::vector<AgentSite>& agents,
                                    const SmallWorldConfig& cfg);
std::vector<LinkRec> generate_links_serial(const std::vector<AgentSite>& agents,
                                           const SmallWorldConfig& cfg);

// Links as publishable flags: st_ref = degenerate box at the target's
// location, time [0,1], weight 1. flag ids use the owner's counter sequence
// starting at `counter_base`.
std::vector<Flag> to_expert_link_flags(const std::vector<LinkRec>& links,
                                       const std::map<AgentId, Point>& locations,
                                       std::uint32_t counter_base);

// One greedy step: the neighbor closest to the target location, ties by
// smaller id; returns `current` when no neighbor strictly improves on it.
AgentId greedy_forward(AgentId current, const Point& target_location,
                       const std::map<AgentId, std::vector<AgentId>>& links,
                       const std::map<AgentId, Point>& locations);

// Walks greedy_forward until it stops; returns the hop count.
std::uint32_t greedy_route_hops(AgentId start, const Point& target_location,
                                const std::map<AgentId, std::vector<AgentId>>& links,
                                const std::map<AgentId, Point>& locations,
                                std::uint32_t max_hops);

}  // namespace stnet
