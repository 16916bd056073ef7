#include "stnet/smallworld.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stnet {

double link_probability(const Point& u, const Point& v, double alpha,
                        const std::vector<Point>& candidates) {
    double dv = euclidean_distance(u, v);
    if (dv <= 0.0) throw std::invalid_argument("link_probability: zero-distance target");
    double total = 0.0;
    for (const Point& w : candidates) {
        double d = euclidean_distance(u, w);
        if (d <= 0.0) continue;
        total += std::pow(d, -alpha);
    }
    return std::pow(dv, -alpha) / total;
}

namespace {

// Links for one agent; deterministic given the agent's stream.
void links_for_agent(const std::vector<AgentSite>& agents, std::size_t ui,
                     const SmallWorldConfig& cfg, std::vector<LinkRec>& out) {
    const AgentSite& u = agents[ui];
    struct Cand {
        AgentId id;
        double dist;
    };
    std::vector<Cand> cands;
    cands.reserve(agents.size() - 1);
    for (std::size_t j = 0; j < agents.size(); ++j) {
        if (j == ui) continue;
        double d = euclidean_distance(u.location, agents[j].location);
        if (d <= 0.0) continue;  // coincident agents are not linkable
        cands.push_back({agents[j].id, d});
    }
    if (cands.empty()) return;

    std::vector<char> taken(cands.size(), 0);

    std::uint32_t n_local = std::min<std::uint32_t>(cfg.k_local,
                                                    static_cast<std::uint32_t>(cands.size()));
    if (n_local > 0) {
        std::vector<std::size_t> order(cands.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (cands[a].dist != cands[b].dist) return cands[a].dist < cands[b].dist;
            return cands[a].id < cands[b].id;
        });
        for (std::uint32_t k = 0; k < n_local; ++k) {
            std::size_t i = order[k];
            taken[i] = 1;
            out.push_back({u.id, cands[i].id, cands[i].dist, false});
        }
    }

    RngStream rng(cfg.seed, "smallworld.agent", u.id);
    std::vector<double> weight(cands.size());
    double total = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        weight[i] = taken[i] ? 0.0 : std::pow(cands[i].dist, -cfg.alpha);
        total += weight[i];
    }
    std::uint32_t n_long = std::min<std::uint32_t>(
        cfg.q_long, static_cast<std::uint32_t>(cands.size()) - n_local);
    for (std::uint32_t k = 0; k < n_long && total > 0.0; ++k) {
        double r = rng.next_unit() * total;
        double acc = 0.0;
        std::size_t pick = cands.size();
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (weight[i] <= 0.0) continue;
            acc += weight[i];
            if (r < acc) {
                pick = i;
                break;
            }
            pick = i;  // guards against acc falling short of total by rounding
        }
        if (pick == cands.size()) break;
        out.push_back({u.id, cands[pick].id, cands[pick].dist, true});
        total -= weight[pick];
        weight[pick] = 0.0;
    }
}

std::vector<AgentSite> sorted_by_id(std::vector<AgentSite> agents) {
    std::sort(agents.begin(), agents.end(),
              [](const AgentSite& a, const AgentSite& b) { return a.id < b.id; });
    return agents;
}

std::vector<LinkRec> flatten(std::vector<std::vector<LinkRec>>& per_agent) {
    std::vector<LinkRec> out;
    std::size_t n = 0;
    for (const auto& v : per_agent) n += v.size();
    out.reserve(n);
    for (auto& v : per_agent) out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace

std::vector<LinkRec> generate_links(const std::vector<AgentSite>& agents_in,
                                    const SmallWorldConfig& cfg) {
    if (agents_in.size() < 2) throw std::invalid_argument("generate_links: need >= 2 agents");
    auto agents = sorted_by_id(agents_in);
    std::vector<std::vector<LinkRec>> per_agent(agents.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < agents.size(); ++i) {
        links_for_agent(agents, i, cfg, per_agent[i]);
    }
    return flatten(per_agent);
}

std::vector<LinkRec> generate_links_serial(const std::vector<AgentSite>& agents_in,
                                           const SmallWorldConfig& cfg) {
    if (agents_in.size() < 2) throw std::invalid_argument("generate_links: need >= 2 agents");
    auto agents = sorted_by_id(agents_in);
    std::vector<std::vector<LinkRec>> per_agent(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        links_for_agent(agents, i, cfg, per_agent[i]);
    }
    return flatten(per_agent);
}

std::vector<Flag> to_expert_link_flags(const std::vector<LinkRec>& links,
                                       const std::map<AgentId, Point>& locations,
                                       std::uint32_t counter_base) {
    std::map<AgentId, std::uint32_t> counters;
    std::vector<Flag> out;
    out.reserve(links.size());
    for (const LinkRec& l : links) {
        auto it = locations.find(l.target);
        if (it == locations.end())
            throw std::invalid_argument("to_expert_link_flags: unknown target agent");
        std::uint32_t& c = counters.try_emplace(l.owner, counter_base).first->second;
        ExpertLinkFlag f;
        f.owner = l.owner;
        f.target = l.target;
        f.st_ref.geometry = BoundingBox{it->second, it->second};
        f.st_ref.time = TimeInterval{0.0, 1.0};
        f.weight = 1.0;
        out.push_back(Flag{make_flag_id(l.owner, c++), f});
    }
    return out;
}

AgentId greedy_forward(AgentId current, const Point& target_location,
                       const std::map<AgentId, std::vector<AgentId>>& links,
                       const std::map<AgentId, Point>& locations) {
    auto li = links.find(current);
    if (li == links.end() || li->second.empty()) return current;
    double d_cur = euclidean_distance(locations.at(current), target_location);
    AgentId best = current;
    double d_best = d_cur;
    for (AgentId nb : li->second) {
        double d = euclidean_distance(locations.at(nb), target_location);
        if (d < d_best || (d == d_best && best != current && nb < best)) {
            best = nb;
            d_best = d;
        }
    }
    return best;
}

std::uint32_t greedy_route_hops(AgentId start, const Point& target_location,
                                const std::map<AgentId, std::vector<AgentId>>& links,
                                const std::map<AgentId, Point>& locations,
                                std::uint32_t max_hops) {
    AgentId cur = start;
    std::uint32_t hops = 0;
    while (hops < max_hops) {
        AgentId next = greedy_forward(cur, target_location, links, locations);
        if (next == cur) break;
        cur = next;
        ++hops;
    }
    return hops;
}

}  // namespace stnet
