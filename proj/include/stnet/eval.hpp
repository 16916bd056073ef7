#pragma once

#include <map>
#include <string>
#include <vector>

#include "stnet/agents.hpp"
#include "stnet/smallworld.hpp"
#include "stnet/snapshot.hpp"

// Evaluation oracles: brute-force range scans, exhaustive ask-everyone item
// answers, and the log-log slope fit for link distances. These are the
// independent checks the distributed results are held against.

namespace stnet {

// Scan of every flag, no index involved. Returns sorted ids.
std::vector<FlagId> brute_force_range(const std::map<FlagId, Flag>& all, std::uint8_t kind_mask,
                                      const BoundingBox& box, const TimeInterval& time);
std::vector<FlagId> brute_force_range_serial(const std::map<FlagId, Flag>& all,
                                             std::uint8_t kind_mask, const BoundingBox& box,
                                             const TimeInterval& time);

struct PrecisionRecall {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    double precision() const { return tp + fp == 0 ? 1.0 : double(tp) / double(tp + fp); }
    double recall() const { return tp + fn == 0 ? 1.0 : double(tp) / double(tp + fn); }
};

// Both inputs sorted.
PrecisionRecall compare_id_sets(const std::vector<FlagId>& got, const std::vector<FlagId>& want);

// What asking every agent directly would return: all items with positive
// score, deduped by item id keeping the best copy.
std::vector<ResultItem> exhaustive_answers(const std::map<AgentId, std::vector<InfoItem>>& items,
                                           const IrQuery& q);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::uint32_t bins_used = 0;
};

// Density of long-range link distances, normalized per candidate pair within
// each log-spaced bin over [dlo, dhi), least-squares fitted in log-log space.
// The normalization divides out the geometric growth of pair counts with
// distance, so the fitted slope estimates -alpha directly. Bins with fewer
// than `min_links` links are left out of the fit. The default window starts
// above the saturation regime (nearby pairs link with probability near 1 when
// several links are drawn per agent, which would flatten the left end) and
// stops before the sparse corner-to-corner tail.
SlopeFit fit_link_distance_slope(const std::vector<AgentSite>& sites,
                                 const std::vector<LinkRec>& links, int n_bins,
                                 std::uint32_t min_links, double dlo = 0.03, double dhi = 0.7);
SlopeFit fit_link_distance_slope_serial(const std::vector<AgentSite>& sites,
                                        const std::vector<LinkRec>& links, int n_bins,
                                        std::uint32_t min_links, double dlo = 0.03,
                                        double dhi = 0.7);

struct EvalSummary {
    std::uint64_t queries = 0;
    PrecisionRecall dsti;         // flag-level, range queries vs brute force
    double item_recall_sum = 0.0; // over queries with nonempty oracle
    std::uint64_t item_recall_n = 0;
    double item_recall_mean() const {
        return item_recall_n == 0 ? 1.0 : item_recall_sum / double(item_recall_n);
    }
};

// Replays each logged query's oracle against the snapshot's stored flags and
// items. `metrics_jsonl` is the output of World::metrics_jsonl / cmd_run.
EvalSummary evaluate_metrics(const SnapshotData& snap, const std::string& metrics_jsonl);

}  // namespace stnet
