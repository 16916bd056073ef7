#include "stnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stnet {

namespace {

std::vector<FlagId> scan_range(const std::map<FlagId, Flag>& all, std::uint8_t kind_mask,
                               const BoundingBox& box, const TimeInterval& time, bool parallel) {
    std::vector<const Flag*> flat;
    flat.reserve(all.size());
    for (const auto& [id, f] : all) flat.push_back(&f);
    std::vector<char> hit(flat.size(), 0);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < flat.size(); ++i) {
            hit[i] = flag_matches(*flat[i], kind_mask, box, time);
        }
    } else {
        for (std::size_t i = 0; i < flat.size(); ++i) {
            hit[i] = flag_matches(*flat[i], kind_mask, box, time);
        }
    }
    std::vector<FlagId> out;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        if (hit[i]) out.push_back(flat[i]->flag_id);
    }
    return out;  // map order is ascending, so ids come out sorted
}

}  // namespace

std::vector<FlagId> brute_force_range(const std::map<FlagId, Flag>& all, std::uint8_t kind_mask,
                                      const BoundingBox& box, const TimeInterval& time) {
    return scan_range(all, kind_mask, box, time, true);
}

std::vector<FlagId> brute_force_range_serial(const std::map<FlagId, Flag>& all,
                                             std::uint8_t kind_mask, const BoundingBox& box,
                                             const TimeInterval& time) {
    return scan_range(all, kind_mask, box, time, false);
}

PrecisionRecall compare_id_sets(const std::vector<FlagId>& got, const std::vector<FlagId>& want) {
    PrecisionRecall pr;
    std::size_t i = 0, j = 0;
    while (i < got.size() && j < want.size()) {
        if (got[i] == want[j]) {
            ++pr.tp;
            ++i;
            ++j;
        } else if (got[i] < want[j]) {
            ++pr.fp;
            ++i;
        } else {
            ++pr.fn;
            ++j;
        }
    }
    pr.fp += got.size() - i;
    pr.fn += want.size() - j;
    return pr;
}

std::vector<ResultItem> exhaustive_answers(const std::map<AgentId, std::vector<InfoItem>>& items,
                                           const IrQuery& q) {
    std::map<std::uint64_t, ResultItem> best;
    for (const auto& [agent, list] : items) {
        for (const InfoItem& it : list) {
            double s = score_item(it, q);
            if (s <= 0.0) continue;
            ResultItem r;
            r.item.item_id = it.item_id;
            r.item.st_ref = it.st_ref;
            r.item.terms = it.terms;
            r.owner = agent;
            r.score = s;
            auto [slot, fresh] = best.try_emplace(it.item_id, r);
            if (!fresh && (s > slot->second.score ||
                           (s == slot->second.score && agent < slot->second.owner))) {
                slot->second = r;
            }
        }
    }
    std::vector<ResultItem> out;
    for (auto& [id, r] : best) out.push_back(std::move(r));
    std::sort(out.begin(), out.end(), [](const ResultItem& a, const ResultItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item.item_id < b.item.item_id;
    });
    return out;
}

namespace {

SlopeFit fit_slope(const std::vector<AgentSite>& sites, const std::vector<LinkRec>& links,
                   int n_bins, std::uint32_t min_links, double dlo, double dhi, bool parallel) {
    if (n_bins < 2) throw std::invalid_argument("fit_link_distance_slope: need >= 2 bins");
    if (!(dlo > 0.0 && dhi > dlo)) throw std::invalid_argument("fit_link_distance_slope: bad window");
    const double llo = std::log(dlo);
    const double lhi = std::log(dhi);
    auto bin_of = [&](double d) -> int {
        if (d < dlo || d >= dhi) return -1;
        int b = static_cast<int>((std::log(d) - llo) / (lhi - llo) * n_bins);
        return b >= n_bins ? n_bins - 1 : b;
    };

    std::vector<std::uint64_t> pairs(static_cast<std::size_t>(n_bins), 0);
    const std::size_t n = sites.size();
    if (parallel) {
#pragma omp parallel
        {
            std::vector<std::uint64_t> local(static_cast<std::size_t>(n_bins), 0);
#pragma omp for schedule(static)
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    int b = bin_of(euclidean_distance(sites[i].location, sites[j].location));
                    if (b >= 0) ++local[static_cast<std::size_t>(b)];
                }
            }
#pragma omp critical
            for (int b = 0; b < n_bins; ++b) pairs[static_cast<std::size_t>(b)] += local[static_cast<std::size_t>(b)];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                int b = bin_of(euclidean_distance(sites[i].location, sites[j].location));
                if (b >= 0) ++pairs[static_cast<std::size_t>(b)];
            }
        }
    }

    std::vector<std::uint64_t> hits(static_cast<std::size_t>(n_bins), 0);
    for (const LinkRec& l : links) {
        if (!l.long_range) continue;
        int b = bin_of(l.distance);
        if (b >= 0) ++hits[static_cast<std::size_t>(b)];
    }

    // least squares over log(mid) vs log(hits/pairs)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::uint32_t m = 0;
    for (int b = 0; b < n_bins; ++b) {
        std::uint64_t h = hits[static_cast<std::size_t>(b)];
        std::uint64_t p = pairs[static_cast<std::size_t>(b)];
        if (h < min_links || p == 0) continue;
        double lmid = llo + (b + 0.5) * (lhi - llo) / n_bins;
        double ld = std::log(static_cast<double>(h) / static_cast<double>(p));
        sx += lmid;
        sy += ld;
        sxx += lmid * lmid;
        sxy += lmid * ld;
        ++m;
    }
    SlopeFit fit;
    fit.bins_used = m;
    if (m >= 2) {
        double denom = m * sxx - sx * sx;
        fit.slope = (m * sxy - sx * sy) / denom;
        fit.intercept = (sy - fit.slope * sx) / m;
    }
    return fit;
}

}  // namespace

SlopeFit fit_link_distance_slope(const std::vector<AgentSite>& sites,
                                 const std::vector<LinkRec>& links, int n_bins,
                                 std::uint32_t min_links, double dlo, double dhi) {
    return fit_slope(sites, links, n_bins, min_links, dlo, dhi, true);
}

SlopeFit fit_link_distance_slope_serial(const std::vector<AgentSite>& sites,
                                        const std::vector<LinkRec>& links, int n_bins,
                                        std::uint32_t min_links, double dlo, double dhi) {
    return fit_slope(sites, links, n_bins, min_links, dlo, dhi, false);
}

EvalSummary evaluate_metrics(const SnapshotData& snap, const std::string& metrics_jsonl) {
    using json = nlohmann::json;

    std::map<FlagId, Flag> all_flags;
    std::map<AgentId, std::vector<InfoItem>> items;
    for (const AgentSnap& a : snap.agents) {
        items[a.id] = a.items;
        if (!a.node) continue;
        for (const Flag& f : a.node->stored) all_flags.emplace(f.flag_id, f);
    }

    EvalSummary sum;
    std::istringstream in(metrics_jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.value("type", "") != "query") continue;
        ++sum.queries;

        BoundingBox box;
        box.min = Point{j["box"][0].get<double>(), j["box"][1].get<double>()};
        box.max = Point{j["box"][2].get<double>(), j["box"][3].get<double>()};
        TimeInterval time{j["time"][0].get<double>(), j["time"][1].get<double>()};

        std::vector<FlagId> got = j["phase1_flags"].get<std::vector<FlagId>>();
        std::sort(got.begin(), got.end());
        auto want = brute_force_range(all_flags, kKindMaskExpertise | kKindMaskExpertLink, box,
                                      time);
        PrecisionRecall pr = compare_id_sets(got, want);
        sum.dsti.tp += pr.tp;
        sum.dsti.fp += pr.fp;
        sum.dsti.fn += pr.fn;

        IrQuery q;
        q.terms = j["terms"].get<std::vector<std::string>>();
        bool fallback = j.value("fallback", false);
        if (!fallback) q.st_ref = SpatioTemporalRef{box, time};
        auto oracle = exhaustive_answers(items, q);
        if (!oracle.empty()) {
            std::set<std::uint64_t> oracle_ids;
            for (const auto& r : oracle) oracle_ids.insert(r.item.item_id);
            std::uint64_t hit = 0;
            for (const auto& r : j["results"]) {
                if (oracle_ids.count(r["item"].get<std::uint64_t>())) ++hit;
            }
            sum.item_recall_sum += static_cast<double>(hit) / static_cast<double>(oracle_ids.size());
            sum.item_recall_n += 1;
        }
    }
    return sum;
}

}  // namespace stnet
