#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stnet/agents.hpp"
#include "stnet/geometry.hpp"

// Geo-referenced document corpus: TSV ingestion, a synthetic hotspot
// generator standing in for the live dataset, and non-disjoint assignment of
// documents to agents.

namespace stnet {

struct CorpusRecord {
    std::uint64_t doc_id = 0;
    double lon = 0.0;  // degrees
    double lat = 0.0;
    std::int64_t t_start = 0;  // epoch seconds
    std::int64_t t_end = 0;
    std::vector<std::string> terms;

    bool operator==(const CorpusRecord&) const = default;
};

struct SyntheticConfig {
    std::uint64_t n_docs = 1000;
    std::uint32_t n_hotspots = 10;
    double hotspot_sigma = 0.02;  // in unit-square coordinates
    std::uint32_t vocab_size = 500;
    std::uint32_t terms_per_doc = 8;
    std::uint64_t seed = 0;
};

// Format: doc_id \t lon \t lat \t t_start \t t_end \t space-joined terms
std::vector<CorpusRecord> load_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<CorpusRecord>& records);

std::vector<CorpusRecord> generate_synthetic(const SyntheticConfig& cfg);
std::vector<CorpusRecord> generate_synthetic_serial(const SyntheticConfig& cfg);

// Unit-square projection used everywhere downstream: x from lon, y from lat,
// time normalized by the min/max over the batch (constant batch -> 0.5).
std::vector<InfoItem> records_to_items(const std::vector<CorpusRecord>& records);

Point lonlat_to_unit(double lon, double lat);

struct Assignment {
    std::map<AgentId, std::vector<std::uint64_t>> items_of;  // agent -> doc ids
    std::map<AgentId, Point> locations;
};

// Each doc lands on floor(r) agents plus one more with probability r-floor(r),
// distinct, chosen uniformly; agent locations are centroids of a sampled
// subset of their docs' points.
Assignment assign_to_agents(const std::vector<CorpusRecord>& records, std::uint32_t n_agents,
                            double replication, std::uint64_t seed);

}  // namespace stnet
