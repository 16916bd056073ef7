#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stnet/config.hpp"
#include "stnet/corpus.hpp"
#include "stnet/snapshot.hpp"

// Drives a whole simulation: corpus -> agents/items -> profiles -> links ->
// join -> publish -> query workload, with one call per phase so tests can
// stop anywhere. All randomness flows through rng_stream scopes; the event
// loop is the single Simnet.

namespace stnet {

struct WorkloadQuery {
    AgentId querier = 0;
    IrQuery q;
};

class World {
  public:
    explicit World(const RunConfig& cfg);
    explicit World(const SnapshotData& snap);  // rebuild for query replay

    void build();
    void join_all();
    void publish_all();
    std::vector<WorkloadQuery> make_workload() const;
    const QueryOutcome& run_query(const WorkloadQuery& wq);
    void run_all();

    std::uint64_t quiesce() { return net_->run_until_quiescent(); }

    Simnet& net() { return *net_; }
    const Simnet& net() const { return *net_; }
    SimAgent& agent(AgentId id);
    const std::vector<std::unique_ptr<SimAgent>>& agents() const { return agents_; }
    const std::vector<CorpusRecord>& corpus() const { return corpus_; }
    const std::vector<InfoItem>& corpus_items() const { return corpus_items_; }
    const std::vector<LinkRec>& links() const { return links_; }
    const std::vector<QueryOutcome>& outcomes() const { return outcomes_; }
    const RunConfig& config() const { return cfg_; }
    std::uint64_t flags_published() const { return flags_published_; }

    // One JSON object per query plus a trailing summary object; keys are
    // emitted in fixed order and nothing depends on wall clock, so two runs
    // of the same config produce identical bytes.
    std::string metrics_jsonl() const;

    SnapshotData snapshot() const;

    // Every flag currently stored anywhere in the overlay, by id.
    std::map<FlagId, Flag> stored_flags() const;

  private:
    RunConfig cfg_;
    std::unique_ptr<Simnet> net_;
    std::vector<std::unique_ptr<SimAgent>> agents_;
    std::vector<CorpusRecord> corpus_;
    std::vector<InfoItem> corpus_items_;  // parallel to corpus_
    std::vector<LinkRec> links_;
    std::vector<QueryOutcome> outcomes_;
    std::uint64_t flags_published_ = 0;
};

}  // namespace stnet
