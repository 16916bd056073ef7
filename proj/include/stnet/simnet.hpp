#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "stnet/messages.hpp"
#include "stnet/rng.hpp"

// Deterministic discrete-event message transport. Events are processed in
// (deliver_at, seq) order; seq is assigned in send order, so simultaneous
// deliveries happen in send order. Envelopes cross the transport as encoded
// bytes and are decoded again on delivery, so every message exercises the
// wire format.

namespace stnet {

struct LatencyModel {
    enum class Kind { Constant, Uniform } kind = Kind::Constant;
    double a = 1.0;  // constant delay, or lower bound
    double b = 1.0;  // upper bound for uniform

    double sample(RngStream& rng) const;
    // Accepts "constant:<d>" or "uniform:<lo>,<hi>".
    static LatencyModel parse(const std::string& text);
    std::string to_string() const;
};

struct SimAbortError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-split protocol message accounting. lookup_msgs counts query messages
// the splitting peer issued while the split was pending; the protocol finds
// child peers from stored location flags, so it stays 0.
struct SplitRecord {
    std::uint64_t split_id = 0;
    PeerAddress node_peer = 0;
    std::string node_path;
    std::uint32_t assigns = 0;
    std::uint32_t acks = 0;
    std::uint32_t nacks = 0;
    std::uint32_t transfers = 0;
    std::uint32_t transfer_acks = 0;
    std::uint32_t flags_moved = 0;
    std::uint32_t lookup_msgs = 0;

    std::uint32_t total_msgs() const { return assigns + acks + nacks + transfers + transfer_acks; }
};

struct MergeRecord {
    std::uint64_t merge_id = 0;
    PeerAddress node_peer = 0;
    std::uint32_t children = 0;  // materialized children reclaimed from
    std::uint32_t reclaims = 0;
    std::uint32_t acks = 0;
    std::uint32_t nacks = 0;
    std::uint32_t flags_absorbed = 0;

    std::uint32_t total_msgs() const { return reclaims + acks + nacks; }
};

// One record per routed request delivery, for auditing the hop bound
// hops <= entry_depth + target_depth.
struct RouteRecord {
    MsgKind kind = MsgKind::Insert;
    std::uint16_t entry_depth = 0;
    std::uint16_t target_depth = 0;
    std::uint16_t hops = 0;

    bool within_bound() const { return hops <= entry_depth + target_depth; }
};

struct Metrics {
    std::array<std::uint64_t, kNumMsgKinds> sent_by_kind{};
    std::array<std::uint64_t, kNumMsgKinds> delivered_by_kind{};
    std::uint64_t events = 0;
    std::vector<SplitRecord> splits;
    std::vector<MergeRecord> merges;
    std::vector<RouteRecord> routes;

    std::uint64_t total_sent() const;
    std::uint64_t total_delivered() const;
    SplitRecord& split(std::uint64_t split_id);
    MergeRecord& merge(std::uint64_t merge_id);
    std::uint64_t route_bound_violations() const;

  private:
    std::map<std::uint64_t, std::size_t> split_index_;
    std::map<std::uint64_t, std::size_t> merge_index_;
    friend class Simnet;
};

class Simnet;

class MessageHandler {
  public:
    virtual ~MessageHandler() = default;
    virtual void handle(const MessageEnvelope& env, Simnet& net) = 0;
};

class Simnet {
  public:
    Simnet(std::uint64_t seed, LatencyModel latency, std::uint64_t event_limit);

    void register_handler(PeerAddress addr, MessageHandler* handler);

    // Assigns the envelope's seq, encodes it and schedules delivery.
    void send(MessageEnvelope env);

    // Processes events until the queue is empty. Returns events processed by
    // this call; throws SimAbortError when the cumulative limit is exceeded.
    std::uint64_t run_until_quiescent();

    double now() const { return now_; }
    bool quiescent() const { return queue_.empty(); }
    std::uint64_t pending() const { return queue_.size(); }

    Metrics& metrics() { return metrics_; }
    const Metrics& metrics() const { return metrics_; }

    std::uint64_t alloc_split_id() { return next_split_id_++; }
    std::uint64_t alloc_merge_id() { return next_merge_id_++; }

    std::uint64_t seed() const { return seed_; }

  private:
    struct Scheduled {
        double deliver_at;
        std::uint64_t seq;
        std::vector<std::uint8_t> bytes;

        bool operator>(const Scheduled& o) const {
            if (deliver_at != o.deliver_at) return deliver_at > o.deliver_at;
            return seq > o.seq;
        }
    };

    std::uint64_t seed_;
    LatencyModel latency_;
    RngStream latency_rng_;
    std::uint64_t event_limit_;
    std::uint64_t next_seq_ = 1;
    std::uint64_t next_split_id_ = 1;
    std::uint64_t next_merge_id_ = 1;
    double now_ = 0.0;
    std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<Scheduled>> queue_;
    std::map<PeerAddress, MessageHandler*> handlers_;
    Metrics metrics_;
};

}  // namespace stnet
