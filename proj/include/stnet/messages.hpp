#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stnet/flags.hpp"

// Typed protocol messages and the envelope wire format. Envelope layout:
//
//   seq u64 | kind u8 | path_len u8 | packed path digits (2 bits each,
//   digit j in byte j/4 at bit 2*(j%4)) | src u64 | dst u64 |
//   payload_len u32 | payload
//
// Payloads use the flag codec plus the primitives below. Requests that are
// routed hop-by-hop (insert, join, delete, point/range query) carry a small
// route trace so hop bounds can be audited from message traces.

namespace stnet {

enum class MsgKind : std::uint8_t {
    Insert = 0,
    InsertAck = 1,
    PointQuery = 2,
    RangeQuery = 3,
    QueryResult = 4,
    SplitAssign = 5,
    SplitAck = 6,
    Transfer = 7,
    TransferAck = 8,
    MergeReclaim = 9,
    MergeAck = 10,
    Join = 11,
    Ask = 12,
    Answer = 13,
    Delete = 14,
    DeleteAck = 15,
    CountReport = 16,
};

inline constexpr std::size_t kNumMsgKinds = 17;

const char* msg_kind_name(MsgKind k);

bool is_routed_kind(MsgKind k);

struct MessageEnvelope {
    std::uint64_t seq = 0;  // assigned by the transport on send
    MsgKind kind = MsgKind::Insert;
    SectorPath target_path;
    PeerAddress src = 0;
    PeerAddress dst = 0;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_envelope(const MessageEnvelope& env);
MessageEnvelope decode_envelope(const std::vector<std::uint8_t>& bytes);

// Hop bookkeeping for routed requests. entry_depth is the path depth of the
// node where the request first reached a node-managing peer; -1 until then.
struct RouteTrace {
    int entry_depth = -1;
    std::uint16_t hops = 0;

    void encode(ByteWriter& w) const;
    static RouteTrace decode(ByteReader& r);
    bool operator==(const RouteTrace&) const = default;
};

// INSERT and JOIN carry the same payload.
struct InsertPayload {
    PeerAddress reply_to = 0;
    RouteTrace trace;
    Flag flag;

    std::vector<std::uint8_t> encode() const;
    static InsertPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct InsertAckPayload {
    FlagId flag_id = 0;
    SectorPath stored_path;
    PeerAddress store_addr = 0;
    bool duplicate = false;

    std::vector<std::uint8_t> encode() const;
    static InsertAckPayload decode(const std::vector<std::uint8_t>& bytes);
};

// Removes flags of (owner, kind); when ids is non-empty only those ids.
struct DeletePayload {
    PeerAddress reply_to = 0;
    RouteTrace trace;
    AgentId owner = 0;
    FlagKind kind = FlagKind::Expertise;
    std::vector<FlagId> ids;

    std::vector<std::uint8_t> encode() const;
    static DeletePayload decode(const std::vector<std::uint8_t>& bytes);
};

struct DeleteAckPayload {
    AgentId owner = 0;
    std::uint32_t removed = 0;

    std::vector<std::uint8_t> encode() const;
    static DeleteAckPayload decode(const std::vector<std::uint8_t>& bytes);
};

// Range queries propagate in three modes once delivered to the covering
// node: the initial delivery expands both up and down the tree, scattered
// copies keep moving away from it.
enum class QueryMode : std::uint8_t { Initial = 0, Down = 1, Up = 2 };

struct RangeQueryPayload {
    std::uint64_t query_id = 0;
    PeerAddress reply_to = 0;
    RouteTrace trace;
    std::uint8_t kind_mask = kKindMaskAll;
    QueryMode mode = QueryMode::Initial;
    Geometry geometry;
    TimeInterval time;

    std::vector<std::uint8_t> encode() const;
    static RangeQueryPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct PointQueryPayload {
    std::uint64_t query_id = 0;
    PeerAddress reply_to = 0;
    RouteTrace trace;
    std::uint8_t kind_mask = kKindMaskAll;
    Geometry geometry;
    TimeInterval time;

    std::vector<std::uint8_t> encode() const;
    static PointQueryPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct QueryResultPayload {
    std::uint64_t query_id = 0;
    PeerAddress responder = 0;
    SectorPath responder_path;
    std::uint32_t n_contacted = 0;  // additional query messages this node sent
    std::vector<Flag> flags;

    std::vector<std::uint8_t> encode() const;
    static QueryResultPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct SplitAssignPayload {
    std::uint64_t split_id = 0;
    PeerAddress parent = 0;
    SectorPath child_path;

    std::vector<std::uint8_t> encode() const;
    static SplitAssignPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct SplitAckPayload {
    std::uint64_t split_id = 0;
    bool accepted = false;
    SectorPath child_path;

    std::vector<std::uint8_t> encode() const;
    static SplitAckPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct TransferPayload {
    std::uint64_t split_id = 0;
    SectorPath child_path;
    std::vector<Flag> flags;

    std::vector<std::uint8_t> encode() const;
    static TransferPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct TransferAckPayload {
    std::uint64_t split_id = 0;
    SectorPath child_path;
    std::uint32_t n_received = 0;
    std::uint32_t stored_count = 0;  // child's stored size after the transfer
    bool has_children = false;

    std::vector<std::uint8_t> encode() const;
    static TransferAckPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct MergeReclaimPayload {
    std::uint64_t merge_id = 0;

    std::vector<std::uint8_t> encode() const;
    static MergeReclaimPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct MergeAckPayload {
    std::uint64_t merge_id = 0;
    bool accepted = false;
    SectorPath child_path;
    std::vector<Flag> flags;

    std::vector<std::uint8_t> encode() const;
    static MergeAckPayload decode(const std::vector<std::uint8_t>& bytes);
};

// Child -> parent occupancy refresh, sent when a child's stored set shrinks
// (deletes, completed merges). Keeps the parent's merge precondition working
// from fresh counts without touching the merge protocol itself.
struct CountReportPayload {
    SectorPath child_path;
    std::uint32_t stored_count = 0;
    bool has_children = false;

    std::vector<std::uint8_t> encode() const;
    static CountReportPayload decode(const std::vector<std::uint8_t>& bytes);
};

// Item record rider for ASK/ANSWER traffic.
struct ItemRecord {
    std::uint64_t item_id = 0;
    SpatioTemporalRef st_ref;
    std::vector<std::string> terms;  // sorted, unique, nonempty

    bool operator==(const ItemRecord&) const = default;
};

void encode_item(const ItemRecord& item, ByteWriter& w);
ItemRecord decode_item(ByteReader& r);

struct AskPayload {
    std::uint64_t query_id = 0;
    PeerAddress reply_to = 0;
    std::uint32_t ttl = 0;
    std::vector<std::string> terms;
    bool has_st_ref = false;
    Geometry geometry;
    TimeInterval time;

    std::vector<std::uint8_t> encode() const;
    static AskPayload decode(const std::vector<std::uint8_t>& bytes);
};

struct AnswerItem {
    ItemRecord item;
    AgentId item_owner = 0;
    double score = 0.0;

    bool operator==(const AnswerItem&) const = default;
};

struct AnswerPayload {
    std::uint64_t query_id = 0;
    AgentId responder = 0;
    std::uint32_t n_forwards = 0;
    bool duplicate = false;
    std::vector<AnswerItem> items;

    std::vector<std::uint8_t> encode() const;
    static AnswerPayload decode(const std::vector<std::uint8_t>& bytes);
};

}  // namespace stnet
