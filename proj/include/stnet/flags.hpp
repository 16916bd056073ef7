#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "stnet/bytes.hpp"
#include "stnet/geometry.hpp"

// The three flag kinds agents publish into the shared index, plus their
// canonical binary encoding (wire payload and snapshot format).
//
// Canonical layout, all integers little-endian, doubles IEEE-754 binary64:
//
//   flag      := flag_id u64 | kind u8 | body
//   kind      := 0 expertise, 1 expert-link, 2 agent-location
//   expertise := owner u64 | st_ref | item_count u32 | terms
//   link      := owner u64 | target u64 | st_ref | weight f64
//   location  := owner u64 | x f64 | y f64 | contact u64
//   st_ref    := geometry | start f64 | end f64
//   geometry  := tag u8 | payload
//                tag 0 point:    x f64 | y f64
//                tag 1 box:      minx f64 | miny f64 | maxx f64 | maxy f64
//                tag 2 polygon:  n u32 | n * (x f64 | y f64)
//                tag 3 polyline: n u32 | n * (x f64 | y f64)
//   terms     := n u32 | n * (len u32 | bytes)      terms sorted, unique
//
// A polygon/polyline mbb is never serialized; decode recomputes it, so the
// cached-mbb invariant holds by construction.

namespace stnet {

using AgentId = std::uint64_t;
using FlagId = std::uint64_t;

// In the simulation a peer is addressed by the owning agent's id.
using PeerAddress = std::uint64_t;

inline constexpr std::size_t kSummaryK = 16;

// Up to kSummaryK lowercase tokens, kept sorted and unique.
struct TopicSummary {
    std::vector<std::string> terms;

    static TopicSummary from_terms(std::vector<std::string> raw);
    bool operator==(const TopicSummary&) const = default;
};

bool valid_summary(const TopicSummary& s);

struct ExpertiseFlag {
    AgentId owner = 0;
    SpatioTemporalRef st_ref;
    TopicSummary summary;
    std::uint32_t item_count = 1;

    bool operator==(const ExpertiseFlag&) const = default;
};

struct ExpertLinkFlag {
    AgentId owner = 0;
    AgentId target = 0;
    SpatioTemporalRef st_ref;
    double weight = 1.0;

    bool operator==(const ExpertLinkFlag&) const = default;
};

struct AgentLocationFlag {
    AgentId owner = 0;
    Point location;
    PeerAddress contact = 0;

    bool operator==(const AgentLocationFlag&) const = default;
};

enum class FlagKind : std::uint8_t { Expertise = 0, ExpertLink = 1, AgentLocation = 2 };

const char* flag_kind_name(FlagKind k);

// Bitmask for query kind filters.
enum : std::uint8_t {
    kKindMaskExpertise = 1u << 0,
    kKindMaskExpertLink = 1u << 1,
    kKindMaskAgentLocation = 1u << 2,
    kKindMaskAll = 0x7,
};

inline std::uint8_t kind_mask_bit(FlagKind k) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
}

struct Flag {
    FlagId flag_id = 0;
    std::variant<ExpertiseFlag, ExpertLinkFlag, AgentLocationFlag> body;

    bool operator==(const Flag&) const = default;

    FlagKind kind() const { return static_cast<FlagKind>(body.index()); }
    AgentId owner() const;
};

// Flag ids are assigned by owners as (owner << 32) | local counter.
inline FlagId make_flag_id(AgentId owner, std::uint32_t counter) {
    return (owner << 32) | counter;
}

// The geometry a flag is routed and placed by: the st_ref geometry for
// expertise and link flags, the owner's location point for location flags.
Geometry flag_routing_geometry(const Flag& f);

// The temporal extent used when filtering; location flags have none.
TimeInterval flag_time(const Flag& f);

bool valid_flag(const Flag& f);

void encode_flag(const Flag& f, ByteWriter& w);
std::vector<std::uint8_t> encode_flag(const Flag& f);

// Throws DecodeError (with byte offset) on malformed input.
Flag decode_flag(ByteReader& r);
Flag decode_flag(const std::vector<std::uint8_t>& bytes);

void encode_geometry(const Geometry& g, ByteWriter& w);
Geometry decode_geometry(ByteReader& r);

void encode_time(const TimeInterval& t, ByteWriter& w);
TimeInterval decode_time(ByteReader& r);

void encode_path(const SectorPath& p, ByteWriter& w);
SectorPath decode_path(ByteReader& r);

}  // namespace stnet
