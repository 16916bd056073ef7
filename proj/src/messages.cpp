#include "stnet/messages.hpp"

namespace stnet {

const char* msg_kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::Insert: return "INSERT";
        case MsgKind::InsertAck: return "INSERT_ACK";
        case MsgKind::PointQuery: return "POINT_QUERY";
        case MsgKind::RangeQuery: return "RANGE_QUERY";
        case MsgKind::QueryResult: return "QUERY_RESULT";
        case MsgKind::SplitAssign: return "SPLIT_ASSIGN";
        case MsgKind::SplitAck: return "SPLIT_ACK";
        case MsgKind::Transfer: return "TRANSFER";
        case MsgKind::TransferAck: return "TRANSFER_ACK";
        case MsgKind::MergeReclaim: return "MERGE_RECLAIM";
        case MsgKind::MergeAck: return "MERGE_ACK";
        case MsgKind::Join: return "JOIN";
        case MsgKind::Ask: return "ASK";
        case MsgKind::Answer: return "ANSWER";
        case MsgKind::Delete: return "DELETE";
        case MsgKind::DeleteAck: return "DELETE_ACK";
        case MsgKind::CountReport: return "COUNT_REPORT";
    }
    return "?";
}

bool is_routed_kind(MsgKind k) {
    switch (k) {
        case MsgKind::Insert:
        case MsgKind::Join:
        case MsgKind::Delete:
        case MsgKind::PointQuery:
        case MsgKind::RangeQuery:
            return true;
        default:
            return false;
    }
}

std::vector<std::uint8_t> encode_envelope(const MessageEnvelope& env) {
    ByteWriter w;
    w.u64(env.seq);
    w.u8(static_cast<std::uint8_t>(env.kind));
    encode_path(env.target_path, w);
    w.u64(env.src);
    w.u64(env.dst);
    w.u32(static_cast<std::uint32_t>(env.payload.size()));
    if (!env.payload.empty()) w.raw(env.payload.data(), env.payload.size());
    return w.take();
}

MessageEnvelope decode_envelope(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    MessageEnvelope env;
    env.seq = r.u64();
    const std::size_t kind_at = r.offset();
    const std::uint8_t kind = r.u8();
    if (kind >= kNumMsgKinds) throw DecodeError(kind_at, "unknown message kind");
    env.kind = static_cast<MsgKind>(kind);
    env.target_path = decode_path(r);
    env.src = r.u64();
    env.dst = r.u64();
    const std::uint32_t n = r.u32();
    r.need(n);
    env.payload.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) env.payload[i] = r.u8();
    r.expect_done();
    return env;
}

void RouteTrace::encode(ByteWriter& w) const {
    w.u8(entry_depth < 0 ? 0xFF : static_cast<std::uint8_t>(entry_depth));
    w.u16(hops);
}

RouteTrace RouteTrace::decode(ByteReader& r) {
    RouteTrace t;
    const std::uint8_t e = r.u8();
    t.entry_depth = (e == 0xFF) ? -1 : static_cast<int>(e);
    t.hops = r.u16();
    return t;
}

namespace {

void encode_terms_list(const std::vector<std::string>& terms, ByteWriter& w) {
    w.u32(static_cast<std::uint32_t>(terms.size()));
    for (const auto& t : terms) w.str(t);
}

std::vector<std::string> decode_terms_list(ByteReader& r) {
    const std::uint32_t n = r.u32();
    std::vector<std::string> terms;
    terms.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) terms.push_back(r.str());
    return terms;
}

void encode_flag_list(const std::vector<Flag>& flags, ByteWriter& w) {
    w.u32(static_cast<std::uint32_t>(flags.size()));
    for (const Flag& f : flags) encode_flag(f, w);
}

std::vector<Flag> decode_flag_list(ByteReader& r) {
    const std::uint32_t n = r.u32();
    std::vector<Flag> flags;
    flags.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) flags.push_back(decode_flag(r));
    return flags;
}

}  // namespace

std::vector<std::uint8_t> InsertPayload::encode() const {
    ByteWriter w;
    w.u64(reply_to);
    trace.encode(w);
    encode_flag(flag, w);
    return w.take();
}

InsertPayload InsertPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    InsertPayload p;
    p.reply_to = r.u64();
    p.trace = RouteTrace::decode(r);
    p.flag = decode_flag(r);
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> InsertAckPayload::encode() const {
    ByteWriter w;
    w.u64(flag_id);
    encode_path(stored_path, w);
    w.u64(store_addr);
    w.u8(duplicate ? 1 : 0);
    return w.take();
}

InsertAckPayload InsertAckPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    InsertAckPayload p;
    p.flag_id = r.u64();
    p.stored_path = decode_path(r);
    p.store_addr = r.u64();
    p.duplicate = r.u8() != 0;
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> DeletePayload::encode() const {
    ByteWriter w;
    w.u64(reply_to);
    trace.encode(w);
    w.u64(owner);
    w.u8(static_cast<std::uint8_t>(kind));
    w.u32(static_cast<std::uint32_t>(ids.size()));
    for (FlagId id : ids) w.u64(id);
    return w.take();
}

DeletePayload DeletePayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    DeletePayload p;
    p.reply_to = r.u64();
    p.trace = RouteTrace::decode(r);
    p.owner = r.u64();
    const std::size_t at = r.offset();
    const std::uint8_t k = r.u8();
    if (k > 2) throw DecodeError(at, "unknown flag kind");
    p.kind = static_cast<FlagKind>(k);
    const std::uint32_t n = r.u32();
    p.ids.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) p.ids.push_back(r.u64());
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> DeleteAckPayload::encode() const {
    ByteWriter w;
    w.u64(owner);
    w.u32(removed);
    return w.take();
}

DeleteAckPayload DeleteAckPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    DeleteAckPayload p;
    p.owner = r.u64();
    p.removed = r.u32();
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> RangeQueryPayload::encode() const {
    ByteWriter w;
    w.u64(query_id);
    w.u64(reply_to);
    trace.encode(w);
    w.u8(kind_mask);
    w.u8(static_cast<std::uint8_t>(mode));
    encode_geometry(geometry, w);
    encode_time(time, w);
    return w.take();
}

RangeQueryPayload RangeQueryPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    RangeQueryPayload p;
    p.query_id = r.u64();
    p.reply_to = r.u64();
    p.trace = RouteTrace::decode(r);
    p.kind_mask = r.u8();
    const std::size_t at = r.offset();
    const std::uint8_t m = r.u8();
    if (m > 2) throw DecodeError(at, "unknown query mode");
    p.mode = static_cast<QueryMode>(m);
    p.geometry = decode_geometry(r);
    p.time = decode_time(r);
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> PointQueryPayload::encode() const {
    ByteWriter w;
    w.u64(query_id);
    w.u64(reply_to);
    trace.encode(w);
    w.u8(kind_mask);
    encode_geometry(geometry, w);
    encode_time(time, w);
    return w.take();
}

PointQueryPayload PointQueryPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    PointQueryPayload p;
    p.query_id = r.u64();
    p.reply_to = r.u64();
    p.trace = RouteTrace::decode(r);
    p.kind_mask = r.u8();
    p.geometry = decode_geometry(r);
    p.time = decode_time(r);
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> QueryResultPayload::encode() const {
    ByteWriter w;
    w.u64(query_id);
    w.u64(responder);
    encode_path(responder_path, w);
    w.u32(n_contacted);
    encode_flag_list(flags, w);
    return w.take();
}

QueryResultPayload QueryResultPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    QueryResultPayload p;
    p.query_id = r.u64();
    p.responder = r.u64();
    p.responder_path = decode_path(r);
    p.n_contacted = r.u32();
    p.flags = decode_flag_list(r);
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> SplitAssignPayload::encode() const {
    ByteWriter w;
    w.u64(split_id);
    w.u64(parent);
    encode_path(child_path, w);
    return w.take();
}

SplitAssignPayload SplitAssignPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    SplitAssignPayload p;
    p.split_id = r.u64();
    p.parent = r.u64();
    p.child_path = decode_path(r);
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> SplitAckPayload::encode() const {
    ByteWriter w;
    w.u64(split_id);
    w.u8(accepted ? 1 : 0);
    encode_path(child_path, w);
    return w.take();
}

SplitAckPayload SplitAckPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    SplitAckPayload p;
    p.split_id = r.u64();
    p.accepted = r.u8() != 0;
    p.child_path = decode_path(r);
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> TransferPayload::encode() const {
    ByteWriter w;
    w.u64(split_id);
    encode_path(child_path, w);
    encode_flag_list(flags, w);
    return w.take();
}

TransferPayload TransferPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    TransferPayload p;
    p.split_id = r.u64();
    p.child_path = decode_path(r);
    p.flags = decode_flag_list(r);
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> TransferAckPayload::encode() const {
    ByteWriter w;
    w.u64(split_id);
    encode_path(child_path, w);
    w.u32(n_received);
    w.u32(stored_count);
    w.u8(has_children ? 1 : 0);
    return w.take();
}

TransferAckPayload TransferAckPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    TransferAckPayload p;
    p.split_id = r.u64();
    p.child_path = decode_path(r);
    p.n_received = r.u32();
    p.stored_count = r.u32();
    p.has_children = r.u8() != 0;
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> MergeReclaimPayload::encode() const {
    ByteWriter w;
    w.u64(merge_id);
    return w.take();
}

MergeReclaimPayload MergeReclaimPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    MergeReclaimPayload p;
    p.merge_id = r.u64();
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> MergeAckPayload::encode() const {
    ByteWriter w;
    w.u64(merge_id);
    w.u8(accepted ? 1 : 0);
    encode_path(child_path, w);
    encode_flag_list(flags, w);
    return w.take();
}

MergeAckPayload MergeAckPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    MergeAckPayload p;
    p.merge_id = r.u64();
    p.accepted = r.u8() != 0;
    p.child_path = decode_path(r);
    p.flags = decode_flag_list(r);
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> CountReportPayload::encode() const {
    ByteWriter w;
    encode_path(child_path, w);
    w.u32(stored_count);
    w.u8(has_children ? 1 : 0);
    return w.take();
}

CountReportPayload CountReportPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    CountReportPayload p;
    p.child_path = decode_path(r);
    p.stored_count = r.u32();
    p.has_children = r.u8() != 0;
    r.expect_done();
    return p;
}

void encode_item(const ItemRecord& item, ByteWriter& w) {
    w.u64(item.item_id);
    encode_geometry(item.st_ref.geometry, w);
    encode_time(item.st_ref.time, w);
    encode_terms_list(item.terms, w);
}

ItemRecord decode_item(ByteReader& r) {
    ItemRecord item;
    item.item_id = r.u64();
    item.st_ref.geometry = decode_geometry(r);
    item.st_ref.time = decode_time(r);
    item.terms = decode_terms_list(r);
    return item;
}

std::vector<std::uint8_t> AskPayload::encode() const {
    ByteWriter w;
    w.u64(query_id);
    w.u64(reply_to);
    w.u32(ttl);
    encode_terms_list(terms, w);
    w.u8(has_st_ref ? 1 : 0);
    if (has_st_ref) {
        encode_geometry(geometry, w);
        encode_time(time, w);
    }
    return w.take();
}

AskPayload AskPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    AskPayload p;
    p.query_id = r.u64();
    p.reply_to = r.u64();
    p.ttl = r.u32();
    p.terms = decode_terms_list(r);
    p.has_st_ref = r.u8() != 0;
    if (p.has_st_ref) {
        p.geometry = decode_geometry(r);
        p.time = decode_time(r);
    }
    r.expect_done();
    return p;
}

std::vector<std::uint8_t> AnswerPayload::encode() const {
    ByteWriter w;
    w.u64(query_id);
    w.u64(responder);
    w.u32(n_forwards);
    w.u8(duplicate ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(items.size()));
    for (const AnswerItem& it : items) {
        encode_item(it.item, w);
        w.u64(it.item_owner);
        w.f64(it.score);
    }
    return w.take();
}

AnswerPayload AnswerPayload::decode(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    AnswerPayload p;
    p.query_id = r.u64();
    p.responder = r.u64();
    p.n_forwards = r.u32();
    p.duplicate = r.u8() != 0;
    const std::uint32_t n = r.u32();
    p.items.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        AnswerItem it;
        it.item = decode_item(r);
        it.item_owner = r.u64();
        it.score = r.f64();
        p.items.push_back(std::move(it));
    }
    r.expect_done();
    return p;
}

}  // namespace stnet
