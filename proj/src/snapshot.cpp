#include "stnet/snapshot.hpp"

#include <fstream>

#include "stnet/bytes.hpp"

namespace stnet {

namespace {

constexpr std::uint8_t kMagic[8] = {'S', 'T', 'N', 'E', 'T', 'S', 'S', '1'};

void encode_st_ref(const SpatioTemporalRef& r, ByteWriter& w) {
    encode_geometry(r.geometry, w);
    encode_time(r.time, w);
}

SpatioTemporalRef decode_st_ref(ByteReader& r) {
    SpatioTemporalRef out;
    out.geometry = decode_geometry(r);
    out.time = decode_time(r);
    return out;
}

void encode_info_item(const InfoItem& it, ByteWriter& w) {
    w.u64(it.item_id);
    encode_st_ref(it.st_ref, w);
    w.u32(static_cast<std::uint32_t>(it.terms.size()));
    for (const auto& t : it.terms) w.str(t);
}

InfoItem decode_info_item(ByteReader& r) {
    InfoItem it;
    it.item_id = r.u64();
    it.st_ref = decode_st_ref(r);
    std::uint32_t n = r.u32();
    it.terms.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) it.terms.push_back(r.str());
    return it;
}

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const SnapshotData& s) {
    ByteWriter w;
    w.raw(kMagic, sizeof kMagic);
    w.u32(static_cast<std::uint32_t>(s.config_kv.size()));
    for (const auto& [k, v] : s.config_kv) {
        w.str(k);
        w.str(v);
    }
    w.u32(static_cast<std::uint32_t>(s.agents.size()));
    for (const AgentSnap& a : s.agents) {
        w.u64(a.id);
        w.f64(a.location.x);
        w.f64(a.location.y);
        w.u64(a.gateway);
        w.u32(static_cast<std::uint32_t>(a.items.size()));
        for (const auto& it : a.items) encode_info_item(it, w);
        w.u32(static_cast<std::uint32_t>(a.profile_flags.size()));
        for (std::size_t i = 0; i < a.profile_flags.size(); ++i) {
            encode_flag(Flag{make_flag_id(a.id, static_cast<std::uint32_t>(i + 1)),
                             a.profile_flags[i]},
                        w);
            const auto& members = a.profile_members[i];
            w.u32(static_cast<std::uint32_t>(members.size()));
            for (std::uint64_t m : members) w.u64(m);
        }
        w.u32(static_cast<std::uint32_t>(a.link_flags.size()));
        for (const auto& f : a.link_flags) encode_flag(f, w);
        w.u8(a.node ? 1 : 0);
        if (a.node) {
            encode_path(a.node->path, w);
            w.u64(a.node->parent);
            for (const auto& c : a.node->children) {
                w.u8(c.materialized ? 1 : 0);
                w.u64(c.addr);
                w.u32(c.last_count);
                w.u8(c.has_children ? 1 : 0);
            }
            w.u32(static_cast<std::uint32_t>(a.node->stored.size()));
            for (const auto& f : a.node->stored) encode_flag(f, w);
        }
    }
    return w.take();
}

SnapshotData decode_snapshot(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    for (std::size_t i = 0; i < sizeof kMagic; ++i) {
        if (r.u8() != kMagic[i]) throw DecodeError(i, "bad snapshot magic");
    }
    SnapshotData s;
    std::uint32_t nkv = r.u32();
    for (std::uint32_t i = 0; i < nkv; ++i) {
        std::string k = r.str();
        s.config_kv[k] = r.str();
    }
    std::uint32_t na = r.u32();
    s.agents.resize(na);
    for (AgentSnap& a : s.agents) {
        a.id = r.u64();
        a.location.x = r.f64();
        a.location.y = r.f64();
        a.gateway = r.u64();
        std::uint32_t ni = r.u32();
        a.items.reserve(ni);
        for (std::uint32_t i = 0; i < ni; ++i) a.items.push_back(decode_info_item(r));
        std::uint32_t np = r.u32();
        a.profile_flags.reserve(np);
        a.profile_members.resize(np);
        for (std::uint32_t i = 0; i < np; ++i) {
            Flag f = decode_flag(r);
            if (f.kind() != FlagKind::Expertise)
                throw DecodeError(r.offset(), "profile flag of wrong kind");
            a.profile_flags.push_back(std::get<ExpertiseFlag>(f.body));
            std::uint32_t nm = r.u32();
            for (std::uint32_t m = 0; m < nm; ++m) a.profile_members[i].push_back(r.u64());
        }
        std::uint32_t nl = r.u32();
        a.link_flags.reserve(nl);
        for (std::uint32_t i = 0; i < nl; ++i) a.link_flags.push_back(decode_flag(r));
        if (r.u8()) {
            NodeSnap n;
            n.path = decode_path(r);
            n.parent = r.u64();
            for (auto& c : n.children) {
                c.materialized = r.u8() != 0;
                c.addr = r.u64();
                c.last_count = r.u32();
                c.has_children = r.u8() != 0;
            }
            std::uint32_t nf = r.u32();
            n.stored.reserve(nf);
            for (std::uint32_t i = 0; i < nf; ++i) n.stored.push_back(decode_flag(r));
            a.node = std::move(n);
        }
    }
    r.expect_done();
    return s;
}

void save_snapshot(const std::string& path, const SnapshotData& s) {
    auto bytes = encode_snapshot(s);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write snapshot: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("snapshot write failed: " + path);
}

SnapshotData load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_snapshot(bytes);
}

}  // namespace stnet
