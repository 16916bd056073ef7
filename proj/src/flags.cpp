#include "stnet/flags.hpp"

#include <algorithm>

namespace stnet {

TopicSummary TopicSummary::from_terms(std::vector<std::string> raw) {
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    if (raw.size() > kSummaryK) raw.resize(kSummaryK);
    return {std::move(raw)};
}

bool valid_summary(const TopicSummary& s) {
    if (s.terms.size() > kSummaryK) return false;
    for (std::size_t i = 0; i < s.terms.size(); ++i) {
        if (s.terms[i].empty()) return false;
        if (i > 0 && !(s.terms[i - 1] < s.terms[i])) return false;
    }
    return true;
}

const char* flag_kind_name(FlagKind k) {
    switch (k) {
        case FlagKind::Expertise: return "expertise";
        case FlagKind::ExpertLink: return "expert_link";
        case FlagKind::AgentLocation: return "agent_location";
    }
    return "?";
}

AgentId Flag::owner() const {
    return std::visit([](const auto& b) { return b.owner; }, body);
}

Geometry flag_routing_geometry(const Flag& f) {
    return std::visit(
        [](const auto& b) -> Geometry {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, AgentLocationFlag>) {
                return b.location;
            } else {
                return b.st_ref.geometry;
            }
        },
        f.body);
}

TimeInterval flag_time(const Flag& f) {
    return std::visit(
        [](const auto& b) -> TimeInterval {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, AgentLocationFlag>) {
                return {0.0, 1.0};
            } else {
                return b.st_ref.time;
            }
        },
        f.body);
}

bool valid_flag(const Flag& f) {
    return std::visit(
        [&](const auto& b) -> bool {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, ExpertiseFlag>) {
                return valid_geometry(b.st_ref.geometry) && valid_time(b.st_ref.time) &&
                       valid_summary(b.summary) && b.item_count >= 1;
            } else if constexpr (std::is_same_v<T, ExpertLinkFlag>) {
                return b.owner != b.target && valid_geometry(b.st_ref.geometry) &&
                       valid_time(b.st_ref.time) && b.weight > 0.0 && b.weight <= 1.0;
            } else {
                return valid_point(b.location);
            }
        },
        f.body);
}

void encode_geometry(const Geometry& g, ByteWriter& w) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Point>) {
                w.u8(0);
                w.f64(v.x);
                w.f64(v.y);
            } else if constexpr (std::is_same_v<T, BoundingBox>) {
                w.u8(1);
                w.f64(v.min.x);
                w.f64(v.min.y);
                w.f64(v.max.x);
                w.f64(v.max.y);
            } else {
                w.u8(std::is_same_v<T, PolygonGeometry> ? 2 : 3);
                w.u32(static_cast<std::uint32_t>(v.vertices.size()));
                for (const Point& p : v.vertices) {
                    w.f64(p.x);
                    w.f64(p.y);
                }
            }
        },
        g);
}

Geometry decode_geometry(ByteReader& r) {
    const std::size_t at = r.offset();
    const std::uint8_t tag = r.u8();
    switch (tag) {
        case 0: {
            const double x = r.f64();
            const double y = r.f64();
            return Point{x, y};
        }
        case 1: {
            BoundingBox b;
            b.min.x = r.f64();
            b.min.y = r.f64();
            b.max.x = r.f64();
            b.max.y = r.f64();
            return b;
        }
        case 2:
        case 3: {
            const std::uint32_t n = r.u32();
            const std::uint32_t min_n = (tag == 2) ? 3 : 2;
            if (n < min_n) throw DecodeError(at, "geometry with too few vertices");
            std::vector<Point> pts(n);
            for (auto& p : pts) {
                p.x = r.f64();
                p.y = r.f64();
            }
            if (tag == 2) return PolygonGeometry::make(std::move(pts));
            return Polyline::make(std::move(pts));
        }
        default:
            throw DecodeError(at, "unknown geometry tag");
    }
}

void encode_time(const TimeInterval& t, ByteWriter& w) {
    w.f64(t.start);
    w.f64(t.end);
}

TimeInterval decode_time(ByteReader& r) {
    TimeInterval t;
    t.start = r.f64();
    t.end = r.f64();
    return t;
}

void encode_path(const SectorPath& p, ByteWriter& w) {
    w.u8(static_cast<std::uint8_t>(p.digits.size()));
    std::uint8_t packed = 0;
    for (std::size_t i = 0; i < p.digits.size(); ++i) {
        packed |= static_cast<std::uint8_t>((p.digits[i] & 0x3) << (2 * (i & 3)));
        if ((i & 3) == 3) {
            w.u8(packed);
            packed = 0;
        }
    }
    if (p.digits.size() & 3) w.u8(packed);
}

SectorPath decode_path(ByteReader& r) {
    const std::size_t at = r.offset();
    const std::uint8_t len = r.u8();
    if (len > kMaxDepthLimit) throw DecodeError(at, "sector path too long");
    SectorPath p;
    p.digits.resize(len);
    std::uint8_t packed = 0;
    for (std::size_t i = 0; i < len; ++i) {
        if ((i & 3) == 0) packed = r.u8();
        p.digits[i] = (packed >> (2 * (i & 3))) & 0x3;
    }
    return p;
}

namespace {

void encode_st_ref(const SpatioTemporalRef& s, ByteWriter& w) {
    encode_geometry(s.geometry, w);
    encode_time(s.time, w);
}

SpatioTemporalRef decode_st_ref(ByteReader& r) {
    SpatioTemporalRef s;
    s.geometry = decode_geometry(r);
    s.time = decode_time(r);
    return s;
}

void encode_terms(const TopicSummary& s, ByteWriter& w) {
    w.u32(static_cast<std::uint32_t>(s.terms.size()));
    for (const std::string& t : s.terms) w.str(t);
}

TopicSummary decode_terms(ByteReader& r) {
    const std::size_t at = r.offset();
    const std::uint32_t n = r.u32();
    if (n > kSummaryK) throw DecodeError(at, "too many summary terms");
    TopicSummary s;
    s.terms.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) s.terms.push_back(r.str());
    if (!valid_summary(s)) throw DecodeError(at, "summary terms not sorted/unique");
    return s;
}

}  // namespace

void encode_flag(const Flag& f, ByteWriter& w) {
    w.u64(f.flag_id);
    w.u8(static_cast<std::uint8_t>(f.kind()));
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, ExpertiseFlag>) {
                w.u64(b.owner);
                encode_st_ref(b.st_ref, w);
                w.u32(b.item_count);
                encode_terms(b.summary, w);
            } else if constexpr (std::is_same_v<T, ExpertLinkFlag>) {
                w.u64(b.owner);
                w.u64(b.target);
                encode_st_ref(b.st_ref, w);
                w.f64(b.weight);
            } else {
                w.u64(b.owner);
                w.f64(b.location.x);
                w.f64(b.location.y);
                w.u64(b.contact);
            }
        },
        f.body);
}

std::vector<std::uint8_t> encode_flag(const Flag& f) {
    ByteWriter w;
    encode_flag(f, w);
    return w.take();
}

Flag decode_flag(ByteReader& r) {
    Flag f;
    f.flag_id = r.u64();
    const std::size_t kind_at = r.offset();
    const std::uint8_t kind = r.u8();
    switch (kind) {
        case 0: {
            ExpertiseFlag b;
            b.owner = r.u64();
            b.st_ref = decode_st_ref(r);
            b.item_count = r.u32();
            b.summary = decode_terms(r);
            f.body = std::move(b);
            break;
        }
        case 1: {
            ExpertLinkFlag b;
            b.owner = r.u64();
            b.target = r.u64();
            b.st_ref = decode_st_ref(r);
            b.weight = r.f64();
            f.body = std::move(b);
            break;
        }
        case 2: {
            AgentLocationFlag b;
            b.owner = r.u64();
            b.location.x = r.f64();
            b.location.y = r.f64();
            b.contact = r.u64();
            f.body = std::move(b);
            break;
        }
        default:
            throw DecodeError(kind_at, "unknown flag kind");
    }
    return f;
}

Flag decode_flag(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes);
    Flag f = decode_flag(r);
    r.expect_done();
    return f;
}

}  // namespace stnet
