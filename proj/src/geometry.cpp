#include "stnet/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace stnet {

Point normalize_lonlat(double lon_deg, double lat_deg) {
    double x = (lon_deg + 180.0) / 360.0;
    double y = (lat_deg + 90.0) / 180.0;
    x = std::min(std::max(x, 0.0), kCoordMax);
    y = std::min(std::max(y, 0.0), kCoordMax);
    return {x, y};
}

BoundingBox bbox_of_points(const std::vector<Point>& pts) {
    if (pts.empty()) throw std::invalid_argument("bbox_of_points: empty point set");
    BoundingBox b{pts.front(), pts.front()};
    for (const Point& p : pts) {
        b.min.x = std::min(b.min.x, p.x);
        b.min.y = std::min(b.min.y, p.y);
        b.max.x = std::max(b.max.x, p.x);
        b.max.y = std::max(b.max.y, p.y);
    }
    return b;
}

PolygonGeometry PolygonGeometry::make(std::vector<Point> vertices) {
    if (vertices.size() < 3) throw std::invalid_argument("polygon needs >= 3 vertices");
    BoundingBox mbb = bbox_of_points(vertices);
    return {std::move(vertices), mbb};
}

Polyline Polyline::make(std::vector<Point> vertices) {
    if (vertices.size() < 2) throw std::invalid_argument("polyline needs >= 2 vertices");
    BoundingBox mbb = bbox_of_points(vertices);
    return {std::move(vertices), mbb};
}

BoundingBox mbb_of(const Geometry& g) {
    return std::visit(
        [](const auto& v) -> BoundingBox {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Point>) {
                return {v, v};
            } else if constexpr (std::is_same_v<T, BoundingBox>) {
                return v;
            } else {
                return v.mbb;
            }
        },
        g);
}

bool valid_geometry(const Geometry& g) {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Point>) {
                return valid_point(v);
            } else if constexpr (std::is_same_v<T, BoundingBox>) {
                return valid_box(v);
            } else if constexpr (std::is_same_v<T, PolygonGeometry>) {
                if (v.vertices.size() < 3) return false;
                for (const Point& p : v.vertices)
                    if (!valid_point(p)) return false;
                return v.mbb == bbox_of_points(v.vertices);
            } else {
                if (v.vertices.size() < 2) return false;
                for (const Point& p : v.vertices)
                    if (!valid_point(p)) return false;
                return v.mbb == bbox_of_points(v.vertices);
            }
        },
        g);
}

bool SectorPath::is_prefix_of(const SectorPath& other) const {
    if (digits.size() > other.digits.size()) return false;
    return std::equal(digits.begin(), digits.end(), other.digits.begin());
}

SectorPath SectorPath::child(std::uint8_t quadrant) const {
    SectorPath p = *this;
    p.digits.push_back(quadrant);
    return p;
}

SectorPath SectorPath::parent() const {
    if (digits.empty()) throw std::logic_error("root sector has no parent");
    SectorPath p = *this;
    p.digits.pop_back();
    return p;
}

std::string SectorPath::to_string() const {
    if (digits.empty()) return "/";
    std::string s;
    for (std::uint8_t d : digits) {
        s += '/';
        s += static_cast<char>('0' + d);
    }
    return s;
}

bool valid_path(const SectorPath& p) {
    if (p.digits.size() > static_cast<std::size_t>(kMaxDepthLimit)) return false;
    for (std::uint8_t d : p.digits)
        if (d > 3) return false;
    return true;
}

BoundingBox child_sector(const BoundingBox& sector, int quadrant) {
    const Point mid = sector.center();
    BoundingBox c = sector;
    if (quadrant & 1) c.min.x = mid.x; else c.max.x = mid.x;
    if (quadrant & 2) c.min.y = mid.y; else c.max.y = mid.y;
    return c;
}

BoundingBox sector_of_path(const SectorPath& path) {
    BoundingBox b = root_box();
    for (std::uint8_t d : path.digits) b = child_sector(b, d);
    return b;
}

int quadrant_index(const Point& p, const BoundingBox& sector) {
    if (p.x < sector.min.x || p.x >= sector.max.x || p.y < sector.min.y || p.y >= sector.max.y)
        throw std::invalid_argument("quadrant_index: point outside sector");
    const Point mid = sector.center();
    return 2 * (p.y >= mid.y) + (p.x >= mid.x);
}

namespace {

// Half-open interval containment; a degenerate [v,v] uses point membership.
bool interval_covered(double smin, double smax, double amin, double amax) {
    if (amin == amax) return amin >= smin && amin < smax;
    return amin >= smin && amax <= smax;
}

// Overlap of two intervals, each half-open unless degenerate.
bool interval_overlap(double amin, double amax, double bmin, double bmax) {
    if (amin == amax && bmin == bmax) return amin == bmin;
    if (amin == amax) return amin >= bmin && amin < bmax;
    if (bmin == bmax) return bmin >= amin && bmin < amax;
    return amin < bmax && bmin < amax;
}

}  // namespace

bool covers(const BoundingBox& sector, const Geometry& g) {
    const BoundingBox b = mbb_of(g);
    return interval_covered(sector.min.x, sector.max.x, b.min.x, b.max.x) &&
           interval_covered(sector.min.y, sector.max.y, b.min.y, b.max.y);
}

bool boxes_intersect(const BoundingBox& a, const BoundingBox& b) {
    return interval_overlap(a.min.x, a.max.x, b.min.x, b.max.x) &&
           interval_overlap(a.min.y, a.max.y, b.min.y, b.max.y);
}

bool intersects(const BoundingBox& a, const Geometry& b) {
    return boxes_intersect(a, mbb_of(b));
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double w = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
    const double h = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

SectorPath smallest_covering_path(const Geometry& g, int max_depth) {
    if (max_depth < 0 || max_depth > kMaxDepthLimit)
        throw std::invalid_argument("smallest_covering_path: bad max_depth");
    const BoundingBox target = mbb_of(g);
    SectorPath path;
    BoundingBox sector = root_box();
    for (int depth = 0; depth < max_depth; ++depth) {
        const Point mid = sector.center();
        const int q = 2 * (target.min.y >= mid.y) + (target.min.x >= mid.x);
        const BoundingBox child = child_sector(sector, q);
        if (!interval_covered(child.min.x, child.max.x, target.min.x, target.max.x) ||
            !interval_covered(child.min.y, child.max.y, target.min.y, target.max.y))
            break;  // straddles a quartering line
        path = path.child(static_cast<std::uint8_t>(q));
        sector = child;
    }
    return path;
}

double time_overlap_fraction(const TimeInterval& query, const TimeInterval& flag) {
    if (query.length() == 0.0)
        return (query.start >= flag.start && query.start <= flag.end) ? 1.0 : 0.0;
    const double lo = std::max(query.start, flag.start);
    const double hi = std::min(query.end, flag.end);
    if (hi <= lo) return 0.0;
    return (hi - lo) / query.length();
}

double euclidean_distance(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace stnet
