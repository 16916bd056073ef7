#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Spatial primitives over the normalized unit square and quadtree sector
// addressing. All boxes are half-open: [min.x, max.x) x [min.y, max.y).
// A degenerate interval (min == max) is treated as the closed point at min,
// so a Point's bounding box behaves like the point itself.

namespace stnet {

// Hard cap on sector path length (wire format packs 2 bits per digit).
inline constexpr int kMaxDepthLimit = 32;
// Default depth used when no configuration overrides it.
inline constexpr int kDefaultMaxDepth = 16;

// Largest representable coordinate; keeps every point strictly inside [0,1).
inline constexpr double kCoordMax = 1.0 - 0x1p-32;

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

inline bool valid_point(const Point& p) {
    return p.x >= 0.0 && p.x < 1.0 && p.y >= 0.0 && p.y < 1.0;
}

// Maps (lon, lat) in degrees into the unit square, clamped so the result is
// always a valid Point.
Point normalize_lonlat(double lon_deg, double lat_deg);

struct TimeInterval {
    double start = 0.0;
    double end = 1.0;

    bool operator==(const TimeInterval&) const = default;
    double length() const { return end - start; }
};

inline bool valid_time(const TimeInterval& t) {
    return t.start >= 0.0 && t.end <= 1.0 && t.start <= t.end;
}

struct BoundingBox {
    Point min;
    Point max;  // exclusive corner; max == 1.0 is allowed (root sector)

    bool operator==(const BoundingBox&) const = default;

    Point center() const { return {(min.x + max.x) * 0.5, (min.y + max.y) * 0.5}; }
    double area() const { return (max.x - min.x) * (max.y - min.y); }
    bool degenerate() const { return min.x == max.x || min.y == max.y; }
};

inline bool valid_box(const BoundingBox& b) {
    return b.min.x >= 0.0 && b.min.y >= 0.0 && b.max.x <= 1.0 && b.max.y <= 1.0 &&
           b.min.x <= b.max.x && b.min.y <= b.max.y;
}

inline BoundingBox root_box() { return {{0.0, 0.0}, {1.0, 1.0}}; }

BoundingBox bbox_of_points(const std::vector<Point>& pts);

struct PolygonGeometry {
    std::vector<Point> vertices;  // >= 3, ring implicitly closed
    BoundingBox mbb;              // always the exact bounding box of vertices

    static PolygonGeometry make(std::vector<Point> vertices);
    bool operator==(const PolygonGeometry&) const = default;
};

struct Polyline {
    std::vector<Point> vertices;  // >= 2
    BoundingBox mbb;

    static Polyline make(std::vector<Point> vertices);
    bool operator==(const Polyline&) const = default;
};

using Geometry = std::variant<Point, BoundingBox, PolygonGeometry, Polyline>;

// Every geometry exposes an mbb; a Point's is the degenerate box at the point.
BoundingBox mbb_of(const Geometry& g);
bool valid_geometry(const Geometry& g);

// Quaternary digit address of a quadtree sector. Empty path = root sector.
// Digit encoding: 2*(y >= ymid) + (x >= xmid), so 0=SW, 1=SE, 2=NW, 3=NE.
struct SectorPath {
    std::vector<std::uint8_t> digits;

    SectorPath() = default;
    SectorPath(std::initializer_list<std::uint8_t> d) : digits(d) {}
    explicit SectorPath(std::vector<std::uint8_t> d) : digits(std::move(d)) {}

    bool operator==(const SectorPath&) const = default;
    auto operator<=>(const SectorPath&) const = default;

    std::size_t depth() const { return digits.size(); }
    bool is_root() const { return digits.empty(); }
    bool is_prefix_of(const SectorPath& other) const;
    SectorPath child(std::uint8_t quadrant) const;
    SectorPath parent() const;
    std::string to_string() const;  // e.g. "/3/0", root is "/"
};

bool valid_path(const SectorPath& p);

struct SpatioTemporalRef {
    Geometry geometry;
    TimeInterval time;

    bool operator==(const SpatioTemporalRef&) const = default;
};

// The half-open box reached by recursively quartering the unit square along
// the path's digits. Total over valid paths.
BoundingBox sector_of_path(const SectorPath& path);

// Index of the quadrant of `sector` that contains p. Throws
// std::invalid_argument when p lies outside the sector.
int quadrant_index(const Point& p, const BoundingBox& sector);

// Child sector for one quadrant digit.
BoundingBox child_sector(const BoundingBox& sector, int quadrant);

// Longest path (<= max_depth) whose sector fully contains g's mbb. Descent
// stops at the first depth where the mbb straddles a quartering line.
SectorPath smallest_covering_path(const Geometry& g, int max_depth);

// Half-open containment of g's mbb in `sector`. Degenerate mbb axes use
// point membership.
bool covers(const BoundingBox& sector, const Geometry& g);

// Half-open mbb overlap test; degenerate axes use point membership.
bool intersects(const BoundingBox& a, const Geometry& b);
bool boxes_intersect(const BoundingBox& a, const BoundingBox& b);

// Intersection area of two boxes (0 when disjoint or measure-zero).
double intersection_area(const BoundingBox& a, const BoundingBox& b);

// |query ∩ flag| / |query|. A zero-length query scores 1 when its instant
// lies inside [flag.start, flag.end] and 0 otherwise.
double time_overlap_fraction(const TimeInterval& query, const TimeInterval& flag);

double euclidean_distance(const Point& a, const Point& b);

}  // namespace stnet
