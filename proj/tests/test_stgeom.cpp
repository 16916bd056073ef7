#include <doctest.h>

#include <stdexcept>

#include "stnet/geometry.hpp"
#include "stnet/rng.hpp"

using namespace stnet;

TEST_CASE("sector_of_path quarters the unit square") {
    CHECK(sector_of_path({}) == root_box());
    CHECK(sector_of_path({0}) == BoundingBox{{0.0, 0.0}, {0.5, 0.5}});
    CHECK(sector_of_path({3, 0}) == BoundingBox{{0.5, 0.5}, {0.75, 0.75}});
    CHECK(sector_of_path({1}) == BoundingBox{{0.5, 0.0}, {1.0, 0.5}});
    CHECK(sector_of_path({2}) == BoundingBox{{0.0, 0.5}, {0.5, 1.0}});
}

TEST_CASE("quadrant_index boundary goes to the upper/right quadrant") {
    CHECK(quadrant_index({0.1, 0.1}, root_box()) == 0);
    CHECK(quadrant_index({0.5, 0.5}, root_box()) == 3);
    CHECK(quadrant_index({0.6, 0.2}, root_box()) == 1);
    CHECK(quadrant_index({0.2, 0.6}, root_box()) == 2);
    CHECK_THROWS_AS(quadrant_index({0.6, 0.6}, sector_of_path({0})), std::invalid_argument);
}

TEST_CASE("quadrants tile their sector exactly") {
    RngStream rng(7, "test.tile", 0);
    for (int trial = 0; trial < 200; ++trial) {
        SectorPath path;
        int depth = static_cast<int>(rng.next_below(5));
        for (int i = 0; i < depth; ++i)
            path = path.child(static_cast<std::uint8_t>(rng.next_below(4)));
        BoundingBox sector = sector_of_path(path);

        Point p{sector.min.x + (sector.max.x - sector.min.x) * rng.next_unit(),
                sector.min.y + (sector.max.y - sector.min.y) * rng.next_unit()};
        int q = quadrant_index(p, sector);
        int members = 0;
        for (int c = 0; c < 4; ++c) {
            BoundingBox child = child_sector(sector, c);
            bool inside = p.x >= child.min.x && p.x < child.max.x && p.y >= child.min.y &&
                          p.y < child.max.y;
            if (inside) {
                ++members;
                CHECK(c == q);
            }
        }
        CHECK(members == 1);
        // the four children partition the area
        double sum = 0.0;
        for (int c = 0; c < 4; ++c) sum += child_sector(sector, c).area();
        CHECK(sum == doctest::Approx(sector.area()).epsilon(1e-12));
    }
}

TEST_CASE("smallest_covering_path descends until a straddle") {
    CHECK(smallest_covering_path(root_box(), 8) == SectorPath{});
    CHECK(smallest_covering_path(BoundingBox{{0.4, 0.4}, {0.6, 0.6}}, 8) == SectorPath{});
    CHECK(smallest_covering_path(BoundingBox{{0.6, 0.6}, {0.7, 0.7}}, 8) == SectorPath({3, 0}));
    // a point descends to the depth cap
    CHECK(smallest_covering_path(Point{0.1, 0.1}, 3).depth() == 3);
    CHECK(smallest_covering_path(Point{0.0, 0.0}, 4) == SectorPath({0, 0, 0, 0}));
}

TEST_CASE("covering path is covering and maximal") {
    RngStream rng(11, "test.cover", 0);
    for (int trial = 0; trial < 300; ++trial) {
        Point a{rng.next_unit() * kCoordMax, rng.next_unit() * kCoordMax};
        Point b{rng.next_unit() * kCoordMax, rng.next_unit() * kCoordMax};
        BoundingBox g{{std::min(a.x, b.x), std::min(a.y, b.y)},
                      {std::max(a.x, b.x), std::max(a.y, b.y)}};
        int max_depth = 1 + static_cast<int>(rng.next_below(10));
        SectorPath p = smallest_covering_path(g, max_depth);
        REQUIRE(static_cast<int>(p.depth()) <= max_depth);
        BoundingBox sector = sector_of_path(p);
        CHECK(covers(sector, g));
        if (static_cast<int>(p.depth()) < max_depth) {
            for (int c = 0; c < 4; ++c) CHECK_FALSE(covers(child_sector(sector, c), g));
        }
    }
}

TEST_CASE("prefix paths cover their extensions") {
    RngStream rng(13, "test.prefix", 0);
    for (int trial = 0; trial < 200; ++trial) {
        SectorPath p;
        int d1 = static_cast<int>(rng.next_below(6));
        for (int i = 0; i < d1; ++i) p = p.child(static_cast<std::uint8_t>(rng.next_below(4)));
        SectorPath q = p;
        int extra = static_cast<int>(rng.next_below(5));
        for (int i = 0; i < extra; ++i) q = q.child(static_cast<std::uint8_t>(rng.next_below(4)));
        CHECK(p.is_prefix_of(q));
        CHECK(covers(sector_of_path(p), sector_of_path(q)));
    }
}

TEST_CASE("covers and intersects use half-open semantics") {
    CHECK(covers(root_box(), Geometry{Point{0.999, 0.999}}));
    CHECK_FALSE(intersects({{0.0, 0.0}, {0.5, 0.5}}, Geometry{Point{0.5, 0.5}}));
    CHECK(intersects({{0.0, 0.0}, {0.5, 0.5}},
                     Geometry{BoundingBox{{0.4, 0.4}, {0.6, 0.6}}}));
    // abutting boxes share only a measure-zero edge
    CHECK_FALSE(intersects({{0.0, 0.0}, {0.5, 0.5}},
                           Geometry{BoundingBox{{0.5, 0.0}, {0.6, 0.5}}}));
    // degenerate axis falls back to point membership
    CHECK(intersects({{0.0, 0.0}, {0.5, 0.5}}, Geometry{Point{0.0, 0.0}}));
    CHECK(intersects({{0.2, 0.2}, {0.2, 0.2}},
                     Geometry{BoundingBox{{0.1, 0.1}, {0.3, 0.3}}}));
}

TEST_CASE("polygon and polyline route by their mbb") {
    PolygonGeometry tri = PolygonGeometry::make({{0.55, 0.55}, {0.7, 0.6}, {0.6, 0.72}});
    CHECK(tri.mbb == BoundingBox{{0.55, 0.55}, {0.7, 0.72}});
    CHECK(smallest_covering_path(tri, 8) == smallest_covering_path(tri.mbb, 8));

    Polyline line = Polyline::make({{0.1, 0.2}, {0.3, 0.05}});
    CHECK(line.mbb == BoundingBox{{0.1, 0.05}, {0.3, 0.2}});
    CHECK(mbb_of(Geometry{line}) == line.mbb);
    CHECK(mbb_of(Geometry{Point{0.4, 0.4}}) == BoundingBox{{0.4, 0.4}, {0.4, 0.4}});
}

TEST_CASE("time_overlap_fraction") {
    CHECK(time_overlap_fraction({0.2, 0.4}, {0.3, 0.5}) == doctest::Approx(0.5));
    CHECK(time_overlap_fraction({0.0, 1.0}, {0.0, 1.0}) == doctest::Approx(1.0));
    CHECK(time_overlap_fraction({0.5, 0.5}, {0.4, 0.6}) == doctest::Approx(1.0));
    CHECK(time_overlap_fraction({0.5, 0.5}, {0.6, 0.7}) == doctest::Approx(0.0));
    CHECK(time_overlap_fraction({0.0, 0.5}, {0.6, 0.8}) == doctest::Approx(0.0));
    // degenerate query instant on the flag's closed endpoint counts
    CHECK(time_overlap_fraction({0.6, 0.6}, {0.4, 0.6}) == doctest::Approx(1.0));
}

TEST_CASE("normalize_lonlat maps and clamps") {
    CHECK(normalize_lonlat(-180.0, -90.0) == Point{0.0, 0.0});
    CHECK(normalize_lonlat(0.0, 0.0) == Point{0.5, 0.5});
    Point top = normalize_lonlat(180.0, 90.0);
    CHECK(top.x == kCoordMax);
    CHECK(top.y == kCoordMax);
    CHECK(valid_point(top));
}

TEST_CASE("sector path helpers") {
    SectorPath p({3, 0, 1});
    CHECK(p.to_string() == "/3/0/1");
    CHECK(SectorPath{}.to_string() == "/");
    CHECK(p.parent() == SectorPath({3, 0}));
    CHECK(p.child(2) == SectorPath({3, 0, 1, 2}));
    CHECK(valid_path(p));
    CHECK_FALSE(valid_path(SectorPath({4})));
    CHECK(SectorPath{}.is_prefix_of(p));
    CHECK_FALSE(p.is_prefix_of(SectorPath({3, 0})));
}

TEST_CASE("bbox_of_points is the exact hull") {
    CHECK(bbox_of_points({{0.3, 0.7}, {0.1, 0.9}, {0.2, 0.8}}) ==
          BoundingBox{{0.1, 0.7}, {0.3, 0.9}});
    CHECK(bbox_of_points({{0.4, 0.4}}) == BoundingBox{{0.4, 0.4}, {0.4, 0.4}});
}
