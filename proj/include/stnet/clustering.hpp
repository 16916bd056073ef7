#pragma once

#include <cstdint>
#include <vector>

#include "stnet/geometry.hpp"

// Deterministic DBSCAN over points in the unit square. Ordering contract
// (shared with the brute-force reference in the tests): neighborhoods are
// closed balls (d <= eps) including the point itself; cluster seeds start in
// ascending index order; expansion is breadth-first with neighbor lists in
// ascending index order; border points stay with the first cluster that
// reaches them; leftover points become singletons.

namespace stnet {

// Partition of point indices: clusters ordered by their smallest member,
// members ascending. Uses an eps-cell grid for neighborhood lookups.
std::vector<std::vector<std::size_t>> dbscan(const std::vector<Point>& pts, double eps,
                                             int min_pts);
std::vector<std::vector<std::size_t>> dbscan_serial(const std::vector<Point>& pts, double eps,
                                                    int min_pts);

// Shared expansion step, exposed so callers can plug their own neighbor
// lists; `neighbors[i]` must be ascending and contain i.
std::vector<std::vector<std::size_t>> dbscan_from_neighbors(
    const std::vector<std::vector<std::size_t>>& neighbors, int min_pts);

}  // namespace stnet
