#include "stnet/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

namespace stnet {

std::vector<std::vector<std::size_t>> dbscan_from_neighbors(
    const std::vector<std::vector<std::size_t>>& neighbors, int min_pts) {
    const std::size_t n = neighbors.size();
    std::vector<std::ptrdiff_t> label(n, -1);
    std::vector<char> core(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        core[i] = neighbors[i].size() >= static_cast<std::size_t>(min_pts);

    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != -1 || !core[i]) continue;
        std::ptrdiff_t c = static_cast<std::ptrdiff_t>(clusters.size());
        clusters.emplace_back();
        label[i] = c;
        std::deque<std::size_t> queue{i};
        while (!queue.empty()) {
            std::size_t p = queue.front();
            queue.pop_front();
            clusters.back().push_back(p);
            for (std::size_t q : neighbors[p]) {
                if (label[q] != -1) continue;
                label[q] = c;
                if (core[q])
                    queue.push_back(q);
                else
                    clusters.back().push_back(q);
            }
        }
        std::sort(clusters.back().begin(), clusters.back().end());
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == -1) clusters.push_back({i});
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return clusters;
}

namespace {

std::vector<std::vector<std::size_t>> neighbor_lists(const std::vector<Point>& pts, double eps,
                                                     bool parallel) {
    const std::size_t n = pts.size();
    // eps-sized cells: neighbors of a point lie in its 3x3 cell block.
    std::map<std::pair<long, long>, std::vector<std::size_t>> grid;
    auto cell_of = [eps](const Point& p) {
        return std::pair<long, long>{static_cast<long>(std::floor(p.x / eps)),
                                     static_cast<long>(std::floor(p.y / eps))};
    };
    for (std::size_t i = 0; i < n; ++i) grid[cell_of(pts[i])].push_back(i);

    std::vector<std::vector<std::size_t>> neighbors(n);
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
    for (std::size_t i = 0; i < n; ++i) {
        auto [cx, cy] = cell_of(pts[i]);
        auto& out = neighbors[i];
        for (long dx = -1; dx <= 1; ++dx) {
            for (long dy = -1; dy <= 1; ++dy) {
                auto it = grid.find({cx + dx, cy + dy});
                if (it == grid.end()) continue;
                for (std::size_t j : it->second) {
                    if (euclidean_distance(pts[i], pts[j]) <= eps) out.push_back(j);
                }
            }
        }
        std::sort(out.begin(), out.end());
    }
    return neighbors;
}

void check_params(double eps, int min_pts) {
    if (eps <= 0.0) throw std::invalid_argument("dbscan: eps must be positive");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
}

}  // namespace

std::vector<std::vector<std::size_t>> dbscan(const std::vector<Point>& pts, double eps,
                                             int min_pts) {
    check_params(eps, min_pts);
    return dbscan_from_neighbors(neighbor_lists(pts, eps, true), min_pts);
}

std::vector<std::vector<std::size_t>> dbscan_serial(const std::vector<Point>& pts, double eps,
                                                    int min_pts) {
    check_params(eps, min_pts);
    return dbscan_from_neighbors(neighbor_lists(pts, eps, false), min_pts);
}

}  // namespace stnet
