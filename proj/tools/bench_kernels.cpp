#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stnet/clustering.hpp"
#include "stnet/corpus.hpp"
#include "stnet/eval.hpp"
#include "stnet/rng.hpp"
#include "stnet/smallworld.hpp"

using namespace stnet;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

void row(const char* name, std::size_t n, double serial, double parallel, bool same) {
    std::printf("%-24s %8zu   %9.3f ms   %9.3f ms   %5.2fx   %s\n", name, n, serial * 1e3,
                parallel * 1e3, serial / parallel, same ? "match" : "MISMATCH");
}

std::vector<AgentSite> random_sites(std::size_t n, std::uint64_t seed) {
    std::vector<AgentSite> sites(n);
    RngStream rng(seed, "bench.sites", 0);
    for (std::size_t i = 0; i < n; ++i)
        sites[i] = {static_cast<AgentId>(i + 1), {rng.next_unit(), rng.next_unit()}};
    return sites;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel timings"};
    int reps = 3;
    std::size_t scale = 1;
    app.add_option("--reps", reps, "repetitions, best-of");
    app.add_option("--scale", scale, "problem size multiplier");
    CLI11_PARSE(app, argc, argv);

    std::printf("%-24s %8s   %12s   %12s   %6s\n", "kernel", "n", "serial", "parallel", "speedup");

    {
        SyntheticConfig cfg;
        cfg.n_docs = 20'000 * scale;
        cfg.seed = 7;
        std::vector<CorpusRecord> a, b;
        double ts = time_of([&] { a = generate_synthetic_serial(cfg); }, reps);
        double tp = time_of([&] { b = generate_synthetic(cfg); }, reps);
        row("corpus.synthetic", cfg.n_docs, ts, tp, a == b);
    }

    {
        auto sites = random_sites(2'000 * scale, 11);
        SmallWorldConfig cfg{4, 2, 2.0, 11};
        std::vector<LinkRec> a, b;
        double ts = time_of([&] { a = generate_links_serial(sites, cfg); }, reps);
        double tp = time_of([&] { b = generate_links(sites, cfg); }, reps);
        row("smallworld.links", sites.size(), ts, tp,
            a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(),
                                               [](const LinkRec& x, const LinkRec& y) {
                                                   return x.owner == y.owner &&
                                                          x.target == y.target &&
                                                          x.long_range == y.long_range;
                                               }));

        std::vector<LinkRec> links = a;
        SlopeFit fa, fb;
        double ss = time_of([&] { fa = fit_link_distance_slope_serial(sites, links, 24, 5); }, reps);
        double sp = time_of([&] { fb = fit_link_distance_slope(sites, links, 24, 5); }, reps);
        row("eval.slope_fit", sites.size(), ss, sp,
            fa.slope == fb.slope && fa.bins_used == fb.bins_used);
    }

    {
        std::vector<Point> pts;
        RngStream rng(13, "bench.dbscan", 0);
        for (std::size_t i = 0; i < 20'000 * scale; ++i)
            pts.push_back({rng.next_unit(), rng.next_unit()});
        std::vector<std::vector<std::size_t>> a, b;
        double ts = time_of([&] { a = dbscan_serial(pts, 0.01, 3); }, reps);
        double tp = time_of([&] { b = dbscan(pts, 0.01, 3); }, reps);
        row("clustering.dbscan", pts.size(), ts, tp, a == b);
    }

    {
        std::map<FlagId, Flag> all;
        RngStream rng(17, "bench.flags", 0);
        for (std::uint64_t i = 1; i <= 50'000 * scale; ++i) {
            Flag f;
            f.flag_id = make_flag_id(i, 0);
            f.body = AgentLocationFlag{i, {rng.next_unit(), rng.next_unit()}, i};
            all.emplace(f.flag_id, f);
        }
        BoundingBox box{{0.2, 0.2}, {0.6, 0.6}};
        TimeInterval t{0.0, 1.0};
        std::vector<FlagId> a, b;
        double ts = time_of([&] { a = brute_force_range_serial(all, kKindMaskAll, box, t); }, reps);
        double tp = time_of([&] { b = brute_force_range(all, kKindMaskAll, box, t); }, reps);
        row("eval.range_scan", all.size(), ts, tp, a == b);
    }

    return 0;
}
