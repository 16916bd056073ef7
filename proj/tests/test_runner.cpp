#include <doctest.h>

#include <json.hpp>

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stnet/runner.hpp"

using namespace stnet;
using json = nlohmann::json;

namespace {

RunConfig small_config(std::uint64_t seed = 42) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.n_agents = 24;
    cfg.synth.n_docs = 400;
    cfg.synth.n_hotspots = 4;
    cfg.synth.seed = seed;
    cfg.smallworld.seed = seed;
    cfg.replication = 1.5;
    cfg.n_queries = 12;
    return cfg;
}

std::vector<json> parse_lines(const std::string& text) {
    std::vector<json> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        REQUIRE(!line.empty());
        out.push_back(json::parse(line));
    }
    return out;
}

std::set<std::string> keys_of(const json& j) {
    std::set<std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it) out.insert(it.key());
    return out;
}

void check_same_query(const QueryOutcome& a, const QueryOutcome& b) {
    CHECK(a.fallback_used == b.fallback_used);
    CHECK(a.effective_box == b.effective_box);
    CHECK(a.effective_time == b.effective_time);
    CHECK(a.flags_found == b.flags_found);
    CHECK(a.phase1_flags == b.phase1_flags);
    CHECK(a.candidates == b.candidates);
    CHECK(a.asked == b.asked);
    CHECK(a.answers == b.answers);
    CHECK(a.forwards == b.forwards);
    REQUIRE(a.results.size() == b.results.size());
    for (std::size_t i = 0; i < a.results.size(); ++i) {
        CHECK(a.results[i].item.item_id == b.results[i].item.item_id);
        CHECK(a.results[i].owner == b.results[i].owner);
        CHECK(a.results[i].score == b.results[i].score);
    }
}

}  // namespace

TEST_CASE("config kv round trip and unknown-key rejection") {
    RunConfig cfg = small_config();
    auto kv = cfg.to_kv();
    RunConfig back = config_from_kv(kv);
    CHECK(back.to_kv() == kv);

    kv["no_such_knob"] = "1";
    std::string msg;
    try {
        config_from_kv(kv);
    } catch (const std::invalid_argument& e) {
        msg = e.what();
    }
    CHECK(msg.find("no_such_knob") != std::string::npos);

    auto bad = cfg.to_kv();
    bad["n_agents"] = "many";
    CHECK_THROWS_AS(config_from_kv(bad), std::invalid_argument);
}

TEST_CASE("make_workload: shape, alternation, determinism") {
    World w(small_config());
    CHECK(w.make_workload().empty());  // no corpus yet
    w.build();

    auto wl = w.make_workload();
    REQUIRE(wl.size() == 12);
    for (std::size_t qi = 0; qi < wl.size(); ++qi) {
        const WorkloadQuery& wq = wl[qi];
        CHECK(wq.querier >= 1);
        CHECK(wq.querier <= 24);
        CHECK(!wq.q.terms.empty());
        CHECK(wq.q.st_ref.has_value() == (qi % 2 == 1));
        CHECK(wq.q.fanout == w.config().agent.fanout);
        CHECK(wq.q.ttl == w.config().agent.ttl);
        if (wq.q.st_ref) {
            BoundingBox b = mbb_of(wq.q.st_ref->geometry);
            CHECK(b.min.x >= 0.0);
            CHECK(b.max.x <= 1.0);
            CHECK(b.min.x < b.max.x);
        }
    }

    auto again = w.make_workload();
    REQUIRE(again.size() == wl.size());
    for (std::size_t i = 0; i < wl.size(); ++i) {
        CHECK(again[i].querier == wl[i].querier);
        CHECK(again[i].q.terms == wl[i].q.terms);
        CHECK(again[i].q.st_ref == wl[i].q.st_ref);
    }
}

TEST_CASE("run_all completes the workload and logs consistent outcomes") {
    World w(small_config());
    w.run_all();

    const auto& outs = w.outcomes();
    REQUIRE(outs.size() == 12);
    for (std::size_t qi = 0; qi < outs.size(); ++qi) {
        const QueryOutcome& o = outs[qi];
        CHECK(o.fallback_used == (qi % 2 == 0));
        CHECK(o.t_issued <= o.t_phase1);
        CHECK(o.t_phase1 <= o.t_done);
        CHECK(o.asked.size() <= o.query.fanout);
        if (o.fallback_used) {
            const Point& loc = w.agent(o.querier).location();
            double r = w.config().agent.vicinity_r;
            CHECK(o.effective_box.min.x == loc.x - r);
            CHECK(o.effective_box.max.y == loc.y + r);
            CHECK(o.effective_time == TimeInterval{0.0, 1.0});
        }
    }

    // nothing was deleted, so the overlay holds exactly what was published
    CHECK(w.stored_flags().size() == w.flags_published());
}

TEST_CASE("metrics_jsonl: stable bytes per seed, schema stable across seeds") {
    World w1(small_config());
    w1.run_all();
    std::string m1 = w1.metrics_jsonl();

    World w2(small_config());
    w2.run_all();
    CHECK(m1 == w2.metrics_jsonl());

    World w3(small_config(43));
    w3.run_all();
    std::string m3 = w3.metrics_jsonl();
    CHECK(m1 != m3);

    auto l1 = parse_lines(m1);
    auto l3 = parse_lines(m3);
    REQUIRE(l1.size() == 13);  // one per query plus the summary
    REQUIRE(l3.size() == 13);
    for (std::size_t i = 0; i < l1.size(); ++i) {
        CHECK(keys_of(l1[i]) == keys_of(l3[i]));
    }
    for (std::size_t i = 0; i + 1 < l1.size(); ++i) {
        CHECK(l1[i]["type"] == "query");
        CHECK(l1[i]["n_results"] == l1[i]["results"].size());
    }
    const json& s = l1.back();
    CHECK(s["type"] == "summary");
    CHECK(s["agents"] == 24);
    CHECK(s["docs"] == 400);
    CHECK(s["queries"] == 12);
    CHECK(s["route_bound_violations"] == 0);
    CHECK(s["events"].get<std::uint64_t>() > 0);
    // sent and delivered agree in a quiescent run
    CHECK(s["sent"] == s["delivered"]);
}

TEST_CASE("snapshot: canonical bytes and faithful query replay") {
    World w(small_config());
    w.run_all();

    SnapshotData snap = w.snapshot();
    auto bytes = encode_snapshot(snap);
    CHECK(encode_snapshot(decode_snapshot(bytes)) == bytes);

    World replay(decode_snapshot(bytes));
    CHECK(replay.config().to_kv() == w.config().to_kv());
    CHECK(replay.stored_flags() == w.stored_flags());

    // ad-hoc queries against the restored world answer exactly like the
    // original index (timing aside)
    auto wl = w.make_workload();
    for (std::size_t qi : {1u, 3u, 6u}) {
        const QueryOutcome& a = w.run_query(wl[qi]);
        const QueryOutcome& b = replay.run_query(wl[qi]);
        check_same_query(a, b);
    }
}
