#include <doctest.h>

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "stnet/agents.hpp"
#include "stnet/flags.hpp"
#include "stnet/rng.hpp"
#include "stnet/simnet.hpp"

using namespace stnet;

namespace {

const TimeInterval kAllTime{0.0, 1.0};

Flag expertise(AgentId owner, std::uint32_t counter, std::vector<std::string> terms,
               BoundingBox box, TimeInterval t = kAllTime, std::uint32_t items = 1) {
    ExpertiseFlag f;
    f.owner = owner;
    f.summary = TopicSummary::from_terms(std::move(terms));
    f.st_ref = SpatioTemporalRef{box, t};
    f.item_count = items;
    return Flag{make_flag_id(owner, counter), f};
}

Flag expert_link(AgentId owner, AgentId target, double weight, Point at,
                 std::uint32_t counter = 0x80000000u) {
    ExpertLinkFlag f;
    f.owner = owner;
    f.target = target;
    f.weight = weight;
    f.st_ref = SpatioTemporalRef{BoundingBox{at, at}, kAllTime};
    return Flag{make_flag_id(owner, counter), f};
}

InfoItem item(std::uint64_t id, std::vector<std::string> terms, Point at,
              TimeInterval t = kAllTime) {
    InfoItem it;
    it.item_id = id;
    it.st_ref = SpatioTemporalRef{BoundingBox{at, at}, t};
    it.terms = std::move(terms);
    return it;
}

// Agents sharing one overlay root; each workload step runs to quiescence so
// tests observe settled outcomes only.
struct AgentWorld {
    OverlayConfig cfg;
    AgentParams params;
    Simnet net{777, {}, 200000};
    std::map<AgentId, std::unique_ptr<SimAgent>> agents;

    SimAgent& add(AgentId id, Point loc) {
        auto a = std::make_unique<SimAgent>(id, loc, cfg, params, 1);
        net.register_handler(id, a.get());
        SimAgent& ref = *a;
        agents[id] = std::move(a);
        return ref;
    }

    void join_all() {
        agents.begin()->second->peer().adopt_root();
        for (auto& [id, a] : agents) {
            a->join(net);
            net.run_until_quiescent();
            REQUIRE(a->joined());
        }
    }

    void publish(SimAgent& a, const Flag& f) {
        a.publish_flag(f, net);
        net.run_until_quiescent();
    }

    QueryOutcome query(AgentId who, const IrQuery& q) {
        agents.at(who)->issue_query(q, net);
        net.run_until_quiescent();
        REQUIRE(agents.at(who)->last_outcome().has_value());
        return *agents.at(who)->last_outcome();
    }
};

}  // namespace

TEST_CASE("jaccard over sorted token sets") {
    std::vector<std::string> ab{"a", "b"}, bc{"b", "c"}, none{};
    CHECK(jaccard(ab, bc) == doctest::Approx(1.0 / 3.0));
    CHECK(jaccard(ab, ab) == 1.0);
    CHECK(jaccard(ab, {"c", "d"}) == 0.0);
    CHECK(jaccard(none, none) == 0.0);
    CHECK(jaccard(ab, none) == 0.0);
}

TEST_CASE("spatial_factor: ratio, disjointness, membership") {
    BoundingBox q{{0.25, 0.25}, {0.75, 0.75}};
    CHECK(spatial_factor({{0.0, 0.0}, {0.5, 0.5}}, q) == doctest::Approx(0.0625 / 0.25));
    CHECK(spatial_factor({{0.0, 0.0}, {0.2, 0.2}}, q) == 0.0);
    // degenerate flag inside the query box counts as membership
    CHECK(spatial_factor({{0.5, 0.5}, {0.5, 0.5}}, q) == 1.0);
    CHECK(spatial_factor({{0.1, 0.1}, {0.1, 0.1}}, q) == 0.0);
    // point query against a real flag box: membership again
    BoundingBox pt{{0.3, 0.3}, {0.3, 0.3}};
    CHECK(spatial_factor({{0.0, 0.0}, {0.5, 0.5}}, pt) == 1.0);
    CHECK(spatial_factor({{0.4, 0.4}, {0.5, 0.5}}, pt) == 0.0);
}

TEST_CASE("score_candidate: J * S * T with neutral absent factors") {
    BoundingBox box{{0.2, 0.2}, {0.6, 0.6}};
    Flag f = expertise(7, 1, {"b", "c"}, box);
    const auto& ef = std::get<ExpertiseFlag>(f.body);

    IrQuery q;
    q.terms = {"a", "b"};
    q.st_ref = SpatioTemporalRef{box, kAllTime};
    CHECK(score_candidate(ef, q) == doctest::Approx(1.0 / 3.0));

    q.st_ref = SpatioTemporalRef{BoundingBox{{0.7, 0.7}, {0.9, 0.9}}, kAllTime};
    CHECK(score_candidate(ef, q) == 0.0);

    q.terms.clear();
    q.st_ref = SpatioTemporalRef{box, kAllTime};
    CHECK(score_candidate(ef, q) == 1.0);

    // no st_ref: S and T neutral, term factor alone
    IrQuery terms_only;
    terms_only.terms = {"a", "b"};
    CHECK(score_candidate(ef, terms_only) == doctest::Approx(1.0 / 3.0));

    // partial time overlap scales the score
    Flag half = expertise(7, 2, {"a", "b"}, box, {0.0, 0.5});
    IrQuery qt;
    qt.terms = {"a", "b"};
    qt.st_ref = SpatioTemporalRef{box, kAllTime};
    CHECK(score_candidate(std::get<ExpertiseFlag>(half.body), qt) == doctest::Approx(0.5));
}

TEST_CASE("score_link ignores terms; score_item treats the item as a 1-item flag") {
    Flag l = expert_link(3, 9, 0.8, {0.5, 0.5});
    IrQuery q;
    q.terms = {"zzz"};
    q.st_ref = SpatioTemporalRef{BoundingBox{{0.4, 0.4}, {0.6, 0.6}}, kAllTime};
    // weight is applied by rank_candidates, not here
    CHECK(score_link(std::get<ExpertLinkFlag>(l.body), q) == 1.0);

    InfoItem it = item(1, {"a", "b"}, {0.5, 0.5}, {0.0, 0.25});
    IrQuery qi;
    qi.terms = {"a"};
    qi.st_ref = SpatioTemporalRef{BoundingBox{{0.4, 0.4}, {0.6, 0.6}}, {0.0, 0.5}};
    CHECK(score_item(it, qi) == doctest::Approx(0.5 * 1.0 * 0.5));
}

TEST_CASE("rank_candidates: discounting, drops, and tie order") {
    BoundingBox box{{0.2, 0.2}, {0.6, 0.6}};
    IrQuery q;
    q.terms = {"a"};
    q.st_ref = SpatioTemporalRef{box, kAllTime};

    std::vector<Flag> flags;
    flags.push_back(expertise(40, 1, {"a"}, box));         // score 1.0
    flags.push_back(expertise(10, 1, {"a"}, box));         // score 1.0, earlier id
    flags.push_back(expertise(30, 1, {"z"}, box));         // J = 0, dropped
    flags.push_back(expert_link(10, 20, 0.8, {0.3, 0.3}));  // 0.8 * 0.5 = 0.4 for target 20
    flags.push_back(expert_link(10, 10, 1.0, {0.3, 0.3}, 0x80000001u));  // proposes 10 at 0.5

    auto ranked = rank_candidates(flags, q);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].agent == 10);
    CHECK(ranked[0].score == 1.0);
    CHECK(ranked[1].agent == 40);
    CHECK(ranked[2].agent == 10);  // its own link flag still proposes it, discounted
    CHECK(ranked[2].score == doctest::Approx(0.5));
    CHECK(ranked[3].agent == 20);
    CHECK(ranked[3].score == doctest::Approx(0.4));

    // same agent, same score, two source flags: flag id breaks the tie
    std::vector<Flag> dup{expertise(5, 2, {"a"}, box), expertise(5, 1, {"a"}, box)};
    auto r2 = rank_candidates(dup, q);
    REQUIRE(r2.size() == 2);
    CHECK(r2[0].source_flag == make_flag_id(5, 1));
    CHECK(r2[1].source_flag == make_flag_id(5, 2));
}

TEST_CASE("rank_candidates: more term overlap never demotes a candidate") {
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        RngStream rng(6060, "test.rank.mono", trial);
        const std::vector<std::string> pool{"a", "b", "c", "d", "e", "f"};
        IrQuery q;
        q.terms = {"a", "b", "c"};

        std::vector<Flag> flags;
        for (AgentId id = 1; id <= 8; ++id) {
            std::vector<std::string> terms;
            for (const auto& t : pool)
                if (rng.next_unit() < 0.5) terms.push_back(t);
            if (terms.empty()) terms.push_back("d");
            flags.push_back(expertise(id, 1, terms, {{0.1, 0.1}, {0.9, 0.9}}));
        }
        auto pos_of = [](const std::vector<RankedCandidate>& r, AgentId id) {
            for (std::size_t i = 0; i < r.size(); ++i)
                if (r[i].agent == id) return static_cast<std::ptrdiff_t>(i);
            return static_cast<std::ptrdiff_t>(r.size());  // dropped ranks last
        };

        auto before = rank_candidates(flags, q);
        // grow one flag's overlap by one query term it lacks
        std::size_t pick = rng.next_below(flags.size());
        auto& ef = std::get<ExpertiseFlag>(flags[pick].body);
        std::string added;
        for (const auto& t : q.terms) {
            auto& ts = ef.summary.terms;
            if (std::find(ts.begin(), ts.end(), t) == ts.end()) {
                ts.push_back(t);
                std::sort(ts.begin(), ts.end());
                added = t;
                break;
            }
        }
        if (added.empty()) continue;  // already had every query term
        auto after = rank_candidates(flags, q);
        CHECK(pos_of(after, ef.owner) <= pos_of(before, ef.owner));
    }
}

TEST_CASE("build_profiles: spec fixtures") {
    AgentId owner = 11;

    auto one = build_profiles(owner, {item(5, {"a"}, {0.4, 0.4})}, 0.05, 2);
    REQUIRE(one.size() == 1);
    CHECK(one[0].member_items == std::vector<std::uint64_t>{5});
    CHECK(one[0].flag.st_ref.geometry == Geometry{BoundingBox{{0.4, 0.4}, {0.4, 0.4}}});
    CHECK(one[0].flag.item_count == 1);

    std::vector<InfoItem> items{item(1, {"a", "b"}, {0.10, 0.10}, {0.2, 0.3}),
                                item(2, {"b", "c"}, {0.11, 0.10}, {0.6, 0.9}),
                                item(3, {"d"}, {0.90, 0.90})};
    auto profs = build_profiles(owner, items, 0.05, 2);
    REQUIRE(profs.size() == 2);
    CHECK(profs[0].member_items == std::vector<std::uint64_t>{1, 2});
    CHECK(profs[0].flag.st_ref.geometry ==
          Geometry{BoundingBox{{0.10, 0.10}, {0.11, 0.10}}});
    CHECK(profs[0].flag.st_ref.time == TimeInterval{0.2, 0.9});
    CHECK(profs[0].flag.summary.terms == std::vector<std::string>{"a", "b", "c"});
    CHECK(profs[0].flag.item_count == 2);
    CHECK(profs[0].flag.owner == owner);
    CHECK(profs[1].member_items == std::vector<std::uint64_t>{3});
}

TEST_CASE("build_profiles: summary keeps the top-K terms by frequency") {
    // 20 distinct terms; t00..t03 appear twice, the rest once. The summary
    // must hold the 16 most frequent with lexicographic tie-breaks, i.e.
    // everything except the last four singletons t16..t19.
    std::vector<InfoItem> items;
    std::vector<std::string> all;
    for (int i = 0; i < 20; ++i) {
        std::string t = "t" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        all.push_back(t);
        items.push_back(item(100 + i, {t}, {0.5, 0.5}));
    }
    for (int i = 0; i < 4; ++i) items.push_back(item(200 + i, {all[i]}, {0.5, 0.5}));

    auto profs = build_profiles(3, items, 0.05, 2);
    REQUIRE(profs.size() == 1);
    std::vector<std::string> want(all.begin(), all.begin() + 16);
    CHECK(profs[0].flag.summary.terms == want);
}

TEST_CASE("build_profiles: partition invariant on random inputs") {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        RngStream rng(8181, "test.profiles", trial);
        std::size_t n = 1 + rng.next_below(120);
        std::vector<InfoItem> items;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> terms{"w" + std::to_string(rng.next_below(30))};
            items.push_back(item(1000 + i, terms, {rng.next_unit(), rng.next_unit()},
                                 {0.2, 0.8}));
        }
        auto profs = build_profiles(9, items, 0.03, 3);

        std::set<std::uint64_t> seen;
        std::uint64_t total = 0;
        for (const auto& p : profs) {
            CHECK(p.flag.item_count == p.member_items.size());
            total += p.flag.item_count;
            for (auto id : p.member_items) CHECK(seen.insert(id).second);
            // the flag box is exactly the hull of its members
            BoundingBox hull = mbb_of(items[p.member_items.front() - 1000].st_ref.geometry);
            for (auto id : p.member_items) {
                BoundingBox b = mbb_of(items[id - 1000].st_ref.geometry);
                hull.min.x = std::min(hull.min.x, b.min.x);
                hull.min.y = std::min(hull.min.y, b.min.y);
                hull.max.x = std::max(hull.max.x, b.max.x);
                hull.max.y = std::max(hull.max.y, b.max.y);
            }
            CHECK(p.flag.st_ref.geometry == Geometry{hull});
            CHECK(valid_flag(Flag{make_flag_id(9, 1), p.flag}));
        }
        CHECK(total == n);
    }
}

TEST_CASE("issue_query: unique expertise draws the only matching agent") {
    AgentWorld w;
    w.add(1, {0.7, 0.7});
    SimAgent& holder = w.add(2, {0.15, 0.15});
    SimAgent& other = w.add(3, {0.75, 0.75});
    w.join_all();

    holder.set_items({item(100, {"alpha"}, {0.20, 0.20}),
                      item(101, {"common"}, {0.21, 0.20})});
    holder.set_profiles(build_profiles(2, holder.items(), w.params.eps, w.params.min_pts));
    other.set_items({item(200, {"beta"}, {0.25, 0.25})});
    other.set_profiles(build_profiles(3, other.items(), w.params.eps, w.params.min_pts));
    REQUIRE(holder.profiles().size() == 1);
    holder.publish_all(w.net);
    other.publish_all(w.net);
    w.net.run_until_quiescent();

    IrQuery q;
    q.terms = {"alpha"};
    q.st_ref = SpatioTemporalRef{BoundingBox{{0.1, 0.1}, {0.3, 0.3}}, kAllTime};
    auto out = w.query(1, q);

    CHECK(!out.fallback_used);
    CHECK(out.effective_box == BoundingBox{{0.1, 0.1}, {0.3, 0.3}});
    CHECK(out.flags_found == 2);  // both expertise flags are in the box
    CHECK(out.candidates == 1);   // beta-holder scores zero and is dropped
    CHECK(out.asked == std::vector<AgentId>{2});
    CHECK(out.answers == 1);
    CHECK(out.forwards == 0);
    REQUIRE(out.results.size() == 1);  // the "common" item fails the term match
    CHECK(out.results[0].item.item_id == 100);
    CHECK(out.results[0].owner == 2);
    CHECK(out.results[0].score == doctest::Approx(1.0));
}

TEST_CASE("issue_query: empty terms make every flag in the box a candidate") {
    AgentWorld w;
    w.add(1, {0.7, 0.7});
    SimAgent& a2 = w.add(2, {0.15, 0.15});
    SimAgent& a3 = w.add(3, {0.75, 0.75});
    w.join_all();
    a2.set_items({item(100, {"alpha"}, {0.20, 0.20}), item(101, {"common"}, {0.21, 0.20})});
    a2.set_profiles(build_profiles(2, a2.items(), w.params.eps, w.params.min_pts));
    a3.set_items({item(200, {"beta"}, {0.25, 0.25})});
    a3.set_profiles(build_profiles(3, a3.items(), w.params.eps, w.params.min_pts));
    a2.publish_all(w.net);
    a3.publish_all(w.net);
    w.net.run_until_quiescent();

    IrQuery q;
    q.st_ref = SpatioTemporalRef{BoundingBox{{0.1, 0.1}, {0.3, 0.3}}, kAllTime};
    auto out = w.query(1, q);
    CHECK(out.candidates == 2);
    CHECK(out.asked == std::vector<AgentId>{2, 3});
    REQUIRE(out.results.size() == 3);  // term factor neutral: all items in the box
}

TEST_CASE("issue_query: missing st_ref falls back to the vicinity box") {
    AgentWorld w;
    w.add(1, {0.30, 0.30});
    SimAgent& near = w.add(2, {0.9, 0.1});
    SimAgent& far = w.add(3, {0.9, 0.2});
    w.join_all();
    // flag placement follows the flag geometry, not the owner's location
    w.publish(near, expertise(2, 1, {"x"}, {{0.26, 0.26}, {0.27, 0.27}}));
    w.publish(far, expertise(3, 1, {"x"}, {{0.60, 0.60}, {0.61, 0.61}}));
    near.set_items({item(300, {"x"}, {0.9, 0.9}, {0.0, 0.1})});

    IrQuery q;
    q.terms = {"x"};
    auto out = w.query(1, q);

    CHECK(out.fallback_used);
    CHECK(out.effective_box == BoundingBox{{0.25, 0.25}, {0.35, 0.35}});
    CHECK(out.effective_time == TimeInterval{0.0, 1.0});
    CHECK(out.asked == std::vector<AgentId>{2});  // agent 3's flag is out of reach
    // Ranking and item matching score the original query: with no st_ref the
    // spatial and temporal factors are neutral, so the faraway item comes back.
    REQUIRE(out.results.size() == 1);
    CHECK(out.results[0].item.item_id == 300);
    CHECK(out.results[0].score == doctest::Approx(1.0));
}

TEST_CASE("issue_query: fanout 0 stops after phase 1") {
    AgentWorld w;
    w.add(1, {0.7, 0.7});
    SimAgent& holder = w.add(2, {0.15, 0.15});
    w.join_all();
    w.publish(holder, expertise(2, 1, {"alpha"}, {{0.2, 0.2}, {0.25, 0.25}}));
    holder.set_items({item(100, {"alpha"}, {0.22, 0.22})});

    IrQuery q;
    q.terms = {"alpha"};
    q.st_ref = SpatioTemporalRef{BoundingBox{{0.1, 0.1}, {0.3, 0.3}}, kAllTime};
    q.fanout = 0;
    auto out = w.query(1, q);
    CHECK(out.candidates == 1);
    CHECK(out.asked.empty());
    CHECK(out.answers == 0);
    CHECK(out.results.empty());
    CHECK(out.t_done >= out.t_phase1);
}

TEST_CASE("issue_query: ask chain A -> B -> C over unpublished links") {
    const BoundingBox R{{0.4, 0.4}, {0.8, 0.8}};
    AgentWorld w;
    w.add(1, {0.2, 0.2});
    SimAgent& a = w.add(2, {0.1, 0.1});
    SimAgent& b = w.add(3, {0.5, 0.5});
    SimAgent& c = w.add(4, {0.6, 0.6});
    w.join_all();

    // Only A is visible in the index; the B and C hops exist purely in the
    // agents' private link lists.
    w.publish(a, expertise(2, 1, {"t"}, R));
    a.set_link_flags({expert_link(2, 3, 1.0, {0.5, 0.5})});
    b.set_link_flags({expert_link(3, 4, 1.0, {0.6, 0.6})});
    c.set_items({item(500, {"t"}, {0.6, 0.6}, {0.50, 0.55})});

    IrQuery q;
    q.terms = {"t"};
    q.st_ref = SpatioTemporalRef{R, {0.5, 0.6}};
    auto out = w.query(1, q);

    CHECK(out.asked == std::vector<AgentId>{2});
    CHECK(out.answers == 3);  // A and B answer empty, C answers the item
    CHECK(out.duplicate_answers == 0);
    CHECK(out.forwards == 2);
    REQUIRE(out.results.size() == 1);
    CHECK(out.results[0].item.item_id == 500);
    CHECK(out.results[0].owner == 4);
    CHECK(out.results[0].score == doctest::Approx(0.5));  // half the query window
}

TEST_CASE("issue_query: duplicate suppression and max-score dedupe") {
    const BoundingBox R{{0.4, 0.4}, {0.8, 0.8}};
    AgentWorld w;
    w.add(1, {0.2, 0.2});
    SimAgent& a2 = w.add(2, {0.45, 0.45});
    SimAgent& a3 = w.add(3, {0.55, 0.55});
    SimAgent& hub = w.add(4, {0.6, 0.6});
    w.join_all();

    w.publish(a2, expertise(2, 1, {"t"}, R));
    w.publish(a3, expertise(3, 1, {"t"}, R));
    // both asked agents privately point at the same hub
    a2.set_link_flags({expert_link(2, 4, 1.0, {0.6, 0.6})});
    a3.set_link_flags({expert_link(3, 4, 1.0, {0.6, 0.6})});
    // item 500 exists twice: the hub's copy has the better time overlap
    a2.set_items({item(500, {"t"}, {0.45, 0.45}, {0.50, 0.55})});
    a3.set_items({item(600, {"t"}, {0.55, 0.55}, {0.5, 0.6})});
    hub.set_items({item(500, {"t"}, {0.6, 0.6}, {0.5, 0.6})});

    IrQuery q;
    q.terms = {"t"};
    q.st_ref = SpatioTemporalRef{R, {0.5, 0.6}};
    auto out = w.query(1, q);

    CHECK(out.asked == std::vector<AgentId>{2, 3});
    CHECK(out.answers == 3);
    CHECK(out.duplicate_answers == 1);  // hub hit twice, answers once
    CHECK(out.forwards == 2);
    REQUIRE(out.results.size() == 2);
    CHECK(out.results[0].item.item_id == 500);
    CHECK(out.results[0].owner == 4);  // the higher-scoring copy wins
    CHECK(out.results[0].score == doctest::Approx(1.0));
    CHECK(out.results[1].item.item_id == 600);
    CHECK(out.results[1].owner == 3);
}
