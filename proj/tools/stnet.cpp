#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "stnet/config.hpp"
#include "stnet/eval.hpp"
#include "stnet/runner.hpp"
#include "stnet/snapshot.hpp"

using namespace stnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

// --seed accepts "7" or "7,8,9"; multi-seed only makes sense for `run`.
std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw ConfigError("bad --seed value: empty element");
        std::size_t pos = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(tok, &pos);
        } catch (const std::exception&) {
            throw ConfigError("bad --seed value: " + tok);
        }
        if (pos != tok.size()) throw ConfigError("bad --seed value: " + tok);
        seeds.push_back(v);
    }
    if (seeds.empty()) throw ConfigError("bad --seed value: " + s);
    return seeds;
}

RunConfig resolve_config(const std::string& config_path, std::optional<std::uint64_t> seed) {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) {
        if (!std::filesystem::exists(config_path))
            throw ConfigError("config file not found: " + config_path);
        kv = load_kv_file(config_path);
    }
    if (seed) kv["seed"] = std::to_string(*seed);
    try {
        return config_from_kv(kv);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

int cmd_gen_corpus(const std::string& config_path, std::optional<std::uint64_t> seed,
                   const std::string& out_path) {
    RunConfig cfg = resolve_config(config_path, seed);
    write_text(out_path + ".manifest",
               render_manifest(cfg, "gen-corpus", {{"corpus", out_path}}));
    write_corpus(out_path, generate_synthetic(cfg.synth));
    std::cout << "wrote " << out_path << " (" << cfg.synth.n_docs << " docs)\n";
    return kExitOk;
}

void run_one_seed(RunConfig cfg, std::uint64_t seed, const std::string& dir) {
    cfg.seed = seed;
    cfg.synth.seed = seed;
    cfg.smallworld.seed = seed;
    std::filesystem::create_directories(dir);
    write_text(dir + "/manifest.txt",
               render_manifest(cfg, "run",
                               {{"metrics", dir + "/metrics.jsonl"},
                                {"snapshot", dir + "/snapshot.bin"}}));
    World world(cfg);
    world.run_all();
    write_text(dir + "/metrics.jsonl", world.metrics_jsonl());
    save_snapshot(dir + "/snapshot.bin", world.snapshot());
}

int cmd_run(const std::string& config_path, const std::string& seed_str, const std::string& out_dir,
            unsigned jobs) {
    RunConfig base = resolve_config(config_path, std::nullopt);
    std::vector<std::uint64_t> seeds =
        seed_str.empty() ? std::vector<std::uint64_t>{base.seed} : parse_seed_list(seed_str);
    if (jobs == 0) jobs = 1;

    std::vector<std::pair<std::uint64_t, std::string>> work;
    for (std::uint64_t s : seeds)
        work.emplace_back(s, seeds.size() == 1 ? out_dir : out_dir + "/seed" + std::to_string(s));

    std::vector<std::string> errors(work.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1)) {
            try {
                run_one_seed(base, work[i].first, work[i].second);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (jobs == 1 || work.size() == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(jobs, work.size()); ++t)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    int rc = kExitOk;
    for (std::size_t i = 0; i < work.size(); ++i) {
        if (!errors[i].empty()) {
            std::cerr << "seed " << work[i].first << ": " << errors[i] << "\n";
            rc = kExitRuntime;
        } else {
            std::cout << "seed " << work[i].first << ": metrics + snapshot in " << work[i].second
                      << "\n";
        }
    }
    return rc;
}

std::vector<std::string> split_terms(const std::string& csv) {
    std::vector<std::string> terms;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) terms.push_back(tok);
    }
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

int cmd_query(const std::string& snap_path, std::uint64_t querier, const std::string& terms_csv,
              const std::vector<double>& box, const std::vector<double>& time,
              std::optional<std::uint32_t> fanout, std::optional<std::uint32_t> ttl) {
    if (!std::filesystem::exists(snap_path)) throw ConfigError("snapshot not found: " + snap_path);
    SnapshotData snap = load_snapshot(snap_path);
    World world(snap);
    if (querier < 1 || querier > world.agents().size())
        throw ConfigError("unknown querier id: " + std::to_string(querier));

    IrQuery q;
    q.terms = split_terms(terms_csv);
    q.fanout = fanout ? *fanout : world.config().agent.fanout;
    q.ttl = ttl ? *ttl : world.config().agent.ttl;
    if (!box.empty() || !time.empty()) {
        SpatioTemporalRef ref;
        ref.geometry = box.empty() ? Geometry(BoundingBox{{0.0, 0.0}, {1.0, 1.0}})
                                   : Geometry(BoundingBox{{box[0], box[1]}, {box[2], box[3]}});
        ref.time = time.empty() ? TimeInterval{0.0, 1.0} : TimeInterval{time[0], time[1]};
        q.st_ref = ref;
    }
    if (q.terms.empty() && !q.st_ref) throw ConfigError("need --terms and/or --box/--time");

    const QueryOutcome& out = world.run_query({static_cast<AgentId>(querier), q});
    std::cout << "# querier=" << out.querier << " terms=" << terms_csv << "\n";
    if (out.fallback_used) {
        std::printf("# fallback_box= %.6f %.6f %.6f %.6f\n", out.effective_box.min.x,
                    out.effective_box.min.y, out.effective_box.max.x, out.effective_box.max.y);
    }
    std::cout << "# flags_found=" << out.flags_found << " candidates=" << out.candidates
              << " asked=" << out.asked.size() << " answers=" << out.answers << "\n";
    for (std::size_t i = 0; i < out.results.size(); ++i) {
        const ResultItem& r = out.results[i];
        std::printf("%zu\titem=%llu\towner=%llu\tscore=%.6f\n", i + 1,
                    static_cast<unsigned long long>(r.item.item_id),
                    static_cast<unsigned long long>(r.owner), r.score);
    }
    return kExitOk;
}

int cmd_eval(const std::string& metrics_path, const std::string& snap_path) {
    if (!std::filesystem::exists(snap_path)) throw ConfigError("snapshot not found: " + snap_path);
    if (!std::filesystem::exists(metrics_path))
        throw ConfigError("metrics not found: " + metrics_path);
    SnapshotData snap = load_snapshot(snap_path);
    std::ifstream in(metrics_path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    EvalSummary ev = evaluate_metrics(snap, buf.str());
    std::printf("queries            %llu\n", static_cast<unsigned long long>(ev.queries));
    std::printf("dsti_precision     %.6f\n", ev.dsti.precision());
    std::printf("dsti_recall        %.6f\n", ev.dsti.recall());
    std::printf("item_recall_mean   %.6f  (over %llu queries with nonempty oracle)\n",
                ev.item_recall_mean(), static_cast<unsigned long long>(ev.item_recall_n));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"peer-to-peer spatio-temporal index simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, seed_str, snap_path, metrics_path, terms_csv;
    unsigned jobs = 1;
    std::uint64_t querier = 0;
    std::vector<double> box, time;
    std::optional<std::uint32_t> fanout, ttl;

    auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus file");
    gen->add_option("--config", config_path, "key=value config file");
    gen->add_option("--seed", seed_str, "seed override");
    gen->add_option("--out", out_path, "output corpus path")->required();

    auto* run = app.add_subcommand("run", "run the full simulation");
    run->add_option("--config", config_path, "key=value config file");
    run->add_option("--seed", seed_str, "seed override; comma list runs one sim per seed");
    run->add_option("--out", out_path, "output directory")->required();
    run->add_option("--jobs", jobs, "parallel seed runs");

    auto* query = app.add_subcommand("query", "replay an ad-hoc query against a snapshot");
    query->add_option("--snapshot", snap_path, "snapshot file from `run`")->required();
    query->add_option("--querier", querier, "issuing agent id")->required();
    query->add_option("--terms", terms_csv, "comma-separated query terms");
    query->add_option("--box", box, "x0 y0 x1 y1")->expected(4);
    query->add_option("--time", time, "start end")->expected(2);
    query->add_option("--fanout", fanout, "phase-2 fanout");
    query->add_option("--ttl", ttl, "forwarding ttl");

    auto* eval = app.add_subcommand("eval", "oracle precision/recall for a finished run");
    eval->add_option("--metrics", metrics_path, "metrics.jsonl from `run`")->required();
    eval->add_option("--snapshot", snap_path, "snapshot file from `run`")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gen->parsed()) {
            std::optional<std::uint64_t> seed;
            if (!seed_str.empty()) seed = parse_seed_list(seed_str).front();
            return cmd_gen_corpus(config_path, seed, out_path);
        }
        if (run->parsed()) return cmd_run(config_path, seed_str, out_path, jobs);
        if (query->parsed()) return cmd_query(snap_path, querier, terms_csv, box, time, fanout, ttl);
        if (eval->parsed()) return cmd_eval(metrics_path, snap_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SimAbortError& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
