#include "stnet/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "stnet/rng.hpp"

namespace stnet {

Point lonlat_to_unit(double lon, double lat) {
    double x = (lon + 180.0) / 360.0;
    double y = (lat + 90.0) / 180.0;
    return Point{std::clamp(x, 0.0, kCoordMax), std::clamp(y, 0.0, kCoordMax)};
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::vector<CorpusRecord> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    std::vector<CorpusRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (fields.size() != 6) parse_fail(path, line_no, "expected 6 tab-separated fields");
        CorpusRecord r;
        try {
            r.doc_id = std::stoull(fields[0]);
            r.lon = std::stod(fields[1]);
            r.lat = std::stod(fields[2]);
            r.t_start = std::stoll(fields[3]);
            r.t_end = std::stoll(fields[4]);
        } catch (const std::exception&) {
            parse_fail(path, line_no, "malformed numeric field");
        }
        if (r.lon < -180.0 || r.lon > 180.0)
            parse_fail(path, line_no, "lon out of range [-180,180]");
        if (r.lat < -90.0 || r.lat > 90.0) parse_fail(path, line_no, "lat out of range [-90,90]");
        if (r.t_start > r.t_end) parse_fail(path, line_no, "t_start > t_end");
        std::istringstream ts(fields[5]);
        std::string tok;
        while (ts >> tok) r.terms.push_back(tok);
        if (r.terms.empty()) parse_fail(path, line_no, "empty term list");
        std::sort(r.terms.begin(), r.terms.end());
        r.terms.erase(std::unique(r.terms.begin(), r.terms.end()), r.terms.end());
        out.push_back(std::move(r));
    }
    return out;
}

void write_corpus(const std::string& path, const std::vector<CorpusRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    char buf[64];
    for (const CorpusRecord& r : records) {
        out << r.doc_id << '\t';
        std::snprintf(buf, sizeof buf, "%.17g", r.lon);
        out << buf << '\t';
        std::snprintf(buf, sizeof buf, "%.17g", r.lat);
        out << buf << '\t' << r.t_start << '\t' << r.t_end << '\t';
        for (std::size_t i = 0; i < r.terms.size(); ++i) {
            if (i) out << ' ';
            out << r.terms[i];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

struct ZipfTable {
    std::vector<double> cum;  // cumulative 1/r weights
    explicit ZipfTable(std::uint32_t vocab) {
        cum.resize(vocab);
        double acc = 0.0;
        for (std::uint32_t r = 0; r < vocab; ++r) {
            acc += 1.0 / static_cast<double>(r + 1);
            cum[r] = acc;
        }
    }
    std::uint32_t draw(RngStream& rng) const {
        double u = rng.next_unit() * cum.back();
        auto it = std::upper_bound(cum.begin(), cum.end(), u);
        if (it == cum.end()) --it;
        return static_cast<std::uint32_t>(it - cum.begin());
    }
};

CorpusRecord synth_doc(std::uint64_t i, const SyntheticConfig& cfg,
                       const std::vector<Point>& hotspots, const ZipfTable& zipf) {
    RngStream rng(cfg.seed, "corpus.doc", i);
    const Point& c = hotspots[i % cfg.n_hotspots];
    double x = std::clamp(c.x + rng.next_gaussian() * cfg.hotspot_sigma, 0.0, kCoordMax);
    double y = std::clamp(c.y + rng.next_gaussian() * cfg.hotspot_sigma, 0.0, kCoordMax);
    CorpusRecord r;
    r.doc_id = i;
    r.lon = x * 360.0 - 180.0;
    r.lat = y * 180.0 - 90.0;
    r.t_start = static_cast<std::int64_t>(rng.next_unit() * 1.0e9);
    r.t_end = r.t_start + static_cast<std::int64_t>(rng.next_unit() * 1.0e7);
    std::set<std::uint32_t> ranks;
    for (std::uint32_t k = 0; k < cfg.terms_per_doc; ++k) ranks.insert(zipf.draw(rng));
    for (std::uint32_t rank : ranks) r.terms.push_back("w" + std::to_string(rank));
    std::sort(r.terms.begin(), r.terms.end());
    return r;
}

std::vector<Point> synth_hotspots(const SyntheticConfig& cfg) {
    std::vector<Point> out(cfg.n_hotspots);
    for (std::uint32_t h = 0; h < cfg.n_hotspots; ++h) {
        RngStream rng(cfg.seed, "corpus.hotspot", h);
        out[h] = Point{rng.next_unit(), rng.next_unit()};
    }
    return out;
}

void check_synth_cfg(const SyntheticConfig& cfg) {
    if (cfg.n_docs == 0 || cfg.n_hotspots == 0 || cfg.vocab_size == 0 ||
        cfg.terms_per_doc == 0 || cfg.hotspot_sigma < 0.0) {
        throw std::invalid_argument("generate_synthetic: all parameters must be positive");
    }
}

}  // namespace

std::vector<CorpusRecord> generate_synthetic(const SyntheticConfig& cfg) {
    check_synth_cfg(cfg);
    auto hotspots = synth_hotspots(cfg);
    ZipfTable zipf(cfg.vocab_size);
    std::vector<CorpusRecord> out(cfg.n_docs);
#pragma omp parallel for schedule(dynamic, 256)
    for (std::uint64_t i = 0; i < cfg.n_docs; ++i) {
        out[i] = synth_doc(i, cfg, hotspots, zipf);
    }
    return out;
}

std::vector<CorpusRecord> generate_synthetic_serial(const SyntheticConfig& cfg) {
    check_synth_cfg(cfg);
    auto hotspots = synth_hotspots(cfg);
    ZipfTable zipf(cfg.vocab_size);
    std::vector<CorpusRecord> out(cfg.n_docs);
    for (std::uint64_t i = 0; i < cfg.n_docs; ++i) {
        out[i] = synth_doc(i, cfg, hotspots, zipf);
    }
    return out;
}

std::vector<InfoItem> records_to_items(const std::vector<CorpusRecord>& records) {
    std::vector<InfoItem> out;
    out.reserve(records.size());
    if (records.empty()) return out;
    std::int64_t tmin = records.front().t_start;
    std::int64_t tmax = records.front().t_end;
    for (const auto& r : records) {
        tmin = std::min(tmin, r.t_start);
        tmax = std::max(tmax, r.t_end);
    }
    double span = static_cast<double>(tmax - tmin);
    for (const auto& r : records) {
        InfoItem it;
        it.item_id = r.doc_id;
        it.st_ref.geometry = lonlat_to_unit(r.lon, r.lat);
        if (span > 0.0) {
            it.st_ref.time.start = static_cast<double>(r.t_start - tmin) / span;
            it.st_ref.time.end = static_cast<double>(r.t_end - tmin) / span;
        } else {
            it.st_ref.time = TimeInterval{0.5, 0.5};
        }
        it.terms = r.terms;
        out.push_back(std::move(it));
    }
    return out;
}

Assignment assign_to_agents(const std::vector<CorpusRecord>& records, std::uint32_t n_agents,
                            double replication, std::uint64_t seed) {
    if (n_agents < 1) throw std::invalid_argument("assign_to_agents: need at least one agent");
    if (replication < 1.0 || replication > static_cast<double>(n_agents)) {
        throw std::invalid_argument("assign_to_agents: replication must be in [1, n_agents]");
    }
    Assignment out;
    for (std::uint32_t a = 1; a <= n_agents; ++a) out.items_of[a];
    std::uint32_t base = static_cast<std::uint32_t>(replication);
    double frac = replication - base;
    for (const CorpusRecord& r : records) {
        RngStream rng(seed, "corpus.assign", r.doc_id);
        std::uint32_t copies = base + (rng.next_unit() < frac ? 1 : 0);
        copies = std::min(copies, n_agents);
        std::set<std::uint32_t> chosen;
        while (chosen.size() < copies) {
            chosen.insert(1 + static_cast<std::uint32_t>(rng.next_below(n_agents)));
        }
        for (std::uint32_t a : chosen) out.items_of[a].push_back(r.doc_id);
    }
    std::map<std::uint64_t, Point> doc_point;
    for (const CorpusRecord& r : records) doc_point[r.doc_id] = lonlat_to_unit(r.lon, r.lat);
    for (auto& [agent, docs] : out.items_of) {
        std::sort(docs.begin(), docs.end());
        RngStream rng(seed, "corpus.agentloc", agent);
        if (docs.empty()) {
            out.locations[agent] = Point{rng.next_unit() * kCoordMax, rng.next_unit() * kCoordMax};
            continue;
        }
        // centroid of a Bernoulli(1/2) subset; all docs when the draw is empty
        double sx = 0.0, sy = 0.0;
        std::size_t n = 0;
        for (std::uint64_t d : docs) {
            if (rng.next_unit() < 0.5) {
                sx += doc_point[d].x;
                sy += doc_point[d].y;
                ++n;
            }
        }
        if (n == 0) {
            for (std::uint64_t d : docs) {
                sx += doc_point[d].x;
                sy += doc_point[d].y;
            }
            n = docs.size();
        }
        out.locations[agent] = Point{std::clamp(sx / n, 0.0, kCoordMax),
                                     std::clamp(sy / n, 0.0, kCoordMax)};
    }
    return out;
}

}  // namespace stnet
