#include "stnet/simnet.hpp"

#include <charconv>

namespace stnet {

double LatencyModel::sample(RngStream& rng) const {
    if (kind == Kind::Constant) return a;
    return rng.next_in(a, b);
}

LatencyModel LatencyModel::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
    LatencyModel m;
    auto parse_num = [&](const std::string& s) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < 0.0)
            throw std::invalid_argument("bad latency value '" + s + "'");
        return v;
    };
    if (name == "constant") {
        m.kind = Kind::Constant;
        m.a = m.b = args.empty() ? 1.0 : parse_num(args);
    } else if (name == "uniform") {
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("uniform latency needs 'lo,hi'");
        m.kind = Kind::Uniform;
        m.a = parse_num(args.substr(0, comma));
        m.b = parse_num(args.substr(comma + 1));
        if (m.b < m.a) throw std::invalid_argument("uniform latency needs lo <= hi");
    } else {
        throw std::invalid_argument("unknown latency model '" + name + "'");
    }
    return m;
}

std::string LatencyModel::to_string() const {
    auto fmt = [](double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    };
    if (kind == Kind::Constant) return "constant:" + fmt(a);
    return "uniform:" + fmt(a) + "," + fmt(b);
}

std::uint64_t Metrics::total_sent() const {
    std::uint64_t n = 0;
    for (auto c : sent_by_kind) n += c;
    return n;
}

std::uint64_t Metrics::total_delivered() const {
    std::uint64_t n = 0;
    for (auto c : delivered_by_kind) n += c;
    return n;
}

SplitRecord& Metrics::split(std::uint64_t split_id) {
    auto it = split_index_.find(split_id);
    if (it == split_index_.end()) {
        it = split_index_.emplace(split_id, splits.size()).first;
        splits.push_back(SplitRecord{});
        splits.back().split_id = split_id;
    }
    return splits[it->second];
}

MergeRecord& Metrics::merge(std::uint64_t merge_id) {
    auto it = merge_index_.find(merge_id);
    if (it == merge_index_.end()) {
        it = merge_index_.emplace(merge_id, merges.size()).first;
        merges.push_back(MergeRecord{});
        merges.back().merge_id = merge_id;
    }
    return merges[it->second];
}

std::uint64_t Metrics::route_bound_violations() const {
    std::uint64_t n = 0;
    for (const auto& r : routes)
        if (!r.within_bound()) ++n;
    return n;
}

Simnet::Simnet(std::uint64_t seed, LatencyModel latency, std::uint64_t event_limit)
    : seed_(seed),
      latency_(latency),
      latency_rng_(seed, "sim.latency", 0),
      event_limit_(event_limit) {}

void Simnet::register_handler(PeerAddress addr, MessageHandler* handler) {
    handlers_[addr] = handler;
}

void Simnet::send(MessageEnvelope env) {
    if (!handlers_.count(env.dst))
        throw std::logic_error("send to unregistered address " + std::to_string(env.dst));
    env.seq = next_seq_++;
    metrics_.sent_by_kind[static_cast<std::size_t>(env.kind)]++;
    Scheduled s;
    s.deliver_at = now_ + latency_.sample(latency_rng_);
    s.seq = env.seq;
    s.bytes = encode_envelope(env);
    queue_.push(std::move(s));
}

std::uint64_t Simnet::run_until_quiescent() {
    std::uint64_t processed = 0;
    while (!queue_.empty()) {
        if (metrics_.events >= event_limit_)
            throw SimAbortError("event limit " + std::to_string(event_limit_) +
                                " exceeded with " + std::to_string(queue_.size()) +
                                " messages still pending");
        Scheduled s = queue_.top();
        queue_.pop();
        now_ = s.deliver_at;
        MessageEnvelope env = decode_envelope(s.bytes);
        metrics_.delivered_by_kind[static_cast<std::size_t>(env.kind)]++;
        metrics_.events++;
        processed++;
        handlers_.at(env.dst)->handle(env, *this);
    }
    return processed;
}

}  // namespace stnet
