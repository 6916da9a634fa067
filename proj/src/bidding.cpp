#include "tracebench/bidding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace tracebench::bidding {

const char* to_string(BidVariant v) {
    switch (v) {
        case BidVariant::default_: return "default";
        case BidVariant::tight_budget: return "tight_budget";
        case BidVariant::high_competition: return "high_competition";
        case BidVariant::volatile_quality: return "volatile_quality";
    }
    return "?";
}

std::optional<BidVariant> parse_bid_variant(std::string_view name) {
    for (auto v : {BidVariant::default_, BidVariant::tight_budget, BidVariant::high_competition,
                   BidVariant::volatile_quality}) {
        if (name == to_string(v)) return v;
    }
    return std::nullopt;
}

void BidConfig::validate() const {
    if (horizon < 1) throw ConfigError("bidding.horizon must be >= 1");
    if (!(initial_budget > 0.0)) throw ConfigError("bidding.initial_budget must be > 0");
    if (!(tight_budget_value > 0.0)) throw ConfigError("bidding.tight_budget_value must be > 0");
    if (bid_grid.size() < 2) throw ConfigError("bidding.bid_grid needs >= 2 entries");
    for (std::size_t i = 1; i < bid_grid.size(); ++i) {
        if (!(bid_grid[i] > bid_grid[i - 1]))
            throw ConfigError("bidding.bid_grid must be strictly increasing");
    }
}

int BidConfig::bid_index(double bid) const {
    for (int i = 0; i < grid_size(); ++i) {
        if (std::abs(bid_grid[i] - bid) < 1e-9) return i;
    }
    return -1;
}

double BidConfig::encode_bid(double bid) const {
    if (bid == kPadToken) return kPadToken;
    double lo = bid_grid.front();
    double hi = bid_grid.back();
    return (bid - lo) / (hi - lo);
}

namespace {

double draw_quality(const BidConfig& cfg, Rng& rng) {
    if (cfg.variant == BidVariant::volatile_quality)
        return rng.beta(cfg.volatile_quality_alpha, cfg.volatile_quality_beta);
    return rng.beta(cfg.quality_alpha, cfg.quality_beta);
}

double draw_competition(const BidConfig& cfg, Rng& rng) {
    if (cfg.variant == BidVariant::high_competition)
        return rng.beta(cfg.high_comp_alpha, cfg.high_comp_beta);
    return rng.beta(cfg.comp_alpha, cfg.comp_beta);
}

} // namespace

BidState init_bid_episode(const BidConfig& cfg, Rng& rng) {
    cfg.validate();
    BidState s;
    s.t = 0;
    s.budget = cfg.budget0();
    s.u = draw_quality(cfg, rng);
    s.c = draw_competition(cfg, rng);
    s.a_prev = kPadToken;
    return s;
}

double win_probability(double bid, double c, const BidConfig& cfg) {
    double x = cfg.win_slope * (bid - (cfg.win_base + cfg.win_comp_weight * c));
    return 1.0 / (1.0 + std::exp(-x));
}

std::pair<BidState, BidStepRecord> bid_step(const BidState& state, double bid,
                                            const BidConfig& cfg, Rng& rng) {
    if (cfg.bid_index(bid) < 0) throw TraceError("bid_step: bid is off the grid");
    if (state.t >= cfg.horizon) throw TraceError("bid_step: episode already finished");

    // Affordability: largest grid value <= min(requested, remaining budget).
    double effective = kPadToken;
    for (int i = cfg.grid_size() - 1; i >= 0; --i) {
        if (cfg.bid_grid[i] <= bid + 1e-12 && cfg.bid_grid[i] <= state.budget + 1e-12) {
            effective = cfg.bid_grid[i];
            break;
        }
    }

    BidStepRecord rec;
    rec.budget_before = state.budget;
    rec.u = state.u;
    rec.c = state.c;
    rec.bid = effective;

    BidState next = state;
    if (effective != kPadToken) {
        const double p_win = win_probability(effective, state.c, cfg);
        rec.win = rng.uniform() < p_win;
        if (rec.win) {
            rec.spend = effective;
            rec.value = state.u;
            next.budget = std::max(0.0, state.budget - effective);
        }
    } else {
        rng.uniform(); // keep the stream aligned whether or not a bid was placed
    }
    next.t = state.t + 1;
    next.a_prev = effective;
    next.u = draw_quality(cfg, rng);
    next.c = draw_competition(cfg, rng);
    return {next, rec};
}

double expert_policy(const BidState& state, const BidConfig& cfg) {
    const double b0 = cfg.budget0();
    const double cum_spend = b0 - state.budget;
    const double d = cum_spend / b0 - static_cast<double>(state.t) / cfg.horizon;
    const int mid = cfg.grid_size() / 2;
    const long shift = std::lround(cfg.expert_quality_gain * (state.u - 0.5) -
                                   cfg.expert_pace_gain * d + cfg.expert_tilt);
    const int idx = std::clamp(mid + static_cast<int>(shift), 0, cfg.grid_size() - 1);
    return cfg.bid_grid[idx];
}

double aggressive_policy(const BidState&, const BidConfig& cfg) {
    return cfg.bid_grid.back();
}

std::vector<double> partial_observation(const BidState& state, const BidConfig& cfg) {
    return {static_cast<double>(state.t) / cfg.horizon, state.u, state.c,
            cfg.encode_bid(state.a_prev)};
}

std::vector<BidEpisodeTrace> bid_rollout(BiddingPolicy& policy, const BidConfig& cfg,
                                         int n_episodes, std::uint64_t seed,
                                         const std::string& fingerprint) {
    cfg.validate();
    std::vector<BidEpisodeTrace> out;
    out.reserve(n_episodes);
    for (int ep = 0; ep < n_episodes; ++ep) {
        const std::uint64_t ep_seed = derive_seed(seed, "bid-episode", ep);
        Rng rng(ep_seed);
        BidState state = init_bid_episode(cfg, rng);
        BidEpisodeTrace trace;
        trace.fingerprint = fingerprint;
        trace.seed = ep_seed;
        trace.episode_index = ep;
        trace.steps.reserve(cfg.horizon);
        for (int t = 0; t < cfg.horizon; ++t) {
            const double wanted = policy.bid(state, cfg, rng);
            auto [next, rec] = bid_step(state, wanted, cfg, rng);
            trace.steps.push_back(rec);
            state = next;
        }
        out.push_back(std::move(trace));
    }
    return out;
}

std::string to_jsonl(const BidEpisodeTrace& trace, const BidConfig& cfg) {
    nlohmann::json j;
    j["d"] = "bidding";
    j["v"] = 1;
    j["fp"] = trace.fingerprint;
    j["seed"] = trace.seed;
    j["ep"] = trace.episode_index;
    std::vector<int> bid, win;
    std::vector<double> u, c;
    for (const auto& s : trace.steps) {
        bid.push_back(s.bid == kPadToken ? -1 : cfg.bid_index(s.bid));
        win.push_back(s.win ? 1 : 0);
        u.push_back(s.u);
        c.push_back(s.c);
    }
    j["bid"] = bid;
    j["win"] = win;
    j["u"] = u;
    j["c"] = c;
    return j.dump();
}

BidEpisodeTrace from_jsonl(const std::string& line, const BidConfig& cfg) {
    nlohmann::json j = nlohmann::json::parse(line);
    if (j.value("d", "") != "bidding" || j.value("v", 0) != 1)
        throw TraceError("from_jsonl: not a v1 bidding trace line");
    BidEpisodeTrace trace;
    trace.fingerprint = j.value("fp", "");
    trace.seed = j.value("seed", std::uint64_t{0});
    trace.episode_index = j.value("ep", 0);
    const auto& bid = j.at("bid");
    const auto& win = j.at("win");
    const auto& u = j.at("u");
    const auto& c = j.at("c");
    const std::size_t n = bid.size();
    if (win.size() != n || u.size() != n || c.size() != n)
        throw TraceError("from_jsonl: ragged step arrays");
    double budget = cfg.budget0();
    trace.steps.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        BidStepRecord rec;
        rec.budget_before = budget;
        rec.u = u[t].get<double>();
        rec.c = c[t].get<double>();
        int idx = bid[t].get<int>();
        rec.bid = idx < 0 ? kPadToken : cfg.bid_grid.at(idx);
        rec.win = win[t].get<int>() != 0;
        if (rec.win) {
            rec.spend = rec.bid;
            rec.value = rec.u;
            budget = std::max(0.0, budget - rec.spend);
        }
        trace.steps.push_back(rec);
    }
    return trace;
}

void write_bid_traces(const std::string& path, const std::vector<BidEpisodeTrace>& traces,
                      const BidConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw TraceError("write_bid_traces: cannot open " + path);
    for (const auto& t : traces) out << to_jsonl(t, cfg) << '\n';
}

std::vector<BidEpisodeTrace> read_bid_traces(const std::string& path, const BidConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw TraceError("read_bid_traces: cannot open " + path);
    std::vector<BidEpisodeTrace> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(from_jsonl(line, cfg));
    }
    return out;
}

std::vector<std::vector<double>> partial_observations_for(const BidEpisodeTrace& trace,
                                                          const BidConfig& cfg) {
    std::vector<std::vector<double>> out;
    out.reserve(trace.steps.size());
    double a_prev = kPadToken;
    int t = 0;
    for (const auto& rec : trace.steps) {
        out.push_back({static_cast<double>(t) / cfg.horizon, rec.u, rec.c, cfg.encode_bid(a_prev)});
        a_prev = rec.bid;
        ++t;
    }
    return out;
}

} // namespace tracebench::bidding
