#include "tracebench/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tracebench {

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

} // namespace tracebench

namespace tracebench::market {

const char* to_string(MarketVariant v) {
    switch (v) {
        case MarketVariant::default_: return "default";
        case MarketVariant::low_demand: return "low_demand";
        case MarketVariant::high_demand: return "high_demand";
        case MarketVariant::high_rate_rm: return "high_rate_rm";
        case MarketVariant::high_occ_rm: return "high_occ_rm";
    }
    return "?";
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::nc: return "nc";
        case Regime::ca: return "ca";
        case Regime::teacher: return "teacher";
        case Regime::student: return "student";
        case Regime::oracle: return "oracle";
    }
    return "?";
}

std::optional<MarketVariant> parse_variant(std::string_view name) {
    for (auto v : {MarketVariant::default_, MarketVariant::low_demand, MarketVariant::high_demand,
                   MarketVariant::high_rate_rm, MarketVariant::high_occ_rm}) {
        if (name == to_string(v)) return v;
    }
    return std::nullopt;
}

void MarketConfig::validate() const {
    if (horizon < 1) throw ConfigError("market.horizon must be >= 1");
    if (capacity_a < 1) throw ConfigError("market.capacity_a must be >= 1");
    if (capacity_b < 1) throw ConfigError("market.capacity_b must be >= 1");
    if (price_grid.size() < 2) throw ConfigError("market.price_grid needs >= 2 entries");
    for (std::size_t i = 1; i < price_grid.size(); ++i) {
        if (!(price_grid[i] > price_grid[i - 1]))
            throw ConfigError("market.price_grid must be strictly increasing");
    }
    for (double r : demand.arrival_rate) {
        if (!(r > 0.0)) throw ConfigError("market.demand.arrival_rate entries must be > 0");
    }
    if (lag_depth < 1) throw ConfigError("market.lag_depth must be >= 1");
    double psum = condition_probs[0] + condition_probs[1] + condition_probs[2];
    if (std::abs(psum - 1.0) > 1e-9) throw ConfigError("market.condition_probs must sum to 1");
    if (!(target_occupancy > 0.0 && target_occupancy <= 1.0))
        throw ConfigError("market.target_occupancy must lie in (0, 1]");
    for (int f : rm.floor_index) {
        if (f < 0 || f >= grid_size()) throw ConfigError("market.rm.floor_index out of grid range");
    }
    for (int b : rm.base_index) {
        if (b < 0 || b >= grid_size()) throw ConfigError("market.rm.base_index out of grid range");
    }
}

int MarketConfig::price_index(double price) const {
    for (int i = 0; i < grid_size(); ++i) {
        if (std::abs(price_grid[i] - price) < 1e-9) return i;
    }
    return -1;
}

double MarketConfig::encode_price(double price) const {
    if (price == kPadToken) return kPadToken;
    double lo = price_grid.front();
    double hi = price_grid.back();
    return (price - lo) / (hi - lo);
}

double arrival_rate(const MarketConfig& cfg, Condition m) {
    double r = cfg.demand.arrival_rate[static_cast<int>(m)];
    if (cfg.variant == MarketVariant::low_demand) r *= cfg.low_demand_scale;
    if (cfg.variant == MarketVariant::high_demand) r *= cfg.high_demand_scale;
    return r;
}

int rm_floor_index(const MarketConfig& cfg, Condition m) {
    int f = cfg.rm.floor_index[static_cast<int>(m)];
    if (cfg.variant == MarketVariant::high_rate_rm) f += 1;
    if (cfg.variant == MarketVariant::high_occ_rm) f -= 1;
    return std::clamp(f, 0, cfg.grid_size() - 1);
}

namespace {

// Realized cumulative sell-through relative to the linear target schedule.
double pace_summary(int sold, int capacity, int steps_elapsed, const MarketConfig& cfg) {
    if (steps_elapsed <= 0) return 1.0;
    double elapsed = static_cast<double>(steps_elapsed) / cfg.horizon;
    double target = capacity * elapsed * cfg.target_occupancy;
    double h = static_cast<double>(sold) / target;
    return std::clamp(h, 0.0, cfg.pace_cap);
}

double choice_utility(double price, const MarketConfig& cfg) {
    return cfg.demand.base_utility -
           cfg.demand.price_sensitivity * (price - cfg.demand.price_anchor) / 100.0;
}

} // namespace

SimState init_episode(const MarketConfig& cfg, Rng& rng) {
    cfg.validate();
    SimState s;
    s.tau = cfg.horizon;
    s.q_a = cfg.capacity_a;
    s.q_b = cfg.capacity_b;
    s.m = static_cast<Condition>(rng.categorical(cfg.condition_probs));
    s.h_a = 1.0;
    s.h_b = 1.0;
    s.history_a.assign(cfg.lag_depth, kPadToken);
    s.history_b.assign(cfg.lag_depth, kPadToken);
    return s;
}

SimState init_episode(const MarketConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    return init_episode(cfg, rng);
}

double fixed_rm_price_for(const SimState& state, Side side, const MarketConfig& cfg) {
    const int cap = cfg.capacity(side);
    const int q = state.remaining(side);
    const double elapsed = static_cast<double>(cfg.horizon - state.tau) / cfg.horizon;
    const double sell_through = 1.0 - static_cast<double>(q) / cap;
    const double pace_pos = sell_through / cfg.target_occupancy;
    const int m = static_cast<int>(state.m);
    const int adj = static_cast<int>(std::llround(cfg.rm.pace_gain * (pace_pos - elapsed)));
    const int idx = std::clamp(cfg.rm.base_index[m] + adj, rm_floor_index(cfg, state.m),
                               cfg.grid_size() - 1);
    return cfg.price_grid[idx];
}

double fixed_rm_price(const SimState& state, const MarketConfig& cfg) {
    return fixed_rm_price_for(state, Side::b, cfg);
}

Sales demand_step(const SimState& state, double p_a, double p_b, const MarketConfig& cfg,
                  Rng& rng) {
    const int arrivals = rng.poisson(arrival_rate(cfg, state.m));
    int qa = state.q_a;
    int qb = state.q_b;
    const double wa = std::exp(choice_utility(p_a, cfg));
    const double wb = std::exp(choice_utility(p_b, cfg));
    Sales out;
    for (int i = 0; i < arrivals; ++i) {
        double weight_a = qa > 0 ? wa : 0.0;
        double weight_b = qb > 0 ? wb : 0.0;
        double total = 1.0 + weight_a + weight_b;
        double probs[3] = {1.0 / total, weight_a / total, weight_b / total};
        int pick = rng.categorical(probs);
        if (pick == 1) {
            --qa;
            ++out.y_a;
        } else if (pick == 2) {
            --qb;
            ++out.y_b;
        }
    }
    return out;
}

SimState advance(const SimState& state, double p_a, double p_b, const Sales& sales,
                 const MarketConfig& cfg) {
    if (sales.y_a < 0 || sales.y_a > state.q_a)
        throw TraceError("advance: infeasible Hotel A sales");
    if (sales.y_b < 0 || sales.y_b > state.q_b)
        throw TraceError("advance: infeasible Hotel B sales");
    if (state.tau <= 0) throw TraceError("advance: episode already finished");
    SimState next = state;
    next.tau = state.tau - 1;
    next.q_a = state.q_a - sales.y_a;
    next.q_b = state.q_b - sales.y_b;
    for (int i = cfg.lag_depth - 1; i > 0; --i) {
        next.history_a[i] = next.history_a[i - 1];
        next.history_b[i] = next.history_b[i - 1];
    }
    next.history_a[0] = p_a;
    next.history_b[0] = p_b;
    const int elapsed = cfg.horizon - next.tau;
    next.h_a = pace_summary(cfg.capacity_a - next.q_a, cfg.capacity_a, elapsed, cfg);
    next.h_b = pace_summary(cfg.capacity_b - next.q_b, cfg.capacity_b, elapsed, cfg);
    return next;
}

int observation_dim(const MarketConfig& cfg, Regime r) {
    int base = 4 + cfg.lag_depth;
    return r == Regime::oracle ? base + 1 : base;
}

Observation observe(const SimState& state, Regime r, const MarketConfig& cfg, Side side) {
    Observation obs;
    obs.regime = r;
    obs.values.reserve(observation_dim(cfg, r));
    const Side opp = other(side);
    obs.values.push_back(static_cast<double>(state.tau) / cfg.horizon);
    obs.values.push_back(static_cast<double>(state.remaining(side)) / cfg.capacity(side));
    obs.values.push_back(static_cast<double>(state.m) / 2.0);
    obs.values.push_back(state.pace(side) / cfg.pace_cap);
    const bool own_history = (r == Regime::nc || r == Regime::student);
    const auto& lags = own_history ? state.history(side) : state.history(opp);
    for (int i = 0; i < cfg.lag_depth; ++i) obs.values.push_back(cfg.encode_price(lags[i]));
    if (r == Regime::oracle)
        obs.values.push_back(static_cast<double>(state.remaining(opp)) / cfg.capacity(opp));
    return obs;
}

double reward(double price, int sold, const MarketConfig& cfg, Side side) {
    const double cap = cfg.capacity(side);
    if (cfg.objective == Objective::margin) return (price - cfg.margin_cost) * sold / cap;
    return price * sold / cap;
}

double FixedRmPolicy::price(const SimState& state, Side side, const MarketConfig& cfg, Rng&) {
    return fixed_rm_price_for(state, side, cfg);
}

double UniformRandomPolicy::price(const SimState&, Side, const MarketConfig& cfg, Rng& rng) {
    return cfg.price_grid[rng.uniform_int(cfg.grid_size())];
}

namespace {

void append_step(SimState& state, double p_a, double p_b, const Sales& sales,
                 const MarketConfig& cfg, EpisodeTrace& trace) {
    StepRecord rec;
    rec.t = state.step(cfg);
    rec.p_a = p_a;
    rec.p_b = p_b;
    rec.y_a = sales.y_a;
    rec.y_b = sales.y_b;
    rec.r_a = reward(p_a, sales.y_a, cfg, Side::a);
    rec.before = StateCore{state.tau, state.q_a, state.q_b, state.m, state.h_a, state.h_b};
    trace.steps.push_back(rec);
    state = advance(state, p_a, p_b, sales, cfg);
}

} // namespace

std::vector<EpisodeTrace> rollout(PricingPolicy& policy_a, PricingPolicy& policy_b,
                                  const MarketConfig& cfg, int n_episodes, std::uint64_t seed,
                                  const std::string& fingerprint) {
    cfg.validate();
    std::vector<EpisodeTrace> out;
    out.reserve(n_episodes);
    for (int ep = 0; ep < n_episodes; ++ep) {
        const std::uint64_t ep_seed = derive_seed(seed, "market-episode", ep);
        Rng rng(ep_seed);
        SimState state = init_episode(cfg, rng);
        EpisodeTrace trace;
        trace.fingerprint = fingerprint;
        trace.seed = ep_seed;
        trace.episode_index = ep;
        trace.m = state.m;
        trace.steps.reserve(cfg.horizon);
        for (int t = 0; t < cfg.horizon; ++t) {
            const double p_a = policy_a.price(state, Side::a, cfg, rng);
            const double p_b = policy_b.price(state, Side::b, cfg, rng);
            if (cfg.price_index(p_a) < 0 || cfg.price_index(p_b) < 0)
                throw TraceError("rollout: policy emitted an off-grid price");
            const Sales sales = demand_step(state, p_a, p_b, cfg, rng);
            append_step(state, p_a, p_b, sales, cfg, trace);
        }
        trace.terminal_q_a = state.q_a;
        trace.terminal_q_b = state.q_b;
        out.push_back(std::move(trace));
    }
    return out;
}

std::string to_jsonl(const EpisodeTrace& trace, const MarketConfig& cfg) {
    nlohmann::json j;
    j["d"] = "pricing";
    j["v"] = 1;
    j["fp"] = trace.fingerprint;
    j["seed"] = trace.seed;
    j["ep"] = trace.episode_index;
    j["m"] = static_cast<int>(trace.m);
    std::vector<int> pa, pb, ya, yb;
    pa.reserve(trace.steps.size());
    for (const auto& s : trace.steps) {
        pa.push_back(cfg.price_index(s.p_a));
        pb.push_back(cfg.price_index(s.p_b));
        ya.push_back(s.y_a);
        yb.push_back(s.y_b);
    }
    j["pa"] = pa;
    j["pb"] = pb;
    j["ya"] = ya;
    j["yb"] = yb;
    return j.dump();
}

EpisodeTrace from_jsonl(const std::string& line, const MarketConfig& cfg) {
    nlohmann::json j = nlohmann::json::parse(line);
    if (j.value("d", "") != "pricing" || j.value("v", 0) != 1)
        throw TraceError("from_jsonl: not a v1 pricing trace line");
    EpisodeTrace trace;
    trace.fingerprint = j.value("fp", "");
    trace.seed = j.value("seed", std::uint64_t{0});
    trace.episode_index = j.value("ep", 0);
    trace.m = static_cast<Condition>(j.value("m", 1));
    const auto& pa = j.at("pa");
    const auto& pb = j.at("pb");
    const auto& ya = j.at("ya");
    const auto& yb = j.at("yb");
    const std::size_t n = pa.size();
    if (pb.size() != n || ya.size() != n || yb.size() != n)
        throw TraceError("from_jsonl: ragged step arrays");

    SimState state;
    state.tau = cfg.horizon;
    state.q_a = cfg.capacity_a;
    state.q_b = cfg.capacity_b;
    state.m = trace.m;
    state.history_a.assign(cfg.lag_depth, kPadToken);
    state.history_b.assign(cfg.lag_depth, kPadToken);
    trace.steps.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        Sales sales{ya[t].get<int>(), yb[t].get<int>()};
        append_step(state, cfg.price_grid.at(pa[t].get<int>()), cfg.price_grid.at(pb[t].get<int>()),
                    sales, cfg, trace);
    }
    trace.terminal_q_a = state.q_a;
    trace.terminal_q_b = state.q_b;
    return trace;
}

void write_traces(const std::string& path, const std::vector<EpisodeTrace>& traces,
                  const MarketConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw TraceError("write_traces: cannot open " + path);
    for (const auto& t : traces) out << to_jsonl(t, cfg) << '\n';
}

std::vector<EpisodeTrace> read_traces(const std::string& path, const MarketConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw TraceError("read_traces: cannot open " + path);
    std::vector<EpisodeTrace> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(from_jsonl(line, cfg));
    }
    return out;
}

std::vector<std::vector<double>> observations_for(const EpisodeTrace& trace, const MarketConfig& cfg,
                                                  Regime r, Side side) {
    std::vector<std::vector<double>> out;
    out.reserve(trace.steps.size());
    SimState state;
    state.tau = cfg.horizon;
    state.q_a = cfg.capacity_a;
    state.q_b = cfg.capacity_b;
    state.m = trace.m;
    state.history_a.assign(cfg.lag_depth, kPadToken);
    state.history_b.assign(cfg.lag_depth, kPadToken);
    for (const auto& rec : trace.steps) {
        out.push_back(observe(state, r, cfg, side).values);
        state = advance(state, rec.p_a, rec.p_b, Sales{rec.y_a, rec.y_b}, cfg);
    }
    return out;
}

} // namespace tracebench::market
