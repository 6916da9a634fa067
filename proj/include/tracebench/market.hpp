#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tracebench/common.hpp"
#include "tracebench/rng.hpp"

namespace tracebench::market {

enum class Condition : int { low = 0, mid = 1, high = 2 };
enum class Objective : int { revpar = 0, margin = 1 };
enum class MarketVariant : int { default_ = 0, low_demand, high_demand, high_rate_rm, high_occ_rm };
enum class Regime : int { nc = 0, ca, teacher, student, oracle };

const char* to_string(MarketVariant v);
const char* to_string(Regime r);
std::optional<MarketVariant> parse_variant(std::string_view name);

// Per-arrival multinomial logit over {A, B, outside}; sold-out hotels drop
// out of the choice set.
struct DemandModel {
    std::array<double, 3> arrival_rate{5.9, 6.2, 6.6}; // Poisson intensity per step, by condition
    double base_utility = 1.2;
    double price_sensitivity = 1.5; // per 100 currency above the anchor
    double price_anchor = 100.0;
};

// Deterministic sell-through rule: a base bucket per market condition, an
// adjustment proportional to how far sell-through runs ahead of the linear
// target schedule, and a per-condition price floor.
struct FixedRmRule {
    std::array<int, 3> base_index{0, 1, 2};
    std::array<int, 3> floor_index{0, 1, 1};
    double pace_gain = 6.0;
};

struct MarketConfig {
    int horizon = 30;
    int capacity_a = 100;
    int capacity_b = 100;
    std::vector<double> price_grid{100, 120, 140, 160, 180, 200, 220};
    MarketVariant variant = MarketVariant::default_;
    Objective objective = Objective::revpar;
    int lag_depth = 3;
    std::array<double, 3> condition_probs{0.3, 0.4, 0.3};
    DemandModel demand;
    FixedRmRule rm;
    double target_occupancy = 0.77;
    double pace_cap = 3.0;
    double margin_cost = 100.0;
    double low_demand_scale = 0.75;
    double high_demand_scale = 1.30;

    // Throws ConfigError naming the violated invariant.
    void validate() const;

    int grid_size() const { return static_cast<int>(price_grid.size()); }
    int price_index(double price) const; // -1 when off grid
    double encode_price(double price) const; // [0,1] on the grid span; pad token passes through
    int capacity(Side s) const { return s == Side::a ? capacity_a : capacity_b; }
};

// Variant-adjusted accessors (the stored config stays untouched).
double arrival_rate(const MarketConfig& cfg, Condition m);
int rm_floor_index(const MarketConfig& cfg, Condition m);

struct SimState {
    int tau = 0;  // steps remaining
    int q_a = 0;
    int q_b = 0;
    Condition m = Condition::mid;
    double h_a = 1.0; // booking pace: realized / target cumulative sell-through
    double h_b = 1.0;
    std::vector<double> history_a; // newest first; kPadToken where no price yet
    std::vector<double> history_b;

    int step(const MarketConfig& cfg) const { return cfg.horizon - tau; }
    int sold(const MarketConfig& cfg, Side s) const {
        return s == Side::a ? cfg.capacity_a - q_a : cfg.capacity_b - q_b;
    }
    int remaining(Side s) const { return s == Side::a ? q_a : q_b; }
    double pace(Side s) const { return s == Side::a ? h_a : h_b; }
    const std::vector<double>& history(Side s) const { return s == Side::a ? history_a : history_b; }
};

struct Observation {
    Regime regime = Regime::ca;
    std::vector<double> values;
};

SimState init_episode(const MarketConfig& cfg, Rng& rng);
SimState init_episode(const MarketConfig& cfg, std::uint64_t seed);

// Pure in (tau, q_B, m, h_B); everything else in the state is ignored.
double fixed_rm_price(const SimState& state, const MarketConfig& cfg);

// Rule price for an arbitrary seat (used when the rule plays Hotel A).
double fixed_rm_price_for(const SimState& state, Side side, const MarketConfig& cfg);

struct Sales {
    int y_a = 0;
    int y_b = 0;
};

Sales demand_step(const SimState& state, double p_a, double p_b, const MarketConfig& cfg, Rng& rng);

SimState advance(const SimState& state, double p_a, double p_b, const Sales& sales,
                 const MarketConfig& cfg);

int observation_dim(const MarketConfig& cfg, Regime r);
Observation observe(const SimState& state, Regime r, const MarketConfig& cfg, Side side = Side::a);

double reward(double price, int sold, const MarketConfig& cfg, Side side = Side::a);

// --- Traces ------------------------------------------------------------

struct StateCore {
    int tau = 0;
    int q_a = 0;
    int q_b = 0;
    Condition m = Condition::mid;
    double h_a = 1.0;
    double h_b = 1.0;
};

struct StepRecord {
    int t = 0;
    double p_a = 0;
    double p_b = 0;
    int y_a = 0;
    int y_b = 0;
    double r_a = 0;
    StateCore before;
};

struct EpisodeTrace {
    std::string fingerprint;
    std::uint64_t seed = 0;   // per-episode derived seed
    int episode_index = 0;
    Condition m = Condition::mid;
    std::vector<StepRecord> steps;
    int terminal_q_a = 0;
    int terminal_q_b = 0;
};

struct PricingPolicy {
    virtual ~PricingPolicy() = default;
    virtual double price(const SimState& state, Side side, const MarketConfig& cfg, Rng& rng) = 0;
};

struct FixedRmPolicy final : PricingPolicy {
    double price(const SimState& state, Side side, const MarketConfig& cfg, Rng& rng) override;
};

struct UniformRandomPolicy final : PricingPolicy {
    double price(const SimState& state, Side side, const MarketConfig& cfg, Rng& rng) override;
};

std::vector<EpisodeTrace> rollout(PricingPolicy& policy_a, PricingPolicy& policy_b,
                                  const MarketConfig& cfg, int n_episodes, std::uint64_t seed,
                                  const std::string& fingerprint = "");

// One line per episode; prices stored as grid indices, states replayed on read.
std::string to_jsonl(const EpisodeTrace& trace, const MarketConfig& cfg);
EpisodeTrace from_jsonl(const std::string& line, const MarketConfig& cfg);
void write_traces(const std::string& path, const std::vector<EpisodeTrace>& traces,
                  const MarketConfig& cfg);
std::vector<EpisodeTrace> read_traces(const std::string& path, const MarketConfig& cfg);

// Per-step observation of the given seat, replayed from a trace. Index i
// matches steps[i] (the state before that step's action).
std::vector<std::vector<double>> observations_for(const EpisodeTrace& trace, const MarketConfig& cfg,
                                                  Regime r, Side side = Side::a);

} // namespace tracebench::market
