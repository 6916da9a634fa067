#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tracebench/common.hpp"
#include "tracebench/rng.hpp"

namespace tracebench::bidding {

enum class BidVariant : int { default_ = 0, tight_budget, high_competition, volatile_quality };

const char* to_string(BidVariant v);
std::optional<BidVariant> parse_bid_variant(std::string_view name);

struct BidConfig {
    int horizon = 50;
    double initial_budget = 30.0;
    std::vector<double> bid_grid{0.45, 0.70, 0.95, 1.20, 1.50};
    BidVariant variant = BidVariant::default_;
    // P(win | bid, c) = logistic(win_slope * (bid - (win_base + win_comp_weight * c)))
    double win_slope = 6.0;
    double win_base = 0.4;
    double win_comp_weight = 0.8;
    double quality_alpha = 2.0, quality_beta = 2.0;
    double comp_alpha = 2.0, comp_beta = 2.0;
    double tight_budget_value = 18.0;
    double volatile_quality_alpha = 0.7, volatile_quality_beta = 0.7;
    double high_comp_alpha = 3.0, high_comp_beta = 1.5;
    // Pacing expert: bucket = clamp(2 + round(quality_gain*(u-0.5) - pace_gain*d + tilt), 0, 4)
    // where d = cum_spend/B0 - t/T. Constants calibrated once against the
    // expert's long-run bucket mixture.
    double expert_quality_gain = 2.4;
    double expert_pace_gain = 7.0;
    double expert_tilt = 0.0;

    void validate() const;
    int grid_size() const { return static_cast<int>(bid_grid.size()); }
    int bid_index(double bid) const; // -1 off grid
    double encode_bid(double bid) const;
    double budget0() const {
        return variant == BidVariant::tight_budget ? tight_budget_value : initial_budget;
    }
};

struct BidState {
    int t = 0;          // steps elapsed
    double budget = 0;  // remaining
    double u = 0;       // opportunity quality
    double c = 0;       // competition level
    double a_prev = kPadToken;
};

struct BidStepRecord {
    double bid = kPadToken; // effective bid; kPadToken when no bid was affordable
    bool win = false;
    double spend = 0;
    double value = 0;
    double budget_before = 0;
    double u = 0;
    double c = 0;
};

struct BidEpisodeTrace {
    std::string fingerprint;
    std::uint64_t seed = 0;
    int episode_index = 0;
    std::vector<BidStepRecord> steps;
};

BidState init_bid_episode(const BidConfig& cfg, Rng& rng);

double win_probability(double bid, double c, const BidConfig& cfg);

// Clamps the requested bid to the largest affordable bucket (no bid when
// nothing is affordable), resolves the auction, accrues value, and redraws
// the quality/competition pair for the next opportunity.
std::pair<BidState, BidStepRecord> bid_step(const BidState& state, double bid,
                                            const BidConfig& cfg, Rng& rng);

double expert_policy(const BidState& state, const BidConfig& cfg);
double aggressive_policy(const BidState& state, const BidConfig& cfg);

// Partial observation o_t = (t/T, u, c, encoded a_prev); hidden budget excluded.
std::vector<double> partial_observation(const BidState& state, const BidConfig& cfg);
inline int partial_observation_dim() { return 4; }

struct BiddingPolicy {
    virtual ~BiddingPolicy() = default;
    virtual double bid(const BidState& state, const BidConfig& cfg, Rng& rng) = 0;
};

struct ExpertBidder final : BiddingPolicy {
    double bid(const BidState& state, const BidConfig& cfg, Rng&) override {
        return expert_policy(state, cfg);
    }
};

struct AggressiveBidder final : BiddingPolicy {
    double bid(const BidState& state, const BidConfig& cfg, Rng&) override {
        return aggressive_policy(state, cfg);
    }
};

std::vector<BidEpisodeTrace> bid_rollout(BiddingPolicy& policy, const BidConfig& cfg,
                                         int n_episodes, std::uint64_t seed,
                                         const std::string& fingerprint = "");

std::string to_jsonl(const BidEpisodeTrace& trace, const BidConfig& cfg);
BidEpisodeTrace from_jsonl(const std::string& line, const BidConfig& cfg);
void write_bid_traces(const std::string& path, const std::vector<BidEpisodeTrace>& traces,
                      const BidConfig& cfg);
std::vector<BidEpisodeTrace> read_bid_traces(const std::string& path, const BidConfig& cfg);

// Partial observation at each step, replayed from a trace.
std::vector<std::vector<double>> partial_observations_for(const BidEpisodeTrace& trace,
                                                          const BidConfig& cfg);

} // namespace tracebench::bidding
