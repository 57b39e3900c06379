#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tinlab/market_data.hpp"

namespace tinlab {

// Integer codes index the Q-network outputs.
enum class Action : int { Buy = 0, Sell = 1, Hold = 2 };

inline constexpr std::size_t kNumActions = 3;

const char* to_string(Action a);
Action action_from_index(std::size_t i);

struct EnvConfig {
    std::size_t window_len = 52;
    double cost_rate = 0.0;                   // fraction of equity charged per trade
    bool allow_short = false;
    std::size_t start = 0;                    // first row the episode may use
    std::optional<std::size_t> end;           // last row (inclusive); defaults to the final row
    Normalization normalization = Normalization::LastPriceRelative;

    void validate() const;
};

struct Transition {
    std::vector<double> obs;
    Action action = Action::Hold;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;
};

struct StepResult {
    const std::vector<double>& next_obs;
    double reward;
    bool done;
};

// Single-asset daily simulation executed at the price channel (adjusted
// close). The agent decides at row t, holds the resulting position over
// (t, t+1] and is paid the mark-to-market return of that day.
class TradingEnv {
public:
    // `fm` must contain a "price" channel.
    TradingEnv(FeatureMatrix fm, EnvConfig cfg);

    const std::vector<double>& reset();
    StepResult step(Action action);

    std::size_t clock() const { return t_; }
    std::size_t first_row() const { return first_; }
    std::size_t last_row() const { return last_; }
    std::size_t episode_steps() const { return last_ - first_; }
    double position() const { return position_; }
    double equity() const { return equity_; }
    bool done() const { return done_; }
    bool traded() const { return traded_; }
    const std::vector<double>& observation() const { return obs_; }
    const EnvConfig& config() const { return cfg_; }
    const FeatureMatrix& data() const { return fm_; }

private:
    void observe();

    FeatureMatrix fm_;
    EnvConfig cfg_;
    std::vector<double> price_;
    std::size_t first_ = 0;
    std::size_t last_ = 0;
    std::size_t t_ = 0;
    double position_ = 0.0;
    double equity_ = 1.0;
    bool done_ = true;
    bool traded_ = false;
    std::vector<double> obs_;
};

struct EpisodeResult {
    std::vector<double> equity_curve;         // starts at 1.0, one entry per step after
    std::vector<Action> actions;
    std::vector<double> rewards;
    std::vector<Date> dates;                  // decision date of each step
    std::size_t trade_count = 0;

    friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

using Policy = std::function<Action(std::span<const double> obs, std::size_t row)>;

EpisodeResult run_policy(const FeatureMatrix& fm, const EnvConfig& cfg, const Policy& policy);

// `date,action,reward,equity`, one row per step.
std::string episode_csv(const EpisodeResult& result);

} // namespace tinlab
