#include "tinlab/trading_env.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tinlab/errors.hpp"

namespace tinlab {

const char* to_string(Action a)
{
    switch (a) {
    case Action::Buy: return "buy";
    case Action::Sell: return "sell";
    case Action::Hold: return "hold";
    }
    return "?";
}

Action action_from_index(std::size_t i)
{
    if (i >= kNumActions)
        throw DimensionError("action index " + std::to_string(i) + " out of range");
    return static_cast<Action>(i);
}

void EnvConfig::validate() const
{
    if (window_len < 1)
        throw ConfigError("window_len must be at least 1");
    if (!(cost_rate >= 0.0 && cost_rate < 1.0))
        throw ConfigError("cost_rate must lie in [0, 1)");
    if (end && *end < start)
        throw ConfigError("episode end precedes start");
}

TradingEnv::TradingEnv(FeatureMatrix fm, EnvConfig cfg)
    : fm_(std::move(fm))
    , cfg_(cfg)
{
    cfg_.validate();
    price_ = fm_.column("price");
    if (fm_.rows() == 0)
        throw RangeError("empty feature matrix");
    last_ = cfg_.end ? *cfg_.end : fm_.rows() - 1;
    if (last_ >= fm_.rows())
        throw RangeError("episode end row " + std::to_string(last_) + " beyond " + std::to_string(fm_.rows()) + " rows");
    first_ = std::max(cfg_.start, cfg_.window_len - 1);
    if (first_ >= last_)
        throw RangeError("not enough rows for a " + std::to_string(cfg_.window_len) + "-row window and one step (rows " +
                         std::to_string(cfg_.start) + ".." + std::to_string(last_) + ")");
    obs_.resize(cfg_.window_len * fm_.width());
}

void TradingEnv::observe()
{
    window_into(fm_, t_, cfg_.window_len, cfg_.normalization, obs_);
}

const std::vector<double>& TradingEnv::reset()
{
    t_ = first_;
    position_ = 0.0;
    equity_ = 1.0;
    done_ = false;
    traded_ = false;
    observe();
    return obs_;
}

StepResult TradingEnv::step(Action action)
{
    if (done_)
        throw UsageError("step() called on a finished episode; call reset()");
    double target = position_;
    if (action == Action::Buy)
        target = 1.0;
    else if (action == Action::Sell)
        target = cfg_.allow_short ? -1.0 : 0.0;
    traded_ = target != position_;
    position_ = target;

    const double p0 = price_[t_];
    const double p1 = price_[t_ + 1];
    const double reward = position_ * (p1 - p0) / p0 - (traded_ ? cfg_.cost_rate : 0.0);
    equity_ *= 1.0 + reward;
    ++t_;
    done_ = t_ == last_;
    observe();
    return StepResult{obs_, reward, done_};
}

EpisodeResult run_policy(const FeatureMatrix& fm, const EnvConfig& cfg, const Policy& policy)
{
    TradingEnv env(fm, cfg);
    EpisodeResult r;
    const auto* obs = &env.reset();
    r.equity_curve.reserve(env.episode_steps() + 1);
    r.equity_curve.push_back(1.0);
    while (!env.done()) {
        const std::size_t row = env.clock();
        const Action a = policy(*obs, row);
        const auto s = env.step(a);
        r.actions.push_back(a);
        r.rewards.push_back(s.reward);
        r.dates.push_back(fm.dates[row]);
        r.equity_curve.push_back(env.equity());
        r.trade_count += env.traded() ? 1 : 0;
        obs = &s.next_obs;
    }
    return r;
}

std::string episode_csv(const EpisodeResult& result)
{
    std::ostringstream os;
    os << "date,action,reward,equity\n";
    char buf[128];
    for (std::size_t i = 0; i < result.actions.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g\n", format_date(result.dates[i]).c_str(),
                      to_string(result.actions[i]), result.rewards[i], result.equity_curve[i + 1]);
        os << buf;
    }
    return os.str();
}

} // namespace tinlab
