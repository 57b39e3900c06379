#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tinlab/errors.hpp"
#include "tinlab/trading_env.hpp"

using namespace tinlab;

namespace {

FeatureMatrix prices(const std::vector<double>& p)
{
    std::vector<OhlcvBar> bars;
    std::chrono::sys_days d{std::chrono::year{2020} / 1 / 1};
    for (std::size_t i = 0; i < p.size(); ++i) {
        OhlcvBar b;
        b.date = std::chrono::year_month_day{d + std::chrono::days{static_cast<int>(i)}};
        b.open = b.high = b.low = b.close = b.adj_close = p[i];
        b.volume = 100;
        bars.push_back(b);
    }
    return to_feature_matrix(bars, {"price"});
}

FeatureMatrix synthetic(SyntheticShape shape, std::size_t rows, std::uint64_t seed = 0)
{
    SyntheticSpec spec;
    spec.shape = shape;
    spec.rows = rows;
    spec.seed = seed;
    return to_feature_matrix(synthetic_bars(spec), {"price"});
}

EnvConfig window_cfg(std::size_t len, double cost = 0.0)
{
    EnvConfig cfg;
    cfg.window_len = len;
    cfg.cost_rate = cost;
    return cfg;
}

} // namespace

TEST(Action, Codes)
{
    EXPECT_EQ(static_cast<int>(Action::Buy), 0);
    EXPECT_EQ(static_cast<int>(Action::Sell), 1);
    EXPECT_EQ(static_cast<int>(Action::Hold), 2);
    EXPECT_EQ(action_from_index(1), Action::Sell);
    EXPECT_THROW(action_from_index(3), DimensionError);
}

TEST(TradingEnv, ResetIndexing)
{
    const auto fm = synthetic(SyntheticShape::Sine, 60);
    TradingEnv env(fm, EnvConfig{});
    const auto first = env.reset();
    EXPECT_EQ(env.clock(), 51u);
    EXPECT_EQ(first, window(fm, 51, 52));
    EXPECT_EQ(env.reset(), first);
    EXPECT_EQ(env.position(), 0.0);
    EXPECT_EQ(env.equity(), 1.0);

    const auto small = synthetic(SyntheticShape::Sine, 10);
    EXPECT_THROW(TradingEnv(small, EnvConfig{}), RangeError);
}

TEST(TradingEnv, ConfigValidation)
{
    const auto fm = synthetic(SyntheticShape::Sine, 60);
    EXPECT_THROW(TradingEnv(fm, window_cfg(0)), ConfigError);
    EXPECT_THROW(TradingEnv(fm, window_cfg(5, 1.0)), ConfigError);
    EXPECT_THROW(TradingEnv(fm, window_cfg(5, -0.1)), ConfigError);
}

TEST(TradingEnv, StepExamples)
{
    {
        TradingEnv env(prices({100, 90, 120}), window_cfg(1));
        env.reset();
        EXPECT_EQ(env.step(Action::Hold).reward, 0.0);
    }
    {
        TradingEnv env(prices({100, 110, 120}), window_cfg(1));
        env.reset();
        EXPECT_NEAR(env.step(Action::Buy).reward, 0.10, 1e-15);
        EXPECT_EQ(env.position(), 1.0);
    }
    {
        TradingEnv env(prices({100, 110, 120}), window_cfg(1, 0.001));
        env.reset();
        env.step(Action::Buy);
        EXPECT_NEAR(env.step(Action::Sell).reward, -0.001, 1e-15);
        EXPECT_EQ(env.position(), 0.0);
    }
}

TEST(TradingEnv, NoOpTradesAndShorting)
{
    TradingEnv env(prices({100, 110, 121, 100}), window_cfg(1, 0.01));
    env.reset();
    env.step(Action::Sell);
    EXPECT_FALSE(env.traded());
    env.step(Action::Buy);
    EXPECT_TRUE(env.traded());
    env.step(Action::Buy);
    EXPECT_FALSE(env.traded());

    auto cfg = window_cfg(1);
    cfg.allow_short = true;
    TradingEnv s(prices({100, 90, 80}), cfg);
    s.reset();
    EXPECT_NEAR(s.step(Action::Sell).reward, 0.1, 1e-15);
    EXPECT_EQ(s.position(), -1.0);
}

TEST(TradingEnv, DoneAndStepAfterDone)
{
    TradingEnv env(prices({1, 2, 3}), window_cfg(2));
    env.reset();
    EXPECT_EQ(env.episode_steps(), 1u);
    const auto r = env.step(Action::Buy);
    EXPECT_TRUE(r.done);
    EXPECT_THROW(env.step(Action::Hold), UsageError);
}

TEST(TradingEnv, StartEndRange)
{
    const auto fm = synthetic(SyntheticShape::Sine, 100);
    auto cfg = window_cfg(10);
    cfg.start = 30;
    cfg.end = 40;
    TradingEnv env(fm, cfg);
    env.reset();
    EXPECT_EQ(env.clock(), 30u);
    EXPECT_EQ(env.episode_steps(), 10u);
    cfg.end = 200;
    EXPECT_THROW(TradingEnv(fm, cfg), RangeError);
}

TEST(RunPolicy, AlwaysHold)
{
    const auto fm = synthetic(SyntheticShape::RandomWalk, 200, 3);
    const auto r = run_policy(fm, EnvConfig{}, [](auto, auto) { return Action::Hold; });
    for (double e : r.equity_curve)
        EXPECT_EQ(e, 1.0);
    EXPECT_EQ(r.trade_count, 0u);
    EXPECT_EQ(r.equity_curve.size(), r.actions.size() + 1);
}

TEST(RunPolicy, BuyAndHoldTelescopes)
{
    const auto fm = synthetic(SyntheticShape::Rising, 300);
    const auto p = fm.column("price");
    const auto r = run_policy(fm, EnvConfig{}, [](auto, auto) { return Action::Buy; });
    EXPECT_NEAR(r.equity_curve.back(), p.back() / p[51], 1e-12);
    EXPECT_EQ(r.trade_count, 1u);
}

TEST(RunPolicy, DeterministicAndAccountingIdentity)
{
    const auto fm = synthetic(SyntheticShape::RandomWalk, 300, 9);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto make = [&] {
            return [rng = std::mt19937_64(seed)](auto, auto) mutable {
                return action_from_index(std::uniform_int_distribution<std::size_t>(0, 2)(rng));
            };
        };
        auto cfg = window_cfg(20, 0.002 * static_cast<double>(seed % 3));
        const auto a = run_policy(fm, cfg, make());
        const auto b = run_policy(fm, cfg, make());
        EXPECT_EQ(a, b);
        double prod = 1.0;
        for (std::size_t k = 0; k < a.rewards.size(); ++k) {
            prod *= 1.0 + a.rewards[k];
            EXPECT_EQ(a.equity_curve[k + 1], a.equity_curve[k] * (1.0 + a.rewards[k]));
        }
        EXPECT_NEAR(a.equity_curve.back(), prod, 1e-12);
        for (double e : a.equity_curve)
            EXPECT_GT(e, 0.0);
    }
}

TEST(RunPolicy, RewardsBounded)
{
    const auto fm = synthetic(SyntheticShape::RandomWalk, 300, 4);
    const auto p = fm.column("price");
    double max_ret = 0.0;
    for (std::size_t t = 1; t < p.size(); ++t)
        max_ret = std::max(max_ret, std::abs(p[t] / p[t - 1] - 1.0));
    const double cost = 0.003;
    std::mt19937_64 rng(2);
    const auto r = run_policy(fm, window_cfg(10, cost), [&](auto, auto) {
        return action_from_index(std::uniform_int_distribution<std::size_t>(0, 2)(rng));
    });
    for (double x : r.rewards)
        EXPECT_LE(std::abs(x), max_ret + cost + 1e-15);
}

TEST(RunPolicy, CsvSchema)
{
    const auto fm = prices({100, 110, 121});
    const auto r = run_policy(fm, window_cfg(1), [](auto, auto) { return Action::Buy; });
    EXPECT_EQ(episode_csv(r), "date,action,reward,equity\n"
                              "2020-01-01,buy,0.10000000000000001,1.1000000000000001\n"
                              "2020-01-02,buy,0.10000000000000001,1.2100000000000002\n");
}
