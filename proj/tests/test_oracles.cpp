#include <gtest/gtest.h>

#include <random>

#include "crosscheck.hpp"
#include "testing.hpp"
#include "tinlab/errors.hpp"
#include "tinlab/oracles.hpp"

using namespace tinlab;
namespace o = tinlab::oracle;
using V = std::vector<double>;

TEST(Sma, Examples)
{
    EXPECT_EQ(o::sma(V{1, 2, 3, 4, 5}, 5), V{3.0});
    EXPECT_EQ(o::sma(V{1, 2, 3}, 1), (V{1, 2, 3}));
    EXPECT_EQ(o::sma(V{2, 4, 6, 8}, 2), (V{3, 5, 7}));
    EXPECT_THROW(o::sma(V{1, 2}, 3), DimensionError);
    EXPECT_THROW(o::sma(V{1, 2}, 0), DimensionError);
}

TEST(Ema, Examples)
{
    for (auto mode : {o::EmaMode::Recursive, o::EmaMode::Truncated})
        for (double v : o::ema(V(10, 7.25), 4, mode))
            EXPECT_NEAR(v, 7.25, 1e-12);
    const auto t = o::ema(V{1, 2}, 2, o::EmaMode::Truncated);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_NEAR(t[0], 1.75, 1e-15);
    EXPECT_EQ(o::ema(V{2, 4}, 3, o::EmaMode::Recursive), (V{2, 3}));
    EXPECT_THROW(o::ema(V{1}, 2, o::EmaMode::Truncated), DimensionError);
    EXPECT_THROW(o::ema(V{1}, 0, o::EmaMode::Recursive), DimensionError);
}

TEST(Macd, Examples)
{
    const auto flat = o::macd(V(40, 3.0), 12, 26, 9);
    ASSERT_FALSE(flat.macd.empty());
    for (std::size_t i = 0; i < flat.macd.size(); ++i) {
        EXPECT_NEAR(flat.macd[i], 0.0, 1e-12);
        EXPECT_NEAR(flat.signal[i], 0.0, 1e-12);
        EXPECT_NEAR(flat.histogram[i], 0.0, 1e-12);
    }
    const auto r = o::macd(V{1, 2, 3, 4}, 1, 2, 1, o::MaType::Sma);
    EXPECT_EQ(r.macd, (V{-0.5, -0.5, -0.5}));
    const auto c = o::macd(V{1, 2, 3, 4}, 1, 2, 1, o::MaType::Sma, o::MacdSign::FastMinusSlow);
    EXPECT_EQ(c.macd, (V{0.5, 0.5, 0.5}));
    EXPECT_THROW(o::macd(V(40, 1.0), 26, 12, 9), ConfigError);
    EXPECT_THROW(o::macd(V(40, 1.0), 12, 12, 9), ConfigError);
}

TEST(Macd, AlignmentAndLengths)
{
    const auto s = testutil::random_walk(100, 1);
    const auto r = o::macd(s, 12, 26, 9);
    EXPECT_EQ(r.macd.size(), 100u - o::macd_first_index(26, 9));
    EXPECT_EQ(r.signal.size(), r.macd.size());
    EXPECT_EQ(r.histogram.size(), r.macd.size());
}

TEST(Rsi, Examples)
{
    V up(30), down(30);
    for (int i = 0; i < 30; ++i) {
        up[i] = 10.0 + i;
        down[i] = 100.0 - i;
    }
    for (double v : o::rsi(up, 14))
        EXPECT_NEAR(v, 100.0, 1e-6);
    for (double v : o::rsi(down, 14))
        EXPECT_NEAR(v, 0.0, 1e-12);
    const auto r = o::rsi(V{5, 4, 5, 4}, 3);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0], 100.0 / 3.0, 1e-9);
    EXPECT_THROW(o::rsi(V{1, 2, 3}, 3), DimensionError);
}

TEST(Roc, Examples)
{
    EXPECT_NEAR(o::roc(V{10, 12}, 1)[0], 20.0, 1e-6);
    for (double v : o::roc(V(8, 3.0), 3))
        EXPECT_EQ(v, 0.0);
    EXPECT_NEAR(o::roc(V{4, 1, 3}, 2)[0], -25.0, 1e-9);
    EXPECT_THROW(o::roc(V{4, 0, 3}, 1), DomainError);
    EXPECT_THROW(o::roc(V{4, 3}, 2), DimensionError);
}

TEST(Stoch, Examples)
{
    EXPECT_NEAR(o::stoch_k(V{5, 6, 7}, V{1, 2, 3}, V{2, 3, 7}, 3)[0], 100.0, 1e-6);
    EXPECT_NEAR(o::stoch_k(V{5, 6, 7}, V{1, 2, 3}, V{2, 3, 1}, 3)[0], 0.0, 1e-12);
    EXPECT_NEAR(o::stoch_k(V{5, 6, 7}, V{1, 2, 3}, V{2, 3, 4}, 3)[0], 50.0, 1e-9);
    EXPECT_THROW(o::stoch_k(V{5, 6}, V{1, 2, 3}, V{2, 3, 4}, 2), DimensionError);
    EXPECT_EQ(o::stoch_d(V{10, 20, 30}, 2), (V{15, 25}));
}

TEST(Cci, Examples)
{
    for (double v : o::cci(V(10, 5.0), V(10, 5.0), V(10, 5.0), 4))
        EXPECT_EQ(v, 0.0);
    // equal H = L = C gives TP = price
    EXPECT_NEAR(o::cci(V{1, 2, 3}, V{1, 2, 3}, V{1, 2, 3}, 3)[0], 100.0, 1e-6);
    EXPECT_NEAR(o::cci(V{3, 2, 1}, V{3, 2, 1}, V{3, 2, 1}, 3)[0], -100.0, 1e-6);
    EXPECT_THROW(o::cci(V{1}, V{1}, V{1}, 2), DimensionError);
}

TEST(Obv, Examples)
{
    EXPECT_EQ(o::obv(V{1, 2, 2, 1}, V{10, 20, 30, 40}), (V{0, 20, 20, -20}));
    EXPECT_EQ(o::obv(V{1, 2, 3}, V{5, 6, 7}), (V{0, 6, 13}));
    EXPECT_EQ(o::obv(V{4, 4, 4}, V{5, 6, 7}), (V{0, 0, 0}));
    EXPECT_EQ(o::obv(V{4}, V{5}), V{0});
    EXPECT_THROW(o::obv(V{1, 2}, V{1, -1}), DomainError);
}

TEST(SeriesView, Validation)
{
    const V a{1, 2, 3}, b{1, 2};
    EXPECT_THROW((o::SeriesView{a, b}.validate()), DimensionError);
    const V hi{1, 1, 1}, lo{0, 2, 0};
    EXPECT_THROW((o::SeriesView{{}, hi, lo, a}.validate()), DomainError);
}

TEST(OracleProperties, BoundedOscillators)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto b = testutil::random_ohlc(120, seed);
        for (std::size_t n : {1, 2, 5, 14, 30}) {
            for (double v : o::rsi(b.close, n)) {
                EXPECT_GE(v, -1e-6);
                EXPECT_LE(v, 100 + 1e-6);
            }
            for (double v : o::stoch_k(b.high, b.low, b.close, n)) {
                EXPECT_GE(v, -1e-6);
                EXPECT_LE(v, 100 + 1e-6);
            }
        }
    }
}

TEST(OracleProperties, ShiftBehaviour)
{
    std::mt19937_64 rng(2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = testutil::random_walk(150, seed);
        const double c = std::uniform_real_distribution<double>(-10, 10)(rng);
        V shifted(s);
        for (auto& v : shifted)
            v += c;
        const auto a = o::sma(s, 10), as = o::sma(shifted, 10);
        const auto e = o::ema(s, 10, o::EmaMode::Truncated), es = o::ema(shifted, 10, o::EmaMode::Truncated);
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_NEAR(as[i], a[i] + c, 1e-12);
            EXPECT_NEAR(es[i], e[i] + c, 1e-12);
        }
        const auto m = o::macd(s, 12, 26, 9), ms = o::macd(shifted, 12, 26, 9);
        for (std::size_t i = 0; i < m.macd.size(); ++i) {
            EXPECT_NEAR(ms.macd[i], m.macd[i], 1e-12);
            EXPECT_NEAR(ms.histogram[i], m.histogram[i], 1e-12);
        }
    }
}

TEST(OracleProperties, CrossImplementation)
{
    for (const auto& [name, err] : testutil::oracle_crosscheck(200, 42))
        EXPECT_LE(err, 1e-12) << name;
}
