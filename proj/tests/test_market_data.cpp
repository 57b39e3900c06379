#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tinlab/errors.hpp"
#include "tinlab/market_data.hpp"

using namespace tinlab;

namespace {

const char* kHeader = "Date,Open,High,Low,Close,Adj Close,Volume\n";

std::vector<OhlcvBar> bars_from_prices(const std::vector<double>& adj, const std::vector<double>& vol = {})
{
    std::vector<OhlcvBar> bars;
    std::chrono::sys_days d{std::chrono::year{2020} / 1 / 1};
    for (std::size_t i = 0; i < adj.size(); ++i) {
        OhlcvBar b;
        b.date = std::chrono::year_month_day{d + std::chrono::days{static_cast<int>(i)}};
        b.open = b.high = b.low = b.close = b.adj_close = adj[i];
        b.volume = vol.empty() ? 1000.0 : vol[i];
        bars.push_back(b);
    }
    return bars;
}

} // namespace

TEST(Dates, ParseAndFormat)
{
    const auto d = parse_date("2021-03-09");
    EXPECT_EQ(format_date(d), "2021-03-09");
    EXPECT_THROW(parse_date("2021-02-30"), FormatError);
    EXPECT_THROW(parse_date("03/09/2021"), FormatError);
    EXPECT_THROW(parse_date("2021-03-09x"), FormatError);
}

TEST(ParseCsv, SingleRow)
{
    const auto bars = parse_csv(std::string(kHeader) + "2020-01-02,10,12,9,11,10.5,1500\n");
    ASSERT_EQ(bars.size(), 1u);
    EXPECT_EQ(format_date(bars[0].date), "2020-01-02");
    EXPECT_EQ(bars[0].open, 10);
    EXPECT_EQ(bars[0].high, 12);
    EXPECT_EQ(bars[0].low, 9);
    EXPECT_EQ(bars[0].close, 11);
    EXPECT_EQ(bars[0].adj_close, 10.5);
    EXPECT_EQ(bars[0].volume, 1500);
}

TEST(ParseCsv, HeaderCaseAndOrderFree)
{
    const auto bars = parse_csv("volume,ADJ CLOSE,close,low,high,open,date,extra\r\n"
                                "1500,10.5,11,9,12,10,2020-01-02,zzz\r\n");
    ASSERT_EQ(bars.size(), 1u);
    EXPECT_EQ(bars[0].adj_close, 10.5);
    EXPECT_EQ(bars[0].volume, 1500);
}

TEST(ParseCsv, InvariantViolationNamesRow)
{
    const std::string text = std::string(kHeader) + "2020-01-02,10,12,9,11,10.5,1500\n"
                                                    "2020-01-03,10,8,9,9.5,9.5,1500\n";
    try {
        parse_csv(text);
        FAIL() << "expected RowError";
    } catch (const RowError& e) {
        EXPECT_EQ(e.row(), 3u);
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
    }
}

TEST(ParseCsv, SortsAscending)
{
    const auto bars = parse_csv(std::string(kHeader) + "2020-01-03,1,1,1,1,1,1\n"
                                                       "2020-01-01,2,2,2,2,2,2\n"
                                                       "2020-01-02,3,3,3,3,3,3\n");
    ASSERT_EQ(bars.size(), 3u);
    EXPECT_EQ(bars[0].close, 2);
    EXPECT_EQ(bars[1].close, 3);
    EXPECT_EQ(bars[2].close, 1);
}

TEST(ParseCsv, Errors)
{
    EXPECT_THROW(parse_csv(""), FormatError);
    EXPECT_THROW(parse_csv("Date,Open,High,Low,Close,Volume\n2020-01-01,1,1,1,1,1\n"), FormatError);
    EXPECT_THROW(parse_csv(kHeader), FormatError);
    EXPECT_THROW(parse_csv(std::string(kHeader) + "2020-01-02,abc,1,1,1,1,1\n"), RowError);
    EXPECT_THROW(parse_csv(std::string(kHeader) + "2020-13-02,1,1,1,1,1,1\n"), RowError);
    EXPECT_THROW(parse_csv(std::string(kHeader) + "2020-01-02,1,1,1,1,1\n"), RowError);
    EXPECT_THROW(parse_csv(std::string(kHeader) + "2020-01-02,1,1,1,1,1,1\n2020-01-02,1,1,1,1,1,1\n"), RowError);
    EXPECT_THROW(parse_csv(std::string(kHeader) + "2020-01-02,1,1,1,1,0,1\n"), RowError);
    EXPECT_THROW(parse_csv(std::string(kHeader) + "2020-01-02,1,1,1,1,1,-1\n"), RowError);
    EXPECT_THROW(load_csv("/nonexistent/file.csv"), FormatError);
}

TEST(ParseCsv, EmitRoundTrip)
{
    for (auto shape : {SyntheticShape::Rising, SyntheticShape::Sine, SyntheticShape::RandomWalk}) {
        SyntheticSpec spec;
        spec.shape = shape;
        spec.rows = 300;
        spec.seed = 7;
        const auto bars = synthetic_bars(spec);
        EXPECT_EQ(parse_csv(emit_csv(bars)), bars);
    }
}

TEST(Synthetic, Shapes)
{
    SyntheticSpec spec;
    spec.shape = SyntheticShape::Rising;
    const auto rising = synthetic_bars(spec);
    ASSERT_EQ(rising.size(), 600u);
    for (std::size_t i = 1; i < rising.size(); ++i) {
        EXPECT_GT(rising[i].adj_close, rising[i - 1].adj_close);
        EXPECT_LT(rising[i - 1].date, rising[i].date);
        const auto wd = std::chrono::weekday{std::chrono::sys_days{rising[i].date}}.c_encoding();
        EXPECT_TRUE(wd >= 1 && wd <= 5);
    }
    spec.shape = SyntheticShape::Sine;
    const auto sine = synthetic_bars(spec);
    EXPECT_NEAR(sine[5].adj_close, 105.0, 1e-12);
    EXPECT_NEAR(sine[15].adj_close, 95.0, 1e-12);
}

TEST(Obv, Examples)
{
    EXPECT_EQ(compute_obv(bars_from_prices({1, 2, 2, 1}, {10, 20, 30, 40})), (std::vector<double>{0, 20, 20, -20}));
    EXPECT_EQ(compute_obv(bars_from_prices({5, 5, 5})), (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(compute_obv(bars_from_prices({5})), std::vector<double>{0});
}

TEST(FeatureMatrix, Channels)
{
    const auto bars = bars_from_prices({1, 2, 2, 1}, {10, 20, 30, 40});
    const auto p = to_feature_matrix(bars, {"price"});
    EXPECT_EQ(p.width(), 1u);
    EXPECT_EQ(p.column("price"), (std::vector<double>{1, 2, 2, 1}));
    const auto po = to_feature_matrix(bars, {"price", "obv"}, "XYZ");
    EXPECT_EQ(po.width(), 2u);
    EXPECT_EQ(po.symbol, "XYZ");
    EXPECT_EQ(po.column("obv"), compute_obv(bars));
    EXPECT_THROW(to_feature_matrix(bars, {"price", "rsi"}), ConfigError);
    EXPECT_THROW(to_feature_matrix(std::vector<OhlcvBar>{}, {"price"}), RangeError);
}

TEST(Window, Examples)
{
    const auto flat = to_feature_matrix(bars_from_prices(std::vector<double>(6, 50.0)), {"price", "obv"});
    const auto w = window(flat, 5, 4);
    ASSERT_EQ(w.size(), 8u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(w[i], 1.0);
        EXPECT_EQ(w[4 + i], 0.0);
    }
    const auto two = to_feature_matrix(bars_from_prices({100, 110}), {"price"});
    const auto v = window(two, 1, 2);
    EXPECT_NEAR(v[0], 100.0 / 110.0, 1e-15);
    EXPECT_EQ(v[1], 1.0);
    EXPECT_EQ(window(two, 1, 2, Normalization::Raw), (std::vector<double>{100, 110}));
    EXPECT_THROW(window(two, 0, 2), RangeError);
    EXPECT_THROW(window(two, 2, 1), RangeError);
}

TEST(Window, ObvScaledByWindowMax)
{
    const auto fm = to_feature_matrix(bars_from_prices({1, 2, 3, 2}, {10, 20, 30, 40}), {"price", "obv"});
    const auto w = window(fm, 3, 3);
    // obv = [0, 20, 50, 10]; window rows 1..3
    EXPECT_NEAR(w[3], 20.0 / 50.0, 1e-15);
    EXPECT_EQ(w[4], 1.0);
    EXPECT_NEAR(w[5], 10.0 / 50.0, 1e-15);
}

TEST(Window, ScaleInvariantAndFinite)
{
    std::mt19937_64 rng(1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SyntheticSpec spec;
        spec.shape = SyntheticShape::RandomWalk;
        spec.rows = 120;
        spec.seed = seed;
        auto bars = synthetic_bars(spec);
        const double c = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
        auto scaled = bars;
        for (auto& b : scaled) {
            b.open *= c;
            b.high *= c;
            b.low *= c;
            b.close *= c;
            b.adj_close *= c;
        }
        const auto a = to_feature_matrix(bars, {"price", "obv"});
        const auto b = to_feature_matrix(scaled, {"price", "obv"});
        for (std::size_t t = 51; t < a.rows(); ++t) {
            const auto wa = window(a, t, 52);
            const auto wb = window(b, t, 52);
            EXPECT_EQ(wa[51], 1.0);
            for (std::size_t i = 0; i < 52; ++i)
                EXPECT_NEAR(wa[i], wb[i], 1e-12);
            for (double v : wa)
                EXPECT_TRUE(std::isfinite(v));
        }
    }
}
