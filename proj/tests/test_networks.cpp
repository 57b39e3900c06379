#include <gtest/gtest.h>

#include <numeric>

#include "testing.hpp"
#include "tinlab/errors.hpp"
#include "tinlab/networks.hpp"
#include "tinlab/param_io.hpp"

using namespace tinlab;
using V = std::vector<double>;

namespace {

InitSpec sma_init() { return InitSpec{InitScheme::ReplicateSMA}; }
InitSpec ema_init() { return InitSpec{InitScheme::ReplicateEMA}; }

oracle::SeriesView ohlc_view(const testutil::Ohlc& b)
{
    oracle::SeriesView v;
    v.values = b.close;
    v.high = b.high;
    v.low = b.low;
    v.close = b.close;
    return v;
}

} // namespace

TEST(Weights, Examples)
{
    EXPECT_EQ(sma_weights(1), V{1});
    EXPECT_EQ(sma_weights(4), (V{0.25, 0.25, 0.25, 0.25}));
    EXPECT_EQ(ema_weights(1), V{1});
    const auto w = ema_weights(2);
    EXPECT_NEAR(w[0], 0.25, 1e-15);
    EXPECT_NEAR(w[1], 0.75, 1e-15);
    EXPECT_THROW(sma_weights(0), ConfigError);
    EXPECT_THROW(ema_weights(0), ConfigError);
}

TEST(Weights, NormalizedAndMonotone)
{
    for (std::size_t n = 1; n <= 512; ++n) {
        const auto s = sma_weights(n);
        const auto e = ema_weights(n);
        EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 1.0, 1e-12);
        EXPECT_NEAR(std::accumulate(e.begin(), e.end(), 0.0), 1.0, 1e-12);
        for (std::size_t i = 0; i + 1 < n; ++i)
            ASSERT_LT(e[i], e[i + 1]) << n;
    }
}

TEST(MaIn, Examples)
{
    auto sma = build_ma_in(5, sma_init());
    sma.evaluate(V{1, 2, 3, 4, 5});
    EXPECT_NEAR(sma.output("value"), 3.0, 1e-15);

    auto ema = build_ma_in(2, ema_init());
    ema.evaluate(V{1, 2});
    EXPECT_NEAR(ema.output("value"), 1.75, 1e-15);

    auto p0 = build_ma_in(7, InitSpec{InitScheme::PerturbedReplicate, oracle::MaType::Ema, 0.0});
    auto r = build_ma_in(7, ema_init());
    EXPECT_EQ(parameters_to_string(p0.graph), parameters_to_string(r.graph));
}

TEST(MaIn, LongerInputUsesTrailingWindow)
{
    auto net = build_ma_in(2, sma_init(), 5);
    net.evaluate(V{100, 100, 100, 2, 4});
    EXPECT_EQ(net.output("value"), 3.0);
}

TEST(MacdIn, ConstantInputGivesZero)
{
    auto net = build_macd_in(12, 26, 9, ema_init());
    net.evaluate(V(net.input_len, 42.0));
    for (const char* o : {"macd", "signal", "histogram"})
        EXPECT_NEAR(net.output(o), 0.0, 1e-12) << o;
}

TEST(MacdIn, SignFlagNegates)
{
    const auto x = testutil::random_walk(40, 3);
    auto a = build_macd_in(5, 12, 4, ema_init(), oracle::MacdSign::SlowMinusFast);
    auto b = build_macd_in(5, 12, 4, ema_init(), oracle::MacdSign::FastMinusSlow);
    const V window(x.end() - static_cast<long>(a.input_len), x.end());
    a.evaluate(window);
    b.evaluate(window);
    for (const char* o : {"macd", "signal", "histogram"})
        EXPECT_EQ(a.output(o), -b.output(o)) << o;
}

TEST(MacdIn, InvalidWindows)
{
    EXPECT_THROW(build_macd_in(26, 12, 9, ema_init()), ConfigError);
    EXPECT_THROW(build_macd_in(12, 26, 9, ema_init(), oracle::MacdSign::SlowMinusFast, 20), ConfigError);
}

TEST(MacdIn, ReplicatesOracle)
{
    const auto s = testutil::random_walk(300, 11);
    auto net = build_macd_in(12, 26, 9, ema_init());
    const auto r = verify_replication(net, OracleKind::Macd, oracle::SeriesView{s}, 1e-9);
    EXPECT_TRUE(r.pass) << r.max_abs_err;
    EXPECT_EQ(r.windows_checked, 300u - net.input_len + 1);
}

TEST(RsiRocIn, Examples)
{
    V up(15);
    std::iota(up.begin(), up.end(), 10.0);
    auto rsi = build_rsi_in(14, sma_init());
    rsi.evaluate(up);
    EXPECT_NEAR(rsi.output("value"), 100.0, 1e-6);

    auto roc = build_roc_in(5, sma_init());
    roc.evaluate(V(6, 9.0));
    EXPECT_EQ(roc.output("value"), 0.0);
    EXPECT_THROW(build_rsi_in(0, sma_init()), ConfigError);
}

TEST(StochCciIn, Examples)
{
    auto st = build_stoch_in(3, 1, sma_init());
    const V high{5, 6, 7}, low{1, 2, 3}, close{2, 3, 7};
    const std::span<const double> ch[3] = {high, low, close};
    st.evaluate(ch);
    EXPECT_NEAR(st.output("k"), 100.0, 1e-6);

    auto cci = build_cci_in(4, sma_init());
    const V c(4, 10.0);
    const std::span<const double> flat[3] = {c, c, c};
    cci.evaluate(flat);
    EXPECT_EQ(cci.output("value"), 0.0);

    const std::span<const double> two[2] = {c, c};
    EXPECT_THROW(cci.evaluate(two), DimensionError);
}

TEST(Replication, AllKindsOnRandomSeries)
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto b = testutil::random_ohlc(300, seed);
        const auto view = ohlc_view(b);
        for (std::size_t n : {2, 5, 12, 26}) {
            auto sma = build_ma_in(n, sma_init());
            EXPECT_TRUE(verify_replication(sma, OracleKind::Sma, view, 1e-9).pass);
            auto ema = build_ma_in(n, ema_init());
            EXPECT_TRUE(verify_replication(ema, OracleKind::EmaTruncated, view, 1e-9).pass);
            auto rsi = build_rsi_in(n, sma_init());
            EXPECT_TRUE(verify_replication(rsi, OracleKind::Rsi, view, 1e-6).pass);
            auto roc = build_roc_in(n, sma_init());
            EXPECT_TRUE(verify_replication(roc, OracleKind::Roc, view, 1e-6).pass);
            auto st = build_stoch_in(n, 3, sma_init());
            EXPECT_TRUE(verify_replication(st, OracleKind::Stoch, view, 1e-6).pass);
            auto cci = build_cci_in(n, sma_init());
            EXPECT_TRUE(verify_replication(cci, OracleKind::Cci, view, 1e-6).pass);
        }
        for (auto init : {sma_init(), ema_init()}) {
            auto m = build_macd_in(2, 5, 3, init);
            EXPECT_TRUE(verify_replication(m, OracleKind::Macd, view, 1e-9).pass);
        }
    }
}

TEST(Replication, SmaTightTolerance)
{
    const auto s = testutil::random_walk(200, 8);
    auto net = build_ma_in(5, sma_init());
    EXPECT_TRUE(verify_replication(net, OracleKind::Sma, oracle::SeriesView{s}, 1e-12).pass);
}

TEST(Replication, CorruptedWeightFailsAtFirstBar)
{
    const auto s = testutil::random_walk(300, 5);
    auto net = build_macd_in(12, 26, 9, ema_init());
    net.graph.param(ParamId{0}).tensor.values()[3] += 1e-3;
    const auto r = verify_replication(net, OracleKind::Macd, oracle::SeriesView{s}, 1e-9);
    EXPECT_FALSE(r.pass);
    ASSERT_TRUE(r.first_fail_index.has_value());
    EXPECT_EQ(*r.first_fail_index, net.input_len - 1);
}

TEST(Replication, RejectsTrainedOrRandomNets)
{
    const auto s = testutil::random_walk(100, 5);
    auto trained = build_ma_in(5, sma_init());
    trained.trained = true;
    EXPECT_THROW(verify_replication(trained, OracleKind::Sma, oracle::SeriesView{s}, 1e-9), UsageError);
    auto random = build_ma_in(5, InitSpec{InitScheme::RandomUniform});
    EXPECT_THROW(verify_replication(random, OracleKind::Sma, oracle::SeriesView{s}, 1e-9), UsageError);
    auto perturbed = build_ma_in(5, InitSpec{InitScheme::PerturbedReplicate, oracle::MaType::Sma, 0.1});
    EXPECT_THROW(verify_replication(perturbed, OracleKind::Sma, oracle::SeriesView{s}, 1e-9), UsageError);
    auto rsi = build_rsi_in(5, sma_init());
    EXPECT_THROW(verify_replication(rsi, OracleKind::Macd, oracle::SeriesView{s}, 1e-9), UsageError);
}

TEST(QNet, ParameterCounts)
{
    auto q1 = build_q_in(52, 26, 3, 1, ema_init());
    EXPECT_EQ(q1.graph.num_trainable_values(), 52u * 26 + 26 * 3);
    EXPECT_EQ(q1.graph.num_trainable_values(), 1430u);
    auto q2 = build_q_in(52, 26, 3, 2, ema_init());
    EXPECT_EQ(q2.graph.num_trainable_values(), 2u * 52 * 26 + 78);
    EXPECT_THROW(build_q_in(52, 0, 3, 1, ema_init()), ConfigError);
    EXPECT_THROW(build_q_in(52, 26, 4, 1, ema_init()), ConfigError);
}

TEST(QNet, ZeroInputGivesZero)
{
    for (auto init : {ema_init(), InitSpec{InitScheme::RandomUniform}}) {
        auto q = build_q_in(52, 26, 3, 1, init, ops::ActivationKind::Identity, 4);
        const auto v = q_values(q, V(52, 0.0));
        for (double x : v)
            EXPECT_EQ(x, 0.0);
    }
}

TEST(QNet, HiddenWindowsSpread)
{
    const auto w = qnet_hidden_windows(52, 26);
    EXPECT_EQ(w.front(), 2u);
    EXPECT_EQ(w.back(), 27u);
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        EXPECT_LT(w[i], w[i + 1]);
    const auto few = qnet_hidden_windows(52, 5);
    EXPECT_EQ(few.front(), 2u);
    EXPECT_EQ(few.back(), 26u);
}

TEST(QNet, MacdInEmbedsIntoQnet)
{
    // Hidden units with EMA profiles of windows 12 and 26 plus a +-1 read-out
    // reproduce the MACD-IN line.
    const auto s = testutil::random_walk(200, 21);
    auto q = build_q_in(52, 26, 3, 1, ema_init());
    const auto windows = qnet_hidden_windows(52, 26);
    const auto f = static_cast<std::size_t>(std::find(windows.begin(), windows.end(), 12u) - windows.begin());
    const auto sl = static_cast<std::size_t>(std::find(windows.begin(), windows.end(), 26u) - windows.begin());
    ASSERT_LT(f, windows.size());
    ASSERT_LT(sl, windows.size());
    auto& out0 = q.graph.param(q.graph.node(q.outputs.at("q_sell")).attrs.weights).tensor;
    std::fill(out0.values().begin(), out0.values().end(), 0.0);
    out0.values()[sl] = 1.0;
    out0.values()[f] = -1.0;

    auto m = build_macd_in(12, 26, 1, ema_init(), oracle::MacdSign::SlowMinusFast, 52);
    for (std::size_t t = 51; t < s.size(); ++t) {
        const V window(s.begin() + static_cast<long>(t - 51), s.begin() + static_cast<long>(t + 1));
        m.evaluate(window);
        EXPECT_NEAR(q_values(q, window)[1], m.output("macd"), 1e-9);
    }
}

TEST(QNet, ReplicateReadoutIsCrossover)
{
    auto q = build_q_in(52, 26, 3, 1, ema_init());
    V rising(52);
    std::iota(rising.begin(), rising.end(), 1.0);
    const auto v = q_values(q, rising);
    EXPECT_GT(v[0], 0.0);
    EXPECT_LT(v[1], 0.0);
    EXPECT_EQ(v[2], 0.0);
}

TEST(Spec, RoundTripTopology)
{
    std::vector<IndicatorNetworkSpec> specs;
    for (auto kind : {IndicatorKind::MA, IndicatorKind::EMA, IndicatorKind::RSI, IndicatorKind::ROC, IndicatorKind::CCI}) {
        IndicatorNetworkSpec s;
        s.kind = kind;
        s.windows["n"] = 7;
        s.eps = 1e-8;
        specs.push_back(s);
    }
    IndicatorNetworkSpec macd;
    macd.kind = IndicatorKind::MACD;
    macd.windows = {{"fast", 3}, {"slow", 8}, {"signal", 4}};
    macd.sign = oracle::MacdSign::FastMinusSlow;
    specs.push_back(macd);
    IndicatorNetworkSpec st;
    st.kind = IndicatorKind::STOCH;
    st.windows = {{"n", 5}, {"m", 3}};
    st.input_len = 12;
    specs.push_back(st);
    IndicatorNetworkSpec q;
    q.kind = IndicatorKind::QNET;
    q.hidden = 6;
    q.input_len = 20;
    q.feature_dim = 2;
    q.activation = ops::ActivationKind::Relu;
    q.init = InitSpec{InitScheme::PerturbedReplicate, oracle::MaType::Sma, 0.01};
    q.seed = 99;
    specs.push_back(q);

    for (const auto& s : specs) {
        const auto text = serialize(s);
        const auto back = parse_network_spec(text);
        EXPECT_EQ(serialize(back), text);
        auto a = build_network(s);
        auto b = build_network(back);
        EXPECT_EQ(a.graph.topology_signature(), b.graph.topology_signature()) << text;
        EXPECT_EQ(parameters_to_string(a.graph), parameters_to_string(b.graph)) << text;
    }
}

TEST(Spec, RejectsBadDocuments)
{
    EXPECT_THROW(parse_network_spec("window.n = 3\n"), ConfigError);
    EXPECT_THROW(parse_network_spec("kind = MA\nwindow.n = 3\nbogus = 1\n"), ConfigError);
    EXPECT_THROW(parse_network_spec("kind = MA\n"), ConfigError);
    EXPECT_THROW(parse_network_spec("kind = MA\nwindow.n = 0\n"), ConfigError);
    EXPECT_THROW(parse_network_spec("kind = QNET\n"), ConfigError);
    EXPECT_THROW(parse_network_spec("kind = MA\nwindow.n = 3\neps = 0\n"), ConfigError);
}
