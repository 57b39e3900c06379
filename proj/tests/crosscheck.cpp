#include "crosscheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>

#include "naive.hpp"
#include "testing.hpp"
#include "tinlab/oracles.hpp"

namespace tinlab::testutil {

namespace {

// `got` starts at bar `first`; `want` is full length with NaN warm-up.
double compare(std::span<const double> got, std::size_t first, const std::vector<double>& want)
{
    const double inf = std::numeric_limits<double>::infinity();
    if (first + got.size() != want.size())
        return inf;
    for (std::size_t t = 0; t < first; ++t)
        if (!std::isnan(want[t]))
            return inf;
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double d = std::abs(got[i] - want[first + i]);
        if (!std::isfinite(d))
            return inf;
        worst = std::max(worst, d);
    }
    return worst;
}

} // namespace

std::map<std::string, double> oracle_crosscheck(std::size_t series, std::uint64_t seed)
{
    namespace o = tinlab::oracle;
    std::map<std::string, double> worst;
    auto note = [&](const std::string& k, double e) { worst[k] = std::max(worst[k], e); };

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < series; ++i) {
        const std::size_t len = std::uniform_int_distribution<std::size_t>(60, 300)(rng);
        const auto bars = random_ohlc(len, rng());
        const auto& c = bars.close;
        auto window = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
        const int n = window(1, 30);
        const int fast = window(1, 15);
        const int slow = window(fast + 1, 30);
        const int sig = window(1, 12);
        const int m = window(1, 5);
        const double eps = i % 2 ? o::kOracleEps : o::kTrainingEps;

        note("sma", compare(o::sma(c, n), o::sma_first_index(n), naive::sma(c, n)));
        note("ema_truncated", compare(o::ema(c, n, o::EmaMode::Truncated),
                                      o::ema_first_index(n, o::EmaMode::Truncated), naive::ema_truncated(c, n)));
        note("ema_recursive", compare(o::ema(c, n, o::EmaMode::Recursive),
                                      o::ema_first_index(n, o::EmaMode::Recursive), naive::ema_recursive(c, n)));
        for (const bool sma_family : {false, true})
            for (const bool conventional : {false, true}) {
                const auto r = o::macd(c, fast, slow, sig, sma_family ? o::MaType::Sma : o::MaType::Ema,
                                       conventional ? o::MacdSign::FastMinusSlow : o::MacdSign::SlowMinusFast);
                const auto want = naive::macd(c, fast, slow, sig, sma_family, conventional);
                const auto first = o::macd_first_index(slow, sig);
                note("macd", std::max({compare(r.macd, first, want.line), compare(r.signal, first, want.signal),
                                       compare(r.histogram, first, want.hist)}));
            }
        note("rsi", compare(o::rsi(c, n, eps), o::rsi_first_index(n), naive::rsi(c, n, eps)));
        note("roc", compare(o::roc(c, n, eps), o::roc_first_index(n), naive::roc(c, n, eps)));
        const auto k = o::stoch_k(bars.high, bars.low, c, n, eps);
        note("stoch_k", compare(k, o::stoch_k_first_index(n), naive::stoch_k(bars.high, bars.low, c, n, eps)));
        note("stoch_d", compare(o::stoch_d(k, m), o::stoch_d_first_index(n, m),
                                naive::stoch_d(bars.high, bars.low, c, n, m, eps)));
        note("cci", compare(o::cci(bars.high, bars.low, c, n, eps), o::cci_first_index(n),
                            naive::cci(bars.high, bars.low, c, n, eps)));
        note("obv", compare(o::obv(c, bars.volume), 0, naive::obv(c, bars.volume)));
    }
    return worst;
}

} // namespace tinlab::testutil
