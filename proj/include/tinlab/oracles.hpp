#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Loop-based reference implementations of the classical indicators. These
// are the ground truth Indicator Networks are verified against, so they are
// written directly from the textbook definitions and share no code with the
// network builders.
//
// Every function returns only fully-warmed outputs; out[0] corresponds to the
// input bar returned by the matching *_first_index() helper.

namespace tinlab::oracle {

inline constexpr double kOracleEps = 1e-12;   // replication fidelity
inline constexpr double kTrainingEps = 1e-8;  // gradient stability
inline constexpr double kCciConstant = 0.015;

// Aligned price channels. `values` is the primary series; the OHLCV channels
// are optional and empty when absent.
struct SeriesView {
    std::span<const double> values;
    std::span<const double> high;
    std::span<const double> low;
    std::span<const double> close;
    std::span<const double> volume;

    std::size_t size() const;
    // Throws DimensionError on unequal channel lengths, DomainError on low > high.
    void validate() const;
};

enum class EmaMode { Recursive, Truncated };

// Moving-average family used inside MACD.
enum class MaType { Sma, Ema };

// Slow-minus-fast (the default) or the conventional fast-minus-slow.
enum class MacdSign { SlowMinusFast, FastMinusSlow };

std::vector<double> sma(std::span<const double> s, std::size_t n);

// Recursive: e_0 = p_0, e_t = a p_t + (1 - a) e_{t-1}, full length, any n >= 1.
// Truncated: window-local normalized geometric weights, length len - n + 1.
// a = 2 / (n + 1) in both modes.
std::vector<double> ema(std::span<const double> s, std::size_t n, EmaMode mode);

struct MacdResult {
    std::vector<double> macd;
    std::vector<double> signal;
    std::vector<double> histogram;
};

// All three lines are aligned to the first bar where the signal window is
// full (index slow + sig - 2).
MacdResult macd(std::span<const double> s, std::size_t fast, std::size_t slow, std::size_t sig,
                MaType ma = MaType::Ema, MacdSign sign = MacdSign::SlowMinusFast);

// Cutler (simple-average) RSI: 100 G / (G + L + eps).
std::vector<double> rsi(std::span<const double> s, std::size_t n, double eps = kOracleEps);

// 100 (p_t - p_{t-n}) / (p_{t-n} + eps)
std::vector<double> roc(std::span<const double> s, std::size_t n, double eps = kOracleEps);

// 100 (c_t - min_n low) / (max_n high - min_n low + eps)
std::vector<double> stoch_k(std::span<const double> high, std::span<const double> low,
                            std::span<const double> close, std::size_t n, double eps = kOracleEps);
std::vector<double> stoch_d(std::span<const double> k_series, std::size_t m);

// (TP_t - SMA_n(TP)) / (0.015 (MAD_n(TP) + eps)), TP = (H + L + C) / 3
std::vector<double> cci(std::span<const double> high, std::span<const double> low,
                        std::span<const double> close, std::size_t n, double eps = kOracleEps);

// obv_0 = 0, obv_t = obv_{t-1} + sign(c_t - c_{t-1}) v_t
std::vector<double> obv(std::span<const double> close, std::span<const double> volume);

std::size_t sma_first_index(std::size_t n);
std::size_t ema_first_index(std::size_t n, EmaMode mode);
std::size_t macd_first_index(std::size_t slow, std::size_t sig);
std::size_t rsi_first_index(std::size_t n);
std::size_t roc_first_index(std::size_t n);
std::size_t stoch_k_first_index(std::size_t n);
std::size_t stoch_d_first_index(std::size_t n, std::size_t m);
std::size_t cci_first_index(std::size_t n);

} // namespace tinlab::oracle
