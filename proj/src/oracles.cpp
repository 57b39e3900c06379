#include "tinlab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tinlab/errors.hpp"

namespace tinlab::oracle {

namespace {

void require_window(std::size_t n, std::size_t len, const char* what)
{
    if (n < 1 || n > len)
        throw DimensionError(std::string(what) + ": window " + std::to_string(n) + " out of range for series of length " +
                             std::to_string(len));
}

void require_aligned(std::size_t a, std::size_t b, const char* what)
{
    if (a != b)
        throw DimensionError(std::string(what) + ": channel lengths differ (" + std::to_string(a) + " vs " +
                             std::to_string(b) + ")");
}

std::vector<double> ma(std::span<const double> s, std::size_t n, MaType type)
{
    return type == MaType::Sma ? sma(s, n) : ema(s, n, EmaMode::Truncated);
}

} // namespace

std::size_t SeriesView::size() const
{
    if (!values.empty())
        return values.size();
    return close.size();
}

void SeriesView::validate() const
{
    const std::size_t n = size();
    for (auto ch : {values, high, low, close, volume})
        if (!ch.empty())
            require_aligned(ch.size(), n, "series");
    if (!high.empty() && !low.empty())
        for (std::size_t i = 0; i < n; ++i)
            if (low[i] > high[i])
                throw DomainError("series: low exceeds high at index " + std::to_string(i));
}

std::vector<double> sma(std::span<const double> s, std::size_t n)
{
    require_window(n, s.size(), "sma");
    std::vector<double> out;
    out.reserve(s.size() - n + 1);
    for (std::size_t t = n - 1; t < s.size(); ++t) {
        double sum = 0.0;
        for (std::size_t j = t + 1 - n; j <= t; ++j)
            sum += s[j];
        out.push_back(sum / static_cast<double>(n));
    }
    return out;
}

std::vector<double> ema(std::span<const double> s, std::size_t n, EmaMode mode)
{
    if (mode == EmaMode::Truncated)
        require_window(n, s.size(), "ema");
    else if (n < 1 || s.empty())
        throw DimensionError("ema: needs a positive window and a nonempty series");
    const double alpha = 2.0 / (static_cast<double>(n) + 1.0);
    std::vector<double> out;
    if (mode == EmaMode::Recursive) {
        out.reserve(s.size());
        double e = s[0];
        out.push_back(e);
        for (std::size_t t = 1; t < s.size(); ++t) {
            e = alpha * s[t] + (1.0 - alpha) * e;
            out.push_back(e);
        }
        return out;
    }
    // lag k weight: alpha (1 - alpha)^k, renormalized over the window
    std::vector<double> lag_weight(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        lag_weight[k] = alpha * std::pow(1.0 - alpha, static_cast<double>(k));
        total += lag_weight[k];
    }
    for (auto& w : lag_weight)
        w /= total;
    out.reserve(s.size() - n + 1);
    for (std::size_t t = n - 1; t < s.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            acc += lag_weight[k] * s[t - k];
        out.push_back(acc);
    }
    return out;
}

MacdResult macd(std::span<const double> s, std::size_t fast, std::size_t slow, std::size_t sig, MaType ma_type,
                MacdSign sign)
{
    if (fast < 1)
        throw ConfigError("macd: fast window must be at least 1");
    if (fast >= slow)
        throw ConfigError("macd: fast window must be shorter than slow window");
    if (sig < 1)
        throw ConfigError("macd: signal window must be at least 1");
    if (s.size() < slow + sig - 1)
        throw DimensionError("macd: series of length " + std::to_string(s.size()) + " shorter than slow + signal - 1");

    const auto fast_ma = ma(s, fast, ma_type);
    const auto slow_ma = ma(s, slow, ma_type);
    // fast_ma[i] <-> bar i + fast - 1, slow_ma[i] <-> bar i + slow - 1
    std::vector<double> line(slow_ma.size());
    for (std::size_t i = 0; i < slow_ma.size(); ++i) {
        const double f = fast_ma[i + slow - fast];
        line[i] = sign == MacdSign::SlowMinusFast ? slow_ma[i] - f : f - slow_ma[i];
    }
    MacdResult r;
    r.signal = ma(line, sig, ma_type);
    r.macd.assign(line.begin() + static_cast<std::ptrdiff_t>(sig - 1), line.end());
    r.histogram.resize(r.signal.size());
    for (std::size_t i = 0; i < r.signal.size(); ++i)
        r.histogram[i] = r.macd[i] - r.signal[i];
    return r;
}

std::vector<double> rsi(std::span<const double> s, std::size_t n, double eps)
{
    if (n < 1 || s.size() < n + 1)
        throw DimensionError("rsi: window " + std::to_string(n) + " needs at least " + std::to_string(n + 1) +
                             " prices");
    std::vector<double> out;
    out.reserve(s.size() - n);
    for (std::size_t t = n; t < s.size(); ++t) {
        double gains = 0.0;
        double losses = 0.0;
        for (std::size_t j = t + 1 - n; j <= t; ++j) {
            const double d = s[j] - s[j - 1];
            if (d > 0.0)
                gains += d;
            else
                losses -= d;
        }
        const double g = gains / static_cast<double>(n);
        const double l = losses / static_cast<double>(n);
        out.push_back(100.0 * g / (g + l + eps));
    }
    return out;
}

std::vector<double> roc(std::span<const double> s, std::size_t n, double eps)
{
    if (n < 1 || s.size() <= n)
        throw DimensionError("roc: lag " + std::to_string(n) + " out of range for series of length " +
                             std::to_string(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!(s[i] > 0.0))
            throw DomainError("roc: nonpositive price at index " + std::to_string(i));
    std::vector<double> out;
    out.reserve(s.size() - n);
    for (std::size_t t = n; t < s.size(); ++t)
        out.push_back(100.0 * (s[t] - s[t - n]) / (s[t - n] + eps));
    return out;
}

std::vector<double> stoch_k(std::span<const double> high, std::span<const double> low,
                            std::span<const double> close, std::size_t n, double eps)
{
    require_aligned(high.size(), close.size(), "stoch_k");
    require_aligned(low.size(), close.size(), "stoch_k");
    require_window(n, close.size(), "stoch_k");
    std::vector<double> out;
    out.reserve(close.size() - n + 1);
    for (std::size_t t = n - 1; t < close.size(); ++t) {
        double hh = high[t + 1 - n];
        double ll = low[t + 1 - n];
        for (std::size_t j = t + 2 - n; j <= t; ++j) {
            hh = std::max(hh, high[j]);
            ll = std::min(ll, low[j]);
        }
        if (hh < ll)
            throw DomainError("stoch_k: window high below window low at index " + std::to_string(t));
        out.push_back(100.0 * (close[t] - ll) / (hh - ll + eps));
    }
    return out;
}

std::vector<double> stoch_d(std::span<const double> k_series, std::size_t m)
{
    return sma(k_series, m);
}

std::vector<double> cci(std::span<const double> high, std::span<const double> low, std::span<const double> close,
                        std::size_t n, double eps)
{
    require_aligned(high.size(), close.size(), "cci");
    require_aligned(low.size(), close.size(), "cci");
    require_window(n, close.size(), "cci");
    std::vector<double> tp(close.size());
    for (std::size_t i = 0; i < tp.size(); ++i)
        tp[i] = (high[i] + low[i] + close[i]) / 3.0;
    std::vector<double> out;
    out.reserve(tp.size() - n + 1);
    for (std::size_t t = n - 1; t < tp.size(); ++t) {
        double sum = 0.0;
        for (std::size_t j = t + 1 - n; j <= t; ++j)
            sum += tp[j];
        const double mean = sum / static_cast<double>(n);
        double dev = 0.0;
        for (std::size_t j = t + 1 - n; j <= t; ++j)
            dev += std::abs(tp[j] - mean);
        const double mad = dev / static_cast<double>(n);
        out.push_back((tp[t] - mean) / (kCciConstant * (mad + eps)));
    }
    return out;
}

std::vector<double> obv(std::span<const double> close, std::span<const double> volume)
{
    require_aligned(close.size(), volume.size(), "obv");
    if (close.empty())
        throw DimensionError("obv: empty series");
    for (std::size_t i = 0; i < volume.size(); ++i)
        if (volume[i] < 0.0)
            throw DomainError("obv: negative volume at index " + std::to_string(i));
    std::vector<double> out(close.size());
    out[0] = 0.0;
    for (std::size_t t = 1; t < close.size(); ++t) {
        const double d = close[t] - close[t - 1];
        const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        out[t] = out[t - 1] + sign * volume[t];
    }
    return out;
}

std::size_t sma_first_index(std::size_t n) { return n - 1; }
std::size_t ema_first_index(std::size_t n, EmaMode mode) { return mode == EmaMode::Recursive ? 0 : n - 1; }
std::size_t macd_first_index(std::size_t slow, std::size_t sig) { return slow + sig - 2; }
std::size_t rsi_first_index(std::size_t n) { return n; }
std::size_t roc_first_index(std::size_t n) { return n; }
std::size_t stoch_k_first_index(std::size_t n) { return n - 1; }
std::size_t stoch_d_first_index(std::size_t n, std::size_t m) { return n + m - 2; }
std::size_t cci_first_index(std::size_t n) { return n - 1; }

} // namespace tinlab::oracle
