#include "naive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tinlab::naive {

namespace {

const double nan = std::numeric_limits<double>::quiet_NaN();

double window_sma(const Series& s, int t, int n)
{
    double total = 0.0;
    for (int i = t - n + 1; i <= t; ++i)
        total = total + s[i];
    return total / n;
}

double window_ema(const Series& s, int t, int n)
{
    const double r = 1.0 - 2.0 / (n + 1.0);
    double num = 0.0;
    double den = 0.0;
    for (int lag = 0; lag < n; ++lag) {
        double w = 1.0;
        for (int j = 0; j < lag; ++j)
            w *= r;
        num += w * s[t - lag];
        den += w;
    }
    return num / den;
}

} // namespace

Series sma(const Series& s, int n)
{
    Series out(s.size(), nan);
    for (int t = n - 1; t < static_cast<int>(s.size()); ++t)
        out[t] = window_sma(s, t, n);
    return out;
}

Series ema_truncated(const Series& s, int n)
{
    Series out(s.size(), nan);
    for (int t = n - 1; t < static_cast<int>(s.size()); ++t)
        out[t] = window_ema(s, t, n);
    return out;
}

Series ema_recursive(const Series& s, int n)
{
    const double a = 2.0 / (n + 1.0);
    Series out(s.size(), nan);
    for (std::size_t t = 0; t < s.size(); ++t)
        out[t] = t == 0 ? s[0] : a * s[t] + (1.0 - a) * out[t - 1];
    return out;
}

Macd macd(const Series& s, int fast, int slow, int sig, bool sma_family, bool fast_minus_slow)
{
    auto ma = [&](const Series& x, int t, int n) { return sma_family ? window_sma(x, t, n) : window_ema(x, t, n); };
    const int len = static_cast<int>(s.size());
    Series line(len, nan);
    for (int t = slow - 1; t < len; ++t) {
        const double d = ma(s, t, slow) - ma(s, t, fast);
        line[t] = fast_minus_slow ? -d : d;
    }
    Macd r{Series(len, nan), Series(len, nan), Series(len, nan)};
    for (int t = slow + sig - 2; t < len; ++t) {
        r.line[t] = line[t];
        r.signal[t] = ma(line, t, sig);
        r.hist[t] = r.line[t] - r.signal[t];
    }
    return r;
}

Series rsi(const Series& s, int n, double eps)
{
    Series out(s.size(), nan);
    for (int t = n; t < static_cast<int>(s.size()); ++t) {
        double up = 0.0;
        double down = 0.0;
        for (int i = t - n + 1; i <= t; ++i) {
            up += std::max(s[i] - s[i - 1], 0.0);
            down += std::max(s[i - 1] - s[i], 0.0);
        }
        up /= n;
        down /= n;
        out[t] = 100.0 * up / (up + down + eps);
    }
    return out;
}

Series roc(const Series& s, int n, double eps)
{
    Series out(s.size(), nan);
    for (int t = n; t < static_cast<int>(s.size()); ++t)
        out[t] = 100.0 * (s[t] - s[t - n]) / (s[t - n] + eps);
    return out;
}

Series stoch_k(const Series& h, const Series& l, const Series& c, int n, double eps)
{
    Series out(c.size(), nan);
    for (int t = n - 1; t < static_cast<int>(c.size()); ++t) {
        const double hh = *std::max_element(h.begin() + t - n + 1, h.begin() + t + 1);
        const double ll = *std::min_element(l.begin() + t - n + 1, l.begin() + t + 1);
        out[t] = 100.0 * (c[t] - ll) / (hh - ll + eps);
    }
    return out;
}

Series stoch_d(const Series& h, const Series& l, const Series& c, int n, int m, double eps)
{
    const Series k = stoch_k(h, l, c, n, eps);
    Series out(c.size(), nan);
    for (int t = n + m - 2; t < static_cast<int>(c.size()); ++t)
        out[t] = window_sma(k, t, m);
    return out;
}

Series cci(const Series& h, const Series& l, const Series& c, int n, double eps)
{
    Series tp(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        tp[i] = (h[i] + l[i] + c[i]) / 3.0;
    Series out(c.size(), nan);
    for (int t = n - 1; t < static_cast<int>(c.size()); ++t) {
        const double mu = window_sma(tp, t, n);
        double dev = 0.0;
        for (int i = t - n + 1; i <= t; ++i)
            dev += std::fabs(tp[i] - mu);
        out[t] = (tp[t] - mu) / (0.015 * (dev / n + eps));
    }
    return out;
}

Series obv(const Series& c, const Series& v)
{
    Series out(c.size(), 0.0);
    for (std::size_t t = 1; t < c.size(); ++t) {
        double step = 0.0;
        if (c[t] > c[t - 1])
            step = v[t];
        if (c[t] < c[t - 1])
            step = -v[t];
        out[t] = out[t - 1] + step;
    }
    return out;
}

} // namespace tinlab::naive
