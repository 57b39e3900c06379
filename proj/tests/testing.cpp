#include "testing.hpp"

#include <algorithm>
#include <cmath>

namespace tinlab::testutil {

std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double vol)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, vol);
    std::vector<double> p(n);
    double x = 100.0;
    for (auto& v : p) {
        v = x;
        x *= std::exp(z(rng));
    }
    return p;
}

Ohlc random_ohlc(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(0.0, 0.02);
    std::uniform_real_distribution<double> vol(1e5, 1e6);
    const auto c = random_walk(n, seed);
    Ohlc o;
    o.close = c;
    for (std::size_t i = 0; i < n; ++i) {
        o.high.push_back(c[i] * (1.0 + u(rng)));
        o.low.push_back(c[i] * (1.0 - u(rng)));
        o.volume.push_back(std::round(vol(rng)));
    }
    return o;
}

std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

} // namespace tinlab::testutil
