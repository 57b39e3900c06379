#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace tinlab::testutil {

// Largest absolute difference between each oracle and its naive counterpart,
// keyed by indicator name, over `series` seeded random OHLCV series with
// random windows. Misaligned or missing values count as infinite error.
std::map<std::string, double> oracle_crosscheck(std::size_t series, std::uint64_t seed);

} // namespace tinlab::testutil
