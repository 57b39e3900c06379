#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tinlab/dqn.hpp"
#include "tinlab/kv.hpp"
#include "tinlab/metrics.hpp"

namespace tinlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

// Everything a train/backtest run depends on. Built from a flat key-value
// document: defaults, then the --config file, then command-line flags.
struct RunConfig {
    std::string data_dir;                     // empty: $TINLAB_DATA_DIR, else data/fixtures
    std::vector<std::string> symbols;         // empty: every *.csv in data_dir
    std::string out_dir = "runs/default";
    std::uint64_t seed = 0;
    std::size_t parallel = 1;

    std::vector<std::string> variants;        // trained networks: in-price, in-price-obv
    std::vector<std::string> strategies;      // backtested strategies, report column order

    double train_fraction = 0.7;
    std::optional<Date> train_end;
    std::optional<Date> test_start;

    EnvConfig env;
    DqnConfig dqn;
    IndicatorNetworkSpec qnet;                // QNET fields; input_len and feature_dim come from the data

    std::size_t macd_fast = 12;
    std::size_t macd_slow = 26;
    std::size_t macd_signal = 9;

    bool annualize = false;
    bool svg = false;

    // Every accepted key with its default value.
    static KeyValueDoc defaults();
    // Rejects unknown keys and invalid values with ConfigError.
    static RunConfig from_doc(const KeyValueDoc& doc);
};

// Strategy names accepted by backtest and their report column titles.
const std::vector<std::string>& strategy_names();
std::string strategy_title(const std::string& strategy);

std::string resolve_data_dir(const std::string& configured);
std::vector<std::string> discover_symbols(const std::string& data_dir);

// Row ranges (inclusive) used for training and for the out-of-sample test.
struct Split {
    std::size_t train_last = 0;
    std::size_t test_first = 0;
};
Split split_rows(const std::vector<Date>& dates, const RunConfig& cfg);

// Long while the MACD histogram (fast - slow) is above zero: Buy on an
// upward zero crossing, Sell on a downward one, Hold otherwise.
Policy macd_crossover_policy(std::span<const double> prices, std::size_t fast, std::size_t slow, std::size_t signal);

// Runs the command line; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tinlab::cli
