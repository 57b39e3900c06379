#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tinlab/errors.hpp"

namespace tinlab {

using Date = std::chrono::year_month_day;

Date parse_date(const std::string& text);
std::string format_date(Date date);

struct OhlcvBar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double adj_close = 0.0;
    double volume = 0.0;

    friend bool operator==(const OhlcvBar&, const OhlcvBar&) = default;
};

// A CSV data row that failed to parse or violated a bar invariant. `row` is
// the 1-based line number in the file (the header is line 1).
class RowError : public FormatError {
public:
    RowError(std::size_t row, const std::string& what)
        : FormatError("row " + std::to_string(row) + ": " + what)
        , row_(row)
    {
    }
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

// Parses `Date,Open,High,Low,Close,Adj Close,Volume` CSV (column names are
// matched case-insensitively, in any order; extra columns are ignored).
// Returns bars sorted by date. Duplicate dates are rejected.
std::vector<OhlcvBar> parse_csv(const std::string& text);
std::vector<OhlcvBar> load_csv(const std::string& path);

// Writes the canonical header and full-precision values; parse_csv(emit_csv(b)) == b.
std::string emit_csv(std::span<const OhlcvBar> bars);

// On-balance volume over adjusted closes.
std::vector<double> compute_obv(std::span<const OhlcvBar> bars);

// Per-date model inputs. Rows are stored row-major, one entry per channel.
struct FeatureMatrix {
    std::string symbol;
    std::vector<std::string> channels;
    std::vector<Date> dates;
    std::vector<double> values;

    std::size_t rows() const { return dates.size(); }
    std::size_t width() const { return channels.size(); }
    double at(std::size_t row, std::size_t channel) const { return values[row * channels.size() + channel]; }
    std::size_t channel_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

// Supported channel names: "price" (adjusted close) and "obv".
FeatureMatrix to_feature_matrix(std::span<const OhlcvBar> bars, const std::vector<std::string>& channels,
                                std::string symbol = {});

enum class Normalization { LastPriceRelative, Raw };

// Observation for the `len` rows ending at row t, concatenated channel-major.
// Price entries are divided by the window's final price; every other channel
// is divided by max(1, max |value| in the window).
std::vector<double> window(const FeatureMatrix& fm, std::size_t t, std::size_t len,
                           Normalization norm = Normalization::LastPriceRelative);
void window_into(const FeatureMatrix& fm, std::size_t t, std::size_t len, Normalization norm, std::span<double> out);

enum class SyntheticShape { Rising, Sine, RandomWalk };

struct SyntheticSpec {
    SyntheticShape shape = SyntheticShape::Sine;
    std::size_t rows = 600;
    double start_price = 100.0;
    double amplitude = 0.05;                  // Sine: relative amplitude
    std::size_t period = 20;                  // Sine: bars per cycle
    double drift = 0.001;                     // Rising: mean per-bar growth; RandomWalk: log drift
    double volatility = 0.015;                // RandomWalk: log-return stddev
    std::uint64_t seed = 0;
    Date first_date{std::chrono::year{2015}, std::chrono::month{1}, std::chrono::day{2}};
};

// Deterministic weekday-dated bars. Close and adjusted close coincide; open
// is the previous close and the high/low band brackets both.
std::vector<OhlcvBar> synthetic_bars(const SyntheticSpec& spec);

SyntheticShape parse_synthetic_shape(const std::string& s);

} // namespace tinlab
