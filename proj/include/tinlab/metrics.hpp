#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tinlab/trading_env.hpp"

namespace tinlab {

inline constexpr double kTradingDaysPerYear = 252.0;

// r_t = e_t / e_{t-1} - 1. Throws DomainError on nonpositive equity and
// DimensionError on fewer than two points.
std::vector<double> simple_returns(std::span<const double> equity);

// mean / sample std (n - 1), risk-free rate 0. nullopt when fewer than two
// returns or zero variance (a deviation under 1e-12 max|r| counts as zero).
std::optional<double> sharpe(std::span<const double> returns, bool annualize = false);

// mean / sqrt(mean(min(r, 0)^2)). nullopt when fewer than two returns or no
// downside.
std::optional<double> sortino(std::span<const double> returns, bool annualize = false);

double cumulative_sum(std::span<const double> returns);

struct StrategyMetrics {
    std::string name;
    std::optional<double> sharpe;
    std::optional<double> sortino;
    double cumulative_sum = 0.0;
};

struct SymbolMetrics {
    std::string symbol;
    std::vector<StrategyMetrics> strategies;  // report strategy order
};

struct PerformanceReport {
    std::vector<std::string> strategies;
    std::vector<StrategyMetrics> overall;
    std::vector<SymbolMetrics> per_symbol;
    std::vector<std::string> warnings;
    bool annualized = false;

    // Equal-weight daily returns behind the overall rows.
    std::vector<Date> dates;
    std::map<std::string, std::vector<double>> daily_returns;
};

inline const char* const kReportRows[3] = {"Sharpe Ratio", "Sortino Ratio", "Cumulative Sum"};

// symbol -> strategy -> episode
using ResultSet = std::map<std::string, std::map<std::string, EpisodeResult>>;

// Overall rows are computed on the per-date average of each symbol's daily
// return (symbols without a return on a date do not count toward it).
// Symbols with an episode shorter than two equity points are dropped with a
// warning. `strategy_order` defaults to alphabetical; every symbol must
// report every strategy.
PerformanceReport build_report(const ResultSet& results, bool annualize = false,
                               std::vector<std::string> strategy_order = {});

// `Metric,<strategy>...` with rows Sharpe Ratio, Sortino Ratio, Cumulative Sum.
// Undefined cells are written as NA.
std::string overall_csv(const PerformanceReport& report);
// `Symbol,<strategy> Sharpe,<strategy> Sortino,...`
std::string per_symbol_csv(const PerformanceReport& report);
// Both tables, column-aligned.
std::string report_text(const PerformanceReport& report);
// `date,<strategy>...` cumulative sum of the overall daily returns.
std::string cumulative_csv(const PerformanceReport& report);
// Line chart of the cumulative overall returns.
std::string cumulative_svg(const PerformanceReport& report);

} // namespace tinlab
