#include "tinlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "tinlab/errors.hpp"

namespace tinlab {

namespace {

double mean_of(std::span<const double> r)
{
    double s = 0.0;
    for (double v : r)
        s += v;
    return s / static_cast<double>(r.size());
}

// Deviations this small relative to the returns are rounding noise.
bool negligible(double dev, std::span<const double> r)
{
    double top = 0.0;
    for (double v : r)
        top = std::max(top, std::abs(v));
    return !(dev > 1e-12 * top);
}

std::optional<double> scaled(double ratio, bool annualize)
{
    if (!std::isfinite(ratio))
        return std::nullopt;
    return annualize ? ratio * std::sqrt(kTradingDaysPerYear) : ratio;
}

StrategyMetrics measure(const std::string& name, std::span<const double> r, bool annualize)
{
    return StrategyMetrics{name, sharpe(r, annualize), sortino(r, annualize), cumulative_sum(r)};
}

std::string cell(const std::optional<double>& v)
{
    if (!v)
        return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

std::string fixed(const std::optional<double>& v, int digits)
{
    if (!v)
        return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
    return buf;
}

std::string percent(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

// Left-aligned first column, right-aligned others.
std::string align(const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> width;
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (width.size() <= c)
                width.push_back(0);
            width[c] = std::max(width[c], row[c].size());
        }
    std::ostringstream os;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            const std::string pad(width[c] - row[c].size(), ' ');
            if (c == 0)
                line += row[c] + pad;
            else
                line += "  " + pad + row[c];
        }
        while (!line.empty() && line.back() == ' ')
            line.pop_back();
        os << line << '\n';
    }
    return os.str();
}

} // namespace

std::vector<double> simple_returns(std::span<const double> equity)
{
    if (equity.size() < 2)
        throw DimensionError("simple_returns: need at least two equity points, got " + std::to_string(equity.size()));
    for (std::size_t i = 0; i < equity.size(); ++i)
        if (!(equity[i] > 0.0))
            throw DomainError("simple_returns: nonpositive equity at index " + std::to_string(i));
    std::vector<double> r(equity.size() - 1);
    for (std::size_t t = 1; t < equity.size(); ++t)
        r[t - 1] = equity[t] / equity[t - 1] - 1.0;
    return r;
}

std::optional<double> sharpe(std::span<const double> returns, bool annualize)
{
    if (returns.size() < 2)
        return std::nullopt;
    const double m = mean_of(returns);
    double ss = 0.0;
    for (double v : returns)
        ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(returns.size() - 1));
    if (negligible(sd, returns))
        return std::nullopt;
    return scaled(m / sd, annualize);
}

std::optional<double> sortino(std::span<const double> returns, bool annualize)
{
    if (returns.size() < 2)
        return std::nullopt;
    double ss = 0.0;
    for (double v : returns)
        if (v < 0.0)
            ss += v * v;
    const double dd = std::sqrt(ss / static_cast<double>(returns.size()));
    if (negligible(dd, returns))
        return std::nullopt;
    return scaled(mean_of(returns) / dd, annualize);
}

double cumulative_sum(std::span<const double> returns)
{
    double s = 0.0;
    for (double v : returns)
        s += v;
    return s;
}

PerformanceReport build_report(const ResultSet& results, bool annualize, std::vector<std::string> strategy_order)
{
    if (results.empty())
        throw UsageError("build_report: no results");
    if (strategy_order.empty()) {
        std::set<std::string> names;
        for (const auto& [sym, by_strategy] : results)
            for (const auto& [name, _] : by_strategy)
                names.insert(name);
        strategy_order.assign(names.begin(), names.end());
    }
    if (std::set<std::string>(strategy_order.begin(), strategy_order.end()).size() != strategy_order.size())
        throw UsageError("build_report: duplicate strategy names");

    PerformanceReport report;
    report.strategies = strategy_order;
    report.annualized = annualize;

    // strategy -> date -> (sum, count)
    std::map<std::string, std::map<Date, std::pair<double, std::size_t>>> pooled;
    for (const auto& [sym, by_strategy] : results) {
        if (by_strategy.size() != strategy_order.size())
            throw UsageError("build_report: symbol " + sym + " reports " + std::to_string(by_strategy.size()) +
                             " strategies, expected " + std::to_string(strategy_order.size()));
        bool short_episode = false;
        for (const auto& name : strategy_order) {
            auto it = by_strategy.find(name);
            if (it == by_strategy.end())
                throw UsageError("build_report: symbol " + sym + " has no result for strategy " + name);
            if (it->second.equity_curve.size() < 2)
                short_episode = true;
        }
        if (short_episode) {
            report.warnings.push_back("symbol " + sym + " excluded: fewer than two equity points");
            continue;
        }
        SymbolMetrics row{sym, {}};
        for (const auto& name : strategy_order) {
            const EpisodeResult& ep = by_strategy.at(name);
            const auto r = simple_returns(ep.equity_curve);
            if (ep.dates.size() < r.size())
                throw DimensionError("build_report: symbol " + sym + " strategy " + name + " has fewer dates than returns");
            auto& by_date = pooled[name];
            for (std::size_t k = 0; k < r.size(); ++k) {
                auto& slot = by_date[ep.dates[k]];
                slot.first += r[k];
                ++slot.second;
            }
            row.strategies.push_back(measure(name, r, annualize));
        }
        report.per_symbol.push_back(std::move(row));
    }

    std::set<Date> all_dates;
    for (const auto& [name, by_date] : pooled)
        for (const auto& [d, _] : by_date)
            all_dates.insert(d);
    report.dates.assign(all_dates.begin(), all_dates.end());
    for (const auto& name : strategy_order) {
        std::vector<double> avg;
        const auto it = pooled.find(name);
        if (it != pooled.end())
            for (const auto& d : report.dates) {
                const auto slot = it->second.find(d);
                avg.push_back(slot == it->second.end() ? 0.0 : slot->second.first / static_cast<double>(slot->second.second));
            }
        report.overall.push_back(measure(name, avg, annualize));
        report.daily_returns[name] = std::move(avg);
    }
    return report;
}

std::string overall_csv(const PerformanceReport& report)
{
    std::ostringstream os;
    os << "Metric";
    for (const auto& s : report.strategies)
        os << ',' << csv_field(s);
    os << '\n' << kReportRows[0];
    for (const auto& m : report.overall)
        os << ',' << cell(m.sharpe);
    os << '\n' << kReportRows[1];
    for (const auto& m : report.overall)
        os << ',' << cell(m.sortino);
    os << '\n' << kReportRows[2];
    for (const auto& m : report.overall)
        os << ',' << cell(m.cumulative_sum);
    os << '\n';
    return os.str();
}

std::string per_symbol_csv(const PerformanceReport& report)
{
    std::ostringstream os;
    os << "Symbol";
    for (const auto& s : report.strategies)
        os << ',' << csv_field(s + " Sharpe") << ',' << csv_field(s + " Sortino");
    os << '\n';
    for (const auto& row : report.per_symbol) {
        os << csv_field(row.symbol);
        for (const auto& m : row.strategies)
            os << ',' << cell(m.sharpe) << ',' << cell(m.sortino);
        os << '\n';
    }
    return os.str();
}

std::string report_text(const PerformanceReport& report)
{
    std::ostringstream os;
    os << "Overall Performance Metrics" << (report.annualized ? " (annualized)" : "") << "\n\n";
    std::vector<std::vector<std::string>> t1;
    t1.push_back({""});
    for (const auto& s : report.strategies)
        t1[0].push_back(s);
    std::vector<std::string> sh{kReportRows[0]}, so{kReportRows[1]}, cs{kReportRows[2]};
    for (const auto& m : report.overall) {
        sh.push_back(fixed(m.sharpe, 4));
        so.push_back(fixed(m.sortino, 4));
        cs.push_back(percent(m.cumulative_sum));
    }
    t1.push_back(sh);
    t1.push_back(so);
    t1.push_back(cs);
    os << align(t1);

    os << "\nSharpe and Sortino Ratios\n\n";
    std::vector<std::vector<std::string>> t2(2);
    t2[0].push_back("");
    t2[1].push_back("");
    for (const auto& s : report.strategies) {
        t2[0].push_back(s);
        t2[0].push_back("");
        t2[1].push_back("Sharpe");
        t2[1].push_back("Sortino");
    }
    for (const auto& row : report.per_symbol) {
        std::vector<std::string> line{row.symbol};
        for (const auto& m : row.strategies) {
            line.push_back(fixed(m.sharpe, 4));
            line.push_back(fixed(m.sortino, 4));
        }
        t2.push_back(line);
    }
    os << align(t2);
    for (const auto& w : report.warnings)
        os << "\nwarning: " << w;
    if (!report.warnings.empty())
        os << '\n';
    return os.str();
}

std::string cumulative_csv(const PerformanceReport& report)
{
    std::ostringstream os;
    os << "date";
    for (const auto& s : report.strategies)
        os << ',' << csv_field(s);
    os << '\n';
    std::vector<double> acc(report.strategies.size(), 0.0);
    for (std::size_t k = 0; k < report.dates.size(); ++k) {
        os << format_date(report.dates[k]);
        for (std::size_t j = 0; j < report.strategies.size(); ++j) {
            acc[j] += report.daily_returns.at(report.strategies[j])[k];
            os << ',' << cell(acc[j]);
        }
        os << '\n';
    }
    return os.str();
}

std::string cumulative_svg(const PerformanceReport& report)
{
    const double w = 800, h = 400, margin = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    std::vector<std::vector<double>> curves;
    double lo = 0.0, hi = 0.0;
    for (const auto& s : report.strategies) {
        std::vector<double> c;
        double acc = 0.0;
        for (double r : report.daily_returns.at(s)) {
            acc += r;
            c.push_back(acc);
            lo = std::min(lo, acc);
            hi = std::max(hi, acc);
        }
        curves.push_back(std::move(c));
    }
    if (hi - lo < 1e-12)
        hi = lo + 1.0;
    const std::size_t n = report.dates.size();
    auto px = [&](std::size_t k) { return margin + (w - 2 * margin) * (n > 1 ? double(k) / double(n - 1) : 0.0); };
    auto py = [&](double v) { return h - margin - (h - 2 * margin) * (v - lo) / (hi - lo); };

    std::ostringstream os;
    char buf[128];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#999\"/>\n", margin, py(0.0),
                  w - margin, py(0.0));
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"5\" y=\"%g\" font-size=\"11\">%s</text>\n", margin, percent(hi).c_str());
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"5\" y=\"%g\" font-size=\"11\">%s</text>\n", h - margin, percent(lo).c_str());
    os << buf;
    if (n > 0) {
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\">%s</text>\n", margin, h - 20,
                      format_date(report.dates.front()).c_str());
        os << buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">%s</text>\n",
                      w - margin, h - 20, format_date(report.dates.back()).c_str());
        os << buf;
    }
    for (std::size_t j = 0; j < curves.size(); ++j) {
        const char* color = colors[j % std::size(colors)];
        os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << color << "\" points=\"";
        for (std::size_t k = 0; k < curves[j].size(); ++k) {
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", k ? " " : "", px(k), py(curves[j][k]));
            os << buf;
        }
        os << "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%zu\" font-size=\"12\" fill=\"%s\">", margin + 10, 20 + 14 * j,
                      color);
        os << buf;
        for (char c : report.strategies[j]) {
            if (c == '&')
                os << "&amp;";
            else if (c == '<')
                os << "&lt;";
            else
                os << c;
        }
        os << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace tinlab
