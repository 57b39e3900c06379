#include "tinlab/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "tinlab/oracles.hpp"

namespace tinlab {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::string column_key(const std::string& name)
{
    std::string key;
    for (char c : name)
        if (!std::isspace(static_cast<unsigned char>(c)) && c != '_')
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return key;
}

double parse_number(const std::string& cell, std::size_t row, const char* column)
{
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
        throw RowError(row, std::string("column ") + column + ": cannot parse number '" + cell + "'");
    return v;
}

} // namespace

Date parse_date(const std::string& text)
{
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (text.size() < 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 || text[4] != '-' ||
        text[7] != '-')
        throw FormatError("cannot parse date '" + text + "' (expected YYYY-MM-DD)");
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok())
        throw FormatError("invalid calendar date '" + text + "'");
    return date;
}

std::string format_date(Date date)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::vector<OhlcvBar> parse_csv(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!trim(line).empty())
            break;
    }
    if (trim(line).empty())
        throw FormatError("empty CSV");

    const auto header = split(line);
    static const std::pair<const char*, const char*> wanted[] = {
        {"date", "Date"},   {"open", "Open"},          {"high", "High"},     {"low", "Low"},
        {"close", "Close"}, {"adjclose", "Adj Close"}, {"volume", "Volume"},
    };
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i)
        col.emplace(column_key(header[i]), i);
    std::size_t idx[7];
    for (std::size_t k = 0; k < 7; ++k) {
        auto it = col.find(wanted[k].first);
        if (it == col.end())
            throw FormatError(std::string("CSV header is missing column '") + wanted[k].second + "'");
        idx[k] = it->second;
    }
    const std::size_t need = *std::max_element(std::begin(idx), std::end(idx)) + 1;

    std::vector<std::pair<OhlcvBar, std::size_t>> rows;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto cells = split(line);
        if (cells.size() < need)
            throw RowError(lineno, "expected at least " + std::to_string(need) + " columns, found " +
                                       std::to_string(cells.size()));
        OhlcvBar bar;
        try {
            bar.date = parse_date(cells[idx[0]]);
        } catch (const FormatError& e) {
            throw RowError(lineno, std::string("column Date: ") + e.what());
        }
        bar.open = parse_number(cells[idx[1]], lineno, "Open");
        bar.high = parse_number(cells[idx[2]], lineno, "High");
        bar.low = parse_number(cells[idx[3]], lineno, "Low");
        bar.close = parse_number(cells[idx[4]], lineno, "Close");
        bar.adj_close = parse_number(cells[idx[5]], lineno, "Adj Close");
        bar.volume = parse_number(cells[idx[6]], lineno, "Volume");

        if (!(bar.open > 0 && bar.high > 0 && bar.low > 0 && bar.close > 0 && bar.adj_close > 0))
            throw RowError(lineno, "prices must be positive");
        if (bar.volume < 0)
            throw RowError(lineno, "volume must be nonnegative");
        if (bar.low > std::min(bar.open, bar.close) || std::max(bar.open, bar.close) > bar.high)
            throw RowError(lineno, "bar violates low <= min(open, close) <= max(open, close) <= high");
        rows.emplace_back(bar, lineno);
    }
    if (rows.empty())
        throw FormatError("CSV has a header but no data rows");

    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first.date < b.first.date; });
    std::vector<OhlcvBar> bars;
    bars.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first.date == rows[i - 1].first.date)
            throw RowError(rows[i].second, "duplicate date " + format_date(rows[i].first.date));
        bars.push_back(rows[i].first);
    }
    return bars;
}

std::vector<OhlcvBar> load_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_csv(ss.str());
    } catch (const RowError& e) {
        throw RowError(e.row(), path + ": " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

std::string emit_csv(std::span<const OhlcvBar> bars)
{
    std::ostringstream os;
    os << "Date,Open,High,Low,Close,Adj Close,Volume\n";
    char buf[256];
    for (const auto& b : bars) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", format_date(b.date).c_str(), b.open,
                      b.high, b.low, b.close, b.adj_close, b.volume);
        os << buf;
    }
    return os.str();
}

std::vector<double> compute_obv(std::span<const OhlcvBar> bars)
{
    std::vector<double> close(bars.size());
    std::vector<double> volume(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        close[i] = bars[i].adj_close;
        volume[i] = bars[i].volume;
    }
    return oracle::obv(close, volume);
}

std::size_t FeatureMatrix::channel_index(const std::string& name) const
{
    for (std::size_t c = 0; c < channels.size(); ++c)
        if (channels[c] == name)
            return c;
    throw ConfigError("feature matrix has no channel '" + name + "'");
}

std::vector<double> FeatureMatrix::column(const std::string& name) const
{
    const std::size_t c = channel_index(name);
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r)
        out[r] = at(r, c);
    return out;
}

FeatureMatrix to_feature_matrix(std::span<const OhlcvBar> bars, const std::vector<std::string>& channels,
                                std::string symbol)
{
    if (channels.empty())
        throw ConfigError("at least one channel is required");
    for (const auto& c : channels)
        if (c != "price" && c != "obv")
            throw ConfigError("unknown channel '" + c + "' (expected price or obv)");
    if (bars.empty())
        throw RangeError("cannot build a feature matrix from zero bars");

    FeatureMatrix fm;
    fm.symbol = std::move(symbol);
    fm.channels = channels;
    fm.dates.reserve(bars.size());
    for (const auto& b : bars)
        fm.dates.push_back(b.date);
    std::vector<double> obv;
    if (std::find(channels.begin(), channels.end(), "obv") != channels.end())
        obv = compute_obv(bars);
    fm.values.reserve(bars.size() * channels.size());
    for (std::size_t r = 0; r < bars.size(); ++r)
        for (const auto& c : channels)
            fm.values.push_back(c == "price" ? bars[r].adj_close : obv[r]);
    return fm;
}

void window_into(const FeatureMatrix& fm, std::size_t t, std::size_t len, Normalization norm, std::span<double> out)
{
    if (len == 0)
        throw DimensionError("window length must be positive");
    if (t >= fm.rows())
        throw RangeError("window end " + std::to_string(t) + " beyond " + std::to_string(fm.rows()) + " rows");
    if (t + 1 < len)
        throw RangeError("window of " + std::to_string(len) + " rows ending at " + std::to_string(t) +
                         " needs more history");
    const std::size_t width = fm.width();
    if (out.size() != len * width)
        throw DimensionError("window output buffer has wrong length");
    const std::size_t first = t + 1 - len;
    for (std::size_t c = 0; c < width; ++c) {
        double scale = 1.0;
        if (norm == Normalization::LastPriceRelative) {
            if (fm.channels[c] == "price") {
                scale = fm.at(t, c);
            } else {
                double m = 1.0;
                for (std::size_t r = first; r <= t; ++r)
                    m = std::max(m, std::abs(fm.at(r, c)));
                scale = m;
            }
        }
        for (std::size_t k = 0; k < len; ++k)
            out[c * len + k] = fm.at(first + k, c) / scale;
    }
}

std::vector<double> window(const FeatureMatrix& fm, std::size_t t, std::size_t len, Normalization norm)
{
    std::vector<double> out(len * fm.width());
    window_into(fm, t, len, norm, out);
    return out;
}

std::vector<OhlcvBar> synthetic_bars(const SyntheticSpec& spec)
{
    if (spec.rows == 0 || !(spec.start_price > 0.0))
        throw ConfigError("synthetic series needs rows > 0 and a positive start price");
    if (spec.shape == SyntheticShape::Sine && (spec.period < 2 || !(spec.amplitude >= 0.0 && spec.amplitude < 1.0)))
        throw ConfigError("sine series needs period >= 2 and amplitude in [0, 1)");
    if (spec.shape == SyntheticShape::Rising && !(spec.drift > 0.0))
        throw ConfigError("rising series needs a positive drift");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> shock(0.0, spec.volatility);
    std::uniform_real_distribution<double> band(0.001, 0.01);
    std::uniform_int_distribution<int> volume(100000, 1000000);
    std::uniform_real_distribution<double> growth(0.5, 1.5);

    std::vector<OhlcvBar> bars;
    bars.reserve(spec.rows);
    std::chrono::sys_days day{spec.first_date};
    double walk = spec.start_price;
    for (std::size_t t = 0; t < spec.rows; ++t) {
        while (std::chrono::weekday{day}.c_encoding() == 0 || std::chrono::weekday{day}.c_encoding() == 6)
            day += std::chrono::days{1};
        double close = 0.0;
        switch (spec.shape) {
        case SyntheticShape::Rising:
            if (t > 0)
                walk *= 1.0 + spec.drift * growth(rng);
            close = walk;
            break;
        case SyntheticShape::Sine:
            close = spec.start_price *
                    (1.0 + spec.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                                                     static_cast<double>(spec.period)));
            break;
        case SyntheticShape::RandomWalk:
            if (t > 0)
                walk *= std::exp(spec.drift + shock(rng));
            close = walk;
            break;
        }
        OhlcvBar b;
        b.date = std::chrono::year_month_day{day};
        b.close = close;
        b.adj_close = close;
        b.open = bars.empty() ? close : bars.back().close;
        b.high = std::max(b.open, close) * (1.0 + band(rng));
        b.low = std::min(b.open, close) * (1.0 - band(rng));
        b.volume = volume(rng);
        bars.push_back(b);
        day += std::chrono::days{1};
    }
    return bars;
}

SyntheticShape parse_synthetic_shape(const std::string& s)
{
    if (s == "rising")
        return SyntheticShape::Rising;
    if (s == "sine")
        return SyntheticShape::Sine;
    if (s == "walk")
        return SyntheticShape::RandomWalk;
    throw ConfigError("unknown synthetic shape '" + s + "' (expected rising, sine or walk)");
}

} // namespace tinlab
