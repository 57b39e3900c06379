#include "tinlab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "tinlab/errors.hpp"
#include "tinlab/grad_check.hpp"
#include "tinlab/oracles.hpp"
#include "tinlab/param_io.hpp"

namespace fs = std::filesystem;

namespace tinlab::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

std::string join(const std::vector<std::string>& v, const char* sep = ",")
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? sep : "") + v[i];
    return out;
}

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw FormatError("cannot write '" + path.string() + "'");
    os << text;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Calls f(i) for i in [0, n) on up to `workers` threads. f must not throw.
template <class F>
void for_each_parallel(std::size_t n, std::size_t workers, F&& f)
{
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;)
                f(i);
        });
    for (auto& t : pool)
        t.join();
}

std::vector<std::string> channels_for(const std::string& variant)
{
    if (variant == "in-price")
        return {"price"};
    if (variant == "in-price-obv")
        return {"price", "obv"};
    throw ConfigError("unknown network variant '" + variant + "' (valid: in-price, in-price-obv)");
}

std::string fmt(const char* format, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

struct SymbolData {
    std::string symbol;
    std::vector<OhlcvBar> bars;
};

SymbolData load_symbol(const std::string& data_dir, const std::string& symbol)
{
    const fs::path path = fs::path(data_dir) / (symbol + ".csv");
    if (!fs::exists(path))
        throw UsageError("no data file for symbol " + symbol + " at '" + path.string() + "'");
    return SymbolData{symbol, load_csv(path.string())};
}

std::vector<Date> dates_of(const std::vector<OhlcvBar>& bars)
{
    std::vector<Date> d;
    d.reserve(bars.size());
    for (const auto& b : bars)
        d.push_back(b.date);
    return d;
}

std::vector<std::string> symbols_for(const RunConfig& cfg, const std::string& data_dir)
{
    if (!fs::is_directory(data_dir))
        throw UsageError("data directory '" + data_dir + "' not found");
    return cfg.symbols.empty() ? discover_symbols(data_dir) : cfg.symbols;
}

// ---------------------------------------------------------------------------
// train

std::string train_symbol(const RunConfig& cfg, const std::string& data_dir, const std::string& symbol)
{
    const auto data = load_symbol(data_dir, symbol);
    const Split split = split_rows(dates_of(data.bars), cfg);
    std::ostringstream summary;
    for (const auto& variant : cfg.variants) {
        const auto fm = to_feature_matrix(data.bars, channels_for(variant), symbol);
        EnvConfig env = cfg.env;
        env.start = 0;
        env.end = split.train_last;
        IndicatorNetworkSpec qspec = cfg.qnet;
        qspec.input_len = env.window_len;
        qspec.feature_dim = fm.width();
        const auto result = train(fm, env, cfg.dqn, qspec);

        const fs::path dir = fs::path(cfg.out_dir) / symbol / variant;
        write_file(dir / "spec.txt", serialize(result.qnet.spec));
        write_file(dir / "params.txt", parameters_to_string(result.qnet.graph));
        write_file(dir / "train_log.csv", result.log.csv());
        write_file(dir / "timing.csv", result.log.timing_csv());

        summary << symbol << ' ' << variant << ": " << result.log.episodes.size() << " episodes";
        if (!result.log.episodes.empty())
            summary << ", last episode reward " << fmt("%.6f", result.log.episodes.back().total_reward);
        summary << '\n';
    }
    return summary.str();
}

int cmd_train(const RunConfig& cfg, const KeyValueDoc& doc, std::ostream& out, std::ostream& err)
{
    if (cfg.variants.empty())
        throw ConfigError("no network variants selected");
    const auto data_dir = resolve_data_dir(cfg.data_dir);
    const auto symbols = symbols_for(cfg, data_dir);
    write_file(fs::path(cfg.out_dir) / "config.txt", doc.to_string());

    std::vector<std::string> messages(symbols.size());
    std::vector<char> ok(symbols.size(), 1);
    for_each_parallel(symbols.size(), cfg.parallel, [&](std::size_t i) {
        try {
            messages[i] = train_symbol(cfg, data_dir, symbols[i]);
        } catch (const std::exception& e) {
            ok[i] = 0;
            messages[i] = e.what();
        }
    });
    int failed = 0;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (ok[i]) {
            out << messages[i];
        } else {
            ++failed;
            err << "error: " << symbols[i] << ": " << messages[i] << '\n';
        }
    }
    return failed ? kExitUsage : kExitOk;
}

// ---------------------------------------------------------------------------
// backtest

IndicatorNetwork load_trained(const fs::path& dir, std::size_t window_len)
{
    if (!fs::exists(dir / "spec.txt") || !fs::exists(dir / "params.txt"))
        throw UsageError("no trained parameters in '" + dir.string() + "'; run train first");
    auto net = build_network(parse_network_spec(read_file(dir / "spec.txt")));
    parameters_from_string(net.graph, read_file(dir / "params.txt"));
    net.trained = true;
    if (net.input_len != window_len)
        throw ConfigError("trained network in '" + dir.string() + "' expects window " + std::to_string(net.input_len) +
                          ", configuration says " + std::to_string(window_len));
    return net;
}

std::map<std::string, EpisodeResult> backtest_symbol(const RunConfig& cfg, const std::string& data_dir,
                                                     const std::string& symbol)
{
    const auto data = load_symbol(data_dir, symbol);
    const Split split = split_rows(dates_of(data.bars), cfg);
    EnvConfig env = cfg.env;
    env.start = split.test_first;
    env.end.reset();
    const auto price_fm = to_feature_matrix(data.bars, {"price"}, symbol);

    std::map<std::string, EpisodeResult> results;
    for (const auto& strategy : cfg.strategies) {
        EpisodeResult ep;
        if (strategy == "buy-hold") {
            ep = run_policy(price_fm, env, [](std::span<const double>, std::size_t) { return Action::Buy; });
        } else if (strategy == "macd-classic") {
            const auto prices = price_fm.column("price");
            ep = run_policy(price_fm, env, macd_crossover_policy(prices, cfg.macd_fast, cfg.macd_slow, cfg.macd_signal));
        } else {
            auto net = load_trained(fs::path(cfg.out_dir) / symbol / strategy, env.window_len);
            const auto fm = to_feature_matrix(data.bars, channels_for(strategy), symbol);
            if (net.spec.feature_dim != fm.width())
                throw ConfigError("trained " + strategy + " network for " + symbol + " has the wrong channel count");
            ep = evaluate(net, fm, env);
        }
        write_file(fs::path(cfg.out_dir) / symbol / "backtest" / (strategy + ".csv"), episode_csv(ep));
        results[strategy_title(strategy)] = std::move(ep);
    }
    return results;
}

int cmd_backtest(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto data_dir = resolve_data_dir(cfg.data_dir);
    const auto symbols = symbols_for(cfg, data_dir);

    std::vector<std::map<std::string, EpisodeResult>> per_symbol(symbols.size());
    std::vector<std::string> errors(symbols.size());
    for_each_parallel(symbols.size(), cfg.parallel, [&](std::size_t i) {
        try {
            per_symbol[i] = backtest_symbol(cfg, data_dir, symbols[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
            if (errors[i].empty())
                errors[i] = "unknown failure";
        }
    });

    ResultSet rs;
    int failed = 0;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (!errors[i].empty()) {
            ++failed;
            err << "error: " << symbols[i] << ": " << errors[i] << '\n';
        } else {
            rs[symbols[i]] = std::move(per_symbol[i]);
        }
    }
    if (rs.empty())
        return kExitUsage;

    std::vector<std::string> titles;
    for (const auto& s : cfg.strategies)
        titles.push_back(strategy_title(s));
    const auto report = build_report(rs, cfg.annualize, titles);
    const fs::path dir = fs::path(cfg.out_dir) / "report";
    write_file(dir / "overall.csv", overall_csv(report));
    write_file(dir / "per_symbol.csv", per_symbol_csv(report));
    write_file(dir / "report.txt", report_text(report));
    write_file(dir / "cumulative.csv", cumulative_csv(report));
    if (cfg.svg)
        write_file(dir / "cumulative.svg", cumulative_svg(report));
    out << report_text(report);
    for (const auto& w : report.warnings)
        err << "warning: " << w << '\n';
    return failed ? kExitUsage : kExitOk;
}

// ---------------------------------------------------------------------------
// verify-replication

struct ReplicationCase {
    OracleKind kind;
    double tol;
    std::function<IndicatorNetwork()> build;
};

int cmd_verify_replication(const RunConfig& cfg, double corrupt, std::ostream& out)
{
    const auto data_dir = resolve_data_dir(cfg.data_dir);
    std::vector<SymbolData> data;
    for (const auto& s : symbols_for(cfg, data_dir))
        data.push_back(load_symbol(data_dir, s));

    const InitSpec sma{InitScheme::ReplicateSMA};
    const InitSpec ema{InitScheme::ReplicateEMA};
    const std::vector<ReplicationCase> cases = {
        {OracleKind::Sma, 1e-9, [&] { return build_ma_in(20, sma); }},
        {OracleKind::EmaTruncated, 1e-9, [&] { return build_ma_in(20, ema); }},
        {OracleKind::Macd, 1e-9, [&] { return build_macd_in(12, 26, 9, ema); }},
        {OracleKind::Rsi, 1e-6, [&] { return build_rsi_in(14, sma); }},
        {OracleKind::Roc, 1e-6, [&] { return build_roc_in(12, sma); }},
        {OracleKind::Stoch, 1e-6, [&] { return build_stoch_in(14, 3, sma); }},
        {OracleKind::Cci, 1e-6, [&] { return build_cci_in(20, sma); }},
    };

    char line[160];
    std::snprintf(line, sizeof line, "%-10s %14s %10s %8s  %s\n", "indicator", "max_abs_err", "tolerance", "windows",
                  "status");
    out << line;
    bool all_pass = true;
    for (const auto& c : cases) {
        auto net = c.build();
        if (corrupt != 0.0 && c.kind == OracleKind::Macd)
            for (std::size_t p = 0; p < net.graph.num_params(); ++p)
                if (net.graph.param(ParamId{p}).trainable)
                    for (auto& v : net.graph.param(ParamId{p}).tensor.values())
                        v += corrupt;
        double worst = 0.0;
        std::size_t windows = 0;
        bool pass = true;
        for (const auto& d : data) {
            std::vector<double> adj, high, low, close;
            for (const auto& b : d.bars) {
                adj.push_back(b.adj_close);
                high.push_back(b.high);
                low.push_back(b.low);
                close.push_back(b.close);
            }
            const oracle::SeriesView view{adj, high, low, close, {}};
            const auto r = verify_replication(net, c.kind, view, c.tol);
            worst = std::max(worst, r.max_abs_err);
            windows += r.windows_checked;
            pass = pass && r.pass;
        }
        all_pass = all_pass && pass;
        std::snprintf(line, sizeof line, "%-10s %14.3e %10.0e %8zu  %s\n", to_string(c.kind), worst, c.tol, windows,
                      pass ? "PASS" : "FAIL");
        out << line;
    }
    return all_pass ? kExitOk : kExitFail;
}

// ---------------------------------------------------------------------------
// oracle

const std::vector<std::string> kOracleNames = {"sma", "ema", "macd", "rsi", "roc", "stoch", "cci", "obv"};

struct OracleArgs {
    std::string indicator;
    std::string input;
    std::string symbol;
    std::string data_dir;
    std::size_t n = 14;
    std::size_t m = 3;
    std::size_t fast = 12;
    std::size_t slow = 26;
    std::size_t signal = 9;
    std::string mode = "truncated";
};

int cmd_oracle(const OracleArgs& a, std::ostream& out, std::ostream& err)
{
    if (std::find(kOracleNames.begin(), kOracleNames.end(), a.indicator) == kOracleNames.end()) {
        err << "error: unknown indicator '" << a.indicator << "'; valid: " << join(kOracleNames, ", ") << '\n';
        return kExitUsage;
    }
    std::vector<OhlcvBar> bars;
    if (!a.input.empty()) {
        bars = load_csv(a.input);
    } else {
        if (a.symbol.empty())
            throw UsageError("oracle needs --input FILE or --symbol NAME");
        bars = load_symbol(resolve_data_dir(a.data_dir), a.symbol).bars;
    }
    std::vector<double> price, high, low, close, volume;
    for (const auto& b : bars) {
        price.push_back(b.adj_close);
        high.push_back(b.high);
        low.push_back(b.low);
        close.push_back(b.close);
        volume.push_back(b.volume);
    }

    std::vector<std::string> header{"date"};
    std::vector<std::vector<double>> cols;
    std::size_t first = 0;
    if (a.indicator == "sma") {
        header.push_back("value");
        cols.push_back(oracle::sma(price, a.n));
        first = oracle::sma_first_index(a.n);
    } else if (a.indicator == "ema") {
        if (a.mode != "truncated" && a.mode != "recursive")
            throw UsageError("--mode must be 'truncated' or 'recursive'");
        const auto mode = a.mode == "recursive" ? oracle::EmaMode::Recursive : oracle::EmaMode::Truncated;
        header.push_back("value");
        cols.push_back(oracle::ema(price, a.n, mode));
        first = oracle::ema_first_index(a.n, mode);
    } else if (a.indicator == "macd") {
        auto r = oracle::macd(price, a.fast, a.slow, a.signal);
        header.insert(header.end(), {"macd", "signal", "hist"});
        cols = {std::move(r.macd), std::move(r.signal), std::move(r.histogram)};
        first = oracle::macd_first_index(a.slow, a.signal);
    } else if (a.indicator == "rsi") {
        header.push_back("value");
        cols.push_back(oracle::rsi(price, a.n));
        first = oracle::rsi_first_index(a.n);
    } else if (a.indicator == "roc") {
        header.push_back("value");
        cols.push_back(oracle::roc(price, a.n));
        first = oracle::roc_first_index(a.n);
    } else if (a.indicator == "stoch") {
        const auto k = oracle::stoch_k(high, low, close, a.n);
        auto d = oracle::stoch_d(k, a.m);
        header.insert(header.end(), {"k", "d"});
        cols = {std::vector<double>(k.begin() + static_cast<std::ptrdiff_t>(a.m - 1), k.end()), std::move(d)};
        first = oracle::stoch_d_first_index(a.n, a.m);
    } else if (a.indicator == "cci") {
        header.push_back("value");
        cols.push_back(oracle::cci(high, low, close, a.n));
        first = oracle::cci_first_index(a.n);
    } else {
        header.push_back("value");
        cols.push_back(oracle::obv(price, volume));
    }

    out << join(header) << '\n';
    for (std::size_t i = 0; i < cols[0].size(); ++i) {
        out << format_date(bars[first + i].date);
        for (const auto& c : cols)
            out << ',' << format_double(c[i]);
        out << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// grad-check

int cmd_grad_check(std::size_t cases, double h, double tol, std::uint64_t seed, std::ostream& out)
{
    if (cases == 0)
        throw UsageError("--cases must be positive");
    if (!(h > 0.0))
        throw UsageError("--h must be positive");
    const auto rows = grad_sweep(cases, h, seed);
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %6s %14s %20s  %s\n", "op", "cases", "max_rel_error", "worst_seed", "status");
    out << line;
    bool all_pass = true;
    for (const auto& r : rows) {
        const bool pass = r.max_rel_error <= tol;
        all_pass = all_pass && pass;
        std::snprintf(line, sizeof line, "%-12s %6zu %14.3e %20llu  %s\n", to_string(r.kind), r.cases, r.max_rel_error,
                      static_cast<unsigned long long>(r.worst_seed), pass ? "PASS" : "FAIL");
        out << line;
    }
    return all_pass ? kExitOk : kExitFail;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string shape = "sine";
    std::string out;
    std::string first_date = "2015-01-02";
    SyntheticSpec spec;
};

int cmd_synth(SynthArgs a, std::ostream& out)
{
    a.spec.shape = parse_synthetic_shape(a.shape);
    a.spec.first_date = parse_date(a.first_date);
    if (a.spec.rows == 0)
        throw UsageError("--rows must be positive");
    if (a.spec.period == 0)
        throw UsageError("--period must be positive");
    if (!(a.spec.start_price > 0.0))
        throw UsageError("--start-price must be positive");
    const auto text = emit_csv(synthetic_bars(a.spec));
    if (a.out.empty())
        out << text;
    else
        write_file(a.out, text);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// option plumbing

// Flag-to-config-key bindings of one subcommand.
struct RunOptions {
    std::string config_path;
    std::vector<std::string> sets;
    std::map<std::string, std::string> values;
    std::vector<std::pair<CLI::Option*, std::string>> bound;
    std::vector<std::pair<CLI::Option*, std::string>> switches;

    void value(CLI::App* app, const KeyValueDoc& defs, const std::string& flag, const std::string& key,
               const std::string& help)
    {
        auto* opt = app->add_option(flag, values[key], help)->default_str(defs.get_string(key, ""));
        bound.emplace_back(opt, key);
    }

    void flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help)
    {
        switches.emplace_back(app->add_flag(flag)->description(help + " (sets " + key + " = true)"), key);
    }

    void common(CLI::App* app)
    {
        app->add_option("--config", config_path, "Key-value configuration file");
        app->add_option("--set", sets, "Override any configuration key (KEY=VALUE, repeatable)");
    }

    KeyValueDoc resolve(const KeyValueDoc& defs) const
    {
        KeyValueDoc doc = defs;
        if (!config_path.empty()) {
            const auto file = KeyValueDoc::load(config_path);
            file.reject_unknown([&] {
                std::set<std::string> keys;
                for (const auto& [k, v] : defs.entries())
                    keys.insert(k);
                return keys;
            }());
            for (const auto& [k, v] : file.entries())
                doc.set(k, v);
        }
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw UsageError("--set expects KEY=VALUE, got '" + s + "'");
            const auto key = trim(s.substr(0, eq));
            if (!defs.has(key))
                throw ConfigError("unknown key '" + key + "'");
            doc.set(key, trim(s.substr(eq + 1)));
        }
        for (const auto& [opt, key] : bound)
            if (opt->count() > 0)
                doc.set(key, values.at(key));
        for (const auto& [opt, key] : switches)
            if (opt->count() > 0)
                doc.set(key, "true");
        return doc;
    }
};

} // namespace

// ---------------------------------------------------------------------------
// RunConfig

KeyValueDoc RunConfig::defaults()
{
    const DqnConfig dqn;
    const EnvConfig env;
    KeyValueDoc d;
    d.set("data_dir", "");
    d.set("symbols", "");
    d.set("out_dir", "runs/default");
    d.set("seed", "0");
    d.set("parallel", "1");
    d.set("variants", "in-price,in-price-obv");
    d.set("strategies", join(strategy_names()));
    d.set("split.train_fraction", "0.7");
    d.set("split.train_end", "");
    d.set("split.test_start", "");
    d.set("env.window_len", std::to_string(env.window_len));
    d.set("env.cost_rate", format_double(env.cost_rate));
    d.set("env.allow_short", "false");
    d.set("env.normalization", "last-price");
    d.set("dqn.gamma", format_double(dqn.gamma));
    d.set("dqn.epsilon_start", format_double(dqn.epsilon_start));
    d.set("dqn.epsilon_end", format_double(dqn.epsilon_end));
    d.set("dqn.epsilon_decay_steps", std::to_string(dqn.epsilon_decay_steps));
    d.set("dqn.buffer_capacity", std::to_string(dqn.buffer_capacity));
    d.set("dqn.batch_size", std::to_string(dqn.batch_size));
    d.set("dqn.lr", format_double(dqn.lr));
    d.set("dqn.optimizer", "adam");
    d.set("dqn.target_sync_every", std::to_string(dqn.target_sync_every));
    d.set("dqn.episodes", std::to_string(dqn.episodes));
    d.set("dqn.reward_scale", format_double(dqn.reward_scale));
    d.set("net.hidden", "26");
    d.set("net.init", "ReplicateEMA");
    d.set("net.init.sigma", "0");
    d.set("net.init.lo", "-0.1");
    d.set("net.init.hi", "0.1");
    d.set("net.activation", "identity");
    d.set("net.window.fast", "12");
    d.set("net.window.slow", "26");
    d.set("macd.fast", "12");
    d.set("macd.slow", "26");
    d.set("macd.signal", "9");
    d.set("report.annualize", "false");
    d.set("report.svg", "false");
    return d;
}

RunConfig RunConfig::from_doc(const KeyValueDoc& input)
{
    const KeyValueDoc defs = defaults();
    std::set<std::string> allowed;
    for (const auto& [k, v] : defs.entries())
        allowed.insert(k);
    input.reject_unknown(allowed);
    KeyValueDoc doc = defs;
    for (const auto& [k, v] : input.entries())
        doc.set(k, v);

    RunConfig c;
    c.data_dir = doc.get_string("data_dir", "");
    c.symbols = split_list(doc.get_string("symbols", ""));
    c.out_dir = doc.get_string("out_dir", "");
    if (c.out_dir.empty())
        throw ConfigError("out_dir must not be empty");
    const auto seed = doc.get_int("seed", 0);
    if (seed < 0)
        throw ConfigError("seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.parallel = doc.get_size("parallel", 1);
    if (c.parallel < 1)
        throw ConfigError("parallel must be at least 1");

    c.variants = split_list(doc.get_string("variants", ""));
    for (const auto& v : c.variants)
        channels_for(v);
    c.strategies = split_list(doc.get_string("strategies", ""));
    if (c.strategies.empty())
        throw ConfigError("strategies must name at least one strategy");
    for (const auto& s : c.strategies)
        if (std::find(strategy_names().begin(), strategy_names().end(), s) == strategy_names().end())
            throw ConfigError("unknown strategy '" + s + "' (valid: " + join(strategy_names(), ", ") + ")");
    if (std::set<std::string>(c.strategies.begin(), c.strategies.end()).size() != c.strategies.size())
        throw ConfigError("strategies lists a strategy twice");

    c.train_fraction = doc.get_double("split.train_fraction", 0.7);
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        throw ConfigError("split.train_fraction must lie in (0, 1)");
    try {
        if (auto s = doc.get_string("split.train_end", ""); !s.empty())
            c.train_end = parse_date(s);
        if (auto s = doc.get_string("split.test_start", ""); !s.empty())
            c.test_start = parse_date(s);
    } catch (const FormatError& e) {
        throw ConfigError(std::string("split date: ") + e.what());
    }

    c.env.window_len = doc.get_size("env.window_len", 52);
    c.env.cost_rate = doc.get_double("env.cost_rate", 0.0);
    c.env.allow_short = doc.get_bool("env.allow_short", false);
    const auto norm = doc.get_string("env.normalization", "last-price");
    if (norm != "last-price" && norm != "raw")
        throw ConfigError("env.normalization must be 'last-price' or 'raw'");
    c.env.normalization = norm == "raw" ? Normalization::Raw : Normalization::LastPriceRelative;
    c.env.validate();

    c.dqn.gamma = doc.get_double("dqn.gamma", 0.0);
    c.dqn.epsilon_start = doc.get_double("dqn.epsilon_start", 0.0);
    c.dqn.epsilon_end = doc.get_double("dqn.epsilon_end", 0.0);
    c.dqn.epsilon_decay_steps = doc.get_size("dqn.epsilon_decay_steps", 0);
    c.dqn.buffer_capacity = doc.get_size("dqn.buffer_capacity", 0);
    c.dqn.batch_size = doc.get_size("dqn.batch_size", 0);
    c.dqn.lr = doc.get_double("dqn.lr", 0.0);
    const auto opt = doc.get_string("dqn.optimizer", "adam");
    if (opt != "adam" && opt != "sgd")
        throw ConfigError("dqn.optimizer must be 'adam' or 'sgd'");
    c.dqn.optimizer = opt == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
    c.dqn.target_sync_every = doc.get_size("dqn.target_sync_every", 0);
    c.dqn.episodes = doc.get_size("dqn.episodes", 0);
    c.dqn.reward_scale = doc.get_double("dqn.reward_scale", 1.0);
    c.dqn.seed = c.seed;
    c.dqn.validate();

    KeyValueDoc net;
    net.set("kind", "QNET");
    net.set("input_len", std::to_string(c.env.window_len));
    for (const auto& [k, v] : doc.entries())
        if (k.rfind("net.", 0) == 0)
            net.set(k.substr(4), v);
    net.set("seed", std::to_string(c.seed));
    c.qnet = parse_network_spec(net.to_string());

    c.macd_fast = doc.get_size("macd.fast", 12);
    c.macd_slow = doc.get_size("macd.slow", 26);
    c.macd_signal = doc.get_size("macd.signal", 9);
    if (c.macd_fast < 1 || c.macd_fast >= c.macd_slow || c.macd_signal < 1)
        throw ConfigError("macd windows need 1 <= fast < slow and signal >= 1");

    c.annualize = doc.get_bool("report.annualize", false);
    c.svg = doc.get_bool("report.svg", false);
    return c;
}

const std::vector<std::string>& strategy_names()
{
    static const std::vector<std::string> names = {"in-price-obv", "in-price", "macd-classic", "buy-hold"};
    return names;
}

std::string strategy_title(const std::string& strategy)
{
    if (strategy == "in-price-obv")
        return "MACD IN(Price,OBV)";
    if (strategy == "in-price")
        return "MACD IN(Price)";
    if (strategy == "macd-classic")
        return "MACD";
    if (strategy == "buy-hold")
        return "Buy & Hold";
    throw ConfigError("unknown strategy '" + strategy + "'");
}

std::string resolve_data_dir(const std::string& configured)
{
    if (!configured.empty())
        return configured;
    if (const char* env = std::getenv("TINLAB_DATA_DIR"); env && *env)
        return env;
    return "data/fixtures";
}

std::vector<std::string> discover_symbols(const std::string& data_dir)
{
    if (!fs::is_directory(data_dir))
        throw UsageError("data directory '" + data_dir + "' not found");
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(data_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            out.push_back(entry.path().stem().string());
    std::sort(out.begin(), out.end());
    if (out.empty())
        throw UsageError("no .csv files in '" + data_dir + "'");
    return out;
}

Split split_rows(const std::vector<Date>& dates, const RunConfig& cfg)
{
    const std::size_t n = dates.size();
    if (n < 2)
        throw RangeError("need at least two rows to split into training and test ranges");
    Split s;
    auto last_on_or_before = [&](Date d) {
        const auto it = std::upper_bound(dates.begin(), dates.end(), d);
        if (it == dates.begin())
            throw RangeError("split.train_end " + format_date(d) + " precedes the data");
        return static_cast<std::size_t>(it - dates.begin()) - 1;
    };
    auto first_on_or_after = [&](Date d) {
        const auto it = std::lower_bound(dates.begin(), dates.end(), d);
        if (it == dates.end())
            throw RangeError("split.test_start " + format_date(d) + " follows the data");
        return static_cast<std::size_t>(it - dates.begin());
    };
    if (cfg.train_end && cfg.test_start) {
        s.train_last = last_on_or_before(*cfg.train_end);
        s.test_first = first_on_or_after(*cfg.test_start);
    } else if (cfg.train_end) {
        s.train_last = last_on_or_before(*cfg.train_end);
        s.test_first = s.train_last + 1;
    } else if (cfg.test_start) {
        s.test_first = first_on_or_after(*cfg.test_start);
        if (s.test_first == 0)
            throw RangeError("split.test_start leaves no training rows");
        s.train_last = s.test_first - 1;
    } else {
        const auto train_rows = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.train_fraction));
        if (train_rows == 0)
            throw RangeError("split.train_fraction leaves no training rows");
        s.train_last = train_rows - 1;
        s.test_first = train_rows;
    }
    if (s.test_first <= s.train_last)
        throw ConfigError("test range overlaps the training range");
    if (s.test_first >= n)
        throw RangeError("no rows left for the out-of-sample test");
    return s;
}

Policy macd_crossover_policy(std::span<const double> prices, std::size_t fast, std::size_t slow, std::size_t signal)
{
    const auto r = oracle::macd(prices, fast, slow, signal, oracle::MaType::Ema, oracle::MacdSign::FastMinusSlow);
    const std::size_t first = oracle::macd_first_index(slow, signal);
    auto hist = std::make_shared<std::vector<double>>(prices.size(), 0.0);
    std::copy(r.histogram.begin(), r.histogram.end(), hist->begin() + static_cast<std::ptrdiff_t>(first));
    return [hist, first](std::span<const double>, std::size_t row) {
        if (row <= first || row >= hist->size())
            return Action::Hold;
        const double prev = (*hist)[row - 1];
        const double cur = (*hist)[row];
        if (prev <= 0.0 && cur > 0.0)
            return Action::Buy;
        if (prev >= 0.0 && cur < 0.0)
            return Action::Sell;
        return Action::Hold;
    };
}

// ---------------------------------------------------------------------------
// entry point

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Indicator Network toolkit: oracle dumps, replication checks, DQN training and backtests", "tinlab"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    const KeyValueDoc defs = RunConfig::defaults();

    // verify-replication
    auto* verify = app.add_subcommand("verify-replication", "Check every Indicator Network against its oracle");
    RunOptions verify_opts;
    verify_opts.common(verify);
    verify_opts.value(verify, defs, "--data-dir", "data_dir", "Directory of <SYMBOL>.csv files");
    verify_opts.value(verify, defs, "--symbols", "symbols", "Comma-separated symbols (default: all files)");
    double corrupt = 0.0;
    verify->add_option("--corrupt-weights", corrupt, "Debug: add this offset to every MACD network weight");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "Print a classical indicator as CSV");
    OracleArgs oracle_args;
    oracle_cmd->add_option("indicator", oracle_args.indicator, "One of: " + join(kOracleNames, ", "))->required();
    oracle_cmd->add_option("--input", oracle_args.input, "OHLCV CSV file");
    oracle_cmd->add_option("--symbol", oracle_args.symbol, "Symbol in the data directory (when --input is absent)");
    oracle_cmd->add_option("--data-dir", oracle_args.data_dir, "Data directory (default: $TINLAB_DATA_DIR or data/fixtures)");
    oracle_cmd->add_option("--n", oracle_args.n, "Window length");
    oracle_cmd->add_option("--m", oracle_args.m, "Stochastic %D smoothing window");
    oracle_cmd->add_option("--fast", oracle_args.fast, "MACD fast window");
    oracle_cmd->add_option("--slow", oracle_args.slow, "MACD slow window");
    oracle_cmd->add_option("--signal", oracle_args.signal, "MACD signal window");
    oracle_cmd->add_option("--mode", oracle_args.mode, "EMA mode: truncated or recursive");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train one QNET per symbol and network variant with DQN");
    RunOptions train_opts;
    train_opts.common(train_cmd);
    train_opts.value(train_cmd, defs, "--data-dir", "data_dir", "Directory of <SYMBOL>.csv files");
    train_opts.value(train_cmd, defs, "--symbols", "symbols", "Comma-separated symbols (default: all files)");
    train_opts.value(train_cmd, defs, "--out", "out_dir", "Output directory");
    train_opts.value(train_cmd, defs, "--seed", "seed", "Random seed");
    train_opts.value(train_cmd, defs, "--parallel", "parallel", "Worker threads (one symbol each)");
    train_opts.value(train_cmd, defs, "--variants", "variants", "Networks to train: in-price, in-price-obv");
    train_opts.value(train_cmd, defs, "--episodes", "dqn.episodes", "Training episodes");
    train_opts.value(train_cmd, defs, "--lr", "dqn.lr", "Learning rate");
    train_opts.value(train_cmd, defs, "--gamma", "dqn.gamma", "Discount factor");
    train_opts.value(train_cmd, defs, "--batch-size", "dqn.batch_size", "Minibatch size");
    train_opts.value(train_cmd, defs, "--epsilon-decay-steps", "dqn.epsilon_decay_steps", "Exploration decay length");
    train_opts.value(train_cmd, defs, "--target-sync-every", "dqn.target_sync_every", "Target network sync period (0: none)");
    train_opts.value(train_cmd, defs, "--reward-scale", "dqn.reward_scale", "Reward multiplier inside TD targets");
    train_opts.value(train_cmd, defs, "--hidden", "net.hidden", "QNET hidden units");
    train_opts.value(train_cmd, defs, "--init", "net.init", "ReplicateSMA, ReplicateEMA, PerturbedReplicate or RandomUniform");
    train_opts.value(train_cmd, defs, "--activation", "net.activation", "identity or relu");
    train_opts.value(train_cmd, defs, "--window-len", "env.window_len", "Observation window");
    train_opts.value(train_cmd, defs, "--cost-rate", "env.cost_rate", "Cost per trade as a fraction of equity");
    train_opts.flag(train_cmd, "--allow-short", "env.allow_short", "Sell opens a short position");
    train_opts.value(train_cmd, defs, "--train-fraction", "split.train_fraction", "Leading share of rows used for training");
    train_opts.value(train_cmd, defs, "--train-end", "split.train_end", "Last training date (YYYY-MM-DD)");
    train_opts.value(train_cmd, defs, "--test-start", "split.test_start", "First out-of-sample date (YYYY-MM-DD)");

    // backtest
    auto* backtest_cmd = app.add_subcommand("backtest", "Evaluate strategies out of sample and write the report");
    RunOptions bt_opts;
    bt_opts.common(backtest_cmd);
    bt_opts.value(backtest_cmd, defs, "--data-dir", "data_dir", "Directory of <SYMBOL>.csv files");
    bt_opts.value(backtest_cmd, defs, "--symbols", "symbols", "Comma-separated symbols (default: all files)");
    bt_opts.value(backtest_cmd, defs, "--out", "out_dir", "Run directory (trained parameters are read from here)");
    bt_opts.value(backtest_cmd, defs, "--seed", "seed", "Random seed");
    bt_opts.value(backtest_cmd, defs, "--parallel", "parallel", "Worker threads (one symbol each)");
    bt_opts.value(backtest_cmd, defs, "--strategy", "strategies",
                  "Comma-separated: " + join(strategy_names(), ", "));
    bt_opts.value(backtest_cmd, defs, "--fast", "macd.fast", "macd-classic fast window");
    bt_opts.value(backtest_cmd, defs, "--slow", "macd.slow", "macd-classic slow window");
    bt_opts.value(backtest_cmd, defs, "--signal", "macd.signal", "macd-classic signal window");
    bt_opts.value(backtest_cmd, defs, "--window-len", "env.window_len", "Observation window");
    bt_opts.value(backtest_cmd, defs, "--cost-rate", "env.cost_rate", "Cost per trade as a fraction of equity");
    bt_opts.flag(backtest_cmd, "--allow-short", "env.allow_short", "Sell opens a short position");
    bt_opts.value(backtest_cmd, defs, "--train-fraction", "split.train_fraction", "Leading share of rows used for training");
    bt_opts.value(backtest_cmd, defs, "--train-end", "split.train_end", "Last training date (YYYY-MM-DD)");
    bt_opts.value(backtest_cmd, defs, "--test-start", "split.test_start", "First out-of-sample date (YYYY-MM-DD)");
    bt_opts.flag(backtest_cmd, "--annualize", "report.annualize", "Scale ratios by sqrt(252)");
    bt_opts.flag(backtest_cmd, "--svg", "report.svg", "Also write report/cumulative.svg");

    // grad-check
    auto* grad_cmd = app.add_subcommand("grad-check", "Finite-difference gradient sweep over every op kind");
    std::size_t cases = 100;
    double h = 1e-6;
    double tol = 1e-4;
    std::uint64_t grad_seed = 0;
    grad_cmd->set_help_flag("--help", "Print this help message and exit");
    grad_cmd->add_option("--cases", cases, "Random cases per op kind");
    grad_cmd->add_option("--h", h, "Central difference step");
    grad_cmd->add_option("--tol", tol, "Maximum relative error");
    grad_cmd->add_option("--seed", grad_seed, "Sweep seed");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic OHLCV CSV");
    SynthArgs synth;
    synth_cmd->add_option("--shape", synth.shape, "rising, sine or walk");
    synth_cmd->add_option("--rows", synth.spec.rows, "Number of bars");
    synth_cmd->add_option("--seed", synth.spec.seed, "Random seed (band, volume, walk)");
    synth_cmd->add_option("--start-price", synth.spec.start_price, "First close");
    synth_cmd->add_option("--amplitude", synth.spec.amplitude, "Sine relative amplitude");
    synth_cmd->add_option("--period", synth.spec.period, "Sine period in bars");
    synth_cmd->add_option("--drift", synth.spec.drift, "Per-bar growth (rising) or log drift (walk)");
    synth_cmd->add_option("--volatility", synth.spec.volatility, "Walk log-return stddev");
    synth_cmd->add_option("--first-date", synth.first_date, "Date of the first bar");
    synth_cmd->add_option("--out", synth.out, "Output file (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (verify->parsed())
            return cmd_verify_replication(RunConfig::from_doc(verify_opts.resolve(defs)), corrupt, out);
        if (oracle_cmd->parsed())
            return cmd_oracle(oracle_args, out, err);
        if (train_cmd->parsed()) {
            const auto doc = train_opts.resolve(defs);
            return cmd_train(RunConfig::from_doc(doc), doc, out, err);
        }
        if (backtest_cmd->parsed())
            return cmd_backtest(RunConfig::from_doc(bt_opts.resolve(defs)), out, err);
        if (grad_cmd->parsed())
            return cmd_grad_check(cases, h, tol, grad_seed, out);
        if (synth_cmd->parsed())
            return cmd_synth(synth, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"tinlab"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace tinlab::cli
