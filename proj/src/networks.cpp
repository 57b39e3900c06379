#include "tinlab/networks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tinlab/errors.hpp"
#include "tinlab/kv.hpp"

namespace tinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Produces initial weight vectors for trainable layers according to the
// spec's init scheme. Fixed (non-trainable) weights never go through here.
class Initializer {
public:
    explicit Initializer(const IndicatorNetworkSpec& spec)
        : init_(spec.init)
        , rng_(spec.seed)
    {
    }

    // Weights for a moving-average layer of length n.
    std::vector<double> ma(std::size_t n)
    {
        switch (init_.scheme) {
        case InitScheme::ReplicateSMA: return sma_weights(n);
        case InitScheme::ReplicateEMA: return ema_weights(n);
        case InitScheme::PerturbedReplicate:
            return perturb(init_.base == oracle::MaType::Sma ? sma_weights(n) : ema_weights(n));
        case InitScheme::RandomUniform: return uniform(n);
        }
        return {};
    }

    // Weights for a layer whose indicator definition is an arithmetic mean
    // regardless of the MA family (RSI gain/loss means, %D).
    std::vector<double> mean(std::size_t n)
    {
        switch (init_.scheme) {
        case InitScheme::ReplicateSMA:
        case InitScheme::ReplicateEMA: return sma_weights(n);
        case InitScheme::PerturbedReplicate: return perturb(sma_weights(n));
        case InitScheme::RandomUniform: return uniform(n);
        }
        return {};
    }

    std::vector<double> perturb(std::vector<double> w)
    {
        if (init_.scheme != InitScheme::PerturbedReplicate || init_.sigma == 0.0)
            return w;
        std::normal_distribution<double> noise(0.0, init_.sigma);
        for (auto& v : w)
            v += noise(rng_);
        return w;
    }

    std::vector<double> uniform(std::size_t n)
    {
        std::uniform_real_distribution<double> dist(init_.lo, init_.hi);
        std::vector<double> w(n);
        for (auto& v : w)
            v = dist(rng_);
        return w;
    }

    bool replicating() const { return init_.scheme != InitScheme::RandomUniform; }
    bool sma_profile() const
    {
        return init_.scheme == InitScheme::ReplicateSMA ||
               (init_.scheme == InitScheme::PerturbedReplicate && init_.base == oracle::MaType::Sma);
    }

private:
    InitSpec init_;
    std::mt19937_64 rng_;
};

ParamId fixed(Graph& g, const std::string& name, std::vector<double> w)
{
    return g.add_parameter(name, Tensor::vector(std::move(w)), false);
}

ParamId trainable(Graph& g, const std::string& name, std::vector<double> w)
{
    return g.add_parameter(name, Tensor::vector(std::move(w)), true);
}

IndicatorNetwork skeleton(const IndicatorNetworkSpec& spec)
{
    IndicatorNetwork net;
    net.spec = spec;
    net.input_len = spec.input_len == 0 ? spec.min_input_len() : spec.input_len;
    net.spec.input_len = net.input_len;
    return net;
}

void build_ma(IndicatorNetwork& net, Initializer& init)
{
    const std::size_t n = net.spec.window("n");
    auto& g = net.graph;
    const auto x = g.add_input("x", net.input_len);
    net.inputs = {x};
    const auto w = trainable(g, "ma", init.ma(n));
    net.outputs["value"] = g.add_weighted_sum({Edge(x, net.input_len - n, n)}, w);
}

void build_macd(IndicatorNetwork& net, Initializer& init)
{
    const std::size_t fast = net.spec.window("fast");
    const std::size_t slow = net.spec.window("slow");
    const std::size_t sig = net.spec.window("signal");
    const std::size_t len = net.input_len;
    auto& g = net.graph;
    const auto x = g.add_input("x", len);
    net.inputs = {x};

    std::vector<Edge> macd_nodes;
    NodeId last_macd{};
    for (std::size_t j = 0; j < sig; ++j) {
        const std::size_t end = len - sig + j + 1; // one past the bar this offset evaluates
        const auto wf = trainable(g, "fast_" + std::to_string(j), init.ma(fast));
        const auto ws = trainable(g, "slow_" + std::to_string(j), init.ma(slow));
        const auto f = g.add_weighted_sum({Edge(x, end - fast, fast)}, wf);
        const auto s = g.add_weighted_sum({Edge(x, end - slow, slow)}, ws);
        last_macd = net.spec.sign == oracle::MacdSign::SlowMinusFast ? g.add_subtract(s, f) : g.add_subtract(f, s);
        macd_nodes.emplace_back(last_macd);
    }
    const auto wsig = trainable(g, "signal", init.ma(sig));
    const auto signal = g.add_weighted_sum(macd_nodes, wsig);
    net.outputs["macd"] = last_macd;
    net.outputs["signal"] = signal;
    net.outputs["histogram"] = g.add_subtract(last_macd, signal);
}

void build_rsi(IndicatorNetwork& net, Initializer& init)
{
    const std::size_t n = net.spec.window("n");
    const std::size_t len = net.input_len;
    auto& g = net.graph;
    const auto x = g.add_input("x", len);
    net.inputs = {x};
    const std::size_t first = len - n - 1;
    const auto up = g.add_subtract(Edge(x, first + 1, n), Edge(x, first, n));
    const auto down = g.add_subtract(Edge(x, first, n), Edge(x, first + 1, n));
    const auto gains = g.add_clip({up}, 0.0, kInf);
    const auto losses = g.add_clip({down}, 0.0, kInf);
    const auto avg_gain = g.add_weighted_sum({gains}, trainable(g, "gain_mean", init.mean(n)));
    const auto avg_loss = g.add_weighted_sum({losses}, trainable(g, "loss_mean", init.mean(n)));
    const auto total = g.add_weighted_sum({avg_gain, avg_loss}, fixed(g, "gain_loss_sum", {1.0, 1.0}));
    const auto ratio = g.add_div_bias(avg_gain, total, net.spec.eps);
    net.outputs["value"] = g.add_weighted_sum({ratio}, fixed(g, "scale_100", {100.0}));
}

void build_roc(IndicatorNetwork& net, Initializer&)
{
    const std::size_t n = net.spec.window("n");
    const std::size_t len = net.input_len;
    auto& g = net.graph;
    const auto x = g.add_input("x", len);
    net.inputs = {x};
    const Edge now(x, len - 1, 1);
    const Edge past(x, len - 1 - n, 1);
    const auto change = g.add_subtract(now, past);
    const auto ratio = g.add_div_bias(change, past, net.spec.eps);
    net.outputs["value"] = g.add_weighted_sum({ratio}, fixed(g, "scale_100", {100.0}));
}

void build_stoch(IndicatorNetwork& net, Initializer& init)
{
    const std::size_t n = net.spec.window("n");
    const std::size_t m = net.spec.window("m");
    const std::size_t len = net.input_len;
    auto& g = net.graph;
    const auto high = g.add_input("high", len);
    const auto low = g.add_input("low", len);
    const auto close = g.add_input("close", len);
    net.inputs = {high, low, close};

    // m consecutive %K values ending at the last bar
    const std::size_t span_len = n + m - 1;
    const std::size_t first = len - span_len;
    const auto hh = g.add_maxpool({Edge(high, first, span_len)}, n);
    const auto ll = g.add_minpool({Edge(low, first, span_len)}, n);
    const auto above_low = g.add_subtract(Edge(close, len - m, m), ll);
    const auto range = g.add_subtract(hh, ll);
    const auto ratio = g.add_div_bias(above_low, range, net.spec.eps);
    const auto scale = fixed(g, "scale_100", {100.0});
    std::vector<Edge> ks;
    for (std::size_t j = 0; j < m; ++j)
        ks.emplace_back(g.add_weighted_sum({Edge(ratio, j, 1)}, scale));
    net.outputs["k"] = NodeId{ks.back().src.index};
    net.outputs["d"] = g.add_weighted_sum(ks, trainable(g, "d_mean", init.mean(m)));
}

void build_cci(IndicatorNetwork& net, Initializer&)
{
    const std::size_t n = net.spec.window("n");
    const std::size_t len = net.input_len;
    auto& g = net.graph;
    const auto high = g.add_input("high", len);
    const auto low = g.add_input("low", len);
    const auto close = g.add_input("close", len);
    net.inputs = {high, low, close};

    const auto third = fixed(g, "typical_price", {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    std::vector<Edge> tp;
    for (std::size_t t = len - n; t < len; ++t)
        tp.emplace_back(g.add_weighted_sum({Edge(high, t, 1), Edge(low, t, 1), Edge(close, t, 1)}, third));
    const auto mean = g.add_mean(tp);
    const auto mad = g.add_mad(tp);
    const auto deviation = g.add_subtract(tp.back(), mean);
    const auto ratio = g.add_div_bias(deviation, mad, net.spec.eps);
    net.outputs["value"] = g.add_weighted_sum({ratio}, fixed(g, "lambert_scale", {1.0 / oracle::kCciConstant}));
}

std::size_t nearest_unit(const std::vector<std::size_t>& windows, std::size_t target, std::size_t skip)
{
    std::size_t best = windows.size();
    std::size_t best_gap = std::numeric_limits<std::size_t>::max();
    for (std::size_t h = 0; h < windows.size(); ++h) {
        if (h == skip)
            continue;
        const std::size_t gap = windows[h] > target ? windows[h] - target : target - windows[h];
        if (gap < best_gap) {
            best = h;
            best_gap = gap;
        }
    }
    return best;
}

void build_qnet(IndicatorNetwork& net, Initializer& init)
{
    const auto& spec = net.spec;
    const std::size_t len = net.input_len;
    const std::size_t d = spec.feature_dim;
    const std::size_t width = d * len;
    auto& g = net.graph;
    const auto x = g.add_input("x", width);
    net.inputs = {x};

    const auto windows = qnet_hidden_windows(len, spec.hidden);
    std::vector<Edge> hidden;
    for (std::size_t h = 0; h < spec.hidden; ++h) {
        std::vector<double> w;
        if (init.replicating()) {
            // one MA profile per hidden unit, repeated over every feature channel
            const std::size_t n = windows[h];
            const auto profile = init.sma_profile() ? sma_weights(n) : ema_weights(n);
            w.assign(width, 0.0);
            for (std::size_t c = 0; c < d; ++c)
                std::copy(profile.begin(), profile.end(), w.begin() + static_cast<std::ptrdiff_t>(c * len + len - n));
            w = init.perturb(std::move(w));
        } else {
            w = init.uniform(width);
        }
        hidden.emplace_back(g.add_weighted_sum({Edge(x)}, trainable(g, "hidden_" + std::to_string(h), std::move(w))));
    }
    const auto act = g.add_activation(hidden, spec.activation);

    // Replicate init reads out a MACD crossover: Q(buy) = fast - slow,
    // Q(sell) = slow - fast, Q(hold) = 0.
    std::vector<std::vector<double>> out(spec.actions, std::vector<double>(spec.hidden, 0.0));
    if (init.replicating() && spec.hidden >= 2) {
        const std::size_t f = nearest_unit(windows, spec.windows.count("fast") ? spec.windows.at("fast") : 12,
                                           windows.size());
        const std::size_t s = nearest_unit(windows, spec.windows.count("slow") ? spec.windows.at("slow") : 26, f);
        out[0][f] = 1.0;
        out[0][s] = -1.0;
        out[1][f] = -1.0;
        out[1][s] = 1.0;
        for (auto& row : out)
            row = init.perturb(std::move(row));
    } else {
        for (auto& row : out)
            row = init.uniform(spec.hidden);
    }
    static const char* names[] = {"q_buy", "q_sell", "q_hold"};
    for (std::size_t a = 0; a < spec.actions; ++a)
        net.outputs[names[a]] = g.add_weighted_sum({Edge(act)}, trainable(g, "out_" + std::to_string(a), out[a]));
}

std::vector<double> slice(std::span<const double> s, std::size_t end, std::size_t len)
{
    return std::vector<double>(s.begin() + static_cast<std::ptrdiff_t>(end + 1 - len),
                               s.begin() + static_cast<std::ptrdiff_t>(end + 1));
}

} // namespace

// ---------------------------------------------------------------------------
// spec

std::size_t IndicatorNetworkSpec::window(const std::string& name) const
{
    auto it = windows.find(name);
    if (it == windows.end())
        throw ConfigError(std::string(to_string(kind)) + " spec is missing window '" + name + "'");
    return it->second;
}

std::size_t IndicatorNetworkSpec::min_input_len() const
{
    switch (kind) {
    case IndicatorKind::MA:
    case IndicatorKind::EMA:
    case IndicatorKind::CCI: return window("n");
    case IndicatorKind::MACD: return window("slow") + window("signal") - 1;
    case IndicatorKind::RSI:
    case IndicatorKind::ROC: return window("n") + 1;
    case IndicatorKind::STOCH: return window("n") + window("m") - 1;
    case IndicatorKind::QNET: return 52;
    }
    return 0;
}

void IndicatorNetworkSpec::validate() const
{
    static const std::map<IndicatorKind, std::vector<std::string>> required = {
        {IndicatorKind::MA, {"n"}},     {IndicatorKind::EMA, {"n"}},  {IndicatorKind::MACD, {"fast", "slow", "signal"}},
        {IndicatorKind::RSI, {"n"}},    {IndicatorKind::ROC, {"n"}},  {IndicatorKind::STOCH, {"n", "m"}},
        {IndicatorKind::CCI, {"n"}},    {IndicatorKind::QNET, {}},
    };
    for (const auto& name : required.at(kind))
        window(name);
    for (const auto& [name, value] : windows)
        if (value < 1)
            throw ConfigError("window '" + name + "' must be at least 1");
    if (kind == IndicatorKind::MACD && window("fast") >= window("slow"))
        throw ConfigError("MACD requires fast < slow");
    if (feature_dim < 1)
        throw ConfigError("feature_dim must be at least 1");
    if (feature_dim != 1 && kind != IndicatorKind::QNET)
        throw ConfigError("only QNET networks accept more than one feature channel");
    if (!(eps > 0.0))
        throw ConfigError("eps must be positive");
    if (init.scheme == InitScheme::PerturbedReplicate && !(init.sigma >= 0.0))
        throw ConfigError("init.sigma must be nonnegative");
    if (init.scheme == InitScheme::RandomUniform && !(init.lo < init.hi))
        throw ConfigError("init.lo must be below init.hi");
    if (kind == IndicatorKind::QNET) {
        if (hidden < 1)
            throw ConfigError("QNET requires an explicit hidden size");
        if (actions != 3)
            throw ConfigError("QNET requires exactly 3 actions");
    } else if (input_len != 0 && input_len < min_input_len()) {
        throw ConfigError("input_len " + std::to_string(input_len) + " shorter than the " +
                          std::to_string(min_input_len()) + " bars the indicator needs");
    }
}

const char* to_string(IndicatorKind kind)
{
    switch (kind) {
    case IndicatorKind::MA: return "MA";
    case IndicatorKind::EMA: return "EMA";
    case IndicatorKind::MACD: return "MACD";
    case IndicatorKind::RSI: return "RSI";
    case IndicatorKind::ROC: return "ROC";
    case IndicatorKind::STOCH: return "STOCH";
    case IndicatorKind::CCI: return "CCI";
    case IndicatorKind::QNET: return "QNET";
    }
    return "?";
}

IndicatorKind parse_indicator_kind(const std::string& s)
{
    for (auto k : {IndicatorKind::MA, IndicatorKind::EMA, IndicatorKind::MACD, IndicatorKind::RSI, IndicatorKind::ROC,
                   IndicatorKind::STOCH, IndicatorKind::CCI, IndicatorKind::QNET})
        if (s == to_string(k))
            return k;
    throw ConfigError("unknown indicator kind '" + s + "'");
}

const char* to_string(InitScheme scheme)
{
    switch (scheme) {
    case InitScheme::ReplicateSMA: return "ReplicateSMA";
    case InitScheme::ReplicateEMA: return "ReplicateEMA";
    case InitScheme::PerturbedReplicate: return "PerturbedReplicate";
    case InitScheme::RandomUniform: return "RandomUniform";
    }
    return "?";
}

InitScheme parse_init_scheme(const std::string& s)
{
    for (auto k : {InitScheme::ReplicateSMA, InitScheme::ReplicateEMA, InitScheme::PerturbedReplicate,
                   InitScheme::RandomUniform})
        if (s == to_string(k))
            return k;
    throw ConfigError("unknown init scheme '" + s + "'");
}

std::string serialize(const IndicatorNetworkSpec& spec)
{
    KeyValueDoc doc;
    doc.set("kind", to_string(spec.kind));
    for (const auto& [name, value] : spec.windows)
        doc.set("window." + name, std::to_string(value));
    doc.set("feature_dim", std::to_string(spec.feature_dim));
    doc.set("input_len", std::to_string(spec.input_len));
    doc.set("hidden", std::to_string(spec.hidden));
    doc.set("actions", std::to_string(spec.actions));
    doc.set("init", to_string(spec.init.scheme));
    doc.set("init.base", spec.init.base == oracle::MaType::Sma ? "sma" : "ema");
    doc.set("init.sigma", format_double(spec.init.sigma));
    doc.set("init.lo", format_double(spec.init.lo));
    doc.set("init.hi", format_double(spec.init.hi));
    doc.set("eps", format_double(spec.eps));
    doc.set("activation", spec.activation == ops::ActivationKind::Relu ? "relu" : "identity");
    doc.set("macd.sign", spec.sign == oracle::MacdSign::SlowMinusFast ? "slow-minus-fast" : "fast-minus-slow");
    doc.set("seed", std::to_string(spec.seed));
    return doc.to_string();
}

IndicatorNetworkSpec parse_network_spec(const std::string& text)
{
    const auto doc = KeyValueDoc::parse(text);
    doc.reject_unknown({"kind", "window.*", "feature_dim", "input_len", "hidden", "actions", "init", "init.base",
                        "init.sigma", "init.lo", "init.hi", "eps", "activation", "macd.sign", "seed"});
    IndicatorNetworkSpec spec;
    const auto kind = doc.get("kind");
    if (!kind)
        throw ConfigError("network spec is missing 'kind'");
    spec.kind = parse_indicator_kind(*kind);
    for (const auto& [key, value] : doc.entries())
        if (key.rfind("window.", 0) == 0)
            spec.windows[key.substr(7)] = doc.get_size(key, 0);
    spec.feature_dim = doc.get_size("feature_dim", 1);
    spec.input_len = doc.get_size("input_len", 0);
    spec.hidden = doc.get_size("hidden", 0);
    spec.actions = doc.get_size("actions", 3);
    spec.init.scheme = parse_init_scheme(doc.get_string("init", "ReplicateEMA"));
    const auto base = doc.get_string("init.base", "ema");
    if (base != "ema" && base != "sma")
        throw ConfigError("init.base must be 'ema' or 'sma'");
    spec.init.base = base == "sma" ? oracle::MaType::Sma : oracle::MaType::Ema;
    spec.init.sigma = doc.get_double("init.sigma", 0.0);
    spec.init.lo = doc.get_double("init.lo", -0.1);
    spec.init.hi = doc.get_double("init.hi", 0.1);
    spec.eps = doc.get_double("eps", oracle::kOracleEps);
    const auto act = doc.get_string("activation", "identity");
    if (act != "identity" && act != "relu")
        throw ConfigError("activation must be 'identity' or 'relu'");
    spec.activation = act == "relu" ? ops::ActivationKind::Relu : ops::ActivationKind::Identity;
    const auto sign = doc.get_string("macd.sign", "slow-minus-fast");
    if (sign != "slow-minus-fast" && sign != "fast-minus-slow")
        throw ConfigError("macd.sign must be 'slow-minus-fast' or 'fast-minus-slow'");
    spec.sign = sign == "slow-minus-fast" ? oracle::MacdSign::SlowMinusFast : oracle::MacdSign::FastMinusSlow;
    spec.seed = static_cast<std::uint64_t>(doc.get_int("seed", 0));
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// weights and builders

std::vector<double> sma_weights(std::size_t n)
{
    if (n == 0)
        throw ConfigError("sma_weights: window must be at least 1");
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::vector<double> ema_weights(std::size_t n)
{
    if (n == 0)
        throw ConfigError("ema_weights: window must be at least 1");
    const double alpha = 2.0 / (static_cast<double>(n) + 1.0);
    std::vector<double> w(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        w[n - 1 - k] = alpha * std::pow(1.0 - alpha, static_cast<double>(k));
        total += w[n - 1 - k];
    }
    for (auto& v : w)
        v /= total;
    return w;
}

std::vector<std::size_t> qnet_hidden_windows(std::size_t input_len, std::size_t hidden)
{
    const std::size_t lo = std::min<std::size_t>(2, input_len);
    // widen past input_len / 2 only as far as needed to keep windows distinct
    const std::size_t hi = std::min(input_len, std::max({lo, input_len / 2, lo + hidden - 1}));
    std::vector<std::size_t> windows(hidden);
    for (std::size_t h = 0; h < hidden; ++h) {
        const double frac = hidden == 1 ? 0.0 : static_cast<double>(h) / static_cast<double>(hidden - 1);
        windows[h] = lo + static_cast<std::size_t>(std::lround(frac * static_cast<double>(hi - lo)));
    }
    return windows;
}

IndicatorNetwork build_network(const IndicatorNetworkSpec& spec)
{
    spec.validate();
    IndicatorNetwork net = skeleton(spec);
    Initializer init(net.spec);
    switch (spec.kind) {
    case IndicatorKind::MA:
    case IndicatorKind::EMA: build_ma(net, init); break;
    case IndicatorKind::MACD: build_macd(net, init); break;
    case IndicatorKind::RSI: build_rsi(net, init); break;
    case IndicatorKind::ROC: build_roc(net, init); break;
    case IndicatorKind::STOCH: build_stoch(net, init); break;
    case IndicatorKind::CCI: build_cci(net, init); break;
    case IndicatorKind::QNET: build_qnet(net, init); break;
    }
    return net;
}

IndicatorNetwork build_ma_in(std::size_t n, InitSpec init, std::size_t input_len)
{
    IndicatorNetworkSpec spec;
    spec.kind = init.scheme == InitScheme::ReplicateSMA ? IndicatorKind::MA : IndicatorKind::EMA;
    spec.windows["n"] = n;
    spec.init = init;
    spec.input_len = input_len;
    return build_network(spec);
}

IndicatorNetwork build_macd_in(std::size_t fast, std::size_t slow, std::size_t sig, InitSpec init,
                               oracle::MacdSign sign, std::size_t input_len)
{
    IndicatorNetworkSpec spec;
    spec.kind = IndicatorKind::MACD;
    spec.windows = {{"fast", fast}, {"slow", slow}, {"signal", sig}};
    spec.init = init;
    spec.sign = sign;
    spec.input_len = input_len;
    return build_network(spec);
}

IndicatorNetwork build_rsi_in(std::size_t n, InitSpec init, double eps)
{
    IndicatorNetworkSpec spec;
    spec.kind = IndicatorKind::RSI;
    spec.windows["n"] = n;
    spec.init = init;
    spec.eps = eps;
    return build_network(spec);
}

IndicatorNetwork build_roc_in(std::size_t n, InitSpec init, double eps)
{
    IndicatorNetworkSpec spec;
    spec.kind = IndicatorKind::ROC;
    spec.windows["n"] = n;
    spec.init = init;
    spec.eps = eps;
    return build_network(spec);
}

IndicatorNetwork build_stoch_in(std::size_t n, std::size_t m, InitSpec init, double eps)
{
    IndicatorNetworkSpec spec;
    spec.kind = IndicatorKind::STOCH;
    spec.windows = {{"n", n}, {"m", m}};
    spec.init = init;
    spec.eps = eps;
    return build_network(spec);
}

IndicatorNetwork build_cci_in(std::size_t n, InitSpec init, double eps)
{
    IndicatorNetworkSpec spec;
    spec.kind = IndicatorKind::CCI;
    spec.windows["n"] = n;
    spec.init = init;
    spec.eps = eps;
    return build_network(spec);
}

IndicatorNetwork build_q_in(std::size_t input_len, std::size_t hidden, std::size_t actions, std::size_t feature_dim,
                            InitSpec init, ops::ActivationKind activation, std::uint64_t seed)
{
    IndicatorNetworkSpec spec;
    spec.kind = IndicatorKind::QNET;
    spec.input_len = input_len;
    spec.hidden = hidden;
    spec.actions = actions;
    spec.feature_dim = feature_dim;
    spec.init = init;
    spec.activation = activation;
    spec.seed = seed;
    return build_network(spec);
}

void IndicatorNetwork::evaluate(std::span<const std::span<const double>> channels)
{
    if (channels.size() != inputs.size())
        throw DimensionError("network expects " + std::to_string(inputs.size()) + " input channels, got " +
                             std::to_string(channels.size()));
    for (std::size_t i = 0; i < inputs.size(); ++i)
        graph.set_input(inputs[i], channels[i]);
    graph.forward();
}

void IndicatorNetwork::evaluate(std::span<const double> x)
{
    const std::span<const double> one[1] = {x};
    evaluate(std::span<const std::span<const double>>(one, 1));
}

double IndicatorNetwork::output(const std::string& name) const
{
    auto it = outputs.find(name);
    if (it == outputs.end())
        throw UsageError("network has no output '" + name + "'");
    return graph.scalar(it->second);
}

std::array<double, 3> q_values(IndicatorNetwork& qnet, std::span<const double> obs)
{
    if (qnet.spec.kind != IndicatorKind::QNET)
        throw UsageError("q_values requires a QNET network");
    qnet.evaluate(obs);
    return {qnet.output("q_buy"), qnet.output("q_sell"), qnet.output("q_hold")};
}

// ---------------------------------------------------------------------------
// replication

const char* to_string(OracleKind kind)
{
    switch (kind) {
    case OracleKind::Sma: return "SMA";
    case OracleKind::EmaTruncated: return "EMA";
    case OracleKind::Macd: return "MACD";
    case OracleKind::Rsi: return "RSI";
    case OracleKind::Roc: return "ROC";
    case OracleKind::Stoch: return "STOCH";
    case OracleKind::Cci: return "CCI";
    }
    return "?";
}

ReplicationReport verify_replication(IndicatorNetwork& net, OracleKind kind, const oracle::SeriesView& data, double tol)
{
    const auto& spec = net.spec;
    if (net.trained)
        throw UsageError("verify_replication: network has been trained; replication is no longer meaningful");
    if (spec.init.scheme == InitScheme::RandomUniform ||
        (spec.init.scheme == InitScheme::PerturbedReplicate && spec.init.sigma != 0.0))
        throw UsageError("verify_replication: network was not initialized by replication");

    auto expect_kind = [&](std::initializer_list<IndicatorKind> kinds) {
        for (auto k : kinds)
            if (spec.kind == k)
                return;
        throw UsageError(std::string("verify_replication: ") + to_string(spec.kind) + " network cannot be checked against the " +
                         to_string(kind) + " oracle");
    };

    data.validate();
    const bool multi = kind == OracleKind::Stoch || kind == OracleKind::Cci;
    if (multi && (data.high.empty() || data.low.empty() || data.close.empty()))
        throw DimensionError("verify_replication: high/low/close channels required");
    const auto price = multi ? data.close : data.values;
    const std::size_t len = data.size();
    if (len < net.input_len)
        throw DimensionError("verify_replication: data shorter than the network input window");

    // (output name, oracle series, bar index of series[0])
    struct Track {
        std::string name;
        std::vector<double> series;
        std::size_t first;
    };
    std::vector<Track> tracks;
    const bool sma_family = spec.init.scheme == InitScheme::ReplicateSMA ||
                            (spec.init.scheme == InitScheme::PerturbedReplicate && spec.init.base == oracle::MaType::Sma);
    switch (kind) {
    case OracleKind::Sma: {
        expect_kind({IndicatorKind::MA, IndicatorKind::EMA});
        const auto n = spec.window("n");
        tracks.push_back({"value", oracle::sma(price, n), oracle::sma_first_index(n)});
        break;
    }
    case OracleKind::EmaTruncated: {
        expect_kind({IndicatorKind::MA, IndicatorKind::EMA});
        const auto n = spec.window("n");
        tracks.push_back({"value", oracle::ema(price, n, oracle::EmaMode::Truncated),
                          oracle::ema_first_index(n, oracle::EmaMode::Truncated)});
        break;
    }
    case OracleKind::Macd: {
        expect_kind({IndicatorKind::MACD});
        const auto slow = spec.window("slow");
        const auto sig = spec.window("signal");
        auto r = oracle::macd(price, spec.window("fast"), slow, sig, sma_family ? oracle::MaType::Sma : oracle::MaType::Ema,
                              spec.sign);
        const auto first = oracle::macd_first_index(slow, sig);
        tracks.push_back({"macd", std::move(r.macd), first});
        tracks.push_back({"signal", std::move(r.signal), first});
        tracks.push_back({"histogram", std::move(r.histogram), first});
        break;
    }
    case OracleKind::Rsi: {
        expect_kind({IndicatorKind::RSI});
        const auto n = spec.window("n");
        tracks.push_back({"value", oracle::rsi(price, n, spec.eps), oracle::rsi_first_index(n)});
        break;
    }
    case OracleKind::Roc: {
        expect_kind({IndicatorKind::ROC});
        const auto n = spec.window("n");
        tracks.push_back({"value", oracle::roc(price, n, spec.eps), oracle::roc_first_index(n)});
        break;
    }
    case OracleKind::Stoch: {
        expect_kind({IndicatorKind::STOCH});
        const auto n = spec.window("n");
        const auto m = spec.window("m");
        auto k = oracle::stoch_k(data.high, data.low, data.close, n, spec.eps);
        auto d = oracle::stoch_d(k, m);
        tracks.push_back({"k", std::move(k), oracle::stoch_k_first_index(n)});
        tracks.push_back({"d", std::move(d), oracle::stoch_d_first_index(n, m)});
        break;
    }
    case OracleKind::Cci: {
        expect_kind({IndicatorKind::CCI});
        const auto n = spec.window("n");
        tracks.push_back({"value", oracle::cci(data.high, data.low, data.close, n, spec.eps), oracle::cci_first_index(n)});
        break;
    }
    }

    ReplicationReport report;
    report.tol = tol;
    const std::size_t L = net.input_len;
    for (std::size_t t = L - 1; t < len; ++t) {
        if (multi) {
            const auto h = slice(data.high, t, L);
            const auto l = slice(data.low, t, L);
            const auto c = slice(data.close, t, L);
            const std::span<const double> ch[3] = {h, l, c};
            net.evaluate(std::span<const std::span<const double>>(ch, 3));
        } else {
            net.evaluate(slice(price, t, L));
        }
        ++report.windows_checked;
        for (const auto& track : tracks) {
            const double expected = track.series.at(t - track.first);
            const double err = std::abs(net.output(track.name) - expected);
            if (err > report.max_abs_err) {
                report.max_abs_err = err;
                report.argmax_index = t;
                report.argmax_output = track.name;
            }
            if (err > tol && !report.first_fail_index)
                report.first_fail_index = t;
        }
    }
    report.pass = report.max_abs_err <= tol;
    return report;
}

} // namespace tinlab
