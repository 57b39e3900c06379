#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tinlab/graph.hpp"
#include "tinlab/oracles.hpp"

namespace tinlab {

enum class IndicatorKind { MA, EMA, MACD, RSI, ROC, STOCH, CCI, QNET };

enum class InitScheme { ReplicateSMA, ReplicateEMA, PerturbedReplicate, RandomUniform };

struct InitSpec {
    InitScheme scheme = InitScheme::ReplicateEMA;
    oracle::MaType base = oracle::MaType::Ema;  // replicated profile under PerturbedReplicate
    double sigma = 0.0;                         // PerturbedReplicate noise stddev
    double lo = -0.1;                           // RandomUniform bounds
    double hi = 0.1;
};

// Declarative description of an Indicator Network.
//
// Window names by kind: MA/EMA/RSI/ROC/CCI use `n`; MACD uses `fast`, `slow`,
// `signal`; STOCH uses `n` and `m`; QNET optionally uses `fast`/`slow` to pick
// which hidden units seed the initial buy/sell read-out.
struct IndicatorNetworkSpec {
    IndicatorKind kind = IndicatorKind::MA;
    std::map<std::string, std::size_t> windows;
    std::size_t feature_dim = 1;
    std::size_t input_len = 0;                  // 0: the minimum the kind requires
    std::size_t hidden = 0;                     // QNET only
    std::size_t actions = 3;                    // QNET only
    InitSpec init;
    double eps = oracle::kOracleEps;
    ops::ActivationKind activation = ops::ActivationKind::Identity;
    oracle::MacdSign sign = oracle::MacdSign::SlowMinusFast;
    std::uint64_t seed = 0;

    std::size_t window(const std::string& name) const;
    std::size_t min_input_len() const;
    void validate() const;
};

// Text form: one `key = value` per line, keys
//   kind, window.<name>, feature_dim, input_len, hidden, actions, init,
//   init.base, init.sigma, init.lo, init.hi, eps, activation, macd.sign, seed
std::string serialize(const IndicatorNetworkSpec& spec);
IndicatorNetworkSpec parse_network_spec(const std::string& text);

const char* to_string(IndicatorKind kind);
IndicatorKind parse_indicator_kind(const std::string& s);
const char* to_string(InitScheme scheme);
InitScheme parse_init_scheme(const std::string& s);

struct IndicatorNetwork {
    IndicatorNetworkSpec spec;
    Graph graph;
    std::size_t input_len = 0;
    std::vector<InputId> inputs;                // "x", or "high", "low", "close"
    std::map<std::string, NodeId> outputs;
    bool trained = false;

    // Binds one window per input (in `inputs` order) and runs forward.
    void evaluate(std::span<const std::span<const double>> channels);
    void evaluate(std::span<const double> x);
    double output(const std::string& name) const;
};

std::vector<double> sma_weights(std::size_t n);
// Index n-1 holds the most recent bar.
std::vector<double> ema_weights(std::size_t n);

IndicatorNetwork build_network(const IndicatorNetworkSpec& spec);

IndicatorNetwork build_ma_in(std::size_t n, InitSpec init, std::size_t input_len = 0);
IndicatorNetwork build_macd_in(std::size_t fast, std::size_t slow, std::size_t sig, InitSpec init,
                               oracle::MacdSign sign = oracle::MacdSign::SlowMinusFast, std::size_t input_len = 0);
IndicatorNetwork build_rsi_in(std::size_t n, InitSpec init, double eps = oracle::kOracleEps);
IndicatorNetwork build_roc_in(std::size_t n, InitSpec init, double eps = oracle::kOracleEps);
IndicatorNetwork build_stoch_in(std::size_t n, std::size_t m, InitSpec init, double eps = oracle::kOracleEps);
IndicatorNetwork build_cci_in(std::size_t n, InitSpec init, double eps = oracle::kOracleEps);
IndicatorNetwork build_q_in(std::size_t input_len, std::size_t hidden, std::size_t actions, std::size_t feature_dim,
                            InitSpec init, ops::ActivationKind activation = ops::ActivationKind::Identity,
                            std::uint64_t seed = 0);

// Window lengths assigned to QNET hidden units under replicate init: evenly
// spread from 2 to input_len / 2, extended upward when needed to stay distinct.
std::vector<std::size_t> qnet_hidden_windows(std::size_t input_len, std::size_t hidden);

std::array<double, 3> q_values(IndicatorNetwork& qnet, std::span<const double> obs);

enum class OracleKind { Sma, EmaTruncated, Macd, Rsi, Roc, Stoch, Cci };

const char* to_string(OracleKind kind);

struct ReplicationReport {
    double max_abs_err = 0.0;
    std::size_t argmax_index = 0;               // bar index of the worst error
    std::string argmax_output;
    std::optional<std::size_t> first_fail_index;
    std::size_t windows_checked = 0;
    double tol = 0.0;
    bool pass = false;
};

// Slides the network's input window across `data` and compares every named
// output against the matching oracle at the same bar. Throws UsageError for
// trained, perturbed or randomly initialized networks.
ReplicationReport verify_replication(IndicatorNetwork& net, OracleKind oracle, const oracle::SeriesView& data,
                                     double tol);

} // namespace tinlab
