#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tinlab/networks.hpp"
#include "tinlab/optim.hpp"
#include "tinlab/trading_env.hpp"

namespace tinlab {

struct DqnConfig {
    double gamma = 0.99;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::size_t epsilon_decay_steps = 5000;
    std::size_t buffer_capacity = 10000;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::size_t target_sync_every = 200;      // 0: bootstrap from the online network
    std::size_t episodes = 50;
    double reward_scale = 1.0;                // multiplies rewards inside TD targets
    std::uint64_t seed = 0;

    void validate() const;
};

// Linear decay from epsilon_start to epsilon_end over epsilon_decay_steps
// environment steps, constant afterwards.
double epsilon_at(const DqnConfig& cfg, std::size_t step);

// Fixed-capacity FIFO of transitions.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t inserted() const { return inserted_; }
    // i = 0 is the oldest stored transition.
    const Transition& at(std::size_t i) const;

    // Uniform with replacement.
    std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> items_;
    std::size_t head_ = 0;                    // slot of the oldest item once full
    std::uint64_t inserted_ = 0;
};

// Argmax with ties resolved to the lowest action code.
Action greedy_action(const std::array<double, 3>& q);

Action select_action(IndicatorNetwork& qnet, std::span<const double> obs, double epsilon, std::mt19937_64& rng);

// y = r for terminal transitions, r + gamma max_a Q_target(next_obs, a) otherwise.
std::vector<double> td_targets(std::span<const Transition* const> batch, double gamma, IndicatorNetwork& target,
                               double reward_scale = 1.0);

// Owns the online and target networks, replay memory, optimizer and RNG of
// one training run.
class DqnAgent {
public:
    DqnAgent(IndicatorNetwork qnet, DqnConfig cfg);

    Action act(std::span<const double> obs, double epsilon);
    void remember(Transition t) { buffer_.push(std::move(t)); }

    // One minibatch regression step on the mean squared TD error. Returns
    // the loss before the update. Throws UsageError if the buffer holds
    // fewer than batch_size transitions.
    double train_step();

    IndicatorNetwork& qnet() { return qnet_; }
    const IndicatorNetwork& target() const { return target_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    std::size_t gradient_steps() const { return gradient_steps_; }
    const DqnConfig& config() const { return cfg_; }

private:
    void sync_target();

    DqnConfig cfg_;
    IndicatorNetwork qnet_;
    IndicatorNetwork target_;
    ReplayBuffer buffer_;
    Optimizer optimizer_;
    std::mt19937_64 rng_;
    std::size_t gradient_steps_ = 0;
    std::vector<NodeId> q_nodes_;
};

struct EpisodeLog {
    std::size_t episode = 0;
    double total_reward = 0.0;
    double mean_loss = 0.0;
    std::size_t train_steps = 0;
    double epsilon = 0.0;                     // at the episode's last step
    std::size_t trades = 0;
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpisodeLog> episodes;

    // `episode,total_reward,mean_loss,epsilon,trades`. Deterministic; wall
    // clock lives in timing_csv().
    std::string csv() const;
    std::string timing_csv() const;
};

struct TrainResult {
    IndicatorNetwork qnet;
    TrainLog log;
};

// The QNET spec's input_len and feature_dim are filled from the
// environment window and the feature matrix width when left at 0.
TrainResult train(const FeatureMatrix& fm, const EnvConfig& env_cfg, const DqnConfig& cfg, IndicatorNetworkSpec qspec);

// Greedy (epsilon = 0) rollout.
EpisodeResult evaluate(IndicatorNetwork& qnet, const FeatureMatrix& fm, const EnvConfig& env_cfg);

} // namespace tinlab
