#include "tinlab/dqn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tinlab/errors.hpp"

namespace tinlab {

void DqnConfig::validate() const
{
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ConfigError("gamma must lie in [0, 1)");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw ConfigError("epsilon bounds must lie in [0, 1]");
    if (epsilon_end > epsilon_start)
        throw ConfigError("epsilon_end must not exceed epsilon_start");
    if (epsilon_decay_steps < 1)
        throw ConfigError("epsilon_decay_steps must be positive");
    if (buffer_capacity < 1 || batch_size < 1)
        throw ConfigError("buffer_capacity and batch_size must be positive");
    if (batch_size > buffer_capacity)
        throw ConfigError("batch_size must not exceed buffer_capacity");
    if (!(lr > 0.0))
        throw ConfigError("lr must be positive");
    if (!(reward_scale > 0.0))
        throw ConfigError("reward_scale must be positive");
}

double epsilon_at(const DqnConfig& cfg, std::size_t step)
{
    if (step >= cfg.epsilon_decay_steps)
        return cfg.epsilon_end;
    const double frac = static_cast<double>(step) / static_cast<double>(cfg.epsilon_decay_steps);
    return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity)
    : capacity_(capacity)
{
    if (capacity == 0)
        throw ConfigError("replay buffer capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t)
{
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
    ++inserted_;
}

const Transition& ReplayBuffer::at(std::size_t i) const
{
    if (i >= items_.size())
        throw RangeError("replay index " + std::to_string(i) + " out of range");
    return items_[(head_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const
{
    if (items_.empty())
        throw UsageError("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const Transition*> out(n);
    for (auto& p : out)
        p = &items_[pick(rng)];
    return out;
}

Action greedy_action(const std::array<double, 3>& q)
{
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[best])
            best = a;
    return action_from_index(best);
}

Action select_action(IndicatorNetwork& qnet, std::span<const double> obs, double epsilon, std::mt19937_64& rng)
{
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw ConfigError("epsilon must lie in [0, 1]");
    if (obs.size() != qnet.graph.input(qnet.inputs.at(0)).tensor.size())
        throw DimensionError("observation length " + std::to_string(obs.size()) + " does not match the network input");
    // Always draw so the random stream does not depend on epsilon.
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const std::size_t random_action = std::uniform_int_distribution<std::size_t>(0, kNumActions - 1)(rng);
    if (u < epsilon)
        return action_from_index(random_action);
    return greedy_action(q_values(qnet, obs));
}

std::vector<double> td_targets(std::span<const Transition* const> batch, double gamma, IndicatorNetwork& target,
                               double reward_scale)
{
    if (batch.empty())
        throw UsageError("td_targets: empty batch");
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Transition& t = *batch[i];
        y[i] = reward_scale * t.reward;
        if (!t.done && gamma != 0.0) {
            const auto q = q_values(target, t.next_obs);
            y[i] += gamma * *std::max_element(q.begin(), q.end());
        }
    }
    return y;
}

DqnAgent::DqnAgent(IndicatorNetwork qnet, DqnConfig cfg)
    : cfg_(cfg)
    , qnet_(std::move(qnet))
    , target_(qnet_)
    , buffer_(cfg.buffer_capacity)
    , optimizer_(cfg.optimizer, AdamConfig{cfg.lr})
    , rng_(cfg.seed)
{
    cfg_.validate();
    if (qnet_.spec.kind != IndicatorKind::QNET)
        throw ConfigError("DQN requires a QNET network");
    q_nodes_ = {qnet_.outputs.at("q_buy"), qnet_.outputs.at("q_sell"), qnet_.outputs.at("q_hold")};
}

Action DqnAgent::act(std::span<const double> obs, double epsilon)
{
    return select_action(qnet_, obs, epsilon, rng_);
}

void DqnAgent::sync_target()
{
    for (std::size_t i = 0; i < qnet_.graph.num_params(); ++i) {
        const auto src = qnet_.graph.param(ParamId{i}).tensor.values();
        auto dst = target_.graph.param(ParamId{i}).tensor.values();
        std::copy(src.begin(), src.end(), dst.begin());
    }
}

double DqnAgent::train_step()
{
    if (buffer_.size() < cfg_.batch_size)
        throw UsageError("train_step: replay buffer holds " + std::to_string(buffer_.size()) + " transitions, batch needs " +
                         std::to_string(cfg_.batch_size));
    const auto batch = buffer_.sample(cfg_.batch_size, rng_);
    IndicatorNetwork& bootstrap = cfg_.target_sync_every == 0 ? qnet_ : target_;
    const auto y = td_targets(batch, cfg_.gamma, bootstrap, cfg_.reward_scale);

    const double scale = 2.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    qnet_.graph.zero_grad();
    for (std::size_t i = 0; i < batch.size(); ++i) {
        qnet_.evaluate(batch[i]->obs);
        const NodeId out = q_nodes_[static_cast<std::size_t>(batch[i]->action)];
        const double err = qnet_.graph.scalar(out) - y[i];
        loss += err * err;
        qnet_.graph.backward(out, scale * err);
    }
    optimizer_.step(qnet_.graph);
    qnet_.trained = true;
    ++gradient_steps_;
    if (cfg_.target_sync_every != 0 && gradient_steps_ % cfg_.target_sync_every == 0)
        sync_target();
    return loss / static_cast<double>(batch.size());
}

std::string TrainLog::csv() const
{
    std::ostringstream os;
    os << "episode,total_reward,mean_loss,epsilon,trades\n";
    char buf[160];
    for (const auto& e : episodes) {
        char loss[40] = "NA";
        if (e.train_steps > 0)
            std::snprintf(loss, sizeof loss, "%.17g", e.mean_loss);
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%s,%.17g,%zu\n", e.episode, e.total_reward, loss, e.epsilon, e.trades);
        os << buf;
    }
    return os.str();
}

std::string TrainLog::timing_csv() const
{
    std::ostringstream os;
    os << "episode,seconds\n";
    char buf[64];
    for (const auto& e : episodes) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f\n", e.episode, e.seconds);
        os << buf;
    }
    return os.str();
}

TrainResult train(const FeatureMatrix& fm, const EnvConfig& env_cfg, const DqnConfig& cfg, IndicatorNetworkSpec qspec)
{
    cfg.validate();
    if (qspec.kind != IndicatorKind::QNET)
        throw ConfigError("train requires a QNET spec");
    if (qspec.input_len == 0)
        qspec.input_len = env_cfg.window_len;
    if (qspec.input_len != env_cfg.window_len)
        throw ConfigError("QNET input_len " + std::to_string(qspec.input_len) + " differs from window_len " +
                          std::to_string(env_cfg.window_len));
    if (qspec.feature_dim != fm.width())
        throw ConfigError("QNET feature_dim " + std::to_string(qspec.feature_dim) + " differs from the " +
                          std::to_string(fm.width()) + " data channels");

    TradingEnv env(fm, env_cfg);
    DqnAgent agent(build_network(qspec), cfg);
    TrainLog log;
    std::size_t step = 0;
    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
        const auto started = std::chrono::steady_clock::now();
        EpisodeLog entry;
        entry.episode = ep + 1;
        std::vector<double> obs = env.reset();
        double loss_sum = 0.0;
        while (!env.done()) {
            entry.epsilon = epsilon_at(cfg, step);
            const Action a = agent.act(obs, entry.epsilon);
            const auto s = env.step(a);
            entry.total_reward += s.reward;
            entry.trades += env.traded() ? 1 : 0;
            agent.remember(Transition{obs, a, s.reward, s.next_obs, s.done});
            obs = s.next_obs;
            if (agent.buffer().size() >= cfg.batch_size) {
                loss_sum += agent.train_step();
                ++entry.train_steps;
            }
            ++step;
        }
        if (entry.train_steps > 0)
            entry.mean_loss = loss_sum / static_cast<double>(entry.train_steps);
        entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        log.episodes.push_back(entry);
    }
    return TrainResult{std::move(agent.qnet()), std::move(log)};
}

EpisodeResult evaluate(IndicatorNetwork& qnet, const FeatureMatrix& fm, const EnvConfig& env_cfg)
{
    return run_policy(fm, env_cfg, [&](std::span<const double> obs, std::size_t) {
        return greedy_action(q_values(qnet, obs));
    });
}

} // namespace tinlab
