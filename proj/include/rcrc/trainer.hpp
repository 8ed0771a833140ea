#pragma once

// Training orchestration: the ask -> parallel evaluate -> tell loop over
// n workers, plus the generalization evaluation protocol. Episode seeds
// are hashed from (namespace, generation, worker, episode) so scores do
// not depend on scheduling order.

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rcrc/cma_es.hpp"
#include "rcrc/config.hpp"
#include "rcrc/controller.hpp"
#include "rcrc/conv.hpp"
#include "rcrc/envs.hpp"
#include "rcrc/reservoir.hpp"
#include "rcrc/rng.hpp"

namespace rcrc {

// Seed namespaces keep training, evaluation and baseline episode seed sets
// disjoint by construction.
inline constexpr std::uint64_t kTrainSeedNamespace = 0x747261696eULL;
inline constexpr std::uint64_t kEvalSeedNamespace = 0x6576616cULL;
inline constexpr std::uint64_t kBaselineSeedNamespace = 0x62617365ULL;

struct TrainConfig {
    EnvConfig env;
    int n_workers = 16;             // = CMA-ES population size
    int episodes_per_candidate = 8; // m
    int generations = 500;
    int eval_trials = 100;
    int threads = 1;

    ConvSpec conv_spec = ConvSpec::defaults();
    int esn_dim = 512;
    double esn_leak_rate = 0.8;
    double esn_sparsity = 0.8;
    double esn_spectral_radius = 0.95;
    double esn_weight_stddev = 0.1;

    std::uint64_t extractor_seed = 1;
    std::uint64_t reservoir_seed = 2;
    std::uint64_t cma_seed = 3;
    double sigma0 = 0.1;

    bool has_target_score = false;  // optional early stop
    double target_score = 0.0;

    void validate() const {
        if (n_workers < 2) throw std::invalid_argument("TrainConfig: need >= 2 workers");
        if (episodes_per_candidate < 1)
            throw std::invalid_argument("TrainConfig: episodes_per_candidate must be >= 1");
        if (generations < 0) throw std::invalid_argument("TrainConfig: negative generations");
        if (eval_trials < 1) throw std::invalid_argument("TrainConfig: eval_trials must be >= 1");
        if (threads < 1) throw std::invalid_argument("TrainConfig: threads must be >= 1");
        conv_spec.validate();
        reservoir_spec().validate();
    }

    ActionMode action_mode() const {
        return env.kind == EnvKind::kTrackRunner ? ActionMode::kContinuous3
                                                 : ActionMode::kDiscrete2;
    }

    ReservoirSpec reservoir_spec() const {
        ReservoirSpec s;
        s.input_dim = conv_spec.dense_out;
        s.state_dim = esn_dim;
        s.leak_rate = esn_leak_rate;
        s.sparsity = esn_sparsity;
        s.spectral_radius = esn_spectral_radius;
        s.weight_stddev = esn_weight_stddev;
        s.bias_input = false;  // RCRC mode
        return s;
    }

    int controller_param_count() const {
        return action_count(action_mode()) * (conv_spec.dense_out + esn_dim + 1);
    }

    /// Worst achievable episode score; assigned to candidates whose
    /// evaluation faults.
    double failure_score() const {
        if (env.kind == EnvKind::kTrackRunner)
            return -0.1 * env.resolved_max_steps() * episodes_per_candidate;
        return 0.0;
    }

    static TrainConfig from_config(const Config& cfg) {
        TrainConfig tc;
        tc.env.kind = env_kind_from_string(cfg.get_str("env.kind"));
        tc.env.max_steps = static_cast<int>(cfg.get_int("env.max_steps", 0));
        tc.env.seed = cfg.get_u64("env.seed", 0);

        const bool continuous = tc.env.kind == EnvKind::kTrackRunner;
        tc.n_workers = static_cast<int>(cfg.get_int("train.workers", continuous ? 16 : 32));
        tc.episodes_per_candidate = static_cast<int>(cfg.get_int("train.episodes", 8));
        tc.generations = static_cast<int>(cfg.get_int("train.generations", 500));
        tc.eval_trials = static_cast<int>(cfg.get_int("train.eval_trials", 100));
        tc.threads = static_cast<int>(cfg.get_int("train.threads", 1));

        const std::string preset = cfg.get_str("model.conv_preset", "default");
        const int d_conv = static_cast<int>(cfg.get_int("model.d_conv", 512));
        if (preset == "default") {
            tc.conv_spec = ConvSpec::defaults();
            tc.conv_spec.dense_out = d_conv;
        } else if (preset == "reduced") {
            tc.conv_spec = ConvSpec::reduced(d_conv);
        } else {
            throw ConfigError("config key model.conv_preset: unknown preset: " + preset);
        }
        tc.esn_dim = static_cast<int>(cfg.get_int("model.d_esn", 512));
        tc.esn_leak_rate = cfg.get_double("esn.leak_rate", 0.8);
        tc.esn_sparsity = cfg.get_double("esn.sparsity", 0.8);
        tc.esn_spectral_radius = cfg.get_double("esn.spectral_radius", 0.95);
        tc.esn_weight_stddev = cfg.get_double("esn.weight_stddev", 0.1);

        tc.extractor_seed = cfg.get_u64("model.extractor_seed", 1);
        tc.reservoir_seed = cfg.get_u64("model.reservoir_seed", 2);
        tc.cma_seed = cfg.get_u64("cma.seed", 3);
        tc.sigma0 = cfg.get_double("cma.sigma0", 0.1);

        if (cfg.has("train.target_score")) {
            tc.has_target_score = true;
            tc.target_score = cfg.get_double("train.target_score");
        }
        tc.validate();
        return tc;
    }
};

struct GenerationReport {
    int generation = 0;
    std::vector<double> scores;       // G_i per candidate
    double best_mean = 0.0;           // max_i G_i
    int best_index = 0;
    double wall_time_seconds = 0.0;   // informational; not part of the history CSV
};

struct TrainResult {
    ControllerWeights best_weights;
    double best_score = 0.0;
    int best_generation = -1;
    std::vector<GenerationReport> history;
};

inline std::uint64_t episode_seed(std::uint64_t ns, std::uint64_t env_seed,
                                  std::uint64_t generation, std::uint64_t worker,
                                  std::uint64_t episode) {
    return hash_seed({ns, env_seed, generation, worker, episode});
}

/// One full episode with the given controller; returns the total reward.
/// The controller acts on S(t) = [X_conv(t); X_esn(t); 1] where X_esn(t)
/// is the pre-update reservoir state; the reservoir then absorbs X_conv(t).
inline double run_episode(const FeatureExtractor& extractor, Reservoir& reservoir,
                          const ControllerWeights& controller, Environment& env,
                          std::uint64_t seed) {
    reservoir.reset();
    RawImage raw = env.reset(seed);
    double total = 0.0;
    while (true) {
        const Frame frame = preprocess(raw);
        const Eigen::VectorXd x_conv = extractor.extract(frame);
        const Eigen::VectorXd s = assemble_input(x_conv, reservoir.state());
        EnvAction action;
        if (controller.mode() == ActionMode::kContinuous3)
            action = controller.act_continuous(s);
        else
            action = controller.act_discrete(s);
        reservoir.step(x_conv);
        StepResult result = env.step(action);
        total += result.reward;
        if (result.done) break;
        raw = std::move(result.frame);
    }
    return total;
}

/// G_i: mean score of one candidate over m deterministic episodes.
inline double score_candidate(const Eigen::VectorXd& params, const TrainConfig& cfg,
                              const FeatureExtractor& extractor, Reservoir& reservoir,
                              int worker_id, int generation) {
    if (params.size() != cfg.controller_param_count())
        throw std::invalid_argument("score_candidate: parameter length mismatch");
    ControllerWeights controller(cfg.action_mode(), cfg.conv_spec.dense_out + cfg.esn_dim);
    controller.set_params(params);
    auto env = make_environment(cfg.env);
    double sum = 0.0;
    for (int j = 0; j < cfg.episodes_per_candidate; ++j) {
        const std::uint64_t seed =
            episode_seed(kTrainSeedNamespace, cfg.env.seed,
                         static_cast<std::uint64_t>(generation),
                         static_cast<std::uint64_t>(worker_id),
                         static_cast<std::uint64_t>(j));
        sum += run_episode(extractor, reservoir, controller, *env, seed);
    }
    return sum / cfg.episodes_per_candidate;
}

namespace detail {

/// Static round-robin parallel for; each slot owns its reservoir clone.
inline void parallel_candidates(int count, int threads,
                                const std::function<void(int candidate, int slot)>& work) {
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) work(i, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < count; i += threads) work(i, t);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

using GenerationCallback =
    std::function<void(const CmaEs&, const GenerationReport&, const TrainResult&)>;

inline TrainResult train(const TrainConfig& cfg, const GenerationCallback& on_generation = {}) {
    cfg.validate();
    const FeatureExtractor extractor(cfg.conv_spec, cfg.extractor_seed);
    const Reservoir prototype(cfg.reservoir_spec(), cfg.reservoir_seed);

    const int threads = std::min(cfg.threads, cfg.n_workers);
    std::vector<Reservoir> slots(static_cast<std::size_t>(std::max(threads, 1)), prototype);

    const int dim = cfg.controller_param_count();
    CmaEs es(Eigen::VectorXd::Zero(dim), cfg.sigma0, cfg.cma_seed, cfg.n_workers);

    TrainResult result{ControllerWeights(cfg.action_mode(),
                                         cfg.conv_spec.dense_out + cfg.esn_dim)};
    result.best_score = cfg.failure_score();
    result.best_weights.set_params(es.mean());

    for (int gen = 0; gen < cfg.generations; ++gen) {
        const auto start = std::chrono::steady_clock::now();
        std::vector<Candidate> candidates = es.ask();
        std::atomic<bool> faulted{false};
        detail::parallel_candidates(
            cfg.n_workers, threads, [&](int i, int slot) {
                try {
                    candidates[i].fitness = score_candidate(candidates[i].params, cfg,
                                                            extractor, slots[slot], i, gen);
                } catch (const std::exception&) {
                    candidates[i].fitness = cfg.failure_score();
                    faulted.store(true);
                }
                candidates[i].evaluated = true;
            });

        GenerationReport report;
        report.generation = gen;
        report.scores.resize(cfg.n_workers);
        report.best_mean = candidates[0].fitness;
        for (int i = 0; i < cfg.n_workers; ++i) {
            report.scores[i] = candidates[i].fitness;
            if (candidates[i].fitness > report.best_mean) {
                report.best_mean = candidates[i].fitness;
                report.best_index = i;
            }
        }
        if (report.best_mean > result.best_score || result.best_generation < 0) {
            result.best_score = report.best_mean;
            result.best_generation = gen;
            result.best_weights.set_params(candidates[report.best_index].params);
        }

        es.tell(std::move(candidates), OptimizeMode::kMaximize);
        report.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(report);
        if (on_generation) on_generation(es, report, result);
        (void)faulted;
        if (cfg.has_target_score && result.best_score >= cfg.target_score) break;
    }
    return result;
}

struct EvalResult {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    int trials = 0;
};

inline EvalResult evaluate_generalization(const ControllerWeights& weights,
                                          const TrainConfig& cfg, int trials) {
    if (trials < 1) throw std::invalid_argument("evaluate_generalization: trials must be >= 1");
    const FeatureExtractor extractor(cfg.conv_spec, cfg.extractor_seed);
    Reservoir reservoir(cfg.reservoir_spec(), cfg.reservoir_seed);
    auto env = make_environment(cfg.env);

    std::vector<double> scores(trials);
    for (int j = 0; j < trials; ++j) {
        const std::uint64_t seed = episode_seed(kEvalSeedNamespace, cfg.env.seed, 0, 0,
                                                static_cast<std::uint64_t>(j));
        scores[j] = run_episode(extractor, reservoir, weights, *env, seed);
    }
    EvalResult result;
    result.trials = trials;
    for (double s : scores) result.mean += s;
    result.mean /= trials;
    for (double s : scores) result.stddev += (s - result.mean) * (s - result.mean);
    result.stddev = std::sqrt(result.stddev / trials);
    return result;
}

/// Seeded uniform-random-policy mean score: the comparison floor.
inline double random_policy_baseline(const TrainConfig& cfg, int episodes,
                                     std::uint64_t policy_seed = 0) {
    auto env = make_environment(cfg.env);
    double sum = 0.0;
    for (int j = 0; j < episodes; ++j) {
        Rng rng(hash_seed({kBaselineSeedNamespace, policy_seed,
                           static_cast<std::uint64_t>(j)}));
        const std::uint64_t seed = episode_seed(kBaselineSeedNamespace, cfg.env.seed, 0, 0,
                                                static_cast<std::uint64_t>(j));
        RawImage raw = env->reset(seed);
        (void)raw;
        while (true) {
            EnvAction action;
            if (cfg.action_mode() == ActionMode::kContinuous3) {
                ContinuousAction a;
                a.steer = rng.uniform(-1.0, 1.0);
                a.brake = rng.uniform01();
                a.accel = rng.uniform01();
                action = a;
            } else {
                action = rng.uniform01() < 0.5 ? DiscreteAction::kLeft : DiscreteAction::kRight;
            }
            StepResult result = env->step(action);
            sum += result.reward;
            if (result.done) break;
        }
    }
    return sum / episodes;
}

}  // namespace rcrc
