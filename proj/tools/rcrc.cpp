// rcrc command-line tool: train / eval / rollout / dump-features / bench.
//
// Output files land in --out when given, otherwise under the RCRC_OUT_ROOT
// environment variable, otherwise the current directory.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rcrc/checkpoint.hpp"
#include "rcrc/history.hpp"
#include "rcrc/trainer.hpp"

namespace fs = std::filesystem;
using namespace rcrc;

namespace {

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* root = std::getenv("RCRC_OUT_ROOT"); root && *root) return root;
    return ".";
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
    Config cfg = Config::parse_file(path);
    for (const std::string& kv : overrides) cfg.set_from_override(kv);
    return cfg;
}

/// Rebuild the run configuration a checkpoint was trained with, with
/// optional key overrides (e.g. a different trial budget or env seed).
TrainConfig config_from_checkpoint(const Checkpoint& ckpt,
                                   const std::vector<std::string>& overrides) {
    if (ckpt.config_text.empty())
        throw std::runtime_error("checkpoint carries no config text");
    Config cfg = Config::parse_text(ckpt.config_text, "checkpoint config");
    for (const std::string& kv : overrides) cfg.set_from_override(kv);
    return TrainConfig::from_config(cfg);
}

Checkpoint make_checkpoint(const TrainConfig& tc, const Config& cfg,
                           const ControllerWeights& weights, int generation,
                           const std::string& optimizer_blob) {
    Checkpoint ckpt;
    ckpt.conv_spec = tc.conv_spec;
    ckpt.extractor_seed = tc.extractor_seed;
    ckpt.reservoir_spec = tc.reservoir_spec();
    ckpt.reservoir_seed = tc.reservoir_seed;
    ckpt.action_mode = tc.action_mode();
    ckpt.w_out = weights.w_out();
    ckpt.optimizer_blob = optimizer_blob;
    ckpt.generation = static_cast<std::uint32_t>(generation);
    ckpt.config_text = cfg.canonical_text();
    ckpt.config_hash = cfg.hash();
    return ckpt;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_flag) {
    const Config cfg = load_config(config_path, overrides);
    const TrainConfig tc = TrainConfig::from_config(cfg);
    const fs::path out_dir = resolve_out_dir(out_flag);
    fs::create_directories(out_dir);
    const std::string ckpt_path = (out_dir / "checkpoint.bin").string();
    const std::string history_path = (out_dir / "history.csv").string();

    const TrainResult result = train(
        tc, [&](const CmaEs& es, const GenerationReport& report, const TrainResult& so_far) {
            make_checkpoint(tc, cfg, so_far.best_weights, report.generation, es.serialize())
                .save(ckpt_path);
            write_history_csv(history_path, so_far.history);
            std::cout << "gen " << report.generation << " best_mean="
                      << csv_double(report.best_mean) << " best_ever="
                      << csv_double(so_far.best_score) << " ("
                      << csv_double(report.wall_time_seconds) << " s)\n";
        });

    if (tc.generations == 0) {  // nothing trained; still leave artifacts behind
        make_checkpoint(tc, cfg, result.best_weights, 0, "").save(ckpt_path);
        write_history_csv(history_path, result.history);
    }
    std::cout << "done best_score=" << csv_double(result.best_score) << " at_generation="
              << result.best_generation << "\n";
    std::cout << "checkpoint: " << ckpt_path << "\nhistory: " << history_path << "\n";
    return 0;
}

int cmd_eval(const std::string& ckpt_path, int trials,
             const std::vector<std::string>& overrides) {
    const Checkpoint ckpt = Checkpoint::load(ckpt_path);
    const TrainConfig tc = config_from_checkpoint(ckpt, overrides);
    const EvalResult result = evaluate_generalization(ckpt.controller(), tc, trials);
    std::cout << "mean=" << csv_double(result.mean) << " std=" << csv_double(result.stddev)
              << " trials=" << result.trials << "\n";
    return 0;
}

std::string trace_action(const EnvAction& action) {
    if (const auto* d = std::get_if<DiscreteAction>(&action))
        return *d == DiscreteAction::kLeft ? "left" : "right";
    const auto& c = std::get<ContinuousAction>(action);
    return csv_double(c.steer) + ":" + csv_double(c.brake) + ":" + csv_double(c.accel);
}

int cmd_rollout(const std::string& ckpt_path, std::uint64_t episode_seed,
                const std::string& out_flag, const std::vector<std::string>& overrides) {
    const Checkpoint ckpt = Checkpoint::load(ckpt_path);
    const TrainConfig tc = config_from_checkpoint(ckpt, overrides);
    const ControllerWeights controller = ckpt.controller();
    const FeatureExtractor extractor(tc.conv_spec, tc.extractor_seed);
    Reservoir reservoir(tc.reservoir_spec(), tc.reservoir_seed);
    auto env = make_environment(tc.env);

    const fs::path out_dir = resolve_out_dir(out_flag);
    fs::create_directories(out_dir);
    std::ofstream trace((out_dir / "trace.csv").string(), std::ios::binary);
    std::ofstream states((out_dir / "states.csv").string(), std::ios::binary);
    if (!trace || !states)
        throw std::runtime_error("rollout: cannot write into " + out_dir.string());
    trace << "step,action,reward\n";

    RawImage raw = env->reset(episode_seed);
    double total = 0.0;
    int step = 0;
    while (true) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06d.ppm", step);
        write_ppm(raw, (out_dir / name).string());

        const Frame frame = preprocess(raw);
        const Eigen::VectorXd x_conv = extractor.extract(frame);
        const Eigen::VectorXd s = assemble_input(x_conv, reservoir.state());
        EnvAction action;
        if (controller.mode() == ActionMode::kContinuous3)
            action = controller.act_continuous(s);
        else
            action = controller.act_discrete(s);
        reservoir.step(x_conv);

        states << step;
        for (Eigen::Index i = 0; i < reservoir.state().size(); ++i)
            states << "," << csv_double(reservoir.state()(i));
        states << "\n";

        StepResult result = env->step(action);
        total += result.reward;
        trace << step << "," << trace_action(action) << "," << csv_double(result.reward)
              << "\n";
        ++step;
        if (result.done) break;
        raw = std::move(result.frame);
    }
    trace.flush();
    states.flush();
    if (!trace || !states) throw std::runtime_error("rollout: trace write failed");
    std::cout << "score=" << csv_double(total) << " steps=" << step << "\n";
    return 0;
}

/// Map a post-tanh activation in [-1, 1] to a gray pixel.
std::uint8_t activation_to_gray(double v) {
    const double scaled = (v + 1.0) / 2.0 * 255.0;
    return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0) + 0.5);
}

int cmd_dump_features(const std::string& ckpt_path, const std::string& frame_path,
                      std::uint64_t episode_seed, const std::string& out_flag,
                      const std::vector<std::string>& overrides) {
    const Checkpoint ckpt = Checkpoint::load(ckpt_path);
    const TrainConfig tc = config_from_checkpoint(ckpt, overrides);
    const FeatureExtractor extractor(tc.conv_spec, tc.extractor_seed);

    RawImage raw;
    if (!frame_path.empty()) {
        raw = read_ppm(frame_path);
    } else {
        auto env = make_environment(tc.env);
        raw = env->reset(episode_seed);
    }
    const Frame frame = preprocess(raw);

    const fs::path out_dir = resolve_out_dir(out_flag);
    fs::create_directories(out_dir);
    const std::vector<Tensor3> acts = extractor.layer_activations(frame);
    int written = 0;
    for (std::size_t l = 0; l < acts.size(); ++l) {
        const Tensor3& t = acts[l];
        for (int c = 0; c < t.channels; ++c) {
            RawImage img = RawImage::filled(t.height, t.width, 0);
            for (int y = 0; y < t.height; ++y)
                for (int x = 0; x < t.width; ++x) {
                    const std::uint8_t g = activation_to_gray(t.at(c, y, x));
                    img.at(y, x, 0) = img.at(y, x, 1) = img.at(y, x, 2) = g;
                }
            char name[48];
            std::snprintf(name, sizeof name, "layer%zu_ch%03d.ppm", l, c);
            write_ppm(img, (out_dir / name).string());
            ++written;
        }
    }
    std::cout << "layers=" << acts.size() << " images=" << written << " dir="
              << out_dir.string() << "\n";
    return 0;
}

int cmd_bench(const std::string& config_path, int frames,
              const std::vector<std::string>& overrides) {
    const Config cfg = load_config(config_path, overrides);
    const TrainConfig tc = TrainConfig::from_config(cfg);
    const FeatureExtractor extractor(tc.conv_spec, tc.extractor_seed);
    Reservoir reservoir(tc.reservoir_spec(), tc.reservoir_seed);
    auto env = make_environment(tc.env);

    RawImage raw = env->reset(tc.env.seed);
    double extract_s = 0.0, step_s = 0.0;
    for (int i = 0; i < frames; ++i) {
        const Frame frame = preprocess(raw);
        auto t0 = std::chrono::steady_clock::now();
        const Eigen::VectorXd x_conv = extractor.extract(frame);
        auto t1 = std::chrono::steady_clock::now();
        reservoir.step(x_conv);
        auto t2 = std::chrono::steady_clock::now();
        extract_s += std::chrono::duration<double>(t1 - t0).count();
        step_s += std::chrono::duration<double>(t2 - t1).count();

        EnvAction action;
        if (tc.action_mode() == ActionMode::kContinuous3)
            action = ContinuousAction{};
        else
            action = DiscreteAction::kLeft;
        StepResult result = env->step(action);
        raw = result.done ? env->reset(tc.env.seed + i + 1) : std::move(result.frame);
    }
    std::cout << "extract_ms_per_frame=" << csv_double(extract_s / frames * 1e3)
              << " esn_step_ms_per_frame=" << csv_double(step_s / frames * 1e3)
              << " frames=" << frames << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RCRC pipeline: random conv features + echo state reservoir + "
                 "CMA-ES-trained linear controller"};
    app.require_subcommand(1);

    std::string config_path, ckpt_path, out_dir, frame_path;
    std::vector<std::string> overrides;
    int trials = 100;
    int frames = 20;
    std::uint64_t seed = 0;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--set", overrides, "Override a config key (key=value), repeatable");
    };

    CLI::App* train_cmd = app.add_subcommand("train", "Run CMA-ES training from a config file");
    train_cmd->add_option("--config", config_path, "Config file path")->required();
    train_cmd->add_option("--out", out_dir, "Output directory for checkpoint and history");
    add_overrides(train_cmd);

    CLI::App* eval_cmd =
        app.add_subcommand("eval", "Evaluate a checkpoint on fresh episode seeds");
    eval_cmd->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
    eval_cmd->add_option("--trials", trials, "Number of evaluation episodes");
    add_overrides(eval_cmd);

    CLI::App* rollout_cmd =
        app.add_subcommand("rollout", "Play one episode; dump frames and a trace CSV");
    rollout_cmd->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
    rollout_cmd->add_option("--seed", seed, "Episode seed");
    rollout_cmd->add_option("--out", out_dir, "Dump directory");
    add_overrides(rollout_cmd);

    CLI::App* dump_cmd = app.add_subcommand(
        "dump-features", "Write per-layer conv activations as grayscale images");
    dump_cmd->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
    dump_cmd->add_option("--frame", frame_path,
                         "Input frame (PPM); defaults to the env reset frame");
    dump_cmd->add_option("--seed", seed, "Episode seed for the default frame");
    dump_cmd->add_option("--out", out_dir, "Dump directory");
    add_overrides(dump_cmd);

    CLI::App* bench_cmd =
        app.add_subcommand("bench", "Time feature extraction and reservoir stepping");
    bench_cmd->add_option("--config", config_path, "Config file path")->required();
    bench_cmd->add_option("--frames", frames, "Frames to time");
    add_overrides(bench_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(config_path, overrides, out_dir);
        if (eval_cmd->parsed()) return cmd_eval(ckpt_path, trials, overrides);
        if (rollout_cmd->parsed()) return cmd_rollout(ckpt_path, seed, out_dir, overrides);
        if (dump_cmd->parsed())
            return cmd_dump_features(ckpt_path, frame_path, seed, out_dir, overrides);
        if (bench_cmd->parsed()) return cmd_bench(config_path, frames, overrides);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
