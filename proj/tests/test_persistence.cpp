#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "rcrc/checkpoint.hpp"
#include "rcrc/cma_es.hpp"
#include "rcrc/config.hpp"
#include "rcrc/image.hpp"

using namespace rcrc;

TEST_CASE("config parser: comments, whitespace, dotted keys") {
    const Config cfg = Config::parse_text(
        "# full-line comment\n"
        "\n"
        "env.kind = dodge_ball   # trailing comment\n"
        "  cma.sigma0=0.25\n"
        "train.workers = 16\n");
    REQUIRE(cfg.get_str("env.kind") == "dodge_ball");
    REQUIRE(cfg.get_double("cma.sigma0") == 0.25);
    REQUIRE(cfg.get_int("train.workers") == 16);
    REQUIRE(cfg.get_int("train.episodes", 8) == 8);
}

TEST_CASE("config parser errors carry the line number") {
    REQUIRE_THROWS_WITH(Config::parse_text("a = 1\nnot a pair\n", "cfg"),
                        Catch::Matchers::ContainsSubstring("cfg:2"));
    const Config cfg = Config::parse_text("train.workers = soon\n");
    REQUIRE_THROWS_WITH(cfg.get_int("train.workers"),
                        Catch::Matchers::ContainsSubstring("train.workers"));
    REQUIRE_THROWS_WITH(cfg.get_str("cma.sigma0"),
                        Catch::Matchers::ContainsSubstring("cma.sigma0"));
}

TEST_CASE("config overrides and hashing") {
    Config a = Config::parse_text("x.a = 1\nx.b = 2\n");
    Config b = Config::parse_text("x.b = 2\nx.a = 1\n");
    REQUIRE(a.hash() == b.hash());  // canonical ordering
    b.set_from_override("x.a=3");
    REQUIRE(a.hash() != b.hash());
    REQUIRE(b.get_int("x.a") == 3);
    REQUIRE_THROWS_AS(b.set_from_override("no-equals"), ConfigError);
}

namespace {

Checkpoint sample_checkpoint() {
    Checkpoint ckpt;
    ckpt.conv_spec = ConvSpec::reduced(16);
    ckpt.extractor_seed = 21;
    ckpt.reservoir_spec = ReservoirSpec::defaults(16);
    ckpt.reservoir_spec.state_dim = 16;
    ckpt.reservoir_seed = 22;
    ckpt.action_mode = ActionMode::kContinuous3;
    ckpt.w_out = Eigen::MatrixXd::Random(3, 33);
    ckpt.generation = 17;
    Config cfg = Config::parse_text("env.kind = track_runner\n");
    ckpt.config_text = cfg.canonical_text();
    ckpt.config_hash = cfg.hash();
    return ckpt;
}

}  // namespace

TEST_CASE("checkpoint round-trip is bitwise identical") {
    const Checkpoint ckpt = sample_checkpoint();
    const std::string bytes = ckpt.encode();
    const Checkpoint loaded = Checkpoint::decode(bytes);
    REQUIRE(loaded.encode() == bytes);
    REQUIRE(loaded.w_out == ckpt.w_out);
    REQUIRE(loaded.conv_spec.dense_out == 16);
    REQUIRE(loaded.extractor_seed == 21);
    REQUIRE(loaded.generation == 17);
    REQUIRE(loaded.rng_algorithm == kRngAlgorithmId);
}

TEST_CASE("checkpoint with optimizer state restores the optimizer") {
    Checkpoint ckpt = sample_checkpoint();
    CmaEs es(Eigen::VectorXd::Zero(6), 0.3, 9);
    auto candidates = es.ask();
    for (auto& c : candidates) {
        c.fitness = c.params.squaredNorm();
        c.evaluated = true;
    }
    es.tell(std::move(candidates), OptimizeMode::kMinimize);
    ckpt.optimizer_blob = es.serialize();

    const Checkpoint loaded = Checkpoint::decode(ckpt.encode());
    CmaEs resumed = CmaEs::deserialize(loaded.optimizer_blob);
    REQUIRE(resumed.mean() == es.mean());
    REQUIRE(resumed.generation() == 1);
}

TEST_CASE("truncated checkpoint names the missing byte counts") {
    const std::string bytes = sample_checkpoint().encode();
    const std::string cut = bytes.substr(0, bytes.size() - 40);
    REQUIRE_THROWS_WITH(Checkpoint::decode(cut),
                        Catch::Matchers::ContainsSubstring("truncated"));
}

TEST_CASE("bad magic and unknown version are rejected") {
    std::string bytes = sample_checkpoint().encode();
    std::string wrong = bytes;
    wrong[0] = 'X';
    REQUIRE_THROWS_WITH(Checkpoint::decode(wrong),
                        Catch::Matchers::ContainsSubstring("magic"));
    std::string future = bytes;
    future[8] = 99;  // version field
    REQUIRE_THROWS_WITH(Checkpoint::decode(future),
                        Catch::Matchers::ContainsSubstring("format_version"));
}

TEST_CASE("config hash mismatch is detected at load") {
    Checkpoint ckpt = sample_checkpoint();
    ckpt.config_text = "env.kind = dodge_ball\n";  // hash left stale
    REQUIRE_THROWS_WITH(Checkpoint::decode(ckpt.encode()),
                        Catch::Matchers::ContainsSubstring("hash mismatch"));
}

TEST_CASE("checkpoint save/load through the filesystem") {
    const auto path = std::filesystem::temp_directory_path() / "rcrc_test.ckpt";
    const Checkpoint ckpt = sample_checkpoint();
    ckpt.save(path.string());
    const Checkpoint loaded = Checkpoint::load(path.string());
    REQUIRE(loaded.encode() == ckpt.encode());
    std::filesystem::remove(path);
    REQUIRE_THROWS_AS(Checkpoint::load(path.string()), std::runtime_error);
}

TEST_CASE("controller reconstruction from a checkpoint") {
    const Checkpoint ckpt = sample_checkpoint();
    const ControllerWeights weights = ckpt.controller();
    REQUIRE(weights.mode() == ActionMode::kContinuous3);
    REQUIRE(weights.w_out() == ckpt.w_out);
}

TEST_CASE("ppm round-trip preserves pixels") {
    RawImage img = RawImage::filled(64, 64, 0);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<std::uint8_t>(i * 31 % 256);
    const auto path = std::filesystem::temp_directory_path() / "rcrc_test.ppm";
    write_ppm(img, path.string());
    const RawImage back = read_ppm(path.string());
    REQUIRE(back.height == 64);
    REQUIRE(back.width == 64);
    REQUIRE(back.pixels == img.pixels);
    std::filesystem::remove(path);
}
