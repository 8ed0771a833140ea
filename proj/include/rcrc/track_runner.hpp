#pragma once

// Continuous-action tile-track racer. A closed loop of tiles is generated
// per episode; reward is 1000/N per newly visited tile minus 0.1 per frame.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rcrc/env.hpp"
#include "rcrc/rng.hpp"

namespace rcrc {

struct TrackPhysics {
    double dt = 0.2;
    double steer_gain = 0.7;    // heading change per unit steer per unit speed
    double accel_gain = 2.0;
    double brake_gain = 4.0;
    double drag = 0.12;
    double max_speed = 8.0;
    double tile_radius = 2.0;   // capture distance for visiting a tile
    double track_margin = 5.0;  // off-track when farther than this from every tile
    double view_scale = 1.6;    // pixels per world unit in the rendered view
};

class TrackRunnerEnv final : public Environment {
public:
    explicit TrackRunnerEnv(const EnvConfig& config) : config_(config) {
        if (config_.kind != EnvKind::kTrackRunner)
            throw std::invalid_argument("TrackRunnerEnv: wrong config kind");
    }

    EnvKind kind() const override { return EnvKind::kTrackRunner; }
    int max_steps() const override { return config_.resolved_max_steps(); }

    RawImage reset(std::uint64_t episode_seed) override {
        Rng rng(hash_seed({config_.seed, episode_seed, 0x7261636bULL}));

        // Control points on a circle with radial jitter, interpolated by a
        // closed Catmull-Rom spline and discretized into tile centers.
        constexpr int kControlPoints = 10;
        constexpr double kBaseRadius = 20.0;
        std::vector<double> radii(kControlPoints);
        for (double& r : radii) r = kBaseRadius + rng.uniform(-6.0, 6.0);

        const int n_tiles = 60 + static_cast<int>(rng.below(41));  // [60, 100]
        tiles_.clear();
        tiles_.reserve(n_tiles);
        auto control = [&](int i) {
            const int k = ((i % kControlPoints) + kControlPoints) % kControlPoints;
            const double angle = 2.0 * M_PI * k / kControlPoints;
            return Vec2{radii[k] * std::cos(angle), radii[k] * std::sin(angle)};
        };
        for (int j = 0; j < n_tiles; ++j) {
            const double u = static_cast<double>(j) * kControlPoints / n_tiles;
            const int seg = static_cast<int>(u);
            const double t = u - seg;
            tiles_.push_back(catmull_rom(control(seg - 1), control(seg), control(seg + 1),
                                         control(seg + 2), t));
        }
        visited_.assign(tiles_.size(), false);

        pos_ = tiles_[0];
        const Vec2 ahead = tiles_[1];
        heading_ = std::atan2(ahead.y - pos_.y, ahead.x - pos_.x);
        speed_ = 0.0;
        steps_ = 0;
        tiles_visited_ = 0;
        done_ = false;
        started_ = true;
        return render();
    }

    StepResult step(const EnvAction& action) override {
        if (!started_) throw std::logic_error("TrackRunnerEnv: step before reset");
        if (done_) throw std::logic_error("TrackRunnerEnv: step after episode end");
        const auto* a = std::get_if<ContinuousAction>(&action);
        if (a == nullptr)
            throw std::invalid_argument("TrackRunnerEnv: expected continuous action");

        const TrackPhysics& p = physics_;
        heading_ += p.steer_gain * a->steer * speed_ * p.dt;
        speed_ += (p.accel_gain * a->accel - p.brake_gain * a->brake - p.drag * speed_) * p.dt;
        speed_ = std::clamp(speed_, 0.0, p.max_speed);
        pos_.x += speed_ * std::cos(heading_) * p.dt;
        pos_.y += speed_ * std::sin(heading_) * p.dt;
        ++steps_;

        double reward = -0.1;
        double nearest = 1e30;
        for (std::size_t i = 0; i < tiles_.size(); ++i) {
            const double d = dist(pos_, tiles_[i]);
            nearest = std::min(nearest, d);
            if (!visited_[i] && d <= p.tile_radius) {
                visited_[i] = true;
                ++tiles_visited_;
                reward += 1000.0 / static_cast<double>(tiles_.size());
            }
        }

        if (tiles_visited_ == static_cast<int>(tiles_.size()) || nearest > p.track_margin ||
            steps_ >= max_steps())
            done_ = true;

        StepResult result;
        result.frame = render();
        result.reward = reward;
        result.done = done_;
        result.info.tiles_visited = tiles_visited_;
        result.info.steps_survived = steps_;
        return result;
    }

    /// Car-centered top-down view, fixed palette, no anti-aliasing.
    RawImage render() const override {
        RawImage img = RawImage::filled(kFrameSize, kFrameSize, 0);
        for (int y = 0; y < kFrameSize; ++y)
            for (int x = 0; x < kFrameSize; ++x) put(img, y, x, 40, 160, 60);  // grass

        for (std::size_t i = 0; i < tiles_.size(); ++i) {
            const int cx = to_px(tiles_[i].x - pos_.x);
            const int cy = to_px(tiles_[i].y - pos_.y);
            const std::uint8_t shade = visited_[i] ? 90 : 130;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx)
                    put(img, cy + dy, cx + dx, shade, shade, shade);
        }
        const int c = kFrameSize / 2;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) put(img, c + dy, c + dx, 220, 30, 30);  // car
        return img;
    }

    int tile_count() const { return static_cast<int>(tiles_.size()); }
    int tiles_visited() const { return tiles_visited_; }
    double speed() const { return speed_; }

private:
    struct Vec2 {
        double x = 0.0, y = 0.0;
    };

    static Vec2 catmull_rom(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double t) {
        auto interp = [t](double a, double b, double c, double d) {
            const double t2 = t * t;
            const double t3 = t2 * t;
            return 0.5 * (2.0 * b + (-a + c) * t + (2.0 * a - 5.0 * b + 4.0 * c - d) * t2 +
                          (-a + 3.0 * b - 3.0 * c + d) * t3);
        };
        return {interp(p0.x, p1.x, p2.x, p3.x), interp(p0.y, p1.y, p2.y, p3.y)};
    }

    static double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

    int to_px(double world_offset) const {
        return kFrameSize / 2 +
               static_cast<int>(std::floor(world_offset * physics_.view_scale));
    }

    static void put(RawImage& img, int y, int x, std::uint8_t r, std::uint8_t g,
                    std::uint8_t b) {
        if (y < 0 || y >= img.height || x < 0 || x >= img.width) return;
        img.at(y, x, 0) = r;
        img.at(y, x, 1) = g;
        img.at(y, x, 2) = b;
    }

    EnvConfig config_;
    TrackPhysics physics_;

    std::vector<Vec2> tiles_;
    std::vector<bool> visited_;
    Vec2 pos_;
    double heading_ = 0.0;
    double speed_ = 0.0;
    int steps_ = 0;
    int tiles_visited_ = 0;
    bool done_ = false;
    bool started_ = false;
};

}  // namespace rcrc
