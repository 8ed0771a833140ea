#pragma once

// Discrete-action projectile dodger. The agent slides along the bottom of
// the frame; projectiles fall in seed-determined columns at seed-determined
// speeds. Reward is +1 per survived step; collision ends the episode.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rcrc/env.hpp"
#include "rcrc/rng.hpp"

namespace rcrc {

struct DodgePhysics {
    int agent_half_width = 3;   // agent spans 2*half+1 columns
    int agent_stride = 2;       // pixels moved per step
    int agent_top_row = 58;     // agent occupies rows [top, 63]
    double spawn_rate = 0.05;   // expected projectiles per step
    int min_fall_speed = 1;     // rows per step
    int max_fall_speed = 2;
    int projectile_half_width = 1;
};

class DodgeBallEnv final : public Environment {
public:
    explicit DodgeBallEnv(const EnvConfig& config) : config_(config) {
        if (config_.kind != EnvKind::kDodgeBall)
            throw std::invalid_argument("DodgeBallEnv: wrong config kind");
    }

    EnvKind kind() const override { return EnvKind::kDodgeBall; }
    int max_steps() const override { return config_.resolved_max_steps(); }

    RawImage reset(std::uint64_t episode_seed) override {
        rng_ = Rng(hash_seed({config_.seed, episode_seed, 0x646f646765ULL}));
        agent_x_ = kFrameSize / 2;
        projectiles_.clear();
        steps_ = 0;
        done_ = false;
        started_ = true;
        return render();
    }

    StepResult step(const EnvAction& action) override {
        if (!started_) throw std::logic_error("DodgeBallEnv: step before reset");
        if (done_) throw std::logic_error("DodgeBallEnv: step after episode end");
        const auto* a = std::get_if<DiscreteAction>(&action);
        if (a == nullptr)
            throw std::invalid_argument("DodgeBallEnv: expected discrete action");

        const DodgePhysics& p = physics_;
        agent_x_ += (*a == DiscreteAction::kLeft ? -p.agent_stride : p.agent_stride);
        agent_x_ = std::clamp(agent_x_, p.agent_half_width,
                              kFrameSize - 1 - p.agent_half_width);

        bool hit = false;
        for (auto& proj : projectiles_) {
            proj.row += proj.speed;
            if (proj.row >= p.agent_top_row &&
                std::abs(proj.col - agent_x_) <= p.agent_half_width + p.projectile_half_width)
                hit = true;
        }
        std::erase_if(projectiles_, [](const Projectile& proj) {
            return proj.row >= kFrameSize;
        });

        // The spawn draw happens exactly once per step, so the projectile
        // schedule is a pure function of the episode seed.
        if (rng_.uniform01() < p.spawn_rate) {
            Projectile proj;
            proj.col = p.projectile_half_width +
                       static_cast<int>(rng_.below(
                           static_cast<std::uint64_t>(kFrameSize - 2 * p.projectile_half_width)));
            proj.row = 0;
            proj.speed = p.min_fall_speed +
                         static_cast<int>(rng_.below(static_cast<std::uint64_t>(
                             p.max_fall_speed - p.min_fall_speed + 1)));
            projectiles_.push_back(proj);
        }

        ++steps_;
        if (hit || steps_ >= max_steps()) done_ = true;

        StepResult result;
        result.frame = render();
        result.reward = 1.0;
        result.done = done_;
        result.info.steps_survived = steps_;
        return result;
    }

    RawImage render() const override {
        RawImage img = RawImage::filled(kFrameSize, kFrameSize, 0);
        for (int y = 0; y < kFrameSize; ++y)
            for (int x = 0; x < kFrameSize; ++x) put(img, y, x, 15, 15, 40);  // backdrop

        const DodgePhysics& p = physics_;
        for (const auto& proj : projectiles_) {
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -p.projectile_half_width; dx <= p.projectile_half_width; ++dx)
                    put(img, proj.row + dy, proj.col + dx, 255, 200, 60);
        }
        for (int y = p.agent_top_row; y < kFrameSize; ++y)
            for (int dx = -p.agent_half_width; dx <= p.agent_half_width; ++dx)
                put(img, y, agent_x_ + dx, 60, 220, 80);
        return img;
    }

    int agent_x() const { return agent_x_; }
    int steps_survived() const { return steps_; }

    struct Projectile {
        int col = 0;
        int row = 0;
        int speed = 1;
    };
    const std::vector<Projectile>& projectiles() const { return projectiles_; }

private:
    static void put(RawImage& img, int y, int x, std::uint8_t r, std::uint8_t g,
                    std::uint8_t b) {
        if (y < 0 || y >= img.height || x < 0 || x >= img.width) return;
        img.at(y, x, 0) = r;
        img.at(y, x, 1) = g;
        img.at(y, x, 2) = b;
    }

    EnvConfig config_;
    DodgePhysics physics_;
    Rng rng_{0};

    int agent_x_ = kFrameSize / 2;
    std::vector<Projectile> projectiles_;
    int steps_ = 0;
    bool done_ = false;
    bool started_ = false;
};

}  // namespace rcrc
