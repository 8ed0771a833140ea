#pragma once

// Common surface of the built-in pixel environments. Both are fully
// deterministic: (config seed, episode seed, action sequence) fixes every
// frame, reward and termination flag.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>

#include "rcrc/controller.hpp"
#include "rcrc/image.hpp"

namespace rcrc {

enum class EnvKind { kTrackRunner, kDodgeBall };

inline std::string to_string(EnvKind kind) {
    return kind == EnvKind::kTrackRunner ? "track_runner" : "dodge_ball";
}

inline EnvKind env_kind_from_string(const std::string& s) {
    if (s == "track_runner") return EnvKind::kTrackRunner;
    if (s == "dodge_ball") return EnvKind::kDodgeBall;
    throw std::invalid_argument("unknown env kind: " + s);
}

struct EnvConfig {
    EnvKind kind = EnvKind::kDodgeBall;
    int max_steps = 0;  // 0: kind-specific default (1000 / 2100)
    std::uint64_t seed = 0;

    int resolved_max_steps() const {
        if (max_steps > 0) return max_steps;
        return kind == EnvKind::kTrackRunner ? 1000 : 2100;
    }
};

using EnvAction = std::variant<ContinuousAction, DiscreteAction>;

struct StepInfo {
    int tiles_visited = 0;
    int steps_survived = 0;
};

struct StepResult {
    RawImage frame;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual EnvKind kind() const = 0;
    virtual int max_steps() const = 0;

    /// Regenerate the world from the episode seed and return the first frame.
    virtual RawImage reset(std::uint64_t episode_seed) = 0;

    /// Advance one step. Throws std::logic_error after done.
    virtual StepResult step(const EnvAction& action) = 0;

    /// Pure render of the current state.
    virtual RawImage render() const = 0;

    virtual ActionMode action_mode() const {
        return kind() == EnvKind::kTrackRunner ? ActionMode::kContinuous3
                                               : ActionMode::kDiscrete2;
    }
};

}  // namespace rcrc
