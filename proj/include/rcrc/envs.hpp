#pragma once

#include <memory>

#include "rcrc/dodge_ball.hpp"
#include "rcrc/env.hpp"
#include "rcrc/track_runner.hpp"

namespace rcrc {

inline std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
    if (config.kind == EnvKind::kTrackRunner)
        return std::make_unique<TrackRunnerEnv>(config);
    return std::make_unique<DodgeBallEnv>(config);
}

}  // namespace rcrc
