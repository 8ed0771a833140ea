#pragma once

// Controller layer: the single trained matrix mapping [X_conv; X_esn; 1]
// to raw actions, plus the task-specific squashers.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rcrc {

enum class ActionMode { kContinuous3, kDiscrete2 };

inline int action_count(ActionMode mode) {
    return mode == ActionMode::kContinuous3 ? 3 : 1;
}

/// (steer, brake, accel) after squashing. Ordering follows the controller
/// output convention: component 2 is brake, component 3 is accelerator.
struct ContinuousAction {
    double steer = 0.0;  // [-1, 1]
    double brake = 0.0;  // [0, 1]
    double accel = 0.0;  // [0, 1]
};

enum class DiscreteAction { kLeft, kRight };

class ControllerWeights {
public:
    ControllerWeights(ActionMode mode, int feature_dim)
        : mode_(mode),
          w_out_(Eigen::MatrixXd::Zero(action_count(mode), feature_dim + 1)) {}

    ActionMode mode() const { return mode_; }
    int input_dim() const { return static_cast<int>(w_out_.cols()); }
    int param_count() const { return static_cast<int>(w_out_.size()); }
    const Eigen::MatrixXd& w_out() const { return w_out_; }

    /// Flat parameter layout is row-major: all weights of action row 0 first.
    void set_params(const Eigen::VectorXd& flat) {
        if (flat.size() != w_out_.size())
            throw std::invalid_argument("ControllerWeights::set_params: length mismatch");
        for (Eigen::Index r = 0; r < w_out_.rows(); ++r)
            for (Eigen::Index c = 0; c < w_out_.cols(); ++c)
                w_out_(r, c) = flat(r * w_out_.cols() + c);
    }

    Eigen::VectorXd params() const {
        Eigen::VectorXd flat(w_out_.size());
        for (Eigen::Index r = 0; r < w_out_.rows(); ++r)
            for (Eigen::Index c = 0; c < w_out_.cols(); ++c)
                flat(r * w_out_.cols() + c) = w_out_(r, c);
        return flat;
    }

    Eigen::VectorXd raw_action(const Eigen::VectorXd& s) const {
        if (s.size() != w_out_.cols())
            throw std::invalid_argument("ControllerWeights: feature vector length mismatch");
        return w_out_ * s;
    }

    ContinuousAction act_continuous(const Eigen::VectorXd& s) const {
        if (mode_ != ActionMode::kContinuous3)
            throw std::logic_error("act_continuous called on a discrete controller");
        const Eigen::VectorXd a = raw_action(s);
        ContinuousAction out;
        out.steer = std::tanh(a(0));
        out.brake = (std::tanh(a(1)) + 1.0) / 2.0;
        out.accel = std::clamp(std::tanh(a(2)), 0.0, 1.0);
        return out;
    }

    DiscreteAction act_discrete(const Eigen::VectorXd& s) const {
        if (mode_ != ActionMode::kDiscrete2)
            throw std::logic_error("act_discrete called on a continuous controller");
        return raw_action(s)(0) <= 0.0 ? DiscreteAction::kLeft : DiscreteAction::kRight;
    }

private:
    ActionMode mode_;
    Eigen::MatrixXd w_out_;
};

/// S = [x_conv; x_esn; 1].
inline Eigen::VectorXd assemble_input(const Eigen::VectorXd& x_conv,
                                      const Eigen::VectorXd& x_esn) {
    Eigen::VectorXd s(x_conv.size() + x_esn.size() + 1);
    s.head(x_conv.size()) = x_conv;
    s.segment(x_conv.size(), x_esn.size()) = x_esn;
    s(s.size() - 1) = 1.0;
    return s;
}

}  // namespace rcrc
