#pragma once

// Leaky echo state network with fixed random input/recurrent matrices.
// Two modes share one update rule: generic mode appends a bias term to the
// input (time-series certification path, trained by ridge regression);
// RCRC mode feeds CNN features directly with no bias.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rcrc/rng.hpp"

namespace rcrc {

struct ReservoirSpec {
    int input_dim = 0;
    int state_dim = 512;          // D_esn
    double leak_rate = 0.8;       // alpha
    double sparsity = 0.8;        // fraction of exactly-zero entries of W
    double spectral_radius = 0.95;
    double weight_stddev = 0.1;
    bool bias_input = false;      // true: generic ESN mode, input becomes [u; 1]

    static ReservoirSpec defaults(int input_dim) {
        ReservoirSpec s;
        s.input_dim = input_dim;
        return s;
    }

    void validate() const {
        if (input_dim < 1 || state_dim < 1)
            throw std::invalid_argument("ReservoirSpec: dimensions must be positive");
        if (leak_rate < 0.0 || leak_rate > 1.0)
            throw std::invalid_argument("ReservoirSpec: leak_rate must be in [0,1]");
        if (sparsity < 0.0 || sparsity > 1.0)
            throw std::invalid_argument("ReservoirSpec: sparsity must be in [0,1]");
        if (spectral_radius <= 0.0)
            throw std::invalid_argument("ReservoirSpec: spectral_radius must be positive");
        if (weight_stddev <= 0.0)
            throw std::invalid_argument("ReservoirSpec: weight_stddev must be positive");
    }

    int effective_input_dim() const { return input_dim + (bias_input ? 1 : 0); }
};

namespace detail {

/// Largest-modulus Ritz value of a k-dimensional Krylov subspace (Arnoldi
/// with one reorthogonalization pass and a deterministic start vector).
/// Sets `exact` when the subspace became invariant (k >= n or breakdown),
/// in which case the Ritz values are the true eigenvalues.
inline double arnoldi_radius_estimate(const Eigen::MatrixXd& m, int k, bool* exact) {
    const Eigen::Index n = m.rows();
    k = static_cast<int>(std::min<Eigen::Index>(k, n));
    *exact = k == n;

    Rng rng(hash_seed({0x9e1f5ecu, static_cast<std::uint64_t>(n)}));
    Eigen::MatrixXd v(n, k + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k + 1, k);
    Eigen::VectorXd v0(n);
    for (Eigen::Index i = 0; i < n; ++i) v0(i) = rng.gaussian();
    v.col(0) = v0.normalized();

    int built = k;
    for (int j = 0; j < k; ++j) {
        Eigen::VectorXd w = m * v.col(j);
        for (int pass = 0; pass < 2; ++pass) {  // MGS + reorthogonalization
            for (int i = 0; i <= j; ++i) {
                const double c = v.col(i).dot(w);
                h(i, j) += c;
                w -= c * v.col(i);
            }
        }
        h(j + 1, j) = w.norm();
        if (h(j + 1, j) < 1e-14) {  // invariant subspace reached
            built = j + 1;
            *exact = true;
            break;
        }
        if (j + 1 < k) v.col(j + 1) = w / h(j + 1, j);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(h.topLeftCorner(built, built),
                                               /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectral_radius: Hessenberg eigendecomposition failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Largest absolute eigenvalue. Arnoldi Ritz estimate (exact for dim <= 200
/// or on breakdown); otherwise two subspace sizes must agree to relative
/// 1e-9, with a dense eigendecomposition fallback for dim <= 1024.
inline double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("spectral_radius: matrix not square");
    if (!m.allFinite()) throw std::invalid_argument("spectral_radius: non-finite entries");
    const Eigen::Index n = m.rows();
    if (n == 0) return 0.0;

    // Radii below roundoff relative to the entry scale are numerically zero
    // (e.g. nilpotent matrices, whose Ritz values carry O(eps) noise).
    const double scale = m.cwiseAbs().maxCoeff();
    const auto snap = [scale](double r) { return r <= 1e-12 * scale ? 0.0 : r; };

    bool exact = false;
    const double first = detail::arnoldi_radius_estimate(m, 200, &exact);
    if (exact) return snap(first);
    const double second = detail::arnoldi_radius_estimate(m, 300, &exact);
    if (exact || std::abs(second - first) <= 1e-9 * std::max(second, 1e-300))
        return snap(second);

    if (n > 1024)
        throw std::runtime_error("spectral_radius: Krylov estimates did not settle and "
                                 "matrix too large for dense fallback");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectral_radius: eigendecomposition failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

class Reservoir {
public:
    Reservoir(ReservoirSpec spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
        spec_.validate();
        Rng rng(seed_);

        const int d = spec_.state_dim;
        const int in = spec_.effective_input_dim();

        w_in_.resize(d, in);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < in; ++c) w_in_(r, c) = rng.gaussian(0.0, spec_.weight_stddev);

        w_.resize(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) w_(r, c) = rng.gaussian(0.0, spec_.weight_stddev);

        // Exactly round(sparsity * d^2) entries are zeroed, chosen uniformly
        // without replacement (partial Fisher-Yates over flat indices).
        const std::size_t total = static_cast<std::size_t>(d) * d;
        const std::size_t n_zero =
            static_cast<std::size_t>(std::llround(spec_.sparsity * static_cast<double>(total)));
        std::vector<std::uint32_t> idx(total);
        for (std::size_t i = 0; i < total; ++i) idx[i] = static_cast<std::uint32_t>(i);
        for (std::size_t i = 0; i < n_zero; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
            std::swap(idx[i], idx[j]);
            w_.data()[idx[i]] = 0.0;  // flat index into column-major storage
        }

        const double radius = spectral_radius(w_);
        if (radius < 1e-12)
            throw std::runtime_error("Reservoir: masked W has (numerically) zero spectral "
                                     "radius, cannot rescale");
        w_ *= spec_.spectral_radius / radius;

        state_ = Eigen::VectorXd::Zero(d);
    }

    /// Assemble from explicit matrices; no masking or rescaling is applied.
    Reservoir(ReservoirSpec spec, Eigen::MatrixXd w_in, Eigen::MatrixXd w)
        : spec_(spec), seed_(0), w_in_(std::move(w_in)), w_(std::move(w)) {
        spec_.validate();
        if (w_in_.rows() != spec_.state_dim || w_in_.cols() != spec_.effective_input_dim() ||
            w_.rows() != spec_.state_dim || w_.cols() != spec_.state_dim)
            throw std::invalid_argument("Reservoir: explicit matrix dimensions mismatch");
        state_ = Eigen::VectorXd::Zero(spec_.state_dim);
    }

    const ReservoirSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }
    const Eigen::MatrixXd& w_in() const { return w_in_; }
    const Eigen::MatrixXd& w() const { return w_; }
    const Eigen::VectorXd& state() const { return state_; }

    void set_state(const Eigen::VectorXd& state) {
        if (state.size() != spec_.state_dim)
            throw std::invalid_argument("Reservoir::set_state: dimension mismatch");
        state_ = state;
    }

    void reset() { state_.setZero(); }

    /// One leaky update; mutates and returns the state.
    const Eigen::VectorXd& step(const Eigen::VectorXd& input) {
        if (input.size() != spec_.input_dim)
            throw std::invalid_argument("Reservoir::step: input dimension mismatch");
        Eigen::VectorXd pre;
        if (spec_.bias_input) {
            Eigen::VectorXd u(spec_.input_dim + 1);
            u.head(spec_.input_dim) = input;
            u(spec_.input_dim) = 1.0;
            pre = w_in_ * u + w_ * state_;
        } else {
            pre = w_in_ * input + w_ * state_;
        }
        const double alpha = spec_.leak_rate;
        state_ = (1.0 - alpha) * state_ + alpha * pre.array().tanh().matrix();
        return state_;
    }

private:
    ReservoirSpec spec_;
    std::uint64_t seed_;
    Eigen::MatrixXd w_in_;
    Eigen::MatrixXd w_;
    Eigen::VectorXd state_;
};

struct RidgeReadout {
    Eigen::MatrixXd weights;  // target_dim x (state_dim + input_dim + 1)
    double regularization = 0.0;

    Eigen::VectorXd predict(const Eigen::VectorXd& state, const Eigen::VectorXd& input) const {
        if (state.size() + input.size() + 1 != weights.cols())
            throw std::invalid_argument("RidgeReadout::predict: dimension mismatch");
        Eigen::VectorXd z(weights.cols());
        z.head(state.size()) = state;
        z.segment(state.size(), input.size()) = input;
        z(z.size() - 1) = 1.0;
        return weights * z;
    }
};

/// Ridge regression over the design Z = [states; inputs; 1] row-wise,
/// solved by normal equations (Z'Z + lambda I) W' = Z' targets.
inline RidgeReadout fit_ridge(const Eigen::MatrixXd& states, const Eigen::MatrixXd& inputs,
                              const Eigen::MatrixXd& targets, double lambda) {
    const Eigen::Index n = states.rows();
    if (n < 1) throw std::invalid_argument("fit_ridge: no samples");
    if (inputs.rows() != n || targets.rows() != n)
        throw std::invalid_argument("fit_ridge: row count mismatch");
    if (lambda < 0.0) throw std::invalid_argument("fit_ridge: lambda must be nonnegative");

    const Eigen::Index d = states.cols() + inputs.cols() + 1;
    Eigen::MatrixXd z(n, d);
    z.leftCols(states.cols()) = states;
    z.middleCols(states.cols(), inputs.cols()) = inputs;
    z.rightCols(1).setOnes();

    const Eigen::MatrixXd gram =
        z.transpose() * z + lambda * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd rhs = z.transpose() * targets;

    if (lambda == 0.0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        if (!lu.isInvertible())
            throw std::runtime_error("fit_ridge: singular normal equations with lambda=0; "
                                     "use lambda > 0");
        RidgeReadout readout;
        readout.weights = lu.solve(rhs).transpose();
        readout.regularization = lambda;
        return readout;
    }

    RidgeReadout readout;
    readout.weights = gram.ldlt().solve(rhs).transpose();
    readout.regularization = lambda;
    return readout;
}

}  // namespace rcrc
