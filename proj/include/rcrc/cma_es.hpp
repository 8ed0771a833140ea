#pragma once

// Ask/tell (mu/mu_w, lambda) covariance matrix adaptation evolution
// strategy. The core is a minimizer; maximization negates fitnesses at the
// tell boundary. Update equations follow the standard tutorial
// formulation: rank-based log weights, cumulative step-size adaptation and
// rank-1 + rank-mu covariance updates.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rcrc/binio.hpp"
#include "rcrc/rng.hpp"

namespace rcrc {

struct Candidate {
    int id = 0;
    Eigen::VectorXd params;
    double fitness = 0.0;
    bool evaluated = false;
};

enum class OptimizeMode { kMinimize, kMaximize };

inline int default_popsize(int dim) {
    return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

class CmaEs {
public:
    CmaEs(const Eigen::VectorXd& mean0, double sigma0, std::uint64_t seed, int popsize = 0)
        : dim_(static_cast<int>(mean0.size())),
          mean_(mean0),
          sigma_(sigma0),
          rng_(seed) {
        if (dim_ < 1) throw std::invalid_argument("CmaEs: dimension must be positive");
        if (sigma0 <= 0.0) throw std::invalid_argument("CmaEs: sigma0 must be positive");
        popsize_ = popsize > 0 ? popsize : default_popsize(dim_);
        if (popsize_ < 2) throw std::invalid_argument("CmaEs: popsize must be at least 2");

        const int n = dim_;
        mu_ = popsize_ / 2;
        weights_.resize(mu_);
        for (int i = 0; i < mu_; ++i)
            weights_[i] = std::log((popsize_ + 1) / 2.0) - std::log(i + 1.0);
        const double wsum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
        double sqsum = 0.0;
        for (double& w : weights_) {
            w /= wsum;
            sqsum += w * w;
        }
        mu_eff_ = 1.0 / sqsum;

        c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
        d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) +
                   c_sigma_;
        c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
        c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
        c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                                         ((n + 2.0) * (n + 2.0) + mu_eff_));
        chi_n_ = std::sqrt(static_cast<double>(n)) *
                 (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

        cov_ = Eigen::MatrixXd::Identity(n, n);
        path_sigma_ = Eigen::VectorXd::Zero(n);
        path_c_ = Eigen::VectorXd::Zero(n);
        decompose();
    }

    int dim() const { return dim_; }
    int popsize() const { return popsize_; }
    int generation() const { return generation_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    double sigma() const { return sigma_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    const Eigen::VectorXd& path_sigma() const { return path_sigma_; }
    const Eigen::VectorXd& path_c() const { return path_c_; }
    double mu_eff() const { return mu_eff_; }

    /// Generations between eigendecompositions of C. 1 = every generation.
    void set_decomposition_interval(int interval) {
        if (interval < 1) throw std::invalid_argument("CmaEs: interval must be positive");
        decomposition_interval_ = interval;
    }

    std::vector<Candidate> ask() {
        if (generations_since_decompose_ >= decomposition_interval_) decompose();
        std::vector<Candidate> candidates(popsize_);
        for (int i = 0; i < popsize_; ++i) {
            Eigen::VectorXd z(dim_);
            for (int j = 0; j < dim_; ++j) z(j) = rng_.gaussian();
            candidates[i].id = i;
            candidates[i].params = mean_ + sigma_ * (eig_basis_ * eig_scale_.cwiseProduct(z));
        }
        return candidates;
    }

    void tell(std::vector<Candidate> candidates, OptimizeMode mode) {
        if (static_cast<int>(candidates.size()) != popsize_)
            throw std::invalid_argument("CmaEs::tell: wrong candidate count");
        for (auto& c : candidates) {
            if (!c.evaluated) throw std::invalid_argument("CmaEs::tell: unevaluated candidate");
            if (!std::isfinite(c.fitness))
                throw std::invalid_argument("CmaEs::tell: non-finite fitness");
            if (c.params.size() != dim_)
                throw std::invalid_argument("CmaEs::tell: candidate dimension mismatch");
        }
        const double flip = mode == OptimizeMode::kMaximize ? -1.0 : 1.0;
        std::sort(candidates.begin(), candidates.end(), [flip](const Candidate& a,
                                                               const Candidate& b) {
            const double fa = flip * a.fitness;
            const double fb = flip * b.fitness;
            if (fa != fb) return fa < fb;
            return a.id < b.id;  // deterministic tie-break
        });

        // Selection and recombination in the sampling frame: y_i = (x_i - m) / sigma.
        Eigen::VectorXd y_w = Eigen::VectorXd::Zero(dim_);
        std::vector<Eigen::VectorXd> ys(mu_);
        for (int i = 0; i < mu_; ++i) {
            ys[i] = (candidates[i].params - mean_) / sigma_;
            y_w += weights_[i] * ys[i];
        }
        mean_ += sigma_ * y_w;

        // Step-size path uses C^{-1/2} = B D^{-1} B'.
        const Eigen::VectorXd c_inv_sqrt_yw =
            eig_basis_ * eig_scale_.cwiseInverse().cwiseProduct(eig_basis_.transpose() * y_w);
        path_sigma_ = (1.0 - c_sigma_) * path_sigma_ +
                      std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * c_inv_sqrt_yw;

        const double ps_norm = path_sigma_.norm();
        const double expected = std::sqrt(
            1.0 - std::pow(1.0 - c_sigma_, 2.0 * (generation_ + 1)));
        const bool h_sigma =
            ps_norm / expected < (1.4 + 2.0 / (dim_ + 1.0)) * chi_n_;

        path_c_ = (1.0 - c_c_) * path_c_;
        if (h_sigma) path_c_ += std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) * y_w;

        Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(dim_, dim_);
        for (int i = 0; i < mu_; ++i) rank_mu += weights_[i] * (ys[i] * ys[i].transpose());

        const double c1a = c_1_ * (1.0 - (h_sigma ? 0.0 : 1.0) * c_c_ * (2.0 - c_c_));
        cov_ = (1.0 - c1a - c_mu_) * cov_ + c_1_ * (path_c_ * path_c_.transpose()) +
               c_mu_ * rank_mu;
        cov_ = 0.5 * (cov_ + cov_.transpose().eval());  // keep exact symmetry

        sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));

        ++generation_;
        ++generations_since_decompose_;
    }

    std::string serialize() const {
        binio::Writer w;
        w.u32(kStateVersion);
        w.u32(static_cast<std::uint32_t>(dim_));
        w.u32(static_cast<std::uint32_t>(popsize_));
        w.u32(static_cast<std::uint32_t>(generation_));
        w.u32(static_cast<std::uint32_t>(decomposition_interval_));
        w.f64(sigma_);
        w.vec(mean_);
        w.vec(path_sigma_);
        w.vec(path_c_);
        w.mat(cov_);
        w.str(rng_.serialize());
        return w.data();
    }

    static CmaEs deserialize(const std::string& blob) {
        binio::Reader r(blob);
        const std::uint32_t version = r.u32();
        if (version != kStateVersion)
            throw std::runtime_error("CmaEs::deserialize: unsupported state version " +
                                     std::to_string(version));
        const int dim = static_cast<int>(r.u32());
        const int popsize = static_cast<int>(r.u32());
        const int generation = static_cast<int>(r.u32());
        const int interval = static_cast<int>(r.u32());
        const double sigma = r.f64();
        const Eigen::VectorXd mean = r.vec();
        if (mean.size() != dim) throw std::runtime_error("CmaEs::deserialize: corrupt mean");
        CmaEs es(mean, sigma, /*seed=*/0, popsize);
        es.generation_ = generation;
        es.decomposition_interval_ = interval;
        es.path_sigma_ = r.vec();
        es.path_c_ = r.vec();
        es.cov_ = r.mat();
        es.rng_ = Rng::deserialize(r.str());
        es.decompose();
        return es;
    }

private:
    void decompose() {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("CmaEs: eigendecomposition of C failed");
        if (solver.eigenvalues().minCoeff() <= 0.0)
            throw std::runtime_error("CmaEs: covariance lost positive definiteness");
        eig_basis_ = solver.eigenvectors();
        eig_scale_ = solver.eigenvalues().cwiseSqrt();
        generations_since_decompose_ = 0;
    }

    static constexpr std::uint32_t kStateVersion = 1;

    int dim_;
    int popsize_ = 0;
    int mu_ = 0;
    std::vector<double> weights_;
    double mu_eff_ = 0.0;
    double c_sigma_ = 0.0, d_sigma_ = 0.0, c_c_ = 0.0, c_1_ = 0.0, c_mu_ = 0.0;
    double chi_n_ = 0.0;

    Eigen::VectorXd mean_;
    double sigma_;
    Eigen::MatrixXd cov_;
    Eigen::VectorXd path_sigma_;
    Eigen::VectorXd path_c_;
    int generation_ = 0;

    Eigen::MatrixXd eig_basis_;   // B
    Eigen::VectorXd eig_scale_;   // D (sqrt of eigenvalues)
    int decomposition_interval_ = 1;
    int generations_since_decompose_ = 0;

    Rng rng_;
};

}  // namespace rcrc
