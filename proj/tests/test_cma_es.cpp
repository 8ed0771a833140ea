#include <catch2/catch_amalgamated.hpp>

#include "rcrc/cma_es.hpp"

using namespace rcrc;

namespace {

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

double rosenbrock(const Eigen::VectorXd& x) {
    double f = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double a = x(i + 1) - x(i) * x(i);
        const double b = 1.0 - x(i);
        f += 100.0 * a * a + b * b;
    }
    return f;
}

/// Minimize f; returns (best fitness, evaluations used).
std::pair<double, int> run(CmaEs& es, const std::function<double(const Eigen::VectorXd&)>& f,
                           double target, int max_evals) {
    double best = std::numeric_limits<double>::infinity();
    int evals = 0;
    while (evals < max_evals) {
        auto candidates = es.ask();
        for (auto& c : candidates) {
            c.fitness = f(c.params);
            c.evaluated = true;
            best = std::min(best, c.fitness);
            ++evals;
        }
        es.tell(std::move(candidates), OptimizeMode::kMinimize);
        if (best < target) break;
    }
    return {best, evals};
}

}  // namespace

TEST_CASE("default population size follows 4 + floor(3 ln n)") {
    REQUIRE(default_popsize(3) == 7);
    REQUIRE(default_popsize(10) == 10);
    REQUIRE(default_popsize(3075) == 28);
    CmaEs es(Eigen::VectorXd::Zero(3), 1.0, 1);
    REQUIRE(es.popsize() == 7);
}

TEST_CASE("high-dimensional init is accepted") {
    CmaEs es(Eigen::VectorXd::Zero(3075), 0.1, 1);
    REQUIRE(es.dim() == 3075);
}

TEST_CASE("ask returns popsize candidates of the right length") {
    CmaEs es(Eigen::VectorXd::Zero(5), 0.5, 2);
    const auto candidates = es.ask();
    REQUIRE(static_cast<int>(candidates.size()) == es.popsize());
    for (const auto& c : candidates) REQUIRE(c.params.size() == 5);
}

TEST_CASE("vanishing sigma collapses candidates onto the mean") {
    Eigen::VectorXd mean(4);
    mean << 1, -2, 3, -4;
    CmaEs es(mean, 1e-300, 3);
    for (const auto& c : es.ask())
        REQUIRE((c.params - mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("initial sampling covariance is sigma^2 I") {
    const int dim = 5;
    const double sigma = 0.7;
    CmaEs es(Eigen::VectorXd::Zero(dim), sigma, 4, 20);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
    int n = 0;
    while (n < 10000) {
        for (const auto& c : es.ask()) {
            sum += c.params * c.params.transpose();
            ++n;
        }
    }
    const Eigen::MatrixXd sample_cov = sum / n;
    const Eigen::MatrixXd expected = sigma * sigma * Eigen::MatrixXd::Identity(dim, dim);
    const double rel = (sample_cov - expected).norm() / expected.norm();
    REQUIRE(rel < 0.05);
}

TEST_CASE("one generation on the sphere moves the mean inward") {
    Eigen::VectorXd mean = Eigen::VectorXd::Constant(8, 5.0);
    CmaEs es(mean, 0.5, 5);
    auto candidates = es.ask();
    for (auto& c : candidates) {
        c.fitness = sphere(c.params);
        c.evaluated = true;
    }
    es.tell(std::move(candidates), OptimizeMode::kMinimize);
    REQUIRE(es.mean().norm() < mean.norm());
    REQUIRE(es.generation() == 1);
}

TEST_CASE("identical candidates leave the mean unchanged") {
    Eigen::VectorXd mean = Eigen::VectorXd::Constant(4, 2.0);
    CmaEs es(mean, 0.3, 6);
    std::vector<Candidate> candidates(es.popsize());
    for (int i = 0; i < es.popsize(); ++i) {
        candidates[i].id = i;
        candidates[i].params = mean;
        candidates[i].fitness = 1.0;
        candidates[i].evaluated = true;
    }
    es.tell(std::move(candidates), OptimizeMode::kMinimize);
    REQUIRE((es.mean() - mean).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("maximize mode negates at the boundary") {
    // Maximizing -||x||^2 must behave like minimizing ||x||^2.
    CmaEs a(Eigen::VectorXd::Constant(6, 3.0), 0.5, 7);
    CmaEs b(Eigen::VectorXd::Constant(6, 3.0), 0.5, 7);
    for (int gen = 0; gen < 5; ++gen) {
        auto ca = a.ask();
        auto cb = b.ask();
        for (int i = 0; i < a.popsize(); ++i) {
            ca[i].fitness = sphere(ca[i].params);
            ca[i].evaluated = true;
            cb[i].fitness = -sphere(cb[i].params);
            cb[i].evaluated = true;
        }
        a.tell(std::move(ca), OptimizeMode::kMinimize);
        b.tell(std::move(cb), OptimizeMode::kMaximize);
    }
    REQUIRE(a.mean() == b.mean());
    REQUIRE(a.sigma() == b.sigma());
}

TEST_CASE("fitness shifts do not change the update (rank-based selection)") {
    CmaEs a(Eigen::VectorXd::Constant(5, 1.0), 0.4, 8);
    CmaEs b(Eigen::VectorXd::Constant(5, 1.0), 0.4, 8);
    for (int gen = 0; gen < 3; ++gen) {
        auto ca = a.ask();
        auto cb = b.ask();
        for (int i = 0; i < a.popsize(); ++i) {
            ca[i].fitness = sphere(ca[i].params);
            ca[i].evaluated = true;
            cb[i].fitness = sphere(cb[i].params) + 1234.5;
            cb[i].evaluated = true;
        }
        a.tell(std::move(ca), OptimizeMode::kMinimize);
        b.tell(std::move(cb), OptimizeMode::kMinimize);
        REQUIRE(a.mean() == b.mean());
        REQUIRE(a.sigma() == b.sigma());
        REQUIRE(a.cov() == b.cov());
    }
}

TEST_CASE("ask/tell sequences are bitwise reproducible for equal seeds") {
    CmaEs a(Eigen::VectorXd::Zero(6), 0.5, 99);
    CmaEs b(Eigen::VectorXd::Zero(6), 0.5, 99);
    for (int gen = 0; gen < 4; ++gen) {
        auto ca = a.ask();
        auto cb = b.ask();
        for (int i = 0; i < a.popsize(); ++i) {
            REQUIRE(ca[i].params == cb[i].params);
            ca[i].fitness = cb[i].fitness = sphere(ca[i].params);
            ca[i].evaluated = cb[i].evaluated = true;
        }
        a.tell(std::move(ca), OptimizeMode::kMinimize);
        b.tell(std::move(cb), OptimizeMode::kMinimize);
        REQUIRE(a.mean() == b.mean());
    }
}

TEST_CASE("sphere 10-D converges below 1e-8 within 20000 evaluations") {
    CmaEs es(Eigen::VectorXd::Constant(10, 0.5), 0.3, 11);
    const auto [best, evals] = run(es, sphere, 1e-8, 20000);
    INFO("evaluations used: " << evals);
    REQUIRE(best < 1e-8);
}

TEST_CASE("rosenbrock 10-D converges below 1e-6 within 200000 evaluations") {
    CmaEs es(Eigen::VectorXd::Zero(10), 0.3, 12);
    const auto [best, evals] = run(es, rosenbrock, 1e-6, 200000);
    INFO("evaluations used: " << evals);
    REQUIRE(best < 1e-6);
}

TEST_CASE("covariance stays symmetric positive-definite over 500 generations") {
    CmaEs es(Eigen::VectorXd::Constant(6, 2.0), 0.5, 13);
    for (int gen = 0; gen < 500; ++gen) {
        auto candidates = es.ask();
        for (auto& c : candidates) {
            c.fitness = sphere(c.params);
            c.evaluated = true;
        }
        es.tell(std::move(candidates), OptimizeMode::kMinimize);
        REQUIRE((es.cov() - es.cov().transpose()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(es.cov());
        REQUIRE(solver.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("median best fitness improves across 10-generation windows") {
    std::vector<std::vector<double>> window_bests(5);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CmaEs es(Eigen::VectorXd::Constant(8, 3.0), 0.5, 100 + seed);
        double best = std::numeric_limits<double>::infinity();
        for (int window = 0; window < 5; ++window) {
            for (int gen = 0; gen < 10; ++gen) {
                auto candidates = es.ask();
                for (auto& c : candidates) {
                    c.fitness = sphere(c.params);
                    c.evaluated = true;
                    best = std::min(best, c.fitness);
                }
                es.tell(std::move(candidates), OptimizeMode::kMinimize);
            }
            window_bests[window].push_back(best);
        }
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    for (int window = 1; window < 5; ++window)
        REQUIRE(median(window_bests[window]) < median(window_bests[window - 1]));
}

TEST_CASE("tell validates its inputs") {
    CmaEs es(Eigen::VectorXd::Zero(4), 0.5, 14);
    auto candidates = es.ask();
    REQUIRE_THROWS_AS(es.tell(candidates, OptimizeMode::kMinimize), std::invalid_argument);
    for (auto& c : candidates) {
        c.fitness = 0.0;
        c.evaluated = true;
    }
    candidates[0].fitness = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(es.tell(candidates, OptimizeMode::kMinimize), std::invalid_argument);
    candidates.pop_back();
    REQUIRE_THROWS_AS(es.tell(candidates, OptimizeMode::kMinimize), std::invalid_argument);
}

TEST_CASE("serialized state resumes the exact run") {
    CmaEs es(Eigen::VectorXd::Constant(5, 1.0), 0.4, 15);
    for (int gen = 0; gen < 3; ++gen) {
        auto candidates = es.ask();
        for (auto& c : candidates) {
            c.fitness = sphere(c.params);
            c.evaluated = true;
        }
        es.tell(std::move(candidates), OptimizeMode::kMinimize);
    }
    CmaEs resumed = CmaEs::deserialize(es.serialize());
    REQUIRE(resumed.mean() == es.mean());
    REQUIRE(resumed.sigma() == es.sigma());
    REQUIRE(resumed.cov() == es.cov());
    REQUIRE(resumed.generation() == es.generation());
    auto ca = es.ask();
    auto cb = resumed.ask();
    for (int i = 0; i < es.popsize(); ++i) REQUIRE(ca[i].params == cb[i].params);
}
