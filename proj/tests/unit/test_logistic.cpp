#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpa/logistic.hpp"

#include <cmath>
#include <random>

using namespace mpa;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd with_intercept(const VectorXd& x) {
    MatrixXd d(x.size(), 2);
    d.col(0).setOnes();
    d.col(1) = x;
    return d;
}

// Rows for a 2x2 table: (x=1, z=1) n11 times, (x=1, z=0) n10 times, ...
void table_2x2(int n11, int n10, int n01, int n00, MatrixXd& design, VectorXd& z) {
    const int n = n11 + n10 + n01 + n00;
    VectorXd x(n);
    z.resize(n);
    int i = 0;
    auto put = [&](int count, double xv, double zv) {
        for (int k = 0; k < count; ++k, ++i) {
            x[i] = xv;
            z[i] = zv;
        }
    };
    put(n11, 1, 1);
    put(n10, 1, 0);
    put(n01, 0, 1);
    put(n00, 0, 0);
    design = with_intercept(x);
}

}  // namespace

TEST_CASE("score matches central differences of the log-likelihood") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> norm;
    const int n = 300, p = 4;
    MatrixXd x(n, p);
    VectorXd succ(n), trials(n);
    std::uniform_int_distribution<int> trial_count(1, 6);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        for (int j = 1; j < p; ++j) x(i, j) = norm(rng);
        trials[i] = trial_count(rng);
        succ[i] = std::uniform_int_distribution<int>(0, static_cast<int>(trials[i]))(rng);
    }
    for (int point = 0; point < 10; ++point) {
        VectorXd beta(p);
        for (int j = 0; j < p; ++j) beta[j] = norm(rng);
        const VectorXd score = logistic_score(x, succ, trials, beta);
        for (int j = 0; j < p; ++j) {
            const double h = 1e-5;
            VectorXd up = beta, down = beta;
            up[j] += h;
            down[j] -= h;
            const double fd = (logistic_loglik(x, succ, trials, up) - logistic_loglik(x, succ, trials, down)) / (2 * h);
            CHECK(std::abs(fd - score[j]) <= 1e-6 * std::max(1.0, std::abs(score[j])));
        }
    }
}

TEST_CASE("2x2 table: slope is the log odds ratio") {
    const int n11 = 37, n10 = 21, n01 = 14, n00 = 52;
    MatrixXd d;
    VectorXd z;
    table_2x2(n11, n10, n01, n00, d, z);
    const auto fit = fit_logistic(d, z);
    REQUIRE(fit.converged);
    CHECK_FALSE(fit.separation);
    const double log_or = std::log((double(n11) * n00) / (double(n10) * n01));
    const double intercept = std::log(double(n01) / n00);
    CHECK(std::abs(fit.beta[1] - log_or) < 1e-8);
    CHECK(std::abs(fit.beta[0] - intercept) < 1e-8);
}

TEST_CASE("grouped and ungrouped fits agree") {
    MatrixXd d;
    VectorXd z;
    table_2x2(30, 10, 12, 40, d, z);
    MatrixXd g(2, 2);
    g << 1, 1, 1, 0;
    VectorXd succ(2), trials(2);
    succ << 30, 12;
    trials << 40, 52;
    const auto a = fit_logistic(d, z);
    const auto b = fit_logistic(g, succ, trials);
    CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(a.deviance - b.deviance) < 1e-8);
}

TEST_CASE("null model: slope near zero") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> norm;
    std::bernoulli_distribution coin(0.5);
    const int n = 4000;
    VectorXd x(n), z(n);
    for (int i = 0; i < n; ++i) {
        x[i] = norm(rng);
        z[i] = coin(rng);
    }
    const auto fit = fit_logistic(with_intercept(x), z);
    REQUIRE(fit.converged);
    const double se = 2.0 / std::sqrt(double(n));  // 1/sqrt(n p (1-p)) at p = 1/2
    CHECK(std::abs(fit.beta[0]) < 3 * se);
    CHECK(std::abs(fit.beta[1]) < 3 * se);
}

TEST_CASE("perfect separation is flagged") {
    VectorXd x(20), z(20);
    for (int i = 0; i < 20; ++i) x[i] = z[i] = i % 2;
    const auto fit = fit_logistic(with_intercept(x), z);
    CHECK(fit.separation);
    CHECK_FALSE(fit.converged);
}

TEST_CASE("aliased column is dropped and recorded") {
    MatrixXd d;
    VectorXd z;
    table_2x2(20, 15, 10, 25, d, z);
    MatrixXd d3(d.rows(), 3);
    d3.leftCols(2) = d;
    d3.col(2) = 2.0 * d.col(1);
    const auto fit = fit_logistic(d3, z);
    REQUIRE(fit.dropped_columns == std::vector<int>{2});
    CHECK(fit.beta[2] == 0.0);
    CHECK(std::abs(fit.beta[1] - std::log(20.0 * 25 / (15.0 * 10))) < 1e-8);
}

TEST_CASE("input errors") {
    MatrixXd d = MatrixXd::Ones(3, 2);
    VectorXd z(3);
    z << 0, 1, 2;
    CHECK_THROWS_AS(fit_logistic(d, z), LogisticError);
    z << 0, 1, 0;
    d(1, 1) = std::nan("");
    CHECK_THROWS_AS(fit_logistic(d, z), LogisticError);
    CHECK_THROWS_AS(fit_logistic(MatrixXd::Ones(1, 2), VectorXd::Ones(1)), LogisticError);
}

TEST_CASE("iteration limit raises") {
    MatrixXd d;
    VectorXd z;
    table_2x2(37, 21, 14, 52, d, z);
    LogisticOptions opts;
    opts.max_iterations = 1;
    CHECK_THROWS_AS(fit_logistic(d, z, opts), LogisticError);
}
