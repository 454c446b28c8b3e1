#include "mpa/logistic.hpp"

#include <cmath>

namespace mpa {

namespace {

double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// log(1 + exp(x)) without overflow
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Greedy column selection on the Gram matrix: keep a column when its
// residual after projecting on the columns kept so far is not negligible.
std::vector<int> independent_columns(const Eigen::MatrixXd& x, std::vector<int>& dropped) {
    const Eigen::MatrixXd gram = x.transpose() * x;
    std::vector<int> kept;
    for (int j = 0; j < x.cols(); ++j) {
        const double norm2 = gram(j, j);
        double resid = norm2;
        if (!kept.empty() && norm2 > 0) {
            const auto k = static_cast<Eigen::Index>(kept.size());
            Eigen::MatrixXd gkk(k, k);
            Eigen::VectorXd gkj(k);
            for (Eigen::Index a = 0; a < k; ++a) {
                gkj[a] = gram(kept[a], j);
                for (Eigen::Index b = 0; b < k; ++b) gkk(a, b) = gram(kept[a], kept[b]);
            }
            resid = norm2 - gkj.dot(gkk.ldlt().solve(gkj));
        }
        if (norm2 > 0 && resid > 1e-12 * norm2) {
            kept.push_back(j);
        } else {
            dropped.push_back(j);
        }
    }
    return kept;
}

}  // namespace

double logistic_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& successes,
                       const Eigen::VectorXd& trials, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = design * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += successes[i] * eta[i] - trials[i] * softplus(eta[i]);
    return ll;
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& design, const Eigen::VectorXd& successes,
                               const Eigen::VectorXd& trials, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = successes[i] - trials[i] * sigmoid(eta[i]);
    return design.transpose() * resid;
}

Eigen::VectorXd predict_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = design * beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = sigmoid(eta[i]);
    return eta;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& successes,
                         const Eigen::VectorXd& trials, const LogisticOptions& opts) {
    const Eigen::Index n = design.rows();
    if (successes.size() != n || trials.size() != n) {
        throw LogisticError("design, successes and trials differ in length");
    }
    Eigen::Index used_rows = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (trials[i] < 0 || successes[i] < 0 || successes[i] > trials[i]) {
            throw LogisticError("row " + std::to_string(i) + ": need 0 <= successes <= trials");
        }
        if (!design.row(i).allFinite()) throw LogisticError("row " + std::to_string(i) + ": missing design value");
        if (trials[i] > 0) ++used_rows;
    }
    if (used_rows < design.cols()) {
        throw LogisticError("fewer rows (" + std::to_string(used_rows) + ") than design columns (" +
                            std::to_string(design.cols()) + ")");
    }

    LogisticFit fit;
    fit.beta = Eigen::VectorXd::Zero(design.cols());
    // Rank is judged on the rows that carry weight.
    Eigen::MatrixXd weighted_rows(used_rows, design.cols());
    for (Eigen::Index i = 0, k = 0; i < n; ++i) {
        if (trials[i] > 0) weighted_rows.row(k++) = design.row(i);
    }
    const std::vector<int> kept = independent_columns(weighted_rows, fit.dropped_columns);
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = design.col(kept[k]);

    Eigen::VectorXd b = Eigen::VectorXd::Zero(x.cols());
    for (fit.iterations = 1; fit.iterations <= opts.max_iterations; ++fit.iterations) {
        const Eigen::VectorXd eta = x * b;
        Eigen::VectorXd w(n), resid(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(eta[i]);
            w[i] = trials[i] * p * (1.0 - p);
            resid[i] = successes[i] - trials[i] * p;
        }
        const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
        const Eigen::VectorXd score = x.transpose() * resid;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            fit.separation = true;
            break;
        }
        const Eigen::VectorXd step = ldlt.solve(score);
        if (!step.allFinite()) {
            fit.separation = true;
            break;
        }
        b += step;
        if (b.cwiseAbs().maxCoeff() > opts.divergence_bound) {
            fit.separation = true;
            break;
        }
        if (step.cwiseAbs().maxCoeff() < opts.tolerance) {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged && !fit.separation) {
        throw LogisticError("IRLS did not converge in " + std::to_string(opts.max_iterations) + " iterations");
    }
    fit.iterations = std::min(fit.iterations, opts.max_iterations);
    for (std::size_t k = 0; k < kept.size(); ++k) fit.beta[kept[k]] = b[static_cast<Eigen::Index>(k)];
    fit.deviance = -2.0 * logistic_loglik(design, successes, trials, fit.beta);
    return fit;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                         const LogisticOptions& opts) {
    for (Eigen::Index i = 0; i < response.size(); ++i) {
        if (response[i] != 0.0 && response[i] != 1.0) throw LogisticError("response must be 0/1");
    }
    return fit_logistic(design, response, Eigen::VectorXd::Ones(response.size()), opts);
}

}  // namespace mpa
