#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace mpa {

class LogisticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LogisticOptions {
    int max_iterations = 50;
    // Converged when the largest Newton step component falls below this.
    double tolerance = 1e-8;
    // Any |coefficient| above this marks the fit as separated.
    double divergence_bound = 15.0;
};

struct LogisticFit {
    // One entry per design column; aliased columns hold 0.
    Eigen::VectorXd beta;
    std::vector<int> dropped_columns;
    int iterations = 0;
    double deviance = 0.0;
    bool converged = false;
    bool separation = false;
};

/// Binomial logistic regression by Newton/IRLS on grouped rows: row i has
/// `successes[i]` out of `trials[i]` (trials may be any non-negative weight).
LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& successes,
                         const Eigen::VectorXd& trials, const LogisticOptions& opts = {});

/// Ungrouped convenience: binary response, one trial per row.
LogisticFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                         const LogisticOptions& opts = {});

double logistic_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& successes,
                       const Eigen::VectorXd& trials, const Eigen::VectorXd& beta);

/// Gradient of logistic_loglik with respect to beta.
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& design, const Eigen::VectorXd& successes,
                               const Eigen::VectorXd& trials, const Eigen::VectorXd& beta);

Eigen::VectorXd predict_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& beta);

}  // namespace mpa
