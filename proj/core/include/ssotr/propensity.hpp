#ifndef SSOTR_PROPENSITY_HPP
#define SSOTR_PROPENSITY_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ssotr/dataset.hpp"

namespace ssotr {

/// Fitted logistic model for P(A=1 | X=x) with clipped evaluation.
struct PropensityFit {
    Eigen::VectorXd gamma; // coefficients on the augmented covariate
    double clip_eps = 0.01;
    bool converged = false;
    int iterations = 0;

    /// expit(gamma' x~) clipped into [clip_eps, 1 - clip_eps].
    double evaluate(const Eigen::VectorXd& x) const;

    /// Clipped scores for every column of a p-by-m covariate matrix.
    Eigen::VectorXd evaluate_columns(const Eigen::MatrixXd& x_columns) const;
};

/// Maximum-likelihood logistic fit of treatment on the augmented
/// covariates by damped Newton iteration with step halving from a zero
/// start. `columns`, when given, restricts the model to those covariate
/// indices (0-based); excluded coefficients are zero so evaluation is
/// uniform. `intercept = false` drops the constant term (gamma(0) stays
/// zero), for designs whose functional form is known to pass through the
/// origin. Divergence (|gamma| > 1e3) indicates separation and raises
/// NumericalError; so does a singular information matrix.
PropensityFit fit_propensity(const Dataset& ds, double clip_eps = 0.01,
                             int max_iter = 100, double tol = 1e-10,
                             const std::optional<std::vector<int>>& columns = std::nullopt,
                             bool intercept = true);

} // namespace ssotr

#endif
