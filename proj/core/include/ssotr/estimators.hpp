#ifndef SSOTR_ESTIMATORS_HPP
#define SSOTR_ESTIMATORS_HPP

#include <optional>
#include <string>

#include <Eigen/Core>

#include "ssotr/dataset.hpp"
#include "ssotr/kernel.hpp"
#include "ssotr/propensity.hpp"

namespace ssotr {

enum class Method { tr, np, ss };

std::string method_name(Method method);
Method method_from_string(const std::string& name);

/// A fitted linear treatment regime with influence-function inference.
/// `beta` and friends live on the scale of the dataset the fit saw;
/// `standardization` records how raw covariates map to that scale so the
/// rule can be applied to (and reported on) the raw scale.
struct RegimeFit {
    Method method = Method::tr;
    Eigen::VectorXd beta;      // length p+1, coefficient on (1, x')'
    Eigen::MatrixXd cov;       // (p+1)x(p+1): plug-in V-hat / n
    Eigen::VectorXd se;        // sqrt of cov diagonal
    Eigen::MatrixXd ci95;      // (p+1)x2 Wald bounds at level 0.95
    Eigen::MatrixXd influence; // n x (p+1), one row per labeled subject
    Standardization standardization;
    std::optional<Eigen::VectorXd> theta1, theta0; // refit coefficients (ss)
    std::optional<double> bandwidth;               // np/ss
    std::optional<int> kfolds;                     // np/ss
};

/// The induced rule: treat iff beta'(1, standardized(x)')' > 0 (ties -> 0).
struct DecisionRule {
    Eigen::VectorXd beta;
    Standardization standardization;

    int decide(const Eigen::VectorXd& x_raw) const;
};

DecisionRule rule_of(const RegimeFit& fit);
int decide(const DecisionRule& rule, const Eigen::VectorXd& x_raw);

/// y*(a - pi) / (pi*(1 - pi)): conditional mean equals the treatment
/// contrast when pi is the true propensity.
double transformed_response(double y, int a, double pi_hat);

/// Least squares of the transformed response on the augmented covariates
/// over the labeled sample.
RegimeFit fit_tr(const Dataset& ds, const PropensityFit& prop);

/// Regression of kernel-imputed contrasts on the augmented covariates over
/// the unlabeled sample; influence terms evaluated at labeled points.
RegimeFit fit_np(const Dataset& ds, const QSurface& surface, const PropensityFit& prop,
                 int threads = 1);

/// Inverse-propensity-weighted least squares of the held-out kernel
/// residuals on the augmented covariates within one arm.
Eigen::VectorXd refit_theta(const Dataset& ds, const FoldedSurfaces& folded,
                            const PropensityFit& prop, int arm);

/// Cross-fitted semi-supervised estimator: kernel fold averages plus the
/// arm-specific linear corrections, regressed over the unlabeled sample.
RegimeFit fit_ss(const Dataset& ds, const FoldedSurfaces& folded, const PropensityFit& prop,
                 int threads = 1);

/// Per-coefficient Wald bounds at the given level, as an (p+1)x2 matrix.
Eigen::MatrixXd wald_ci(const RegimeFit& fit, double level);

/// Exact reparametrization of a fit onto the raw covariate scale
/// (coefficients, covariance, intervals, influence); identity if the fit
/// was already on the raw scale.
RegimeFit to_raw_scale(const RegimeFit& fit);

/// Rewrites a coefficient vector on (1, standardized(x)')' as the
/// equivalent coefficients on (1, x')'.
Eigen::VectorXd coefficients_to_raw(const Standardization& s, const Eigen::VectorXd& coef);

/// Inverse of coefficients_to_raw: rewrites coefficients on (1, x')' as
/// the equivalent coefficients on (1, standardized(x)')'.
Eigen::VectorXd coefficients_to_standardized(const Standardization& s,
                                             const Eigen::VectorXd& coef);

} // namespace ssotr

#endif
