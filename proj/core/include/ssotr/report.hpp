#ifndef SSOTR_REPORT_HPP
#define SSOTR_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ssotr/dataset.hpp"
#include "ssotr/estimators.hpp"
#include "ssotr/propensity.hpp"
#include "ssotr/simulation.hpp"

namespace ssotr {

/// Everything a fit run reports: inference on both the raw covariate scale
/// (beta/se/ci95) and the internal standardized scale, plus the propensity
/// model and kernel diagnostics. Serializes to a versioned JSON document
/// that decision workflows can read back.
struct FitReport {
    Method method = Method::tr;
    Eigen::Index n = 0;
    Eigen::Index unlabeled_n = 0;
    int p = 0;
    Eigen::VectorXd beta, se;         // raw scale
    Eigen::MatrixXd ci95;             // raw scale, (p+1) x 2
    Eigen::VectorXd beta_std, se_std; // fitted (standardized) scale
    Eigen::MatrixXd ci95_std;
    Standardization standardization; // raw -> fitted scale
    std::optional<double> bandwidth;
    std::optional<int> kfolds;
    Eigen::VectorXd propensity_gamma; // raw scale
    bool propensity_converged = false;
    std::optional<Eigen::VectorXd> theta1, theta0; // fitted scale
    std::vector<std::string> bandwidth_rule_flags;
    int excluded_rows = 0;

    /// The rule the report encodes, applicable to raw covariates.
    DecisionRule rule() const;
};

/// Assembles the report for a fit produced on `ds` (the dataset the fit
/// actually saw, typically standardized) with propensity `prop` on the
/// same scale.
FitReport make_fit_report(const Dataset& ds, const RegimeFit& fit, const PropensityFit& prop);

std::string to_json(const FitReport& report);
FitReport fit_report_from_json(const std::string& text);
std::string to_text(const FitReport& report);

std::string to_json(const SimReport& report);
std::string to_text(const SimReport& report);

} // namespace ssotr

#endif
