#ifndef SSOTR_LINALG_HPP
#define SSOTR_LINALG_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

namespace ssotr {

/// Least squares coefficients for design * coef ~ response via a
/// rank-revealing column-pivoted QR (relative pivot tolerance 1e-10).
/// Rank deficiency raises NumericalError naming a dependent column;
/// column_names, when given, must have design.cols() entries.
Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& design,
                                    const Eigen::VectorXd& response,
                                    const std::vector<std::string>& column_names = {});

/// Weighted least squares with nonnegative weights; rows with zero
/// weight are dropped before the solve.
Eigen::VectorXd solve_weighted_least_squares(const Eigen::MatrixXd& design,
                                             const Eigen::VectorXd& response,
                                             const Eigen::VectorXd& weights,
                                             const std::vector<std::string>& column_names = {});

/// Inverse of a symmetric positive definite matrix via LDLT.
/// Raises NumericalError when the matrix is not invertible.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const std::string& label);

/// Names the design columns of an augmented covariate matrix:
/// "intercept", "x1", ..., "xp".
std::vector<std::string> augmented_column_names(int p);

} // namespace ssotr

#endif
