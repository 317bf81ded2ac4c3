#include "ssotr/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "ssotr/errors.hpp"

namespace ssotr {

namespace {

std::string column_label(int index, const std::vector<std::string>& names) {
    if (index >= 0 && index < static_cast<int>(names.size())) return names[index];
    return "column " + std::to_string(index);
}

} // namespace

Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& design,
                                    const Eigen::VectorXd& response,
                                    const std::vector<std::string>& column_names) {
    if (design.rows() != response.size()) {
        throw InputError("least squares: design and response sizes differ");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) {
        // Columns past the first rank() pivots are linearly dependent on them.
        const auto& perm = qr.colsPermutation().indices();
        int dependent = perm(qr.rank());
        throw NumericalError("design matrix is rank deficient: " +
                             column_label(dependent, column_names) +
                             " is linearly dependent on the other columns");
    }
    return qr.solve(response);
}

Eigen::VectorXd solve_weighted_least_squares(const Eigen::MatrixXd& design,
                                             const Eigen::VectorXd& response,
                                             const Eigen::VectorXd& weights,
                                             const std::vector<std::string>& column_names) {
    if (design.rows() != response.size() || design.rows() != weights.size()) {
        throw InputError("weighted least squares: inconsistent row counts");
    }
    Eigen::Index active = (weights.array() > 0.0).count();
    Eigen::MatrixXd scaled_design(active, design.cols());
    Eigen::VectorXd scaled_response(active);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        if (weights(i) <= 0.0) continue;
        const double s = std::sqrt(weights(i));
        scaled_design.row(row) = s * design.row(i);
        scaled_response(row) = s * response(i);
        ++row;
    }
    return solve_least_squares(scaled_design, scaled_response, column_names);
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const std::string& label) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 0.0) {
        throw NumericalError(label + " is singular or not positive definite");
    }
    Eigen::MatrixXd inverse =
        ldlt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    return 0.5 * (inverse + inverse.transpose());
}

std::vector<std::string> augmented_column_names(int p) {
    std::vector<std::string> names;
    names.reserve(p + 1);
    names.emplace_back("intercept");
    for (int j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
    return names;
}

} // namespace ssotr
