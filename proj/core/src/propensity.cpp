#include "ssotr/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <Eigen/Cholesky>

#include "ssotr/errors.hpp"
#include "ssotr/stats.hpp"

namespace ssotr {

namespace {

double log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& gamma) {
    const Eigen::VectorXd eta = design * gamma;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        ll += a(i) * eta(i) - log1pexp(eta(i));
    }
    return ll;
}

} // namespace

double PropensityFit::evaluate(const Eigen::VectorXd& x) const {
    if (x.size() + 1 != gamma.size()) {
        throw InputError("propensity evaluation: covariate has " + std::to_string(x.size()) +
                         " entries but the model expects " + std::to_string(gamma.size() - 1));
    }
    const double eta = gamma(0) + gamma.tail(gamma.size() - 1).dot(x);
    return std::clamp(expit(eta), clip_eps, 1.0 - clip_eps);
}

Eigen::VectorXd PropensityFit::evaluate_columns(const Eigen::MatrixXd& x_columns) const {
    if (x_columns.rows() + 1 != gamma.size()) {
        throw InputError("propensity evaluation: covariates have " +
                         std::to_string(x_columns.rows()) + " rows but the model expects " +
                         std::to_string(gamma.size() - 1));
    }
    Eigen::VectorXd eta =
        (x_columns.transpose() * gamma.tail(gamma.size() - 1)).array() + gamma(0);
    Eigen::VectorXd out(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        out(i) = std::clamp(expit(eta(i)), clip_eps, 1.0 - clip_eps);
    }
    return out;
}

PropensityFit fit_propensity(const Dataset& ds, double clip_eps, int max_iter, double tol,
                             const std::optional<std::vector<int>>& columns, bool intercept) {
    if (!(clip_eps >= 0.0) || clip_eps >= 0.5) {
        throw InputError("clip_eps must lie in [0, 0.5); got " + std::to_string(clip_eps));
    }
    if (max_iter < 1) {
        throw InputError("max_iter must be positive");
    }
    const int p = ds.p();
    const Eigen::Index n = ds.n();

    // Indices of covariates entering the model (all by default).
    std::vector<int> active;
    if (columns) {
        std::set<int> seen;
        for (int c : *columns) {
            if (c < 0 || c >= p) {
                throw InputError("propensity column index " + std::to_string(c) +
                                 " out of range for p=" + std::to_string(p));
            }
            if (!seen.insert(c).second) {
                throw InputError("duplicate propensity column index " + std::to_string(c));
            }
        }
        active.assign(seen.begin(), seen.end());
    } else {
        active.resize(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) active[static_cast<std::size_t>(j)] = j;
    }
    const Eigen::Index k = static_cast<Eigen::Index>(active.size());
    const Eigen::Index off = intercept ? 1 : 0;
    if (k + off == 0) {
        throw InputError("propensity model has no terms: empty column set without intercept");
    }

    Eigen::MatrixXd design(n, k + off);
    if (intercept) design.col(0).setOnes();
    for (Eigen::Index j = 0; j < k; ++j) {
        design.col(j + off) = ds.labeled_x().row(active[static_cast<std::size_t>(j)]).transpose();
    }
    const Eigen::VectorXd a = ds.treatment().cast<double>();

    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(k + off);
    double ll = log_likelihood(design, a, gamma);
    bool converged = false;
    int iterations = 0;

    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd eta = design * gamma;
        Eigen::VectorXd prob(n);
        for (Eigen::Index i = 0; i < n; ++i) prob(i) = expit(eta(i));

        const Eigen::VectorXd grad = design.transpose() * (a - prob);
        if (grad.lpNorm<Eigen::Infinity>() <= tol * static_cast<double>(n)) {
            converged = true;
            break;
        }

        const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
        const Eigen::MatrixXd info =
            design.transpose() * w.asDiagonal() * design;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
            ldlt.vectorD().minCoeff() <= 0.0) {
            throw NumericalError(
                "logistic fit failed: singular information matrix (covariates may be "
                "collinear or a treatment arm degenerate)");
        }
        const Eigen::VectorXd direction = ldlt.solve(grad);

        // Step halving: shrink until the log-likelihood does not decrease.
        double step = 1.0;
        Eigen::VectorXd candidate = gamma + direction;
        double candidate_ll = log_likelihood(design, a, candidate);
        int halvings = 0;
        while (!(candidate_ll >= ll) && halvings < 30) {
            step *= 0.5;
            candidate = gamma + step * direction;
            candidate_ll = log_likelihood(design, a, candidate);
            ++halvings;
        }
        if (!(candidate_ll >= ll)) {
            // Likelihood cannot improve in double precision: keep the current
            // iterate. The gradient criterion decides the converged flag.
            break;
        }
        gamma = candidate;
        ll = candidate_ll;
        ++iterations;

        if (gamma.norm() > 1e3) {
            throw NumericalError(
                "logistic fit diverged (|gamma| > 1e3); treatment arms appear separable");
        }
    }

    PropensityFit fit;
    fit.clip_eps = clip_eps;
    fit.converged = converged;
    fit.iterations = iterations;
    fit.gamma = Eigen::VectorXd::Zero(p + 1);
    if (intercept) fit.gamma(0) = gamma(0);
    for (Eigen::Index j = 0; j < k; ++j) {
        fit.gamma(active[static_cast<std::size_t>(j)] + 1) = gamma(j + off);
    }
    return fit;
}

} // namespace ssotr
