#include "ssotr/estimators.hpp"

#include <cmath>
#include <utility>

#include "ssotr/errors.hpp"
#include "ssotr/linalg.hpp"
#include "ssotr/parallel.hpp"
#include "ssotr/stats.hpp"

namespace ssotr {

std::string method_name(Method method) {
    switch (method) {
        case Method::tr: return "tr";
        case Method::np: return "np";
        case Method::ss: return "ss";
    }
    throw InputError("unknown method enumerator");
}

Method method_from_string(const std::string& name) {
    if (name == "tr") return Method::tr;
    if (name == "np") return Method::np;
    if (name == "ss") return Method::ss;
    throw InputError("unknown method '" + name + "'; valid methods: tr, np, ss");
}

int DecisionRule::decide(const Eigen::VectorXd& x_raw) const {
    if (x_raw.size() != standardization.p()) {
        throw InputError("decision input has " + std::to_string(x_raw.size()) +
                         " covariates; rule expects " + std::to_string(standardization.p()));
    }
    if (!x_raw.allFinite()) throw InputError("decision input must be finite");
    const Eigen::VectorXd x = standardization.apply(x_raw);
    const double index = beta(0) + beta.tail(beta.size() - 1).dot(x);
    return index > 0.0 ? 1 : 0;
}

DecisionRule rule_of(const RegimeFit& fit) { return DecisionRule{fit.beta, fit.standardization}; }

int decide(const DecisionRule& rule, const Eigen::VectorXd& x_raw) { return rule.decide(x_raw); }

double transformed_response(double y, int a, double pi_hat) {
    if (a != 0 && a != 1) throw InputError("treatment must be binary (0 or 1)");
    if (!(pi_hat > 0.0) || !(pi_hat < 1.0)) {
        throw InputError("propensity must lie strictly inside (0, 1)");
    }
    return y * (static_cast<double>(a) - pi_hat) / (pi_hat * (1.0 - pi_hat));
}

namespace {

/// Fills cov, se, and ci95 from an assembled influence matrix:
/// cov = (influence' influence) / n^2, the plug-in V-hat divided by n.
void finish_inference(RegimeFit& fit) {
    const auto n = static_cast<double>(fit.influence.rows());
    fit.cov = (fit.influence.transpose() * fit.influence) / (n * n);
    fit.cov = ((fit.cov + fit.cov.transpose()) * 0.5).eval();
    fit.se = fit.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.ci95 = wald_ci(fit, 0.95);
}

/// a/pi - (1-a)/(1-pi) for every labeled subject.
Eigen::VectorXd ipw_contrast_weights(const Dataset& ds, const PropensityFit& prop) {
    const Eigen::VectorXd pi = prop.evaluate_columns(ds.labeled_x());
    Eigen::VectorXd w(ds.n());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w(i) = ds.treatment()(i) == 1 ? 1.0 / pi(i) : -1.0 / (1.0 - pi(i));
    }
    return w;
}

void require_unlabeled(const Dataset& ds, const char* method) {
    if (ds.unlabeled_count() == 0) {
        throw InputError(std::string("method ") + method +
                         " requires unlabeled data; use method tr when only labeled "
                         "observations are available");
    }
    if (ds.unlabeled_count() < ds.p() + 2) {
        throw InputError("unlabeled sample too small: need at least p+2 = " +
                         std::to_string(ds.p() + 2) + " rows, got " +
                         std::to_string(ds.unlabeled_count()));
    }
}

} // namespace

RegimeFit fit_tr(const Dataset& ds, const PropensityFit& prop) {
    const Eigen::Index n = ds.n();
    const Eigen::MatrixXd design = ds.labeled_design();
    const Eigen::VectorXd pi = prop.evaluate_columns(ds.labeled_x());

    Eigen::VectorXd ty(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ty(i) = transformed_response(ds.outcome()(i), ds.treatment()(i), pi(i));
    }

    RegimeFit fit;
    fit.method = Method::tr;
    fit.standardization = ds.standardization();
    fit.beta = solve_least_squares(design, ty, augmented_column_names(ds.p()));

    const Eigen::MatrixXd lambda = design.transpose() * design / static_cast<double>(n);
    const Eigen::MatrixXd lambda_inv = spd_inverse(lambda, "labeled second-moment matrix");
    const Eigen::VectorXd resid = ty - design * fit.beta;
    fit.influence = resid.asDiagonal() * (design * lambda_inv);
    finish_inference(fit);
    return fit;
}

RegimeFit fit_np(const Dataset& ds, const QSurface& surface, const PropensityFit& prop,
                 int threads) {
    require_unlabeled(ds, "np");
    const Eigen::Index n = ds.n();
    const Eigen::Index big_n = ds.unlabeled_count();

    Eigen::VectorXd imputed(big_n);
    parallel_for(static_cast<int>(big_n), threads,
                 [&](int j) { imputed(j) = surface.contrast(ds.unlabeled_x().col(j)); });

    RegimeFit fit;
    fit.method = Method::np;
    fit.standardization = ds.standardization();
    fit.bandwidth = surface.config().bandwidth;
    const Eigen::MatrixXd u_design = ds.unlabeled_design();
    fit.beta = solve_least_squares(u_design, imputed, augmented_column_names(ds.p()));

    const Eigen::MatrixXd lambda =
        u_design.transpose() * u_design / static_cast<double>(big_n);
    const Eigen::MatrixXd lambda_inv = spd_inverse(lambda, "unlabeled second-moment matrix");

    Eigen::VectorXd resid(n);
    parallel_for(static_cast<int>(n), threads, [&](int i) {
        resid(i) = ds.outcome()(i) - surface.q(ds.labeled_x().col(i), ds.treatment()(i));
    });
    const Eigen::VectorXd w = ipw_contrast_weights(ds, prop);
    fit.influence =
        (w.array() * resid.array()).matrix().asDiagonal() * (ds.labeled_design() * lambda_inv);
    finish_inference(fit);
    return fit;
}

Eigen::VectorXd refit_theta(const Dataset& ds, const FoldedSurfaces& folded,
                            const PropensityFit& prop, int arm) {
    if (arm != 0 && arm != 1) throw InputError("arm must be 0 or 1");
    if (static_cast<Eigen::Index>(folded.fold_of.size()) != ds.n()) {
        throw InputError("fold assignment does not match the labeled sample size");
    }
    const Eigen::VectorXd pi = prop.evaluate_columns(ds.labeled_x());
    const Eigen::MatrixXd design = ds.labeled_design();

    Eigen::VectorXd residual = Eigen::VectorXd::Zero(ds.n());
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(ds.n());
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        if (ds.treatment()(i) != arm) continue; // weight a/pi (or (1-a)/(1-pi)) is zero
        weight(i) = arm == 1 ? 1.0 / pi(i) : 1.0 / (1.0 - pi(i));
        residual(i) = ds.outcome()(i) -
                      folded.q_heldout(ds.labeled_x().col(i), static_cast<int>(i), arm);
    }
    return solve_weighted_least_squares(design, residual, weight,
                                        augmented_column_names(ds.p()));
}

RegimeFit fit_ss(const Dataset& ds, const FoldedSurfaces& folded, const PropensityFit& prop,
                 int threads) {
    require_unlabeled(ds, "ss");
    const Eigen::Index n = ds.n();
    const Eigen::Index big_n = ds.unlabeled_count();

    const Eigen::VectorXd theta1 = refit_theta(ds, folded, prop, 1);
    const Eigen::VectorXd theta0 = refit_theta(ds, folded, prop, 0);
    const Eigen::VectorXd theta_diff = theta1 - theta0;

    Eigen::VectorXd imputed(big_n);
    parallel_for(static_cast<int>(big_n), threads, [&](int j) {
        const Eigen::VectorXd x = ds.unlabeled_x().col(j);
        const double correction = theta_diff(0) + theta_diff.tail(theta_diff.size() - 1).dot(x);
        imputed(j) = folded.contrast_average(x) + correction;
    });

    RegimeFit fit;
    fit.method = Method::ss;
    fit.standardization = ds.standardization();
    fit.bandwidth = folded.surfaces.front().config().bandwidth;
    fit.kfolds = folded.kfolds();
    fit.theta1 = theta1;
    fit.theta0 = theta0;
    const Eigen::MatrixXd u_design = ds.unlabeled_design();
    fit.beta = solve_least_squares(u_design, imputed, augmented_column_names(ds.p()));

    const Eigen::MatrixXd lambda =
        u_design.transpose() * u_design / static_cast<double>(big_n);
    const Eigen::MatrixXd lambda_inv = spd_inverse(lambda, "unlabeled second-moment matrix");

    // Residuals use the surface held out for each point's own fold; evaluating a
    // point on surfaces trained with it shrinks residuals and understates the
    // variance.
    Eigen::VectorXd resid(n);
    parallel_for(static_cast<int>(n), threads, [&](int i) {
        const Eigen::VectorXd x = ds.labeled_x().col(i);
        const int a = ds.treatment()(i);
        const Eigen::VectorXd& theta = a == 1 ? theta1 : theta0;
        const double q_hat =
            folded.q_heldout(x, i, a) + theta(0) + theta.tail(theta.size() - 1).dot(x);
        resid(i) = ds.outcome()(i) - q_hat;
    });
    const Eigen::VectorXd w = ipw_contrast_weights(ds, prop);
    fit.influence =
        (w.array() * resid.array()).matrix().asDiagonal() * (ds.labeled_design() * lambda_inv);
    finish_inference(fit);
    return fit;
}

Eigen::MatrixXd wald_ci(const RegimeFit& fit, double level) {
    if (!(level > 0.0) || !(level < 1.0)) {
        throw InputError("confidence level must lie strictly inside (0, 1)");
    }
    const double z = normal_quantile(0.5 * (1.0 + level));
    Eigen::MatrixXd ci(fit.beta.size(), 2);
    ci.col(0) = fit.beta - z * fit.se;
    ci.col(1) = fit.beta + z * fit.se;
    return ci;
}

namespace {

// Matrix J with J*coef rewriting coefficients on (1, standardized(x)')'
// as coefficients on (1, x')'.
Eigen::MatrixXd raw_scale_jacobian(const Standardization& s) {
    const int p = s.p();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(p + 1, p + 1);
    jac(0, 0) = 1.0;
    for (int k = 0; k < p; ++k) {
        jac(0, k + 1) = -s.mean(k) / s.sd(k);
        jac(k + 1, k + 1) = 1.0 / s.sd(k);
    }
    return jac;
}

} // namespace

Eigen::VectorXd coefficients_to_raw(const Standardization& s, const Eigen::VectorXd& coef) {
    if (coef.size() != s.p() + 1) {
        throw InputError("coefficient vector and standardization dimensions disagree");
    }
    if (s.is_identity()) return coef;
    return raw_scale_jacobian(s) * coef;
}

Eigen::VectorXd coefficients_to_standardized(const Standardization& s,
                                             const Eigen::VectorXd& coef) {
    if (coef.size() != s.p() + 1) {
        throw InputError("coefficient vector and standardization dimensions disagree");
    }
    if (s.is_identity()) return coef;
    Eigen::VectorXd out(coef.size());
    out(0) = coef(0);
    for (int k = 0; k < s.p(); ++k) {
        out(0) += coef(k + 1) * s.mean(k);
        out(k + 1) = coef(k + 1) * s.sd(k);
    }
    return out;
}

RegimeFit to_raw_scale(const RegimeFit& fit) {
    if (fit.standardization.is_identity()) return fit;
    const Standardization& s = fit.standardization;
    const int p = s.p();
    if (fit.beta.size() != p + 1) {
        throw InputError("fit and standardization dimensions disagree");
    }

    const Eigen::MatrixXd jac = raw_scale_jacobian(s);

    RegimeFit raw = fit;
    raw.standardization = Standardization::identity(p);
    raw.beta = jac * fit.beta;
    raw.cov = jac * fit.cov * jac.transpose();
    raw.cov = ((raw.cov + raw.cov.transpose()) * 0.5).eval();
    raw.se = raw.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    raw.influence = fit.influence * jac.transpose();
    raw.ci95 = wald_ci(raw, 0.95);
    return raw;
}

} // namespace ssotr
