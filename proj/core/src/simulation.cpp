#include "ssotr/simulation.hpp"

#include <cmath>

#include "ssotr/errors.hpp"
#include "ssotr/estimators.hpp"
#include "ssotr/kernel.hpp"
#include "ssotr/linalg.hpp"
#include "ssotr/parallel.hpp"
#include "ssotr/propensity.hpp"
#include "ssotr/rng.hpp"
#include "ssotr/stats.hpp"

namespace ssotr {

std::string contrast_model_name(ContrastModel model) {
    switch (model) {
        case ContrastModel::linear: return "linear";
        case ContrastModel::cubic: return "cubic";
        case ContrastModel::sine: return "sine";
    }
    throw InputError("unknown contrast model enumerator");
}

ContrastModel contrast_model_from_string(const std::string& name) {
    if (name == "linear") return ContrastModel::linear;
    if (name == "cubic") return ContrastModel::cubic;
    if (name == "sine") return ContrastModel::sine;
    throw InputError("unknown model '" + name + "'; valid models: linear, cubic, sine");
}

std::string baseline_model_name(BaselineModel model) {
    switch (model) {
        case BaselineModel::b1: return "b1";
        case BaselineModel::b2: return "b2";
    }
    throw InputError("unknown baseline enumerator");
}

BaselineModel baseline_model_from_string(const std::string& name) {
    if (name == "b1") return BaselineModel::b1;
    if (name == "b2") return BaselineModel::b2;
    throw InputError("unknown baseline '" + name + "'; valid baselines: b1, b2");
}

void SimConfig::validate() const {
    if (p < 2) throw InputError("simulation requires p >= 2");
    if (n < 50) throw InputError("simulation requires n >= 50");
    if (unlabeled_n < p + 2) {
        throw InputError("simulation requires an unlabeled sample of at least p+2 rows");
    }
    if (replications < 1) throw InputError("replications must be at least 1");
    if (mc_truth_size < 10 * n) {
        throw InputError("mc_truth_size must be at least 10*n");
    }
    if (kfolds < 2) throw InputError("fold count must be at least 2");
    if (!(clip_eps >= 0.0) || clip_eps >= 0.5) {
        throw InputError("clip_eps must lie in [0, 0.5)");
    }
    if (bandwidth && (!(*bandwidth > 0.0) || !std::isfinite(*bandwidth))) {
        throw InputError("bandwidth must be a positive finite number");
    }
    if (threads < 0) throw InputError("threads must be nonnegative");
}

double contrast_value(ContrastModel model, const Eigen::VectorXd& x) {
    switch (model) {
        case ContrastModel::linear: return x(0) + x(1);
        case ContrastModel::cubic: {
            const double t = 0.3 * x(0) + 0.6 * x(1);
            return t * t * t;
        }
        case ContrastModel::sine: return std::sin(x(0) + x(1));
    }
    throw InputError("unknown contrast model enumerator");
}

double baseline_value(BaselineModel model, const Eigen::VectorXd& x) {
    const double s = 0.5 * x(0) + 0.5 * x(1);
    switch (model) {
        case BaselineModel::b1: return s * s * s;
        case BaselineModel::b2: return (0.75 * x(0) + 0.75 * x(1)) * (1.0 + s);
    }
    throw InputError("unknown baseline enumerator");
}

namespace {

constexpr std::uint64_t kTruthStream = 0;

std::uint64_t replication_stream(std::uint64_t seed, int rep_index) {
    return Rng::derive(seed, static_cast<std::uint64_t>(rep_index) + 1);
}

Eigen::MatrixXd draw_covariates(Rng& rng, int p, Eigen::Index count) {
    Eigen::MatrixXd x(p, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (int j = 0; j < p; ++j) {
            x(j, i) = rng.truncated_normal(-5.0, 5.0);
        }
    }
    return x;
}

} // namespace

Dataset generate_replication(const SimConfig& cfg, int rep_index) {
    cfg.validate();
    if (rep_index < 0) throw InputError("replication index must be nonnegative");
    Rng rng(Rng::derive(replication_stream(cfg.seed, rep_index), 0));

    const Eigen::Index total = cfg.n + cfg.unlabeled_n;
    Eigen::MatrixXd x(cfg.p, total);
    Eigen::VectorXi a(total);
    Eigen::VectorXd y(total);
    for (Eigen::Index i = 0; i < total; ++i) {
        for (int j = 0; j < cfg.p; ++j) x(j, i) = rng.truncated_normal(-5.0, 5.0);
        const double pi = expit(0.5 * x(0, i) - 0.5 * x(1, i));
        a(i) = rng.bernoulli(pi) ? 1 : 0;
        y(i) = baseline_value(cfg.baseline, x.col(i)) +
               static_cast<double>(a(i)) * contrast_value(cfg.model, x.col(i)) + rng.normal();
    }
    return Dataset(x.leftCols(cfg.n), a.head(cfg.n), y.head(cfg.n), x.rightCols(cfg.unlabeled_n));
}

TruthSet compute_truth(const SimConfig& cfg) {
    cfg.validate();
    Rng rng(Rng::derive(cfg.seed, kTruthStream));

    TruthSet truth;
    truth.x = draw_covariates(rng, cfg.p, cfg.mc_truth_size);
    truth.c.resize(cfg.mc_truth_size);
    truth.mu.resize(cfg.mc_truth_size);
    for (Eigen::Index i = 0; i < cfg.mc_truth_size; ++i) {
        truth.c(i) = contrast_value(cfg.model, truth.x.col(i));
        truth.mu(i) = baseline_value(cfg.baseline, truth.x.col(i));
    }
    truth.beta_star =
        solve_least_squares(augment_design(truth.x), truth.c, augmented_column_names(cfg.p));
    truth.v0 = (truth.mu.array() + (truth.c.array() > 0.0).select(truth.c.array(), 0.0)).mean();
    return truth;
}

double pcd(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star,
           const Eigen::MatrixXd& eval_x) {
    if (eval_x.cols() == 0) throw InputError("decision evaluation sample is empty");
    if (beta_hat.size() != eval_x.rows() + 1 || beta_star.size() != eval_x.rows() + 1) {
        throw InputError("coefficient length does not match evaluation covariates");
    }
    const Eigen::ArrayXd idx_hat =
        (eval_x.transpose() * beta_hat.tail(beta_hat.size() - 1)).array() + beta_hat(0);
    const Eigen::ArrayXd idx_star =
        (eval_x.transpose() * beta_star.tail(beta_star.size() - 1)).array() + beta_star(0);
    const auto agree = ((idx_hat > 0.0) == (idx_star > 0.0)).cast<double>();
    return agree.mean();
}

double value_of_rule(const Eigen::VectorXd& beta_hat, const TruthSet& truth) {
    if (beta_hat.size() != truth.x.rows() + 1) {
        throw InputError("coefficient length does not match the truth sample");
    }
    const Eigen::ArrayXd idx =
        (truth.x.transpose() * beta_hat.tail(beta_hat.size() - 1)).array() + beta_hat(0);
    return (truth.mu.array() + (idx > 0.0).select(truth.c.array(), 0.0)).mean();
}

namespace {

MethodReplication summarize_fit(const RegimeFit& raw_fit, const TruthSet& truth,
                                const Eigen::MatrixXd& pooled_x) {
    MethodReplication out;
    out.beta = raw_fit.beta;
    out.se = raw_fit.se;
    out.cover.resize(static_cast<std::size_t>(raw_fit.beta.size()));
    for (Eigen::Index j = 0; j < raw_fit.beta.size(); ++j) {
        out.cover[static_cast<std::size_t>(j)] =
            (raw_fit.ci95(j, 0) <= truth.beta_star(j) && truth.beta_star(j) <= raw_fit.ci95(j, 1))
                ? 1
                : 0;
    }
    out.pcd = pcd(raw_fit.beta, truth.beta_star, pooled_x);
    out.value = value_of_rule(raw_fit.beta, truth);
    return out;
}

// The generator assigns treatment through the single index x1 - x2, so the
// study estimates that known form each replication: a one-parameter
// no-intercept logistic MLE on z = x1 - x2, embedded back into the full
// coefficient vector. An unrestricted logistic fit would project part of
// the treatment score out of the transformed response and shrink its
// sampling variance well below what the plug-in standard errors describe.
PropensityFit study_propensity(const Dataset& raw, const Standardization& s, double clip_eps) {
    const Eigen::MatrixXd z = raw.labeled_x().row(0) - raw.labeled_x().row(1);
    const Dataset index_ds(z, raw.treatment(), raw.outcome(),
                           Eigen::MatrixXd(1, 0));
    const PropensityFit index_fit =
        fit_propensity(index_ds, clip_eps, 100, 1e-10, std::nullopt, false);

    PropensityFit prop = index_fit;
    Eigen::VectorXd gamma_raw = Eigen::VectorXd::Zero(raw.p() + 1);
    gamma_raw(1) = index_fit.gamma(1);
    gamma_raw(2) = -index_fit.gamma(1);
    prop.gamma = coefficients_to_standardized(s, gamma_raw);
    return prop;
}

MethodAggregate aggregate(const std::vector<const MethodReplication*>& reps, int coef_count,
                          const Eigen::VectorXd& beta_star) {
    MethodAggregate agg;
    const auto m = static_cast<Eigen::Index>(reps.size());
    Eigen::VectorXd values(m), pcds(m);
    Eigen::MatrixXd betas(m, coef_count), ses(m, coef_count);
    Eigen::MatrixXd covers(m, coef_count);
    for (Eigen::Index i = 0; i < m; ++i) {
        values(i) = reps[static_cast<std::size_t>(i)]->value;
        pcds(i) = reps[static_cast<std::size_t>(i)]->pcd;
        betas.row(i) = reps[static_cast<std::size_t>(i)]->beta.transpose();
        ses.row(i) = reps[static_cast<std::size_t>(i)]->se.transpose();
        for (int j = 0; j < coef_count; ++j) {
            covers(i, j) = reps[static_cast<std::size_t>(i)]->cover[static_cast<std::size_t>(j)];
        }
    }
    agg.mean_value = mean(values);
    agg.sd_value = sample_sd(values);
    agg.mean_pcd = mean(pcds);
    agg.sd_pcd = sample_sd(pcds);
    agg.bias.resize(coef_count);
    agg.sd.resize(coef_count);
    agg.mean_se.resize(coef_count);
    agg.cp.resize(coef_count);
    for (int j = 0; j < coef_count; ++j) {
        agg.bias(j) = mean(betas.col(j)) - beta_star(j);
        agg.sd(j) = sample_sd(betas.col(j));
        agg.mean_se(j) = mean(ses.col(j));
        agg.cp(j) = mean(covers.col(j));
    }
    return agg;
}

} // namespace

SimReport run_study(const SimConfig& cfg) {
    cfg.validate();
    const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();

    SimReport report;
    report.config = cfg;
    const TruthSet truth = compute_truth(cfg);
    report.beta_star = truth.beta_star;
    report.v0 = truth.v0;

    const int coef_count = cfg.p + 1;
    report.rows.resize(static_cast<std::size_t>(cfg.replications));
    parallel_for(cfg.replications, threads, [&](int r) {
        ReplicationResult row;
        row.rep = r;
        try {
            const Dataset raw = generate_replication(cfg, r);
            const Eigen::MatrixXd pooled = raw.pooled_x();
            const Dataset ds = standardize(raw);
            const std::uint64_t fold_seed = Rng::derive(replication_stream(cfg.seed, r), 1);

            const PropensityFit prop = study_propensity(raw, ds.standardization(), cfg.clip_eps);
            const RegimeFit tr = to_raw_scale(fit_tr(ds, prop));

            const double h = cfg.bandwidth
                                 ? *cfg.bandwidth
                                 : select_bandwidth(ds, cfg.kfolds,
                                                    default_bandwidth_grid(ds.n(), ds.p()),
                                                    fold_seed, 1);
            row.bandwidth = h;
            const FoldedSurfaces folded = fit_folded(ds, h, cfg.kfolds, fold_seed);
            const RegimeFit ss = to_raw_scale(fit_ss(ds, folded, prop, 1));

            row.tr = summarize_fit(tr, truth, pooled);
            row.ss = summarize_fit(ss, truth, pooled);
            if (cfg.include_np) {
                KernelConfig config;
                config.bandwidth = h;
                const QSurface surface = fit_surface(ds, config);
                const RegimeFit np = to_raw_scale(fit_np(ds, surface, prop, 1));
                row.np = summarize_fit(np, truth, pooled);
            }
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.message = e.what();
        }
        report.rows[static_cast<std::size_t>(r)] = std::move(row);
    });

    std::vector<const MethodReplication*> tr_rows, ss_rows, np_rows;
    for (const ReplicationResult& row : report.rows) {
        if (!row.ok) {
            report.failure_messages.push_back("replication " + std::to_string(row.rep) + ": " +
                                              row.message);
            continue;
        }
        tr_rows.push_back(&row.tr);
        ss_rows.push_back(&row.ss);
        if (row.np) np_rows.push_back(&*row.np);
    }
    report.completed = static_cast<int>(tr_rows.size());
    report.excluded = cfg.replications - report.completed;
    if (static_cast<double>(report.excluded) > 0.05 * static_cast<double>(cfg.replications)) {
        std::string detail;
        const std::size_t shown = std::min<std::size_t>(report.failure_messages.size(), 3);
        for (std::size_t i = 0; i < shown; ++i) {
            detail += "\n  " + report.failure_messages[i];
        }
        throw StudyError("study aborted: " + std::to_string(report.excluded) + " of " +
                         std::to_string(cfg.replications) +
                         " replications failed (more than 5%)" + detail);
    }
    if (report.completed == 0) {
        throw StudyError("study aborted: no replication completed");
    }

    report.tr = aggregate(tr_rows, coef_count, truth.beta_star);
    report.ss = aggregate(ss_rows, coef_count, truth.beta_star);
    if (cfg.include_np && !np_rows.empty()) {
        report.np = aggregate(np_rows, coef_count, truth.beta_star);
    }

    report.re.resize(coef_count);
    for (int j = 0; j < coef_count; ++j) {
        double tr_sq = 0.0, ss_sq = 0.0;
        for (std::size_t i = 0; i < tr_rows.size(); ++i) {
            const double dt = tr_rows[i]->beta(j) - truth.beta_star(j);
            const double dsq = ss_rows[i]->beta(j) - truth.beta_star(j);
            tr_sq += dt * dt;
            ss_sq += dsq * dsq;
        }
        report.re(j) = tr_sq / ss_sq;
    }
    return report;
}

} // namespace ssotr
