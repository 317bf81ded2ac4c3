#ifndef SSOTR_SIMULATION_HPP
#define SSOTR_SIMULATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ssotr/dataset.hpp"

namespace ssotr {

enum class ContrastModel { linear, cubic, sine };
enum class BaselineModel { b1, b2 };

std::string contrast_model_name(ContrastModel model);
ContrastModel contrast_model_from_string(const std::string& name);
std::string baseline_model_name(BaselineModel model);
BaselineModel baseline_model_from_string(const std::string& name);

/// One Monte Carlo study cell: data-generating settings plus estimator
/// configuration shared by every replication.
struct SimConfig {
    ContrastModel model = ContrastModel::linear;
    BaselineModel baseline = BaselineModel::b1;
    Eigen::Index n = 500;
    Eigen::Index unlabeled_n = 5000;
    int p = 2;
    int replications = 100;
    Eigen::Index mc_truth_size = 500000;
    std::uint64_t seed = 1;
    int kfolds = 5;
    std::optional<double> bandwidth; // fixed value; empty selects by CV
    double clip_eps = 0.01;
    bool include_np = false;
    int threads = 0; // 0 uses the default thread count

    void validate() const;
};

/// E(Y|X=x, A=1) - E(Y|X=x, A=0) under the chosen model. Only the first
/// two coordinates carry signal; higher coordinates are noise covariates.
double contrast_value(ContrastModel model, const Eigen::VectorXd& x);

/// E(Y|X=x, A=0) under the chosen baseline.
double baseline_value(BaselineModel model, const Eigen::VectorXd& x);

/// Population targets estimated from one large shared Monte Carlo draw:
/// beta_star is the least-squares projection of the true contrast on the
/// augmented covariates; v0 the mean outcome under the optimal rule.
struct TruthSet {
    Eigen::VectorXd beta_star;
    double v0 = 0.0;
    Eigen::MatrixXd x;  // p x mc_truth_size
    Eigen::VectorXd c;  // true contrast at each column of x
    Eigen::VectorXd mu; // true baseline at each column of x
};

/// Covariates are coordinate-wise standard normal with draws outside
/// [-5, 5] rejected and redrawn; treatment follows a logistic propensity
/// in the first two coordinates; outcomes add unit normal noise. The
/// first n rows keep (A, Y); the next unlabeled_n rows are stripped of
/// them (missing completely at random by construction).
Dataset generate_replication(const SimConfig& cfg, int rep_index);

TruthSet compute_truth(const SimConfig& cfg);

/// Fraction of evaluation points where the estimated and optimal linear
/// rules agree.
double pcd(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star,
           const Eigen::MatrixXd& eval_x);

/// Mean outcome over the truth sample when treatment follows the rule
/// induced by beta_hat.
double value_of_rule(const Eigen::VectorXd& beta_hat, const TruthSet& truth);

/// Per-replication summary of one estimator, on the raw covariate scale.
struct MethodReplication {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    std::vector<int> cover; // CI covers beta_star, per coefficient
    double pcd = 0.0;
    double value = 0.0;
};

struct ReplicationResult {
    int rep = 0;
    bool ok = false;
    std::string message; // failure diagnostic when !ok
    double bandwidth = 0.0;
    MethodReplication tr;
    MethodReplication ss;
    std::optional<MethodReplication> np;
};

/// Aggregates over completed replications; SDs are NaN when fewer than
/// two replications completed.
struct MethodAggregate {
    double mean_value = 0.0, sd_value = 0.0;
    double mean_pcd = 0.0, sd_pcd = 0.0;
    Eigen::VectorXd bias;    // mean(beta) - beta_star
    Eigen::VectorXd sd;      // empirical SD of beta
    Eigen::VectorXd mean_se; // mean estimated SE
    Eigen::VectorXd cp;      // CI coverage rate
};

struct SimReport {
    SimConfig config;
    Eigen::VectorXd beta_star;
    double v0 = 0.0;
    int completed = 0;
    int excluded = 0;
    std::vector<std::string> failure_messages;
    MethodAggregate tr;
    MethodAggregate ss;
    std::optional<MethodAggregate> np;
    Eigen::VectorXd re; // per-coefficient efficiency of ss relative to tr
    std::vector<ReplicationResult> rows;
};

/// Runs every replication (in parallel when configured), aggregates, and
/// raises an error when more than 5% of replications fail.
SimReport run_study(const SimConfig& cfg);

} // namespace ssotr

#endif
