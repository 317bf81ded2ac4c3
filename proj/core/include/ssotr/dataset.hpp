#ifndef SSOTR_DATASET_HPP
#define SSOTR_DATASET_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ssotr {

/// A single subject: covariates always present, treatment and outcome
/// either both present (labeled) or both absent (unlabeled).
struct Observation {
    Eigen::VectorXd x;
    std::optional<int> a;
    std::optional<double> y;

    bool labeled() const { return a.has_value(); }
};

/// Per-coordinate affine map raw -> (raw - mean) / sd, kept with every
/// dataset and fit so decision rules can be applied to raw inputs.
struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;

    static Standardization identity(int p);

    int p() const { return static_cast<int>(mean.size()); }
    bool is_identity() const;
    Eigen::VectorXd apply(const Eigen::VectorXd& raw) const;
    Eigen::VectorXd invert(const Eigen::VectorXd& standardized) const;
    /// Composition: applying *this then next, as a single map.
    Standardization then(const Standardization& next) const;
};

/// Immutable container for the labeled sample (covariates, treatment,
/// outcome) and the unlabeled sample (covariates only). Covariates are
/// stored column-per-subject. Safe for concurrent reads.
class Dataset {
  public:
    /// Validates and stores the samples. labeled_x is p-by-n with
    /// treatment/outcome of length n; unlabeled_x is p-by-N (possibly
    /// 0 columns). Requires n >= p+2, both arms present, finite values,
    /// binary treatments.
    Dataset(Eigen::MatrixXd labeled_x, Eigen::VectorXi treatment,
            Eigen::VectorXd outcome, Eigen::MatrixXd unlabeled_x,
            Standardization standardization);

    Dataset(Eigen::MatrixXd labeled_x, Eigen::VectorXi treatment,
            Eigen::VectorXd outcome, Eigen::MatrixXd unlabeled_x);

    static Dataset from_observations(const std::vector<Observation>& observations);

    int n() const { return static_cast<int>(labeled_x_.cols()); }
    int unlabeled_count() const { return static_cast<int>(unlabeled_x_.cols()); }
    int p() const { return static_cast<int>(labeled_x_.rows()); }

    const Eigen::MatrixXd& labeled_x() const { return labeled_x_; }
    const Eigen::MatrixXd& unlabeled_x() const { return unlabeled_x_; }
    const Eigen::VectorXi& treatment() const { return treatment_; }
    const Eigen::VectorXd& outcome() const { return outcome_; }
    const Standardization& standardization() const { return standardization_; }

    /// n-by-(p+1) design matrix of augmented labeled covariates.
    Eigen::MatrixXd labeled_design() const;
    /// N-by-(p+1) design matrix of augmented unlabeled covariates.
    Eigen::MatrixXd unlabeled_design() const;
    /// p-by-(n+N) matrix of all covariates, labeled first.
    Eigen::MatrixXd pooled_x() const;

    int arm_count(int arm) const;

  private:
    void validate() const;

    Eigen::MatrixXd labeled_x_;
    Eigen::VectorXi treatment_;
    Eigen::VectorXd outcome_;
    Eigen::MatrixXd unlabeled_x_;
    Standardization standardization_;
};

/// Prepends the constant 1 to a covariate vector.
Eigen::VectorXd augment(const Eigen::VectorXd& x);

/// Augments every column of a p-by-m covariate matrix into an
/// m-by-(p+1) design matrix.
Eigen::MatrixXd augment_design(const Eigen::MatrixXd& x_columns);

/// Loads a labeled CSV (header x1,...,xp,a,y) and an optional unlabeled
/// CSV (header x1,...,xp). Values are kept as read; standardization is
/// the identity until standardize() is applied.
Dataset load_csv(const std::string& labeled_path,
                 const std::optional<std::string>& unlabeled_path = std::nullopt);

/// Writes the dataset back out in the load_csv schema at full precision
/// (shortest round-trip decimal literals).
void save_csv(const Dataset& ds, const std::string& labeled_path,
              const std::optional<std::string>& unlabeled_path = std::nullopt);

/// Reads a covariate-only CSV (header x1,...,xp); returns columns.
Eigen::MatrixXd load_covariate_csv(const std::string& path);

/// Returns a copy whose covariates have pooled (labeled + unlabeled)
/// mean 0 and population sd 1 per coordinate, with the affine map
/// composed into the standardization metadata. A zero-variance
/// coordinate is an error naming the column.
Dataset standardize(const Dataset& ds);

} // namespace ssotr

#endif
