#ifndef SSOTR_KERNEL_HPP
#define SSOTR_KERNEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ssotr/dataset.hpp"

namespace ssotr {

/// Product-Gaussian kernel settings. The bandwidth is shared across
/// coordinates and arms; callers typically work on the standardized scale.
struct KernelConfig {
    double bandwidth = 1.0;
    /// When the summed kernel weight at a query falls below
    /// denom_floor * (arm training count), the estimate falls back to the
    /// arm's training outcome mean instead of dividing by ~0.
    double denom_floor = 1e-8;
};

/// Nadaraya-Watson regression surface for the two arm-specific outcome
/// means, trained on a subset of a dataset's labeled rows. Immutable after
/// construction; evaluations are pure and safe to run concurrently.
class QSurface {
  public:
    /// Trains on the labeled rows listed in `active` (indices into the
    /// dataset's labeled sample). Arms may be empty here; evaluating an
    /// empty arm raises the error instead.
    QSurface(const Dataset& ds, const KernelConfig& config, const std::vector<int>& active);

    /// Kernel-weighted mean outcome among arm-`arm` training points.
    double q(const Eigen::VectorXd& x, int arm) const;

    /// q(x, 1) - q(x, 0).
    double contrast(const Eigen::VectorXd& x) const;

    const KernelConfig& config() const { return config_; }
    int p() const { return p_; }
    Eigen::Index arm_count(int arm) const;

  private:
    KernelConfig config_;
    int p_ = 0;
    Eigen::MatrixXd arm_x_[2]; // p x m_a training covariates
    Eigen::VectorXd arm_y_[2];
    double arm_mean_[2] = {0.0, 0.0};
    double norm_const_ = 1.0; // (2*pi)^(-p/2)
};

/// Surface trained on every labeled row.
QSurface fit_surface(const Dataset& ds, const KernelConfig& config);

/// K held-out surfaces plus the fold assignment that produced them:
/// surfaces[k] was trained on all labeled rows except fold k.
struct FoldedSurfaces {
    std::vector<QSurface> surfaces;
    std::vector<int> fold_of; // labeled index -> fold

    int kfolds() const { return static_cast<int>(surfaces.size()); }

    /// Evaluation that excludes labeled row i's own fold.
    double q_heldout(const Eigen::VectorXd& x, int i, int arm) const {
        return surfaces[static_cast<std::size_t>(fold_of[static_cast<std::size_t>(i)])].q(x, arm);
    }

    /// Average of all K held-out surfaces at x.
    double q_average(const Eigen::VectorXd& x, int arm) const;
    double contrast_average(const Eigen::VectorXd& x) const;
};

/// Seeded random partition of {0..n-1} into K folds whose sizes differ by
/// at most one. Returns the fold index of each element.
std::vector<int> fold_partition(Eigen::Index n, int kfolds, std::uint64_t seed);

/// Cross-fitting surfaces: errors if any training complement misses an arm.
FoldedSurfaces fit_folded(const Dataset& ds, double bandwidth, int kfolds, std::uint64_t seed);

/// K-fold out-of-fold squared prediction error over the grid; ties break
/// toward the larger bandwidth. A fold whose training complement misses an
/// arm contributes the complement's pooled outcome mean as the prediction
/// instead of failing.
double select_bandwidth(const Dataset& ds, int folds, const std::vector<double>& grid,
                        std::uint64_t seed, int threads = 1);

/// 15 log-spaced values in [h0/4, 4*h0] with pilot h0 = n^(-1/(p+4)).
std::vector<double> default_bandwidth_grid(Eigen::Index n, int p);

/// Rate-condition warnings for a chosen bandwidth (second-order kernel):
/// flags sqrt(n)*h^2 > 1 (bias too large for root-n inference) and
/// sqrt(log(n)/(n*h^p)) > 0.5 (neighborhoods too sparse). Empty when clean.
std::vector<std::string> bandwidth_diagnostics(double bandwidth, Eigen::Index n, int p);

} // namespace ssotr

#endif
