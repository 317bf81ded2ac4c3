#include "ssotr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ssotr/errors.hpp"
#include "ssotr/parallel.hpp"
#include "ssotr/rng.hpp"

namespace ssotr {

QSurface::QSurface(const Dataset& ds, const KernelConfig& config, const std::vector<int>& active)
    : config_(config), p_(ds.p()) {
    if (!(config.bandwidth > 0.0) || !std::isfinite(config.bandwidth)) {
        throw InputError("bandwidth must be a positive finite number");
    }
    if (!(config.denom_floor > 0.0)) {
        throw InputError("denominator floor must be positive");
    }
    Eigen::Index counts[2] = {0, 0};
    for (int i : active) {
        if (i < 0 || i >= ds.n()) {
            throw InputError("training index " + std::to_string(i) + " out of range");
        }
        ++counts[ds.treatment()(i)];
    }
    for (int a = 0; a < 2; ++a) {
        arm_x_[a].resize(p_, counts[a]);
        arm_y_[a].resize(counts[a]);
    }
    Eigen::Index fill[2] = {0, 0};
    for (int i : active) {
        const int a = ds.treatment()(i);
        arm_x_[a].col(fill[a]) = ds.labeled_x().col(i);
        arm_y_[a](fill[a]) = ds.outcome()(i);
        ++fill[a];
    }
    for (int a = 0; a < 2; ++a) {
        arm_mean_[a] = counts[a] > 0 ? arm_y_[a].mean() : 0.0;
    }
    norm_const_ = std::pow(2.0 * M_PI, -0.5 * static_cast<double>(p_));
}

Eigen::Index QSurface::arm_count(int arm) const {
    if (arm != 0 && arm != 1) throw InputError("arm must be 0 or 1");
    return arm_x_[arm].cols();
}

double QSurface::q(const Eigen::VectorXd& x, int arm) const {
    if (arm != 0 && arm != 1) throw InputError("arm must be 0 or 1");
    if (x.size() != p_) {
        throw InputError("query point has " + std::to_string(x.size()) +
                         " coordinates; surface expects " + std::to_string(p_));
    }
    const Eigen::MatrixXd& xs = arm_x_[arm];
    const Eigen::Index m = xs.cols();
    if (m == 0) {
        throw NumericalError("empty arm: no training observations with treatment " +
                             std::to_string(arm));
    }
    // Squared distances computed by direct differencing (cancellation-free),
    // keeping results translation-invariant.
    Eigen::ArrayXd dist2 = Eigen::ArrayXd::Zero(m);
    for (int j = 0; j < p_; ++j) {
        dist2 += (xs.row(j).transpose().array() - x(j)).square();
    }
    const double inv_h2 = 1.0 / (config_.bandwidth * config_.bandwidth);
    const Eigen::ArrayXd w = (-0.5 * inv_h2 * dist2).exp() * norm_const_;
    const double den = w.sum();
    if (!(den >= config_.denom_floor * static_cast<double>(m))) {
        return arm_mean_[arm];
    }
    return (w * arm_y_[arm].array()).sum() / den;
}

double QSurface::contrast(const Eigen::VectorXd& x) const { return q(x, 1) - q(x, 0); }

QSurface fit_surface(const Dataset& ds, const KernelConfig& config) {
    std::vector<int> active(static_cast<std::size_t>(ds.n()));
    for (Eigen::Index i = 0; i < ds.n(); ++i) active[static_cast<std::size_t>(i)] = static_cast<int>(i);
    return QSurface(ds, config, active);
}

double FoldedSurfaces::q_average(const Eigen::VectorXd& x, int arm) const {
    double total = 0.0;
    for (const QSurface& s : surfaces) total += s.q(x, arm);
    return total / static_cast<double>(surfaces.size());
}

double FoldedSurfaces::contrast_average(const Eigen::VectorXd& x) const {
    return q_average(x, 1) - q_average(x, 0);
}

std::vector<int> fold_partition(Eigen::Index n, int kfolds, std::uint64_t seed) {
    if (kfolds < 2) throw InputError("fold count must be at least 2");
    if (static_cast<Eigen::Index>(kfolds) > n) {
        throw InputError("fold count " + std::to_string(kfolds) + " exceeds sample size " +
                         std::to_string(n));
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<int> fold_of(static_cast<std::size_t>(n));
    const Eigen::Index base = n / kfolds;
    const Eigen::Index remainder = n % kfolds;
    std::size_t pos = 0;
    for (int k = 0; k < kfolds; ++k) {
        const Eigen::Index size = base + (k < remainder ? 1 : 0);
        for (Eigen::Index j = 0; j < size; ++j) {
            fold_of[static_cast<std::size_t>(order[pos])] = k;
            ++pos;
        }
    }
    return fold_of;
}

namespace {

std::vector<std::vector<int>> complements(const std::vector<int>& fold_of, int kfolds) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(kfolds));
    for (int k = 0; k < kfolds; ++k) {
        out[static_cast<std::size_t>(k)].reserve(fold_of.size());
    }
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        for (int k = 0; k < kfolds; ++k) {
            if (fold_of[i] != k) out[static_cast<std::size_t>(k)].push_back(static_cast<int>(i));
        }
    }
    return out;
}

} // namespace

FoldedSurfaces fit_folded(const Dataset& ds, double bandwidth, int kfolds, std::uint64_t seed) {
    FoldedSurfaces folded;
    folded.fold_of = fold_partition(ds.n(), kfolds, seed);
    KernelConfig config;
    config.bandwidth = bandwidth;
    const auto train = complements(folded.fold_of, kfolds);
    folded.surfaces.reserve(static_cast<std::size_t>(kfolds));
    for (int k = 0; k < kfolds; ++k) {
        QSurface surface(ds, config, train[static_cast<std::size_t>(k)]);
        for (int a = 0; a < 2; ++a) {
            if (surface.arm_count(a) == 0) {
                throw InputError("training complement for fold " + std::to_string(k) +
                                 " has no observations with treatment " + std::to_string(a) +
                                 "; use fewer folds");
            }
        }
        folded.surfaces.push_back(std::move(surface));
    }
    return folded;
}

double select_bandwidth(const Dataset& ds, int folds, const std::vector<double>& grid,
                        std::uint64_t seed, int threads) {
    if (grid.empty()) throw InputError("bandwidth grid must be nonempty");
    for (double h : grid) {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw InputError("bandwidth grid values must be positive finite numbers");
        }
    }
    const std::vector<int> fold_of = fold_partition(ds.n(), folds, seed);
    const auto train = complements(fold_of, folds);

    // Pooled outcome mean of each complement: the prediction when the
    // complement cannot support a kernel estimate for an arm.
    std::vector<double> pooled_mean(static_cast<std::size_t>(folds), 0.0);
    for (int k = 0; k < folds; ++k) {
        const auto& idx = train[static_cast<std::size_t>(k)];
        double total = 0.0;
        for (int i : idx) total += ds.outcome()(i);
        pooled_mean[static_cast<std::size_t>(k)] = total / static_cast<double>(idx.size());
    }

    std::vector<double> error(grid.size(), 0.0);
    parallel_for(static_cast<int>(grid.size()), threads, [&](int gi) {
        const auto g = static_cast<std::size_t>(gi);
        KernelConfig config;
        config.bandwidth = grid[g];
        double total = 0.0;
        for (int k = 0; k < folds; ++k) {
            const QSurface surface(ds, config, train[static_cast<std::size_t>(k)]);
            for (Eigen::Index i = 0; i < ds.n(); ++i) {
                if (fold_of[static_cast<std::size_t>(i)] != k) continue;
                const int a = ds.treatment()(i);
                const double pred = surface.arm_count(a) == 0
                                        ? pooled_mean[static_cast<std::size_t>(k)]
                                        : surface.q(ds.labeled_x().col(i), a);
                const double diff = ds.outcome()(i) - pred;
                total += diff * diff;
            }
        }
        error[g] = total;
    });

    double best_h = grid[0];
    double best_err = error[0];
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (error[g] < best_err || (error[g] == best_err && grid[g] > best_h)) {
            best_err = error[g];
            best_h = grid[g];
        }
    }
    return best_h;
}

std::vector<double> default_bandwidth_grid(Eigen::Index n, int p) {
    if (n < 1 || p < 1) throw InputError("bandwidth grid needs n >= 1 and p >= 1");
    const double h0 = std::pow(static_cast<double>(n), -1.0 / static_cast<double>(p + 4));
    const int count = 15;
    const double lo = std::log(h0 / 4.0);
    const double hi = std::log(4.0 * h0);
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
        grid[static_cast<std::size_t>(i)] =
            std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return grid;
}

std::vector<std::string> bandwidth_diagnostics(double bandwidth, Eigen::Index n, int p) {
    std::vector<std::string> flags;
    char buf[160];
    const double nn = static_cast<double>(n);
    const double bias_rate = std::sqrt(nn) * bandwidth * bandwidth;
    if (bias_rate > 1.0) {
        std::snprintf(buf, sizeof(buf),
                      "sqrt(n)*h^2 = %.3f exceeds 1: smoothing bias may dominate the "
                      "root-n inference error",
                      bias_rate);
        flags.emplace_back(buf);
    }
    const double sparse_rate = std::sqrt(std::log(nn) / (nn * std::pow(bandwidth, p)));
    if (sparse_rate > 0.5) {
        std::snprintf(buf, sizeof(buf),
                      "sqrt(log(n)/(n*h^p)) = %.3f exceeds 0.5: kernel neighborhoods are "
                      "sparse and estimates may be unstable",
                      sparse_rate);
        flags.emplace_back(buf);
    }
    return flags;
}

} // namespace ssotr
