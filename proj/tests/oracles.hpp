#ifndef SSOTR_TESTS_ORACLES_HPP
#define SSOTR_TESTS_ORACLES_HPP

// Deliberately naive reference implementations used to cross-check the
// library: plain loops, cofactor inverses, grid searches, and bisection.
// Nothing here shares a code path with the library under test.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace oracle {

// Nadaraya-Watson estimate with a product standard-normal kernel,
// summed point by point.
inline double nw(const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y, double h,
                 const Eigen::VectorXd& x) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < train_x.cols(); ++i) {
        double k = 1.0;
        for (Eigen::Index d = 0; d < x.size(); ++d) {
            const double u = (x(d) - train_x(d, i)) / h;
            k *= std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
        }
        num += k * train_y(i);
        den += k;
    }
    return num / den;
}

// Solves a 3x3 system through the adjugate; no decompositions involved.
inline Eigen::Vector3d solve3(const Eigen::Matrix3d& m, const Eigen::Vector3d& b) {
    const double det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                       m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                       m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    if (std::abs(det) < 1e-300) throw std::runtime_error("oracle: singular 3x3 system");
    Eigen::Matrix3d adj;
    adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    adj(0, 1) = -(m(0, 1) * m(2, 2) - m(0, 2) * m(2, 1));
    adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    adj(1, 0) = -(m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0));
    adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    adj(1, 2) = -(m(0, 0) * m(1, 2) - m(0, 2) * m(1, 0));
    adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    adj(2, 1) = -(m(0, 0) * m(2, 1) - m(0, 1) * m(2, 0));
    adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return adj * b / det;
}

// Ordinary least squares for a three-column design via explicit normal
// equations and the adjugate solve.
inline Eigen::Vector3d ols3(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    Eigen::Matrix3d xtx = Eigen::Matrix3d::Zero();
    Eigen::Vector3d xty = Eigen::Vector3d::Zero();
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        for (int r = 0; r < 3; ++r) {
            xty(r) += design(i, r) * y(i);
            for (int c = 0; c < 3; ++c) xtx(r, c) += design(i, r) * design(i, c);
        }
    }
    return solve3(xtx, xty);
}

// Logistic log-likelihood sum_i [a_i*eta_i - log(1 + exp(eta_i))].
inline double logistic_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXi& a,
                              const Eigen::VectorXd& gamma) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        const double eta = design.row(i).dot(gamma);
        const double softplus = std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
        ll += a(i) * eta - softplus;
    }
    return ll;
}

// Maximizes f over a shrinking lattice: each round scans a full grid of
// (2*steps+1)^k points around the running best, then zooms into the cell
// that won. Precision after r rounds is half_width * (2/steps)^(r-1).
inline Eigen::VectorXd grid_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                     Eigen::VectorXd center, double half_width, int rounds,
                                     int steps = 8) {
    const int k = static_cast<int>(center.size());
    for (int round = 0; round < rounds; ++round) {
        Eigen::VectorXd best = center;
        double best_val = f(center);
        std::vector<int> idx(static_cast<std::size_t>(k), -steps);
        for (;;) {
            Eigen::VectorXd point = center;
            for (int d = 0; d < k; ++d) {
                point(d) += half_width * idx[static_cast<std::size_t>(d)] / steps;
            }
            const double val = f(point);
            if (val > best_val) {
                best_val = val;
                best = point;
            }
            int d = 0;
            while (d < k && ++idx[static_cast<std::size_t>(d)] > steps) {
                idx[static_cast<std::size_t>(d)] = -steps;
                ++d;
            }
            if (d == k) break;
        }
        center = best;
        half_width *= 2.0 / steps; // spans one lattice cell on each side of the winner
    }
    return center;
}

// Brute-force logistic MLE by iterated grid refinement.
inline Eigen::VectorXd logistic_grid_mle(const Eigen::MatrixXd& design, const Eigen::VectorXi& a,
                                         double half_width = 5.0, int rounds = 14) {
    return grid_maximize(
        [&](const Eigen::VectorXd& g) { return logistic_loglik(design, a, g); },
        Eigen::VectorXd::Zero(design.cols()), half_width, rounds);
}

// Minimizes sum_i w_i * (r_i - t0 - t1 * z_i)^2 over a refined 2-d grid.
inline Eigen::Vector2d weighted_grid_ls(const Eigen::VectorXd& z, const Eigen::VectorXd& r,
                                        const Eigen::VectorXd& w, double half_width = 10.0,
                                        int rounds = 14) {
    const auto objective = [&](const Eigen::VectorXd& t) {
        double sse = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            const double e = r(i) - t(0) - t(1) * z(i);
            sse += w(i) * e * e;
        }
        return -sse;
    };
    const Eigen::VectorXd best = grid_maximize(objective, Eigen::VectorXd::Zero(2), half_width,
                                               rounds);
    return Eigen::Vector2d(best(0), best(1));
}

// Standard normal quantile by bisection on the erfc-based CDF.
inline double quantile_bisect(double prob) {
    const auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    double lo = -13.0, hi = 13.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < prob) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace oracle

#endif
