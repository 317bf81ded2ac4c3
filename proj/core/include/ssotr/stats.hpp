#ifndef SSOTR_STATS_HPP
#define SSOTR_STATS_HPP

#include <Eigen/Core>

namespace ssotr {

/// Logistic function 1 / (1 + exp(-t)), overflow-safe.
double expit(double t);

/// log(1 + exp(t)) without overflow.
double log1pexp(double t);

/// Standard normal CDF.
double normal_cdf(double z);

/// Standard normal quantile, rational approximation (Wichura's PPND16),
/// absolute error below 1e-15 on (0, 1).
double normal_quantile(double prob);

/// Mean of a vector; 0 for empty input.
double mean(const Eigen::VectorXd& v);

/// Sample standard deviation (denominator n-1); NaN when n < 2.
double sample_sd(const Eigen::VectorXd& v);

/// Population standard deviation (denominator n).
double population_sd(const Eigen::VectorXd& v);

/// Median; NaN for empty input.
double median(Eigen::VectorXd v);

} // namespace ssotr

#endif
