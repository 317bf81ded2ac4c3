#ifndef SSOTR_TESTS_HELPERS_HPP
#define SSOTR_TESTS_HELPERS_HPP

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>

#include <Eigen/Core>

#include "ssotr/dataset.hpp"
#include "ssotr/propensity.hpp"
#include "ssotr/rng.hpp"

namespace testutil {

// Dataset with y = a * (x1 + ... + xp) + noise and randomized treatment;
// the first two rows are pinned so both arms are always present.
inline ssotr::Dataset linear_dataset(std::uint64_t seed, int n, int unlabeled_n, int p,
                                     double noise_sd = 1.0) {
    ssotr::Rng rng(seed);
    Eigen::MatrixXd lx(p, n);
    Eigen::VectorXi a(n);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) lx(j, i) = rng.normal();
        a(i) = i == 0 ? 0 : (i == 1 ? 1 : rng.bernoulli(0.5));
        y(i) = a(i) * lx.col(i).sum() + noise_sd * rng.normal();
    }
    Eigen::MatrixXd ux(p, unlabeled_n);
    for (int i = 0; i < unlabeled_n; ++i) {
        for (int j = 0; j < p; ++j) ux(j, i) = rng.normal();
    }
    return ssotr::Dataset(lx, a, y, ux);
}

// A propensity model pinned at the given coefficients, bypassing the fit.
inline ssotr::PropensityFit fixed_propensity(const Eigen::VectorXd& gamma, double clip = 0.01) {
    ssotr::PropensityFit prop;
    prop.gamma = gamma;
    prop.clip_eps = clip;
    prop.converged = true;
    prop.iterations = 0;
    return prop;
}

// Logistic fit of the single index z = x1 - x2 (no intercept), embedded
// back into full-dimension coefficients. Matches the treatment-assignment
// form of the built-in generator.
inline ssotr::PropensityFit index_propensity(const ssotr::Dataset& raw, double clip = 0.01) {
    const Eigen::MatrixXd z = raw.labeled_x().row(0) - raw.labeled_x().row(1);
    const ssotr::Dataset index_ds(z, raw.treatment(), raw.outcome(), Eigen::MatrixXd(1, 0));
    const ssotr::PropensityFit fit =
        ssotr::fit_propensity(index_ds, clip, 100, 1e-10, std::nullopt, false);
    ssotr::PropensityFit prop = fit;
    prop.gamma = Eigen::VectorXd::Zero(raw.p() + 1);
    prop.gamma(1) = fit.gamma(1);
    prop.gamma(2) = -fit.gamma(1);
    return prop;
}

struct CommandResult {
    int exit_code = -1;
    std::string output; // stdout and stderr interleaved
};

inline CommandResult run_command(const std::string& cmd) {
    CommandResult result;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return result;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, got);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

inline std::string make_temp_dir() {
    char tmpl[] = "/tmp/ssotr_test_XXXXXX";
    char* dir = mkdtemp(tmpl);
    if (!dir) throw std::runtime_error("mkdtemp failed");
    return std::string(dir);
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline bool file_exists(const std::string& path) {
    std::ifstream in(path);
    return in.good();
}

} // namespace testutil

#endif
