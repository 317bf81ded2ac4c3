#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssotr/dataset.hpp"
#include "ssotr/errors.hpp"
#include "ssotr/estimators.hpp"
#include "ssotr/kernel.hpp"
#include "ssotr/parallel.hpp"
#include "ssotr/propensity.hpp"
#include "ssotr/report.hpp"
#include "ssotr/simulation.hpp"

namespace {

using namespace ssotr;

/// Writes atomically: a temp file in the target directory is renamed over
/// the destination only after a complete, flushed write. Targets that exist
/// but are not regular files (/dev/null, pipes) are written through
/// directly — renaming over them would replace the special file.
void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    std::error_code status_ec;
    const fs::file_status st = fs::status(target, status_ec);
    if (!status_ec && fs::exists(st) && !fs::is_regular_file(st)) {
        std::ofstream out(target, std::ios::binary);
        if (!out) throw InputError("cannot open '" + path + "' for writing");
        out << content;
        out.flush();
        if (!out) throw InputError("failed while writing '" + path + "'");
        return;
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw InputError("failed while writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("cannot rename temporary file onto '" + path + "'");
    }
}

void emit(const std::optional<std::string>& out_path, const std::string& content) {
    if (out_path) {
        write_file_atomic(*out_path, content);
    } else {
        std::cout << content;
    }
}

double parse_bandwidth_flag(const std::string& text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !(value > 0.0)) {
        throw InputError("--bandwidth must be 'auto' or a positive number; got '" + text + "'");
    }
    return value;
}

std::vector<int> parse_propensity_cols(const std::string& text, int p) {
    std::vector<int> cols;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string token =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        int idx = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), idx);
        if (ec != std::errc() || ptr != token.data() + token.size()) {
            throw InputError("--propensity-cols expects comma-separated 1-based covariate "
                             "indices; got '" + token + "'");
        }
        if (idx < 1 || idx > p) {
            throw InputError("--propensity-cols index " + std::to_string(idx) +
                             " out of range for p=" + std::to_string(p));
        }
        cols.push_back(idx - 1);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (cols.empty()) throw InputError("--propensity-cols must name at least one covariate");
    return cols;
}

struct FitArgs {
    std::string labeled;
    std::string unlabeled;
    std::string method = "tr";
    int kfolds = 5;
    std::string bandwidth = "auto";
    double clip_eps = 0.01;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string propensity_cols;
    std::string format = "json";
    std::string out;
};

int cmd_fit(const FitArgs& args) {
    const Method method = method_from_string(args.method);
    if (args.kfolds < 2) throw InputError("--kfolds must be at least 2");
    if (method != Method::tr && args.unlabeled.empty()) {
        throw InputError(args.method + " requires unlabeled data (--unlabeled)");
    }
    if (args.format != "json" && args.format != "table") {
        throw InputError("--format must be 'json' or 'table'");
    }

    const Dataset raw = load_csv(args.labeled, args.unlabeled.empty()
                                                   ? std::nullopt
                                                   : std::make_optional(args.unlabeled));
    const Dataset ds = standardize(raw);
    const int threads = args.threads > 0 ? args.threads : default_thread_count();

    std::optional<std::vector<int>> prop_cols;
    if (!args.propensity_cols.empty()) {
        prop_cols = parse_propensity_cols(args.propensity_cols, ds.p());
    }
    const PropensityFit prop = fit_propensity(ds, args.clip_eps, 100, 1e-10, prop_cols);

    RegimeFit fit;
    if (method == Method::tr) {
        fit = fit_tr(ds, prop);
    } else {
        const double h = args.bandwidth == "auto"
                             ? select_bandwidth(ds, args.kfolds,
                                                default_bandwidth_grid(ds.n(), ds.p()),
                                                args.seed, threads)
                             : parse_bandwidth_flag(args.bandwidth);
        if (method == Method::np) {
            KernelConfig config;
            config.bandwidth = h;
            const QSurface surface = fit_surface(ds, config);
            fit = fit_np(ds, surface, prop, threads);
            fit.kfolds = args.kfolds; // folds used by the bandwidth search
        } else {
            const FoldedSurfaces folded = fit_folded(ds, h, args.kfolds, args.seed);
            fit = fit_ss(ds, folded, prop, threads);
        }
    }

    const FitReport report = make_fit_report(ds, fit, prop);
    emit(args.out.empty() ? std::nullopt : std::make_optional(args.out),
         args.format == "json" ? to_json(report) : to_text(report));
    return 0;
}

struct DecideArgs {
    std::string fit1;
    std::string fit2;
    std::string input;
    std::string out;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

int cmd_decide(const DecideArgs& args) {
    const FitReport report1 = fit_report_from_json(read_file(args.fit1));
    const Eigen::MatrixXd x = load_covariate_csv(args.input);
    if (x.rows() != report1.p) {
        throw InputError("dimension mismatch: fit report expects p=" +
                         std::to_string(report1.p) + " covariates, input has " +
                         std::to_string(x.rows()));
    }
    const DecisionRule rule1 = report1.rule();

    std::vector<int> d1(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        d1[static_cast<std::size_t>(i)] = rule1.decide(x.col(i));
    }

    std::string csv;
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
        csv += "x" + std::to_string(j + 1) + ",";
    }
    csv += "decision\n";
    char buf[64];
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        for (Eigen::Index j = 0; j < x.rows(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", x(j, i));
            csv += buf;
            csv += ',';
        }
        csv += std::to_string(d1[static_cast<std::size_t>(i)]);
        csv += '\n';
    }
    emit(args.out.empty() ? std::nullopt : std::make_optional(args.out), csv);

    if (!args.fit2.empty()) {
        const FitReport report2 = fit_report_from_json(read_file(args.fit2));
        if (report2.p != report1.p) {
            throw InputError("dimension mismatch: the two fit reports expect different p");
        }
        const DecisionRule rule2 = report2.rule();
        long counts[2][2] = {{0, 0}, {0, 0}};
        for (Eigen::Index i = 0; i < x.cols(); ++i) {
            const int a = d1[static_cast<std::size_t>(i)];
            const int b = rule2.decide(x.col(i));
            ++counts[a][b];
        }
        const double agreement =
            static_cast<double>(counts[0][0] + counts[1][1]) / static_cast<double>(x.cols());
        std::printf("decision cross-tabulation (rows: %s, cols: %s)\n",
                    method_name(report1.method).c_str(), method_name(report2.method).c_str());
        std::printf("%8s %10s %10s\n", "", "col=0", "col=1");
        std::printf("%8s %10ld %10ld\n", "row=0", counts[0][0], counts[0][1]);
        std::printf("%8s %10ld %10ld\n", "row=1", counts[1][0], counts[1][1]);
        std::printf("agreement: %.4f\n", agreement);
    }
    return 0;
}

struct SimulateArgs {
    std::string model = "linear";
    std::string baseline = "b1";
    long n = 500;
    long unlabeled_n = 5000;
    int p = 2;
    int reps = 100;
    long mc_truth_size = 500000;
    std::uint64_t seed = 1;
    int kfolds = 5;
    std::string bandwidth = "auto";
    double clip_eps = 0.01;
    bool include_np = false;
    int threads = 0;
    std::string format = "table";
    std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
    SimConfig cfg;
    cfg.model = contrast_model_from_string(args.model);
    cfg.baseline = baseline_model_from_string(args.baseline);
    cfg.n = args.n;
    cfg.unlabeled_n = args.unlabeled_n;
    cfg.p = args.p;
    cfg.replications = args.reps;
    cfg.mc_truth_size = args.mc_truth_size;
    cfg.seed = args.seed;
    cfg.kfolds = args.kfolds;
    if (args.bandwidth != "auto") cfg.bandwidth = parse_bandwidth_flag(args.bandwidth);
    cfg.clip_eps = args.clip_eps;
    cfg.include_np = args.include_np;
    cfg.threads = args.threads;
    if (args.format != "json" && args.format != "table") {
        throw InputError("--format must be 'json' or 'table'");
    }

    const SimReport report = run_study(cfg);
    std::cout << (args.format == "json" ? to_json(report) : to_text(report));
    if (!args.out.empty()) write_file_atomic(args.out, to_json(report));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear treatment regimes from partially labeled data"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand(
        "fit", "Estimate a linear treatment rule from CSV data and write a JSON report");
    fit->add_option("--labeled", fit_args.labeled, "Labeled CSV (x1..xp,a,y)")->required();
    fit->add_option("--unlabeled", fit_args.unlabeled, "Unlabeled CSV (x1..xp)");
    fit->add_option("--method", fit_args.method, "Estimator: tr, np, or ss")->required();
    fit->add_option("--kfolds", fit_args.kfolds, "Folds for cross-fitting and bandwidth CV");
    fit->add_option("--bandwidth", fit_args.bandwidth, "'auto' (CV) or a positive value");
    fit->add_option("--clip-eps", fit_args.clip_eps, "Propensity clipping bound");
    fit->add_option("--seed", fit_args.seed, "Seed for fold assignment");
    fit->add_option("--threads", fit_args.threads, "Worker threads (0 = default)");
    fit->add_option("--propensity-cols", fit_args.propensity_cols,
                    "Comma-separated 1-based covariate indices for the propensity model");
    fit->add_option("--format", fit_args.format, "Report format: json or table");
    fit->add_option("--out", fit_args.out, "Output path (stdout when omitted)");

    DecideArgs decide_args;
    CLI::App* decide = app.add_subcommand(
        "decide", "Apply a saved fit report to covariates and write decisions");
    decide->add_option("--fit", decide_args.fit1, "Fit report JSON")->required();
    decide->add_option("--fit2", decide_args.fit2,
                       "Second fit report: prints a decision cross-tabulation");
    decide->add_option("--input", decide_args.input, "Covariate CSV (x1..xp)")->required();
    decide->add_option("--out", decide_args.out, "Decisions CSV path (stdout when omitted)");

    SimulateArgs sim_args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Run a Monte Carlo study cell and report aggregates");
    simulate->add_option("--model", sim_args.model, "Contrast model: linear, cubic, sine");
    simulate->add_option("--baseline", sim_args.baseline, "Baseline model: b1 or b2");
    simulate->add_option("--n", sim_args.n, "Labeled sample size");
    simulate->add_option("--unlabeled-n,--N", sim_args.unlabeled_n, "Unlabeled sample size");
    simulate->add_option("--p", sim_args.p, "Covariate dimension");
    simulate->add_option("--reps", sim_args.reps, "Replication count");
    simulate->add_option("--mc-truth-size", sim_args.mc_truth_size,
                         "Monte Carlo sample size for the truth targets");
    simulate->add_option("--seed", sim_args.seed, "Study seed");
    simulate->add_option("--kfolds", sim_args.kfolds, "Folds for cross-fitting and bandwidth CV");
    simulate->add_option("--bandwidth", sim_args.bandwidth, "'auto' (CV) or a positive value");
    simulate->add_option("--clip-eps", sim_args.clip_eps, "Propensity clipping bound");
    simulate->add_flag("--include-np", sim_args.include_np, "Also fit the np estimator");
    simulate->add_option("--threads", sim_args.threads, "Worker threads (0 = default)");
    simulate->add_option("--format", sim_args.format, "Stdout format: table or json");
    simulate->add_option("--out", sim_args.out, "Also write the JSON report to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_args);
        if (decide->parsed()) return cmd_decide(decide_args);
        if (simulate->parsed()) return cmd_simulate(sim_args);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const StudyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
