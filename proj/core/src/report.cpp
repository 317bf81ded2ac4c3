#include "ssotr/report.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "ssotr/errors.hpp"
#include "ssotr/kernel.hpp"

namespace ssotr {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json vector_to_json(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

ordered_json intervals_to_json(const Eigen::MatrixXd& ci) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < ci.rows(); ++i) {
        arr.push_back(ordered_json::array({ci(i, 0), ci(i, 1)}));
    }
    return arr;
}

Eigen::VectorXd vector_from_json(const ordered_json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) {
        throw InputError("fit report: field '" + field + "' must be a nonempty array");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    Eigen::Index i = 0;
    for (const auto& item : j) {
        if (!item.is_number()) {
            throw InputError("fit report: field '" + field + "' must contain numbers");
        }
        v(i++) = item.get<double>();
    }
    return v;
}

Eigen::MatrixXd intervals_from_json(const ordered_json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) {
        throw InputError("fit report: field '" + field + "' must be a nonempty array");
    }
    Eigen::MatrixXd ci(static_cast<Eigen::Index>(j.size()), 2);
    Eigen::Index i = 0;
    for (const auto& item : j) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number() ||
            !item[1].is_number()) {
            throw InputError("fit report: field '" + field + "' must contain [lo, hi] pairs");
        }
        ci(i, 0) = item[0].get<double>();
        ci(i, 1) = item[1].get<double>();
        ++i;
    }
    return ci;
}

const ordered_json& require_field(const ordered_json& j, const std::string& field) {
    const auto it = j.find(field);
    if (it == j.end()) throw InputError("fit report: missing field '" + field + "'");
    return *it;
}

std::string format_value(double v, const char* fmt = "%.6g") {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

} // namespace

DecisionRule FitReport::rule() const { return DecisionRule{beta_std, standardization}; }

FitReport make_fit_report(const Dataset& ds, const RegimeFit& fit, const PropensityFit& prop) {
    FitReport report;
    report.method = fit.method;
    report.n = ds.n();
    report.unlabeled_n = ds.unlabeled_count();
    report.p = ds.p();
    report.beta_std = fit.beta;
    report.se_std = fit.se;
    report.ci95_std = fit.ci95;
    report.standardization = fit.standardization;

    const RegimeFit raw = to_raw_scale(fit);
    report.beta = raw.beta;
    report.se = raw.se;
    report.ci95 = raw.ci95;

    report.bandwidth = fit.bandwidth;
    report.kfolds = fit.kfolds;
    report.propensity_gamma = coefficients_to_raw(fit.standardization, prop.gamma);
    report.propensity_converged = prop.converged;
    report.theta1 = fit.theta1;
    report.theta0 = fit.theta0;
    if (fit.bandwidth) {
        report.bandwidth_rule_flags = bandwidth_diagnostics(*fit.bandwidth, ds.n(), ds.p());
    }
    return report;
}

std::string to_json(const FitReport& report) {
    ordered_json j;
    j["schema_version"] = 1;
    j["method"] = method_name(report.method);
    j["n"] = report.n;
    j["N"] = report.unlabeled_n;
    j["p"] = report.p;
    j["beta"] = vector_to_json(report.beta);
    j["se"] = vector_to_json(report.se);
    j["ci95"] = intervals_to_json(report.ci95);
    if (report.bandwidth) j["bandwidth"] = *report.bandwidth;
    if (report.kfolds) j["kfolds"] = *report.kfolds;
    j["propensity_gamma"] = vector_to_json(report.propensity_gamma);
    j["propensity_converged"] = report.propensity_converged;
    if (report.theta1) j["theta1"] = vector_to_json(*report.theta1);
    if (report.theta0) j["theta0"] = vector_to_json(*report.theta0);
    j["standardization"] = {{"mean", vector_to_json(report.standardization.mean)},
                            {"sd", vector_to_json(report.standardization.sd)}};
    j["beta_standardized"] = vector_to_json(report.beta_std);
    j["se_standardized"] = vector_to_json(report.se_std);
    j["ci95_standardized"] = intervals_to_json(report.ci95_std);
    j["diagnostics"] = {{"bandwidth_rule_flags", report.bandwidth_rule_flags},
                        {"excluded_rows", report.excluded_rows}};
    return j.dump(2) + "\n";
}

FitReport fit_report_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("fit report is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InputError("fit report must be a JSON object");

    FitReport report;
    const auto& version = require_field(j, "schema_version");
    if (!version.is_number_integer() || version.get<int>() != 1) {
        throw InputError("fit report: unsupported schema_version");
    }
    const auto& method = require_field(j, "method");
    if (!method.is_string()) throw InputError("fit report: field 'method' must be a string");
    report.method = method_from_string(method.get<std::string>());

    const auto& n = require_field(j, "n");
    const auto& big_n = require_field(j, "N");
    const auto& p = require_field(j, "p");
    if (!n.is_number_integer() || !big_n.is_number_integer() || !p.is_number_integer()) {
        throw InputError("fit report: fields 'n', 'N', 'p' must be integers");
    }
    report.n = n.get<Eigen::Index>();
    report.unlabeled_n = big_n.get<Eigen::Index>();
    report.p = p.get<int>();
    if (report.p < 1) throw InputError("fit report: field 'p' must be positive");

    report.beta = vector_from_json(require_field(j, "beta"), "beta");
    report.se = vector_from_json(require_field(j, "se"), "se");
    report.ci95 = intervals_from_json(require_field(j, "ci95"), "ci95");
    if (j.contains("bandwidth")) {
        if (!j["bandwidth"].is_number()) {
            throw InputError("fit report: field 'bandwidth' must be a number");
        }
        report.bandwidth = j["bandwidth"].get<double>();
    }
    if (j.contains("kfolds")) {
        if (!j["kfolds"].is_number_integer()) {
            throw InputError("fit report: field 'kfolds' must be an integer");
        }
        report.kfolds = j["kfolds"].get<int>();
    }
    report.propensity_gamma =
        vector_from_json(require_field(j, "propensity_gamma"), "propensity_gamma");
    const auto& converged = require_field(j, "propensity_converged");
    if (!converged.is_boolean()) {
        throw InputError("fit report: field 'propensity_converged' must be a boolean");
    }
    report.propensity_converged = converged.get<bool>();
    if (j.contains("theta1")) report.theta1 = vector_from_json(j["theta1"], "theta1");
    if (j.contains("theta0")) report.theta0 = vector_from_json(j["theta0"], "theta0");

    const auto& st = require_field(j, "standardization");
    if (!st.is_object()) {
        throw InputError("fit report: field 'standardization' must be an object");
    }
    report.standardization.mean = vector_from_json(require_field(st, "mean"), "standardization.mean");
    report.standardization.sd = vector_from_json(require_field(st, "sd"), "standardization.sd");
    report.beta_std = vector_from_json(require_field(j, "beta_standardized"), "beta_standardized");
    report.se_std = vector_from_json(require_field(j, "se_standardized"), "se_standardized");
    report.ci95_std =
        intervals_from_json(require_field(j, "ci95_standardized"), "ci95_standardized");

    if (j.contains("diagnostics") && j["diagnostics"].is_object()) {
        const auto& diag = j["diagnostics"];
        if (diag.contains("bandwidth_rule_flags") && diag["bandwidth_rule_flags"].is_array()) {
            for (const auto& f : diag["bandwidth_rule_flags"]) {
                if (f.is_string()) report.bandwidth_rule_flags.push_back(f.get<std::string>());
            }
        }
        if (diag.contains("excluded_rows") && diag["excluded_rows"].is_number_integer()) {
            report.excluded_rows = diag["excluded_rows"].get<int>();
        }
    }

    const Eigen::Index q = report.p + 1;
    if (report.beta.size() != q || report.se.size() != q || report.ci95.rows() != q ||
        report.beta_std.size() != q || report.se_std.size() != q ||
        report.ci95_std.rows() != q || report.propensity_gamma.size() != q ||
        report.standardization.mean.size() != report.p ||
        report.standardization.sd.size() != report.p) {
        throw InputError("fit report: coefficient blocks disagree with field 'p'");
    }
    return report;
}

std::string to_text(const FitReport& report) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "method %s   n=%lld  N=%lld  p=%d\n",
                  method_name(report.method).c_str(), static_cast<long long>(report.n),
                  static_cast<long long>(report.unlabeled_n), report.p);
    out += buf;
    if (report.bandwidth) {
        std::snprintf(buf, sizeof(buf), "bandwidth %.6g (standardized scale)", *report.bandwidth);
        out += buf;
        if (report.kfolds) {
            std::snprintf(buf, sizeof(buf), "   kfolds %d", *report.kfolds);
            out += buf;
        }
        out += "\n";
    }
    out += "\ncoefficients (raw covariate scale)\n";
    std::snprintf(buf, sizeof(buf), "%-12s %12s %12s %12s %12s\n", "coef", "estimate", "se",
                  "ci95.lo", "ci95.hi");
    out += buf;
    for (Eigen::Index i = 0; i < report.beta.size(); ++i) {
        const std::string name = i == 0 ? "intercept" : "x" + std::to_string(i);
        std::snprintf(buf, sizeof(buf), "%-12s %12s %12s %12s %12s\n", name.c_str(),
                      format_value(report.beta(i)).c_str(), format_value(report.se(i)).c_str(),
                      format_value(report.ci95(i, 0)).c_str(),
                      format_value(report.ci95(i, 1)).c_str());
        out += buf;
    }
    out += "\npropensity gamma (raw covariate scale):";
    for (Eigen::Index i = 0; i < report.propensity_gamma.size(); ++i) {
        out += " " + format_value(report.propensity_gamma(i));
    }
    out += report.propensity_converged ? "  (converged)\n" : "  (NOT converged)\n";
    for (const std::string& flag : report.bandwidth_rule_flags) {
        out += "warning: " + flag + "\n";
    }
    return out;
}

namespace {

ordered_json method_replication_to_json(const MethodReplication& rep) {
    ordered_json j;
    j["beta"] = vector_to_json(rep.beta);
    j["se"] = vector_to_json(rep.se);
    j["cover"] = rep.cover;
    j["pcd"] = rep.pcd;
    j["value"] = rep.value;
    return j;
}

ordered_json aggregate_to_json(const MethodAggregate& agg) {
    ordered_json j;
    j["mean_value"] = agg.mean_value;
    j["sd_value"] = agg.sd_value;
    j["mean_pcd"] = agg.mean_pcd;
    j["sd_pcd"] = agg.sd_pcd;
    j["bias"] = vector_to_json(agg.bias);
    j["sd"] = vector_to_json(agg.sd);
    j["mean_se"] = vector_to_json(agg.mean_se);
    j["cp"] = vector_to_json(agg.cp);
    return j;
}

} // namespace

std::string to_json(const SimReport& report) {
    ordered_json j;
    j["schema_version"] = 1;
    j["model"] = contrast_model_name(report.config.model);
    j["baseline"] = baseline_model_name(report.config.baseline);
    j["n"] = report.config.n;
    j["N"] = report.config.unlabeled_n;
    j["p"] = report.config.p;
    j["replications"] = report.config.replications;
    j["completed"] = report.completed;
    j["excluded"] = report.excluded;
    j["seed"] = report.config.seed;
    j["kfolds"] = report.config.kfolds;
    j["mc_truth_size"] = report.config.mc_truth_size;
    j["clip_eps"] = report.config.clip_eps;
    if (report.config.bandwidth) {
        j["bandwidth"] = *report.config.bandwidth;
    } else {
        j["bandwidth"] = nullptr; // selected by cross-validation per replication
    }
    j["truth"] = {{"beta_star", vector_to_json(report.beta_star)}, {"v0", report.v0}};
    ordered_json methods;
    methods["tr"] = aggregate_to_json(report.tr);
    methods["ss"] = aggregate_to_json(report.ss);
    if (report.np) methods["np"] = aggregate_to_json(*report.np);
    j["methods"] = methods;
    j["re_ss_vs_tr"] = vector_to_json(report.re);
    j["failures"] = report.failure_messages;
    ordered_json rows = ordered_json::array();
    for (const ReplicationResult& row : report.rows) {
        ordered_json r;
        r["rep"] = row.rep;
        r["ok"] = row.ok;
        if (!row.ok) {
            r["message"] = row.message;
        } else {
            r["bandwidth"] = row.bandwidth;
            r["tr"] = method_replication_to_json(row.tr);
            r["ss"] = method_replication_to_json(row.ss);
            if (row.np) r["np"] = method_replication_to_json(*row.np);
        }
        rows.push_back(std::move(r));
    }
    j["replications_detail"] = rows;
    return j.dump(2) + "\n";
}

namespace {

std::string mean_sd_cell(double mean_v, double sd_v) {
    return format_value(mean_v, "%.4f") + " (" + format_value(sd_v, "%.4f") + ")";
}

void append_method_coef_rows(std::string& out, const std::string& name,
                             const MethodAggregate& agg) {
    char buf[256];
    for (Eigen::Index i = 0; i < agg.bias.size(); ++i) {
        const std::string coef = i == 0 ? "intercept" : "x" + std::to_string(i);
        std::snprintf(buf, sizeof(buf), "%-6s %-10s %10s %10s %10s %10s\n", name.c_str(),
                      coef.c_str(), format_value(agg.bias(i), "%.4f").c_str(),
                      format_value(agg.sd(i), "%.4f").c_str(),
                      format_value(agg.mean_se(i), "%.4f").c_str(),
                      format_value(agg.cp(i), "%.3f").c_str());
        out += buf;
    }
}

} // namespace

std::string to_text(const SimReport& report) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "cell: model=%s baseline=%s  n=%lld N=%lld p=%d  replications=%d "
                  "(completed %d, excluded %d)  seed=%llu\n",
                  contrast_model_name(report.config.model).c_str(),
                  baseline_model_name(report.config.baseline).c_str(),
                  static_cast<long long>(report.config.n),
                  static_cast<long long>(report.config.unlabeled_n), report.config.p,
                  report.config.replications, report.completed, report.excluded,
                  static_cast<unsigned long long>(report.config.seed));
    out += buf;
    out += "truth: V0=" + format_value(report.v0, "%.4f") + "  beta*=(";
    for (Eigen::Index i = 0; i < report.beta_star.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_value(report.beta_star(i), "%.4f");
    }
    out += ")\n\n";

    out += "value and decisions\n";
    std::snprintf(buf, sizeof(buf), "%-6s %-20s %-20s\n", "method", "mean V (SD)",
                  "mean PCD (SD)");
    out += buf;
    const auto value_row = [&](const std::string& name, const MethodAggregate& agg) {
        std::snprintf(buf, sizeof(buf), "%-6s %-20s %-20s\n", name.c_str(),
                      mean_sd_cell(agg.mean_value, agg.sd_value).c_str(),
                      mean_sd_cell(agg.mean_pcd, agg.sd_pcd).c_str());
        out += buf;
    };
    value_row("tr", report.tr);
    value_row("ss", report.ss);
    if (report.np) value_row("np", *report.np);

    out += "\ncoefficients\n";
    std::snprintf(buf, sizeof(buf), "%-6s %-10s %10s %10s %10s %10s\n", "method", "coef", "bias",
                  "SD", "mean SE", "CP");
    out += buf;
    append_method_coef_rows(out, "tr", report.tr);
    append_method_coef_rows(out, "ss", report.ss);
    if (report.np) append_method_coef_rows(out, "np", *report.np);

    out += "\nrelative efficiency of ss vs tr (per coefficient):";
    for (Eigen::Index i = 0; i < report.re.size(); ++i) {
        out += " " + format_value(report.re(i), "%.3f");
    }
    out += "\n";
    if (!report.failure_messages.empty()) {
        out += "\nexcluded replications:\n";
        for (const std::string& m : report.failure_messages) out += "  " + m + "\n";
    }
    return out;
}

} // namespace ssotr
