#include "ssotr/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <utility>

#include "ssotr/errors.hpp"

namespace ssotr {

Standardization Standardization::identity(int p) {
    return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(p)};
}

bool Standardization::is_identity() const {
    return mean.isZero(0.0) && sd.isOnes();
}

Eigen::VectorXd Standardization::apply(const Eigen::VectorXd& raw) const {
    return (raw - mean).cwiseQuotient(sd);
}

Eigen::VectorXd Standardization::invert(const Eigen::VectorXd& standardized) const {
    return standardized.cwiseProduct(sd) + mean;
}

Standardization Standardization::then(const Standardization& next) const {
    // (x - m1)/s1 then subtract m2, divide s2  ==  (x - (m1 + s1 m2)) / (s1 s2)
    return {mean + sd.cwiseProduct(next.mean), sd.cwiseProduct(next.sd)};
}

Dataset::Dataset(Eigen::MatrixXd labeled_x, Eigen::VectorXi treatment,
                 Eigen::VectorXd outcome, Eigen::MatrixXd unlabeled_x,
                 Standardization standardization)
    : labeled_x_(std::move(labeled_x)),
      treatment_(std::move(treatment)),
      outcome_(std::move(outcome)),
      unlabeled_x_(std::move(unlabeled_x)),
      standardization_(std::move(standardization)) {
    validate();
}

Dataset::Dataset(Eigen::MatrixXd labeled_x, Eigen::VectorXi treatment,
                 Eigen::VectorXd outcome, Eigen::MatrixXd unlabeled_x)
    : labeled_x_(std::move(labeled_x)),
      treatment_(std::move(treatment)),
      outcome_(std::move(outcome)),
      unlabeled_x_(std::move(unlabeled_x)),
      standardization_(Standardization::identity(static_cast<int>(labeled_x_.rows()))) {
    validate();
}

void Dataset::validate() const {
    const int p_dim = p();
    const int n_lab = n();
    if (n_lab == 0) throw InputError("labeled data is empty");
    if (treatment_.size() != n_lab || outcome_.size() != n_lab) {
        throw InputError("treatment/outcome length differs from labeled sample size");
    }
    if (unlabeled_x_.size() > 0 && unlabeled_x_.rows() != p_dim) {
        throw InputError("dimension mismatch: labeled data has " +
                         std::to_string(p_dim) + " covariates, unlabeled has " +
                         std::to_string(unlabeled_x_.rows()));
    }
    if (n_lab < p_dim + 2) {
        throw InputError("labeled sample too small: need n >= p+2 = " +
                         std::to_string(p_dim + 2) + ", got n = " +
                         std::to_string(n_lab));
    }
    if (!labeled_x_.allFinite() || !outcome_.allFinite() ||
        (unlabeled_x_.size() > 0 && !unlabeled_x_.allFinite())) {
        throw InputError("non-finite value in covariates or outcomes");
    }
    if (standardization_.p() != p_dim) {
        throw InputError("standardization metadata dimension mismatch");
    }
    int treated = 0;
    for (int i = 0; i < n_lab; ++i) {
        if (treatment_(i) != 0 && treatment_(i) != 1) {
            throw InputError("treatment must be binary (0 or 1)");
        }
        treated += treatment_(i);
    }
    if (treated == 0 || treated == n_lab) {
        throw InputError("both treatment arms must be present in the labeled data");
    }
}

Dataset Dataset::from_observations(const std::vector<Observation>& observations) {
    int n_lab = 0, n_unlab = 0;
    int p_dim = observations.empty() ? 0 : static_cast<int>(observations.front().x.size());
    for (const auto& obs : observations) {
        if (obs.a.has_value() != obs.y.has_value()) {
            throw InputError("treatment and outcome must be both present or both absent");
        }
        if (obs.x.size() != p_dim) {
            throw InputError("observations disagree on covariate dimension");
        }
        obs.labeled() ? ++n_lab : ++n_unlab;
    }
    Eigen::MatrixXd lx(p_dim, n_lab), ux(p_dim, n_unlab);
    Eigen::VectorXi a(n_lab);
    Eigen::VectorXd y(n_lab);
    int il = 0, iu = 0;
    for (const auto& obs : observations) {
        if (obs.labeled()) {
            lx.col(il) = obs.x;
            a(il) = *obs.a;
            y(il) = *obs.y;
            ++il;
        } else {
            ux.col(iu++) = obs.x;
        }
    }
    return Dataset(std::move(lx), std::move(a), std::move(y), std::move(ux));
}

Eigen::MatrixXd Dataset::labeled_design() const { return augment_design(labeled_x_); }

Eigen::MatrixXd Dataset::unlabeled_design() const { return augment_design(unlabeled_x_); }

Eigen::MatrixXd Dataset::pooled_x() const {
    Eigen::MatrixXd pooled(p(), n() + unlabeled_count());
    pooled.leftCols(n()) = labeled_x_;
    if (unlabeled_count() > 0) pooled.rightCols(unlabeled_count()) = unlabeled_x_;
    return pooled;
}

int Dataset::arm_count(int arm) const {
    int count = 0;
    for (int i = 0; i < n(); ++i) count += treatment_(i) == arm;
    return count;
}

Eigen::VectorXd augment(const Eigen::VectorXd& x) {
    Eigen::VectorXd out(x.size() + 1);
    out(0) = 1.0;
    out.tail(x.size()) = x;
    return out;
}

Eigen::MatrixXd augment_design(const Eigen::MatrixXd& x_columns) {
    Eigen::MatrixXd design(x_columns.cols(), x_columns.rows() + 1);
    design.col(0).setOnes();
    design.rightCols(x_columns.rows()) = x_columns.transpose();
    return design;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& raw, const std::string& path, std::size_t row,
                  std::size_t col) {
    const std::string cell = trim(raw);
    if (cell.empty()) {
        throw InputError(path + ": missing cell at row " + std::to_string(row) +
                         ", column " + std::to_string(col + 1));
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw InputError(path + ": non-numeric cell '" + cell + "' at row " +
                         std::to_string(row) + ", column " + std::to_string(col + 1));
    }
    return value;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw InputError("cannot open file: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(file, line)) throw InputError(path + ": file is empty");
    for (auto& name : split_csv_line(line)) table.header.push_back(trim(name));
    std::size_t row_number = 1;
    while (std::getline(file, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != table.header.size()) {
            throw InputError(path + ": row " + std::to_string(row_number) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(table.header.size()));
        }
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            values[c] = parse_cell(cells[c], path, row_number, c);
        }
        table.rows.push_back(std::move(values));
    }
    return table;
}

void expect_covariate_header(const std::vector<std::string>& header, std::size_t count,
                             const std::string& path) {
    for (std::size_t j = 0; j < count; ++j) {
        const std::string expected = "x" + std::to_string(j + 1);
        if (header[j] != expected) {
            throw InputError(path + ": expected header column '" + expected +
                             "', found '" + header[j] + "'");
        }
    }
}

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    (void)ec;
    return std::string(buffer, ptr);
}

} // namespace

Dataset load_csv(const std::string& labeled_path,
                 const std::optional<std::string>& unlabeled_path) {
    CsvTable labeled = read_csv(labeled_path);
    if (labeled.header.size() < 3) {
        throw InputError(labeled_path + ": labeled header must be x1,...,xp,a,y");
    }
    const int p = static_cast<int>(labeled.header.size()) - 2;
    expect_covariate_header(labeled.header, p, labeled_path);
    if (labeled.header[p] != "a" || labeled.header[p + 1] != "y") {
        throw InputError(labeled_path + ": last two header columns must be a,y");
    }
    if (labeled.rows.empty()) throw InputError(labeled_path + ": labeled file has no data rows");

    const int n = static_cast<int>(labeled.rows.size());
    Eigen::MatrixXd lx(p, n);
    Eigen::VectorXi a(n);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) lx(j, i) = labeled.rows[i][j];
        const double a_raw = labeled.rows[i][p];
        if (a_raw != 0.0 && a_raw != 1.0) {
            throw InputError(labeled_path + ": treatment must be binary (0 or 1), row " +
                             std::to_string(i + 2) + " has a = " + format_double(a_raw));
        }
        a(i) = static_cast<int>(a_raw);
        y(i) = labeled.rows[i][p + 1];
    }

    Eigen::MatrixXd ux(p, 0);
    if (unlabeled_path) {
        CsvTable unlabeled = read_csv(*unlabeled_path);
        if (static_cast<int>(unlabeled.header.size()) != p) {
            throw InputError("dimension mismatch: " + labeled_path + " has p = " +
                             std::to_string(p) + " covariates but " + *unlabeled_path +
                             " has " + std::to_string(unlabeled.header.size()) +
                             " columns");
        }
        expect_covariate_header(unlabeled.header, p, *unlabeled_path);
        ux.resize(p, static_cast<int>(unlabeled.rows.size()));
        for (std::size_t i = 0; i < unlabeled.rows.size(); ++i) {
            for (int j = 0; j < p; ++j) ux(j, static_cast<int>(i)) = unlabeled.rows[i][j];
        }
    }
    return Dataset(std::move(lx), std::move(a), std::move(y), std::move(ux));
}

void save_csv(const Dataset& ds, const std::string& labeled_path,
              const std::optional<std::string>& unlabeled_path) {
    std::ofstream labeled(labeled_path);
    if (!labeled) throw InputError("cannot write file: " + labeled_path);
    for (int j = 1; j <= ds.p(); ++j) labeled << "x" << j << ",";
    labeled << "a,y\n";
    for (int i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.p(); ++j) labeled << format_double(ds.labeled_x()(j, i)) << ",";
        labeled << ds.treatment()(i) << "," << format_double(ds.outcome()(i)) << "\n";
    }
    if (!unlabeled_path) return;
    std::ofstream unlabeled(*unlabeled_path);
    if (!unlabeled) throw InputError("cannot write file: " + *unlabeled_path);
    for (int j = 1; j <= ds.p(); ++j) unlabeled << "x" << j << (j == ds.p() ? "\n" : ",");
    for (int i = 0; i < ds.unlabeled_count(); ++i) {
        for (int j = 0; j < ds.p(); ++j) {
            unlabeled << format_double(ds.unlabeled_x()(j, i)) << (j == ds.p() - 1 ? "\n" : ",");
        }
    }
}

Eigen::MatrixXd load_covariate_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    const int p = static_cast<int>(table.header.size());
    expect_covariate_header(table.header, p, path);
    Eigen::MatrixXd x(p, static_cast<int>(table.rows.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (int j = 0; j < p; ++j) x(j, static_cast<int>(i)) = table.rows[i][j];
    }
    return x;
}

Dataset standardize(const Dataset& ds) {
    const Eigen::MatrixXd pooled = ds.pooled_x();
    const double count = static_cast<double>(pooled.cols());
    Eigen::VectorXd mean = pooled.rowwise().mean();
    Eigen::VectorXd sd(ds.p());
    for (int j = 0; j < ds.p(); ++j) {
        // population convention: divide by the pooled count
        sd(j) = std::sqrt((pooled.row(j).array() - mean(j)).square().sum() / count);
        if (sd(j) <= 0.0) {
            throw InputError("covariate x" + std::to_string(j + 1) +
                             " has zero variance; cannot standardize");
        }
    }
    Standardization step{mean, sd};
    Eigen::MatrixXd lx = (ds.labeled_x().colwise() - mean).array().colwise() / sd.array();
    Eigen::MatrixXd ux = ds.unlabeled_x();
    if (ux.cols() > 0) ux = (ux.colwise() - mean).array().colwise() / sd.array();
    return Dataset(std::move(lx), ds.treatment(), ds.outcome(), std::move(ux),
                   ds.standardization().then(step));
}

} // namespace ssotr
