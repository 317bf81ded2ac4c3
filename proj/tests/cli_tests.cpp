#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "ssotr/dataset.hpp"
#include "ssotr/report.hpp"

using namespace ssotr;
using nlohmann::json;

namespace {

const std::string cli = SSOTR_CLI_PATH;

struct Workspace {
    std::string dir;
    Dataset ds;
    std::string labeled;
    std::string unlabeled;
};

Workspace make_workspace(std::uint64_t seed, int n, int unlabeled_n) {
    Workspace ws{testutil::make_temp_dir(),
                 testutil::linear_dataset(seed, n, unlabeled_n, 2), "", ""};
    ws.labeled = ws.dir + "/labeled.csv";
    ws.unlabeled = ws.dir + "/unlabeled.csv";
    save_csv(ws.ds, ws.labeled, ws.unlabeled);
    return ws;
}

double parse_agreement(const std::string& output) {
    const std::size_t at = output.find("agreement: ");
    REQUIRE(at != std::string::npos);
    return std::strtod(output.c_str() + at + 11, nullptr);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("fit writes a parseable labeled-only report") {
    const Workspace ws = make_workspace(1501, 80, 0);
    const auto res = testutil::run_command(cli + " fit --labeled " + ws.labeled +
                                           " --method tr");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.output);
    CHECK(j.at("method").get<std::string>() == "tr");
    CHECK(j.at("n").get<int>() == 80);
    CHECK(j.at("N").get<int>() == 0);
    CHECK(!j.contains("bandwidth"));

    // --out moves the document into a file and leaves stdout quiet
    const std::string out = ws.dir + "/fit.json";
    const auto res2 = testutil::run_command(cli + " fit --labeled " + ws.labeled +
                                            " --method tr --out " + out);
    REQUIRE(res2.exit_code == 0);
    CHECK(res2.output.empty());
    CHECK(json::parse(testutil::read_text(out)) == j);
}

TEST_CASE("repeated cross-fitted runs emit identical bytes") {
    const Workspace ws = make_workspace(1502, 90, 110);
    const std::string cmd = cli + " fit --labeled " + ws.labeled + " --unlabeled " +
                            ws.unlabeled +
                            " --method ss --bandwidth 0.8 --kfolds 2 --seed 7";
    const auto first = testutil::run_command(cmd);
    const auto second = testutil::run_command(cmd);
    REQUIRE(first.exit_code == 0);
    CHECK(first.output == second.output);
    const json j = json::parse(first.output);
    CHECK(j.at("method").get<std::string>() == "ss");
    CHECK(j.at("bandwidth").get<double>() == 0.8);
    CHECK(j.at("kfolds").get<int>() == 2);
    CHECK(j.contains("theta1"));
}

TEST_CASE("automatic bandwidth selection lands in the report") {
    const Workspace ws = make_workspace(1503, 80, 60);
    const auto res = testutil::run_command(cli + " fit --labeled " + ws.labeled +
                                           " --unlabeled " + ws.unlabeled +
                                           " --method np --kfolds 2 --seed 3");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.output);
    CHECK(j.at("bandwidth").get<double>() > 0.0);
    CHECK(j.at("method").get<std::string>() == "np");
}

TEST_CASE("table output is printed for humans") {
    const Workspace ws = make_workspace(1504, 80, 0);
    const auto res = testutil::run_command(cli + " fit --labeled " + ws.labeled +
                                           " --method tr --format table");
    REQUIRE(res.exit_code == 0);
    CHECK(res.output.find("coefficients (raw covariate scale)") != std::string::npos);
    CHECK(res.output.find("intercept") != std::string::npos);
}

TEST_CASE("decide applies the saved rule to every input row") {
    const Workspace ws = make_workspace(1505, 100, 40);
    const std::string fit_path = ws.dir + "/fit.json";
    REQUIRE(testutil::run_command(cli + " fit --labeled " + ws.labeled +
                                  " --method tr --out " + fit_path)
                .exit_code == 0);
    const std::string dec_path = ws.dir + "/decisions.csv";
    const auto res = testutil::run_command(cli + " decide --fit " + fit_path +
                                           " --input " + ws.unlabeled + " --out " +
                                           dec_path);
    REQUIRE(res.exit_code == 0);

    const FitReport report = fit_report_from_json(testutil::read_text(fit_path));
    const DecisionRule rule = report.rule();
    std::istringstream lines(testutil::read_text(dec_path));
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "x1,x2,decision");
    int rows = 0;
    while (std::getline(lines, line)) {
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.find(',', c1 + 1);
        REQUIRE(c2 != std::string::npos);
        const Eigen::Vector2d x(std::strtod(line.c_str(), nullptr),
                                std::strtod(line.c_str() + c1 + 1, nullptr));
        const int decision = std::atoi(line.c_str() + c2 + 1);
        CHECK((x - ws.ds.unlabeled_x().col(rows)).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(decision == rule.decide(x));
        ++rows;
    }
    CHECK(rows == 40);
}

TEST_CASE("a rule always agrees with itself") {
    const Workspace ws = make_workspace(1506, 80, 30);
    const std::string fit_path = ws.dir + "/fit.json";
    REQUIRE(testutil::run_command(cli + " fit --labeled " + ws.labeled +
                                  " --method tr --out " + fit_path)
                .exit_code == 0);
    const auto res = testutil::run_command(
        cli + " decide --fit " + fit_path + " --fit2 " + fit_path + " --input " +
        ws.unlabeled + " --out " + ws.dir + "/d.csv");
    REQUIRE(res.exit_code == 0);
    CHECK(res.output.find("decision cross-tabulation (rows: tr, cols: tr)") !=
          std::string::npos);
    CHECK(res.output.find("row=1") != std::string::npos);
    CHECK(parse_agreement(res.output) == 1.0);
}

TEST_CASE("independently fitted rules mostly agree on fresh covariates") {
    const Workspace ws = make_workspace(1507, 300, 400);
    const std::string tr_path = ws.dir + "/tr.json";
    const std::string ss_path = ws.dir + "/ss.json";
    REQUIRE(testutil::run_command(cli + " fit --labeled " + ws.labeled +
                                  " --method tr --out " + tr_path)
                .exit_code == 0);
    REQUIRE(testutil::run_command(cli + " fit --labeled " + ws.labeled +
                                  " --unlabeled " + ws.unlabeled +
                                  " --method ss --bandwidth 0.8 --kfolds 2 --seed 5"
                                  " --out " + ss_path)
                .exit_code == 0);
    const auto res = testutil::run_command(
        cli + " decide --fit " + tr_path + " --fit2 " + ss_path + " --input " +
        ws.unlabeled + " --out " + ws.dir + "/d.csv");
    REQUIRE(res.exit_code == 0);
    CHECK(res.output.find("cols: ss") != std::string::npos);
    CHECK(parse_agreement(res.output) > 0.85);
}

TEST_CASE("simulate emits the same study either to stdout or to disk") {
    const std::string dir = testutil::make_temp_dir();
    const std::string out = dir + "/study.json";
    const auto res = testutil::run_command(
        cli + " simulate --model linear --baseline b1 --n 60 --unlabeled-n 70 --p 2"
              " --reps 2 --mc-truth-size 600 --bandwidth 0.8 --kfolds 2 --seed 5"
              " --threads 1 --format json --out " + out);
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.output);
    CHECK(j.at("replications_detail").size() == 2);
    CHECK(testutil::read_text(out) == res.output);

    const auto table = testutil::run_command(
        cli + " simulate --model linear --baseline b1 --n 60 --unlabeled-n 70 --p 2"
              " --reps 2 --mc-truth-size 600 --bandwidth 0.8 --kfolds 2 --seed 5"
              " --threads 1");
    REQUIRE(table.exit_code == 0);
    CHECK(table.output.find("mean V (SD)") != std::string::npos);
}

TEST_CASE("writing to a special file streams through instead of renaming") {
    namespace fs = std::filesystem;
    if (!fs::is_character_file("/dev/null")) return; // exotic environment
    const Workspace ws = make_workspace(1512, 60, 0);
    const auto res = testutil::run_command(cli + " fit --labeled " + ws.labeled +
                                           " --method tr --out /dev/null");
    REQUIRE(res.exit_code == 0);
    CHECK(res.output.empty());
    // the device must survive as a device, not become a regular file
    CHECK(fs::is_character_file("/dev/null"));
    CHECK(!fs::exists("/dev/null.tmp"));
}

TEST_CASE("usage errors exit with status 2 and a pointed message") {
    const Workspace ws = make_workspace(1508, 60, 30);
    const std::string fit_base = cli + " fit --labeled " + ws.labeled;
    const struct {
        std::string cmd;
        std::string expect;
    } cases[] = {
        {cli + " fit --method tr", "--labeled"},
        {fit_base + " --method bogus", "valid methods"},
        {fit_base + " --method ss", "requires unlabeled data"},
        {fit_base + " --method np --unlabeled " + ws.unlabeled + " --bandwidth -1",
         "--bandwidth must be"},
        {fit_base + " --method ss --unlabeled " + ws.unlabeled + " --kfolds 1",
         "--kfolds must be at least 2"},
        {fit_base + " --method tr --propensity-cols 0", "out of range"},
        {fit_base + " --method tr --propensity-cols 1,1", "duplicate"},
        {fit_base + " --method tr --clip-eps 0.6", "clip"},
        {fit_base + " --method tr --format yaml", "--format must be"},
        {fit_base + " --method tr --out /nonexistent-dir-zz/x.json", "cannot"},
        {cli + " fit --labeled " + ws.dir + "/missing.csv --method tr", "cannot open"},
        {cli + " simulate --model quartic --n 60 --unlabeled-n 70 --reps 1"
               " --mc-truth-size 600",
         "valid models"},
        {cli + " decide --fit " + ws.dir + "/missing.json --input " + ws.unlabeled,
         "cannot open"},
    };
    for (const auto& c : cases) {
        CAPTURE(c.cmd);
        const auto res = testutil::run_command(c.cmd);
        CHECK(res.exit_code == 2);
        CHECK(res.output.find(c.expect) != std::string::npos);
    }

    // a malformed report document is also a usage error
    const std::string bogus = ws.dir + "/bogus.json";
    testutil::write_text(bogus, "{ this is not json");
    const auto res = testutil::run_command(cli + " decide --fit " + bogus +
                                           " --input " + ws.unlabeled);
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("not valid JSON") != std::string::npos);

    // covariate dimension disagreement between report and input
    const std::string fit_path = ws.dir + "/fit.json";
    REQUIRE(testutil::run_command(fit_base + " --method tr --out " + fit_path)
                .exit_code == 0);
    const std::string wide = ws.dir + "/wide.csv";
    testutil::write_text(wide, "x1,x2,x3\n0.1,0.2,0.3\n");
    const auto mismatch = testutil::run_command(cli + " decide --fit " + fit_path +
                                                " --input " + wide);
    CHECK(mismatch.exit_code == 2);
    CHECK(mismatch.output.find("dimension mismatch") != std::string::npos);
}

TEST_CASE("degenerate numerical problems exit with status 3") {
    const std::string dir = testutil::make_temp_dir();
    const std::string path = dir + "/collinear.csv";
    std::string csv = "x1,x2,a,y\n";
    for (int i = 0; i < 12; ++i) {
        const double x = 0.3 * (i - 5);
        csv += std::to_string(x) + "," + std::to_string(2.0 * x) + "," +
               std::to_string(i % 2) + "," + std::to_string(0.1 * i) + "\n";
    }
    testutil::write_text(path, csv);
    const auto res = testutil::run_command(cli + " fit --labeled " + path +
                                           " --method tr");
    CHECK(res.exit_code == 3);
    CHECK(res.output.find("error:") != std::string::npos);
}

TEST_CASE("help is help, not an error") {
    CHECK(testutil::run_command(cli + " --help").exit_code == 0);
    const auto res = testutil::run_command(cli + " fit --help");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("--labeled") != std::string::npos);
    CHECK(testutil::run_command(cli).exit_code != 0);
}

} // TEST_SUITE("cli")
