// Exercises the installed CLI binary end to end through std::system.

#include "sepclust/experiment.hpp"
#include "sepclust/io.hpp"
#include "sepclust/matrix.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace sepclust;

namespace {

const std::string kCli = SEPCLUST_CLI_PATH;

std::filesystem::path temp_dir(const char* tag) {
    auto dir = std::filesystem::temp_directory_path() / "sepclust_cli" / tag;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::filesystem::path write_config(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
    auto path = dir / "config.json";
    io::write_text(path, cfg.to_json().dump(2) + "\n");
    return path;
}

ExperimentConfig small_gaussian() {
    ExperimentConfig cfg;
    cfg.generator.kind = "gaussian";
    cfg.generator.k = 2;
    cfg.generator.d = 6;
    cfg.generator.n = 80;
    cfg.generator.target_c = 25.0;
    cfg.master_seed = 11;
    return cfg;
}

} // namespace

TEST_CASE("generate writes three files; same seed twice is byte-identical") {
    auto dir = temp_dir("generate");
    auto config = write_config(dir, small_gaussian());
    REQUIRE(run("generate --config " + config.string() + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run("generate --config " + config.string() + " --out " + (dir / "b").string()) == 0);
    for (const char* name : {"dataset.csv", "labels.json", "certificate.json"}) {
        CAPTURE(name);
        CHECK(io::read_text(dir / "a" / name) == io::read_text(dir / "b" / name));
    }
}

TEST_CASE("cluster subcommand recovers a zero-variance instance and writes result JSON") {
    auto dir = temp_dir("cluster");
    Matrix a(8, 2);
    for (std::size_t i = 4; i < 8; ++i) a(i, 0) = 9.0;
    io::write_matrix_csv(dir / "data.csv", a);
    REQUIRE(run("cluster --data " + (dir / "data.csv").string() + " --k 2 --out " +
                dir.string()) == 0);
    auto j = nlohmann::json::parse(io::read_text(dir / "result.json"));
    auto labels = j.at("final_labels").get<std::vector<int>>();
    REQUIRE(labels.size() == 8);
    for (std::size_t i = 1; i < 4; ++i) CHECK(labels[i] == labels[0]);
    for (std::size_t i = 5; i < 8; ++i) CHECK(labels[i] == labels[4]);
    CHECK(labels[0] != labels[4]);
}

TEST_CASE("cluster exits 2 on a missing file and on k > n") {
    auto dir = temp_dir("cluster_err");
    CHECK(run("cluster --data " + (dir / "absent.csv").string() + " --k 2") == 2);
    Matrix a(3, 2, 1.0);
    io::write_matrix_csv(dir / "tiny.csv", a);
    CHECK(run("cluster --data " + (dir / "tiny.csv").string() + " --k 5 --out " + dir.string()) ==
          2);
}

TEST_CASE("verify exits 0 on a clean instance and 1 on a corrupted certificate") {
    auto dir = temp_dir("verify");
    auto config = write_config(dir, small_gaussian());
    REQUIRE(run("generate --config " + config.string() + " --out " + dir.string()) == 0);

    std::string base = "verify --data " + (dir / "dataset.csv").string() + " --labels " +
                       (dir / "labels.json").string();
    CHECK(run(base + " --suite projection,drift,consistency --cert " +
              (dir / "certificate.json").string() + " --out " + (dir / "ok").string()) == 0);

    // corrupt the stored deviation scale
    auto cert = nlohmann::json::parse(io::read_text(dir / "certificate.json"));
    cert["stats"]["delta"][0] = cert["stats"]["delta"][0].get<double>() * 3.0 + 1.0;
    io::write_text(dir / "certificate_bad.json", cert.dump(2) + "\n");
    CHECK(run(base + " --suite consistency --cert " + (dir / "certificate_bad.json").string() +
              " --out " + (dir / "bad").string()) == 1);

    // failure is visible in the JSONL report
    std::string jsonl = io::read_text(dir / "bad" / "checks.jsonl");
    CHECK(jsonl.find("\"holds\":false") != std::string::npos);
}

TEST_CASE("verify rejects an empty or unknown suite selection") {
    auto dir = temp_dir("verify_usage");
    auto config = write_config(dir, small_gaussian());
    REQUIRE(run("generate --config " + config.string() + " --out " + dir.string()) == 0);
    std::string base = "verify --data " + (dir / "dataset.csv").string() + " --labels " +
                       (dir / "labels.json").string();
    CHECK(run(base + " --suite \"\"") == 2);
    CHECK(run(base + " --suite nonsense") == 2);
}

TEST_CASE("sweep: 1x1 grid yields one row; same master seed is byte-identical") {
    auto dir = temp_dir("sweep");
    ExperimentConfig cfg = small_gaussian();
    cfg.sweep.c_grid = {20.0};
    cfg.sweep.k_grid = {2};
    cfg.sweep.gamma_grid = {1.0};
    cfg.sweep.trials = 1;
    cfg.suites = {"projection", "drift"};
    auto config = write_config(dir, cfg);

    REQUIRE(run("sweep --config " + config.string() + " --out " + (dir / "s1").string()) == 0);
    REQUIRE(run("sweep --config " + config.string() + " --out " + (dir / "s2").string()) == 0);
    std::string csv1 = io::read_text(dir / "s1" / "sweep.csv");
    CHECK(csv1 == io::read_text(dir / "s2" / "sweep.csv"));

    // header comment + column header + exactly one data row
    int lines = 0;
    for (char ch : csv1)
        if (ch == '\n') lines++;
    CHECK(lines == 3);
}

TEST_CASE("SEPCLUST_OUT overrides the output directory") {
    auto dir = temp_dir("envout");
    auto config = write_config(dir, small_gaussian());
    std::string cmd = "SEPCLUST_OUT=" + (dir / "env").string() + " " + kCli + " generate --config " +
                      config.string() + " --out " + (dir / "flag").string() + " >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(std::filesystem::exists(dir / "env" / "dataset.csv"));
    CHECK(!std::filesystem::exists(dir / "flag" / "dataset.csv"));
}

TEST_CASE("sweep misclassification trends down as separation grows") {
    // library-level sweep (same code path as the CLI)
    ExperimentConfig cfg = small_gaussian();
    cfg.generator.n = 240;
    cfg.generator.d = 10;
    cfg.sweep.c_grid = {20.0, 50.0, 100.0, 200.0};
    cfg.sweep.k_grid = {2};
    cfg.sweep.gamma_grid = {1.0};
    cfg.sweep.trials = 3;
    cfg.suites = {};
    auto dir = temp_dir("trend");
    auto csv_path = run_sweep(cfg, dir);

    // parse mean misclassification per c in grid order
    std::string csv = io::read_text(csv_path);
    std::vector<double> means;
    for (double c : cfg.sweep.c_grid) {
        double sum = 0.0;
        int count = 0;
        std::istringstream in(csv);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.starts_with("c_target")) continue;
            std::istringstream row(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(row, cell, ',')) cells.push_back(cell);
            if (std::stod(cells[0]) == c) {
                sum += std::stod(cells[6]);
                count++;
            }
        }
        means.push_back(sum / count);
    }
    int violations = 0;
    for (std::size_t i = 1; i < means.size(); ++i)
        if (means[i] > means[i - 1] + 1e-12) violations++;
    CHECK(violations <= 1); // monotone trend with one-violation slack
}
