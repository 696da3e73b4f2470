#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

// Spawns the real binary; covers the documented exit-code contract.

namespace fs = std::filesystem;

namespace {

struct CliRunner {
    fs::path dir;

    CliRunner() {
        dir = fs::temp_directory_path() / "knowprobe_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~CliRunner() { fs::remove_all(dir); }

    int run(const std::string& args) const {
        std::string cmd = std::string(KNOWPROBE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
        int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    }

    std::string path(const std::string& name) const { return (dir / name).string(); }
};

} // namespace

TEST_CASE("cli: full workflow succeeds and reports are well-formed") {
    CliRunner cli;
    CHECK(cli.run("fixture --seed 0 --out " + cli.path("fixture.jsonl")) == 0);
    CHECK(cli.run("calibrate --dataset " + cli.path("fixture.jsonl") +
                  " --split validation --out-dir " + cli.path("cal")) == 0);

    // calibration report carries a KS statistic in (0, 1]
    std::ifstream in(cli.path("cal") + "/calibration.json");
    REQUIRE(bool(in));
    nlohmann::json report;
    in >> report;
    double ks = report["ks_statistic"].get<double>();
    CHECK(ks > 0.0);
    CHECK(ks <= 1.0);
    CHECK(report["config"]["probe"]["seeds"].size() == 10);

    CHECK(cli.run("classify --dataset " + cli.path("fixture.jsonl") +
                  " --split test --thresholds " + cli.path("cal") + "/thresholds.json --out " +
                  cli.path("outcomes.jsonl")) == 0);
    CHECK(cli.run("evaluate --outcomes " + cli.path("outcomes.jsonl") + " --out-dir " +
                  cli.path("eval")) == 0);

    // column percentages sum to 100 +- 0.01 at the CLI surface
    std::ifstream ein(cli.path("eval") + "/evaluation.json");
    REQUIRE(bool(ein));
    nlohmann::json eval;
    ein >> eval;
    for (const char* actual : {"aligned", "misaligned", "fabricated"}) {
        double sum = 0.0;
        for (const char* pred : {"aligned", "misaligned", "fabricated"}) {
            sum += eval["confusion_percentages"][pred][actual].get<double>();
        }
        CHECK(sum == doctest::Approx(100.0).epsilon(1e-4));
    }

    CHECK(cli.run("report --in " + cli.path("eval") + "/evaluation.json --format csv") == 0);
    CHECK(cli.run("report --in " + cli.path("cal") + "/calibration.json --format json") == 0);
}

TEST_CASE("cli: usage errors exit with code 2") {
    CliRunner cli;
    CHECK(cli.run("fixture --seed 0 --out " + cli.path("fx.jsonl")) == 0);
    // classify without calibrated thresholds
    CHECK(cli.run("classify --dataset " + cli.path("fx.jsonl") + " --split test") == 2);
    // unknown flag
    CHECK(cli.run("fixture --frobnicate") == 2);
    // missing input file
    CHECK(cli.run("calibrate --dataset " + cli.path("absent.jsonl") + " --out-dir " +
                  cli.path("cal")) == 2);
    // no subcommand
    CHECK(cli.run("") == 2);
}
