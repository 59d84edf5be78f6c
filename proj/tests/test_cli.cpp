#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef TSH_CLI_PATH
#error "TSH_CLI_PATH must point at the built tsh binary"
#endif

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(TSH_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof(buf), pipe))
        result.output.append(buf, n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "tsh_cli_tests";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("run writes a deterministic CSV curve plus envelope") {
    const fs::path dir = temp_dir();
    const fs::path csv = dir / "curve.csv";
    const std::string flags = "run --mu 0.9,0.5 --h 1.0 --horizon 1000 --runs 30 "
                              "--seed 42 --out " + csv.string();
    CHECK(run_cli(flags).exit_code == 0);
    const std::string first = slurp(csv);
    CHECK(first.rfind("t,mean_regret,stderr,runs\n", 0) == 0);

    CHECK(run_cli(flags).exit_code == 0);
    CHECK(slurp(csv) == first); // byte-identical rerun

    const nlohmann::json envelope =
        nlohmann::json::parse(slurp(dir / "curve.json"));
    CHECK(envelope["schema_version"] == "1");
    CHECK(envelope["command"] == "run");
    CHECK(envelope["config"]["seed"] == 42);
    CHECK(envelope["config"]["mu"].size() == 2);
    CHECK(envelope["config"]["checkpoint_list"].back() == 1000);
    CHECK(envelope.contains("wall_time_seconds"));
}

TEST_CASE("run on a zero-gap instance reports all-zero regret") {
    const fs::path csv = temp_dir() / "zero.csv";
    CHECK(run_cli("run --mu 0.5,0.5 --h 1 --horizon 500 --runs 5 --seed 1 --out " +
                  csv.string())
              .exit_code == 0);
    std::istringstream lines(slurp(csv));
    std::string line;
    std::getline(lines, line); // header
    while (std::getline(lines, line)) {
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.find(',', c1 + 1);
        CHECK(line.substr(c1 + 1, c2 - c1 - 1) == "0");
    }
}

TEST_CASE("run exit codes distinguish usage and validation errors") {
    const fs::path csv = temp_dir() / "x.csv";
    CHECK(run_cli("run --h 1 --out " + csv.string()).exit_code == 2); // no --mu
    CHECK(run_cli("run --mu 0.9,1.5 --out " + csv.string()).exit_code == 1);
    CHECK(run_cli("run --mu 0.9,0.5 --h -2 --out " + csv.string()).exit_code == 1);
    CHECK(run_cli("norcommand").exit_code == 2);
}

TEST_CASE("thresholds prints the report as JSON") {
    const CliResult res = run_cli("thresholds --mu1 0.9 --mu2 0.5 --h 1");
    CHECK(res.exit_code == 0);
    const nlohmann::json out = nlohmann::json::parse(res.output);
    CHECK(out["report"]["y"] == doctest::Approx(0.7));
    CHECK(out["report"]["delta"] == doctest::Approx(0.4));
    CHECK(out["report"]["h_range"][0] == 0.5);
    CHECK(out["report"]["h_range"][1] ==
          doctest::Approx(1.2515510994616774).epsilon(1e-12));
    CHECK(out["report"]["regime"] == "Logarithmic");

    const CliResult with_n =
        run_cli("thresholds --mu1 0.9 --mu2 0.5 --horizon 10000");
    CHECK(nlohmann::json::parse(with_n.output)["report"]["N"] == 922);

    CHECK(run_cli("thresholds --mu1 0.5 --mu2 0.9").exit_code == 1);
    CHECK(run_cli("thresholds --mu2 0.9").exit_code == 2);
}

TEST_CASE("verify runs suites and rejects unknown names") {
    const CliResult fact2 = run_cli("verify --suite fact2");
    CHECK(fact2.exit_code == 0);
    CHECK(fact2.output.find("violations=0") != std::string::npos);
    CHECK(run_cli("verify --suite exceedance").exit_code == 0);
    CHECK(run_cli("verify --suite nonsense").exit_code == 2);

    const fs::path report = temp_dir() / "fact2.json";
    CHECK(run_cli("verify --suite fact2 --out " + report.string()).exit_code == 0);
    const nlohmann::json parsed = nlohmann::json::parse(slurp(report));
    CHECK(parsed["suites"][0]["suite"] == "fact2");
    CHECK(parsed["suites"][0]["violations"] == 0);
    CHECK(parsed["suites"][0]["checks"].size() ==
          parsed["suites"][0]["points_checked"].get<std::size_t>());
}

TEST_CASE("sweep emits summary, long-format, and per-h curves") {
    const fs::path dir = temp_dir();
    const fs::path summary = dir / "sweep.csv";
    const CliResult res = run_cli(
        "sweep --mu 0.9,0.5 --h-grid 0.25:1.0:0.75 --horizon 400 --runs 10 "
        "--seed 3 --out " + summary.string() + " --gnuplot");
    CHECK(res.exit_code == 0);

    const std::string text = slurp(summary);
    CHECK(text.rfind("h,final_regret_mean,stderr,log_slope,power_exponent,"
                     "predicted_regime\n", 0) == 0);
    CHECK(text.find("PolynomialSmallH") != std::string::npos);
    CHECK(text.find("Logarithmic") != std::string::npos);

    CHECK(slurp(dir / "sweep_long.csv").rfind("h,t,mean_regret,stderr\n", 0) == 0);
    CHECK(fs::exists(dir / "sweep_h0p25.csv"));
    CHECK(fs::exists(dir / "sweep_h1.csv"));
    CHECK(fs::exists(dir / "sweep.gp"));
    CHECK(fs::exists(dir / "sweep.json"));

    // singleton grid produces exactly one data row
    const fs::path single = dir / "single.csv";
    CHECK(run_cli("sweep --mu 0.9,0.5 --h-grid 1.0:1.0:1.0 --horizon 200 "
                  "--runs 4 --seed 3 --out " + single.string())
              .exit_code == 0);
    const std::string single_text = slurp(single);
    CHECK(std::count(single_text.begin(), single_text.end(), '\n') == 2);

    CHECK(run_cli("sweep --mu 0.9,0.5 --horizon 200 --runs 4 --out " +
                  single.string())
              .exit_code == 2); // missing --h-grid
    CHECK(run_cli("sweep --mu 0.9,0.5 --h-grid 1.0:0.5:-1 --horizon 200 "
                  "--runs 4 --out " + single.string())
              .exit_code == 1); // empty grid
}
