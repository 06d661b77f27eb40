#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "commands.hpp"
#include "pkml/errors.hpp"

using namespace pkml;
using namespace pkml::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("pkml_test_commands_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(const std::string& command, const RunConfig& config) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_command(command, config, out, err);
    return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
    const std::string line = std::string(PKML_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(line.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("integer lists and grids") {
    CHECK(parse_int_list("30, 60,100") == std::vector<std::int64_t>{30, 60, 100});
    CHECK(parse_int_list("-2") == std::vector<std::int64_t>{-2});
    CHECK_THROWS_AS(parse_int_list("3,x"), ParameterError);
    CHECK(geometric_grid(1000, 1'000'000, 4) == std::vector<std::uint64_t>{1000, 10'000, 100'000, 1'000'000});
    CHECK_THROWS_AS(geometric_grid(0, 10, 3), ParameterError);
    CHECK_THROWS_AS(geometric_grid(10, 12, 5), ParameterError);
}

TEST_CASE("config JSON") {
    RunConfig config;
    apply_config_json(config, nlohmann::json::parse(
                                  R"({"n": 5000, "h": [30, 60], "k": "2,4", "tuple": [0, 2],
                                      "pmax": 1000, "threads": 3, "cache_dir": "/tmp/x"})"));
    CHECK(config.n == 5000);
    CHECK(config.h == std::vector<std::uint64_t>{30, 60});
    CHECK(config.k == std::vector<unsigned>{2, 4});
    CHECK(config.tuple == std::vector<std::int64_t>{0, 2});
    CHECK(config.pmax == 1000);
    CHECK(config.threads == 3);
    CHECK(config.cache_dir == fs::path("/tmp/x"));
    CHECK_THROWS_AS(apply_config_json(config, nlohmann::json::parse(R"({"bogus": 1})")), ParameterError);
    CHECK_THROWS_AS(apply_config_json(config, nlohmann::json::parse(R"({"n": -4})")), ParameterError);
    CHECK_THROWS_AS(apply_config_json(config, nlohmann::json::parse(R"({"out": 4})")), ParameterError);
}

TEST_CASE("moments CSV") {
    RunConfig config;
    config.n = 20'000;
    config.h = {30};
    config.k = {2};
    const auto single = run("moments", config);
    CHECK(single.code == kExitOk);
    std::istringstream lines(single.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "N,H,K,M_K,main_term,ratio,range_ok");
    std::vector<std::string> rows;
    for (std::string line; std::getline(lines, line);) rows.push_back(line);
    CHECK(rows.size() == 1);

    config.k = {3};
    const auto odd = run("moments", config);
    std::istringstream odd_lines(odd.out);
    std::getline(odd_lines, header);
    std::string row;
    std::getline(odd_lines, row);
    CHECK(row.find(",0,,") != std::string::npos);  // main_term 0, ratio empty

    config.h = {30, 60};
    config.k = {2, 3, 4};
    const auto many = run_moments(config);
    CHECK(many.size() == 6);
    CHECK(many[3].H == 60);
    CHECK(many[3].K == 2);
}

TEST_CASE("singular and s0 JSON shape") {
    RunConfig config;
    config.tuple = {0, 1};
    config.pmax = 1000;
    auto json = nlohmann::json::parse(run("singular", config).out);
    CHECK(json.size() == 4);
    CHECK(json["tuple"] == nlohmann::json::array({0, 1}));
    CHECK(json["pmax"] == 1000);
    CHECK(json["value"] == 0.0);
    CHECK(json["tail_bound"] == 0.0);

    config.tuple = {5};
    CHECK(nlohmann::json::parse(run("singular", config).out)["value"] == 1.0);

    config.tuple = {2, 0};
    config.pmax = 10'000'000;
    json = nlohmann::json::parse(run("singular", config).out);
    CHECK(json["tuple"] == nlohmann::json::array({0, 2}));
    CHECK(std::fabs(json["value"].get<double>() - 1.32032363) < 1e-6);

    json = nlohmann::json::parse(run("s0", config).out);
    CHECK(std::fabs(json["value"].get<double>() - 0.32032363) < 1e-6);

    config.tuple = {};
    CHECK(run("singular", config).code == kExitParameterError);
    config.tuple = {0, 2};
    config.pmax = 3;
    CHECK(run("singular", config).code == kExitParameterError);
}

TEST_CASE("correlations JSON") {
    RunConfig config;
    config.n = 10'000;
    config.tuple = {0, 2};
    config.pmax = 100'000;
    const auto outcome = run("correlations", config);
    REQUIRE(outcome.code == kExitOk);
    const auto json = nlohmann::json::parse(outcome.out);
    CHECK(json["x"] == 10'000);
    CHECK(json["lemma1_residual"].get<double>() <= 10.0);
    CHECK(json["error_term"].get<double>() ==
          doctest::Approx(json["lambda_correlation"].get<double>() - json["singular"].get<double>() * 1e4));
}

TEST_CASE("conjecture2 CSV") {
    RunConfig config;
    config.k = {1};
    config.h = {10};
    config.x_min = 1000;
    config.x_max = 100'000;
    config.x_points = 3;
    const auto outcome = run("conjecture2", config);
    REQUIRE(outcome.code == kExitOk);
    std::istringstream lines(outcome.out);
    std::vector<std::string> all;
    for (std::string line; std::getline(lines, line);) all.push_back(line);
    REQUIRE(all.size() == 5);
    CHECK(all[0] == "k,H,x,V,normalized");
    CHECK(all[1].rfind("1,10,1000,", 0) == 0);
    CHECK(all[4].rfind("# slope=", 0) == 0);

    Conjecture2Result flat;
    flat.k = 1;
    flat.H = 10;
    flat.rows = {{10, 5.0}, {100, 5.0}};
    CHECK(conjecture2_csv(flat).find("# slope=0\n") != std::string::npos);

    config.k = {3};
    config.h = {2};
    CHECK(run("conjecture2", config).code == kExitParameterError);
}

TEST_CASE("identity suite") {
    RunConfig config;
    config.n = 1000;
    config.h = {10};
    config.kmax = 3;
    config.pmax = 10'000;
    const auto outcome = run("identity-suite", config);
    CHECK(outcome.code == kExitOk);
    CHECK(outcome.out.find("FAIL") == std::string::npos);
    CHECK(outcome.out.find("PASS expansion K=3") != std::string::npos);
    CHECK(run("expansion-check", config).out == outcome.out);

    config.kmax = 9;
    CHECK(run("identity-suite", config).code == kExitParameterError);
}

TEST_CASE("identity suite regenerates a corrupted cache and passes") {
    const auto dir = scratch_dir("identity_cache");
    RunConfig config;
    config.n = 3000;
    config.h = {10};
    config.kmax = 2;
    config.pmax = 10'000;
    config.cache_dir = dir;
    config.segment_length = 1024;
    REQUIRE(run("identity-suite", config).code == kExitOk);
    const auto victim = segment_file_path(dir, 1025, 1024);
    {
        std::ofstream f(victim, std::ios::binary | std::ios::trunc);
        f << "garbage";
    }
    const auto outcome = run("identity-suite", config);
    CHECK(outcome.code == kExitOk);
    CHECK(read_segment_file(victim) == sieve_segment(1025, 1024));
}

TEST_CASE("sieve command writes one file per segment and is idempotent") {
    const auto dir = scratch_dir("sieve");
    RunConfig config;
    config.cache_dir = dir;
    config.n = 1 << 20;
    auto stats = cmd_sieve(config);
    CHECK(stats.written == 1);

    config.n = 10'000'000;
    stats = cmd_sieve(config);
    CHECK(stats.written + stats.reused == 10);
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 10);
    stats = cmd_sieve(config);
    CHECK(stats.written == 0);
    CHECK(stats.regenerated == 0);
    CHECK(stats.reused == 10);

    RunConfig missing;
    missing.n = 100;
    CHECK(run("sieve", missing).code == kExitParameterError);
}

TEST_CASE("report writes CSV, plot data and a gnuplot script") {
    const auto dir = scratch_dir("report");
    RunConfig config;
    config.n = 50'000;
    config.h = {20, 40};
    config.k = {2, 4};
    config.out = dir;
    REQUIRE(run("report", config).code == kExitOk);
    CHECK(slurp(dir / "moments.csv").rfind("N,H,K,M_K,main_term,ratio,range_ok\n", 0) == 0);
    CHECK(fs::exists(dir / "ratio_K2.dat"));
    CHECK(fs::exists(dir / "ratio_K4.dat"));
    CHECK(slurp(dir / "ratio.gp").find("'ratio_K2.dat'") != std::string::npos);
}

TEST_CASE("binary exit codes and config override") {
    const auto dir = scratch_dir("binary");
    CHECK(run_binary("singular --tuple 0,2 --pmax 1000") == 0);
    CHECK(run_binary("singular --tuple 0,2 --pmax 3") == 2);
    CHECK(run_binary("nonsense") == 2);
    CHECK(run_binary("identity-suite --n 1000 --h 10 --kmax 9") == 2);
    CHECK(run_binary("moments --n 1000 --h 10 --k 2 --out " + (dir / "no/such/dir/x.csv").string()) == 3);

    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << R"({"n": 2000, "h": [10], "k": [2], "out": ")" << (dir / "from_config.csv").string() << "\"}";
    }
    CHECK(run_binary("moments --config " + (dir / "cfg.json").string()) == 0);
    CHECK(run_binary("moments --config " + (dir / "cfg.json").string() + " --out " +
                     (dir / "override.csv").string() + " --h 12") == 0);
    const auto from_config = slurp(dir / "from_config.csv");
    const auto overridden = slurp(dir / "override.csv");
    CHECK(from_config.find("\n2000,10,2,") != std::string::npos);
    CHECK(overridden.find("\n2000,12,2,") != std::string::npos);
}
