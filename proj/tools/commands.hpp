#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pkml/moments.hpp"
#include "pkml/sieve.hpp"
#include "pkml/singular_series.hpp"

namespace pkml::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitIdentityFailure = 1,
    kExitParameterError = 2,
    kExitIoError = 3,
};

struct RunConfig {
    std::uint64_t n = 0;
    std::vector<std::uint64_t> h;
    std::vector<unsigned> k;
    unsigned kmax = 0;
    std::vector<std::int64_t> tuple;
    std::uint64_t pmax = 10'000'000;
    std::uint64_t x_min = 0;
    std::uint64_t x_max = 0;
    std::uint64_t x_points = 0;
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> out;
    unsigned threads = 1;
    std::uint64_t segment_length = kDefaultSegmentLength;

    [[nodiscard]] SieveConfig sieve_config() const;
};

// Keys mirror the long flag names with '-' replaced by '_'
// (n, h, k, kmax, tuple, pmax, x_min, x_max, x_points, cache_dir, out,
// threads, segment_length). h, k and tuple accept a number, an array or a
// comma-separated string. Unknown keys are rejected.
void apply_config_json(RunConfig& config, const nlohmann::json& json);
RunConfig load_config_file(const std::filesystem::path& path);

std::vector<std::int64_t> parse_int_list(const std::string& text);

// x_min * (x_max / x_min)^{i/(points-1)} rounded to integers, strictly increasing.
std::vector<std::uint64_t> geometric_grid(std::uint64_t x_min, std::uint64_t x_max,
                                          std::uint64_t points);

std::string format_double(double value);

CacheStats cmd_sieve(const RunConfig& config);

std::vector<MomentReport> run_moments(const RunConfig& config);
std::string moments_csv(const std::vector<MomentReport>& reports);

nlohmann::json singular_json(const Tuple& tuple, const SingularValue& value);

struct Conjecture2Result {
    std::vector<std::pair<std::uint64_t, double>> rows;  // (x, V)
    std::uint64_t k = 0;
    std::uint64_t H = 0;
    double slope = 0.0;
};
Conjecture2Result run_conjecture2(const RunConfig& config);
std::string conjecture2_csv(const Conjecture2Result& result);

struct IdentityCheck {
    std::string name;
    double difference = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};
std::vector<IdentityCheck> run_identity_suite(const RunConfig& config);

// Executes one subcommand; all output goes to `out` unless config.out names a
// file. Returns the process exit code.
int run_command(const std::string& command, const RunConfig& config, std::ostream& out,
                std::ostream& err);

}  // namespace pkml::cli
