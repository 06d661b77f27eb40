#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "pkml/errors.hpp"

namespace {

struct Flags {
    std::uint64_t n = 0;
    std::string h;
    std::string k;
    unsigned kmax = 0;
    std::string tuple;
    std::uint64_t pmax = 0;
    std::uint64_t x_min = 0;
    std::uint64_t x_max = 0;
    std::uint64_t x_points = 0;
    std::string cache_dir;
    std::string out;
    unsigned threads = 1;
    std::uint64_t segment_length = 0;
    std::string config;
};

template <typename T>
std::vector<T> positive(const std::string& text, const char* flag) {
    std::vector<T> out;
    for (const auto v : pkml::cli::parse_int_list(text)) {
        if (v <= 0) throw pkml::ParameterError(std::string(flag) + " values must be positive");
        out.push_back(static_cast<T>(v));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Short-interval prime moments and Hardy-Littlewood singular series"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.fallthrough();

    Flags f;
    auto* o_n = app.add_option("--n", f.n, "N for moments, x for correlations, limit for sieve")
                    ->check(CLI::PositiveNumber);
    auto* o_h = app.add_option("--h", f.h, "H or comma-separated H list");
    auto* o_k = app.add_option("--k", f.k, "K or comma-separated K list (tuple size for conjecture2)");
    auto* o_kmax = app.add_option("--kmax", f.kmax, "largest K for the identity suite")
                       ->check(CLI::PositiveNumber);
    auto* o_tuple = app.add_option("--tuple", f.tuple, "comma-separated offsets");
    auto* o_pmax = app.add_option("--pmax", f.pmax, "largest prime in the Euler product")
                       ->check(CLI::PositiveNumber);
    auto* o_xmin = app.add_option("--x-min", f.x_min, "geometric x grid start")->check(CLI::PositiveNumber);
    auto* o_xmax = app.add_option("--x-max", f.x_max, "geometric x grid end")->check(CLI::PositiveNumber);
    auto* o_xpts = app.add_option("--x-points", f.x_points, "geometric x grid size")
                       ->check(CLI::PositiveNumber);
    auto* o_cache = app.add_option("--cache-dir", f.cache_dir, "PKML segment cache directory");
    auto* o_out = app.add_option("--out", f.out, "output file (directory for report)");
    auto* o_threads = app.add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    auto* o_seg = app.add_option("--segment-length", f.segment_length, "sieve segment length");
    app.add_option("--config", f.config, "JSON config; flags override its values");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"sieve", "write PKML cache segments covering [1, n]"},
        {"moments", "M_K(N;H) against the Gaussian main term, as CSV"},
        {"singular", "singular series of --tuple as JSON"},
        {"s0", "centered singular series of --tuple as JSON"},
        {"correlations", "tuple correlations and error terms at x = --n as JSON"},
        {"conjecture2", "mean-square error over tuples on an x grid, as CSV"},
        {"expansion-check", "exact identity checks"},
        {"identity-suite", "alias of expansion-check"},
        {"report", "moments CSV plus gnuplot data and script in --out"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pkml::cli::kExitParameterError;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    pkml::cli::RunConfig config;
    try {
        if (!f.config.empty()) config = pkml::cli::load_config_file(f.config);
        if (o_n->count()) config.n = f.n;
        if (o_h->count()) config.h = positive<std::uint64_t>(f.h, "--h");
        if (o_k->count()) config.k = positive<unsigned>(f.k, "--k");
        if (o_kmax->count()) config.kmax = f.kmax;
        if (o_tuple->count()) config.tuple = pkml::cli::parse_int_list(f.tuple);
        if (o_pmax->count()) config.pmax = f.pmax;
        if (o_xmin->count()) config.x_min = f.x_min;
        if (o_xmax->count()) config.x_max = f.x_max;
        if (o_xpts->count()) config.x_points = f.x_points;
        if (o_cache->count()) config.cache_dir = f.cache_dir;
        if (o_out->count()) config.out = f.out;
        if (o_threads->count()) config.threads = f.threads;
        if (o_seg->count()) config.segment_length = f.segment_length;
    } catch (const pkml::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pkml::cli::kExitIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pkml::cli::kExitParameterError;
    }
    return pkml::cli::run_command(command, config, std::cout, std::cerr);
}
