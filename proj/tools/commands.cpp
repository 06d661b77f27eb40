#include "commands.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pkml/correlations.hpp"
#include "pkml/errors.hpp"
#include "pkml/summation.hpp"

namespace pkml::cli {

SieveConfig RunConfig::sieve_config() const {
    SieveConfig config;
    config.segment_length = segment_length;
    config.cache_dir = cache_dir;
    return config;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        std::size_t used = 0;
        std::int64_t v = 0;
        try {
            v = std::stoll(item.substr(first), &used);
        } catch (const std::exception&) {
            throw ParameterError("not an integer: '" + item + "'");
        }
        if (item.find_first_not_of(" \t", first + used) != std::string::npos) {
            throw ParameterError("not an integer: '" + item + "'");
        }
        values.push_back(v);
    }
    return values;
}

namespace {

std::vector<std::int64_t> json_int_list(const nlohmann::json& value, const std::string& key) {
    if (value.is_number_integer()) return {value.get<std::int64_t>()};
    if (value.is_string()) return parse_int_list(value.get<std::string>());
    if (value.is_array()) {
        std::vector<std::int64_t> out;
        for (const auto& v : value) {
            if (!v.is_number_integer()) throw ParameterError("config: " + key + " must hold integers");
            out.push_back(v.get<std::int64_t>());
        }
        return out;
    }
    throw ParameterError("config: " + key + " must be an integer, array or string");
}

std::uint64_t json_positive(const nlohmann::json& value, const std::string& key) {
    if (!value.is_number_integer() || value.get<std::int64_t>() <= 0) {
        throw ParameterError("config: " + key + " must be a positive integer");
    }
    return value.get<std::uint64_t>();
}

template <typename T>
std::vector<T> positive_list(const std::vector<std::int64_t>& values, const std::string& key) {
    std::vector<T> out;
    for (const auto v : values) {
        if (v <= 0) throw ParameterError(key + " values must be positive");
        out.push_back(static_cast<T>(v));
    }
    return out;
}

}  // namespace

void apply_config_json(RunConfig& config, const nlohmann::json& json) {
    if (!json.is_object()) throw ParameterError("config must be a JSON object");
    try {
        for (const auto& [key, value] : json.items()) {
            if (key == "n") {
                config.n = json_positive(value, key);
            } else if (key == "h") {
                config.h = positive_list<std::uint64_t>(json_int_list(value, key), key);
            } else if (key == "k") {
                config.k = positive_list<unsigned>(json_int_list(value, key), key);
            } else if (key == "kmax") {
                config.kmax = static_cast<unsigned>(json_positive(value, key));
            } else if (key == "tuple") {
                config.tuple = json_int_list(value, key);
            } else if (key == "pmax") {
                config.pmax = json_positive(value, key);
            } else if (key == "x_min") {
                config.x_min = json_positive(value, key);
            } else if (key == "x_max") {
                config.x_max = json_positive(value, key);
            } else if (key == "x_points") {
                config.x_points = json_positive(value, key);
            } else if (key == "cache_dir") {
                config.cache_dir = value.get<std::string>();
            } else if (key == "out") {
                config.out = value.get<std::string>();
            } else if (key == "threads") {
                config.threads = static_cast<unsigned>(json_positive(value, key));
            } else if (key == "segment_length") {
                config.segment_length = json_positive(value, key);
            } else {
                throw ParameterError("config: unknown key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("config: ") + e.what());
    }
}

RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    nlohmann::json json;
    try {
        in >> json;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("config " + path.string() + ": " + e.what());
    }
    RunConfig config;
    apply_config_json(config, json);
    return config;
}

std::vector<std::uint64_t> geometric_grid(std::uint64_t x_min, std::uint64_t x_max,
                                          std::uint64_t points) {
    if (x_min < 1) throw ParameterError("x grid: x_min must be >= 1");
    if (points < 2) throw ParameterError("x grid: need at least 2 points");
    if (x_max <= x_min) throw ParameterError("x grid: x_max must exceed x_min");
    std::vector<std::uint64_t> grid;
    const double lo = std::log(static_cast<double>(x_min));
    const double hi = std::log(static_cast<double>(x_max));
    for (std::uint64_t i = 0; i < points; ++i) {
        std::uint64_t x;
        if (i == 0) {
            x = x_min;
        } else if (i + 1 == points) {
            x = x_max;
        } else {
            const double t = static_cast<double>(i) / static_cast<double>(points - 1);
            x = static_cast<std::uint64_t>(std::llround(std::exp(lo + t * (hi - lo))));
        }
        if (!grid.empty() && x <= grid.back()) {
            throw ParameterError("x grid: points collide after rounding; use fewer points");
        }
        grid.push_back(x);
    }
    return grid;
}

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

CacheStats cmd_sieve(const RunConfig& config) {
    if (config.n == 0) throw ParameterError("sieve: --n (limit) is required");
    if (!config.cache_dir) throw ParameterError("sieve: --cache-dir is required");
    return populate_cache(config.n, config.sieve_config(), config.threads);
}

std::vector<MomentReport> run_moments(const RunConfig& config) {
    if (config.n == 0) throw ParameterError("moments: --n is required");
    if (config.h.empty()) throw ParameterError("moments: --h is required");
    if (config.k.empty()) throw ParameterError("moments: --k is required");
    const std::uint64_t max_h = *std::max_element(config.h.begin(), config.h.end());
    const unsigned max_k = *std::max_element(config.k.begin(), config.k.end());
    const auto table = LambdaTable::sieve(config.n + max_h, config.sieve_config(), config.threads);

    std::vector<MomentReport> reports;
    for (const auto H : config.h) {
        const auto moments = window_moments(table, config.n, H, max_k, config.threads);
        for (const auto K : config.k) {
            reports.push_back(make_moment_report(config.n, H, K, moments[K - 1]));
        }
    }
    return reports;
}

std::string moments_csv(const std::vector<MomentReport>& reports) {
    std::ostringstream out;
    out << "N,H,K,M_K,main_term,ratio,range_ok\n";
    for (const auto& r : reports) {
        out << r.N << ',' << r.H << ',' << r.K << ',' << format_double(r.m_k_empirical) << ','
            << format_double(r.main_term) << ',' << (r.ratio ? format_double(*r.ratio) : "") << ','
            << (r.range_ok ? "true" : "false") << '\n';
    }
    return out.str();
}

nlohmann::json singular_json(const Tuple& tuple, const SingularValue& value) {
    return nlohmann::json{{"tuple", tuple.offsets()},
                          {"pmax", value.pmax},
                          {"value", value.value},
                          {"tail_bound", value.tail_bound}};
}

Conjecture2Result run_conjecture2(const RunConfig& config) {
    if (config.k.empty()) throw ParameterError("conjecture2: --k is required");
    if (config.h.empty()) throw ParameterError("conjecture2: --h is required");
    Conjecture2Result result;
    result.k = config.k.front();
    result.H = config.h.front();
    if (result.H < result.k) {
        throw ParameterError("conjecture2: H < k leaves no distinct tuples, nothing to fit");
    }
    const auto grid = geometric_grid(config.x_min, config.x_max, config.x_points);
    const auto table =
        LambdaTable::sieve(grid.back() + result.H, config.sieve_config(), config.threads);
    std::vector<std::pair<double, double>> points;
    for (const auto x : grid) {
        const auto stat = avg_sq_error(table, x, result.H, result.k, config.pmax, config.threads);
        result.rows.emplace_back(x, stat.V);
        points.emplace_back(static_cast<double>(x), stat.V);
    }
    result.slope = exponent_fit(points);
    return result;
}

std::string conjecture2_csv(const Conjecture2Result& result) {
    std::ostringstream out;
    out << "k,H,x,V,normalized\n";
    for (const auto& [x, v] : result.rows) {
        const double scale =
            static_cast<double>(x) * std::pow(static_cast<double>(result.H), static_cast<double>(result.k));
        out << result.k << ',' << result.H << ',' << x << ',' << format_double(v) << ','
            << format_double(v / scale) << '\n';
    }
    out << "# slope=" << format_double(result.slope) << '\n';
    return out.str();
}

namespace {

// Σ_{J ⊆ D} (-1)^{k-|J|} Σ_{n<=x} ∏_{i∈J} Λ(n+d_i), the J = ∅ term being (-1)^k x.
double signed_subset_sum(const LambdaTable& table, std::uint64_t x, const Tuple& tuple) {
    CompensatedSum sum;
    const std::size_t k = tuple.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        const double part = lambda_correlation(table, x, tuple.subset(mask));
        sum.add(((k - static_cast<std::size_t>(std::popcount(mask))) % 2 == 0) ? part : -part);
    }
    return sum.value();
}

}  // namespace

std::vector<IdentityCheck> run_identity_suite(const RunConfig& config) {
    if (config.n == 0) throw ParameterError("identity-suite: --n is required");
    if (config.kmax == 0) throw ParameterError("identity-suite: --kmax is required");
    (void)enumerate_expansion(config.kmax);  // enforces the K <= 8 cap
    const std::uint64_t H = config.h.empty() ? 10 : config.h.front();
    const std::vector<Tuple> tuples{Tuple{5}, Tuple{1, 3}, Tuple{0, 2, 6}, Tuple{0, 4, 10}};
    std::int64_t widest = 0;
    for (const auto& t : tuples) widest = std::max(widest, t.max_offset());

    const auto table = LambdaTable::sieve(config.n + std::max<std::uint64_t>(H, widest),
                                          config.sieve_config(), config.threads);
    std::vector<IdentityCheck> checks;
    const unsigned top = std::min(config.kmax, kMaxExpansionMomentOrder);
    const auto moments = window_moments(table, config.n, H, top, config.threads);
    for (unsigned K = 1; K <= top; ++K) {
        const double expanded = expansion_moment(table, config.n, H, K, config.threads);
        IdentityCheck check;
        check.name = "expansion K=" + std::to_string(K);
        check.difference = std::fabs(expanded - moments[K - 1]);
        check.tolerance = 1e-9 * (1.0 + std::fabs(moments[K - 1]));
        check.passed = check.difference <= check.tolerance;
        checks.push_back(check);
    }
    for (const auto& tuple : tuples) {
        const double direct = lambda0_correlation(table, config.n, tuple);
        IdentityCheck check;
        check.name = "inclusion-exclusion " + tuple.to_string();
        check.difference = std::fabs(direct - signed_subset_sum(table, config.n, tuple));
        check.tolerance = 1e-8 * std::max(1.0, std::fabs(direct));
        check.passed = check.difference <= check.tolerance;
        checks.push_back(check);
    }
    for (const auto& tuple : tuples) {
        const auto full = singular_series(tuple, config.pmax);
        CompensatedSum inverted;
        CompensatedSum tails;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << tuple.size()); ++mask) {
            const auto part = singular_series_centered(tuple.subset(mask), config.pmax);
            inverted.add(part.value);
            tails.add(part.tail_bound);
        }
        IdentityCheck check;
        check.name = "mobius inversion " + tuple.to_string();
        check.difference = std::fabs(inverted.value() - full.value);
        check.tolerance = tails.value() + full.tail_bound + 1e-12;
        check.passed = check.difference <= check.tolerance;
        checks.push_back(check);
    }
    return checks;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("short write to " + path.string());
}

// Writes to config.out when set, otherwise to the stream.
void emit(const RunConfig& config, std::ostream& out, const std::string& text) {
    if (config.out) {
        write_text(*config.out, text);
    } else {
        out << text;
    }
}

Tuple require_tuple(const RunConfig& config, const char* command) {
    if (config.tuple.empty()) throw ParameterError(std::string(command) + ": --tuple is required");
    return Tuple(config.tuple);
}

int report(const RunConfig& config, std::ostream& out) {
    if (!config.out) throw ParameterError("report: --out <directory> is required");
    const auto dir = *config.out;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());

    const auto reports = run_moments(config);
    write_text(dir / "moments.csv", moments_csv(reports));

    std::ostringstream script;
    script << "set logscale x\nset xlabel 'H'\nset ylabel 'M_K / main term'\nplot ";
    bool first = true;
    for (const auto K : config.k) {
        std::ostringstream data;
        data << "# H ratio\n";
        for (const auto& r : reports) {
            if (r.K == K && r.ratio) data << r.H << ' ' << format_double(*r.ratio) << '\n';
        }
        const std::string name = "ratio_K" + std::to_string(K) + ".dat";
        write_text(dir / name, data.str());
        script << (first ? "" : ", ") << "'" << name << "' using 1:2 with linespoints title 'K="
               << K << "'";
        first = false;
    }
    script << '\n';
    write_text(dir / "ratio.gp", script.str());

    for (const auto& r : reports) {
        out << "N=" << r.N << " H=" << r.H << " K=" << r.K
            << " M_K=" << format_double(r.m_k_empirical)
            << " main=" << format_double(r.main_term)
            << " ratio=" << (r.ratio ? format_double(*r.ratio) : "-") << " (" << r.note << ")\n";
    }
    return kExitOk;
}

int dispatch(const std::string& command, const RunConfig& config, std::ostream& out,
             std::ostream& err) {
    if (command == "sieve") {
        const auto stats = cmd_sieve(config);
        const nlohmann::json summary{
            {"limit", config.n},
            {"segments", segment_count(config.n, config.segment_length)},
            {"written", stats.written},
            {"reused", stats.reused},
            {"regenerated", stats.regenerated}};
        out << summary.dump() << '\n';
        return kExitOk;
    }
    if (command == "moments") {
        emit(config, out, moments_csv(run_moments(config)));
        return kExitOk;
    }
    if (command == "singular") {
        const Tuple tuple = require_tuple(config, "singular");
        emit(config, out, singular_json(tuple, singular_series(tuple, config.pmax)).dump() + "\n");
        return kExitOk;
    }
    if (command == "s0") {
        const Tuple tuple = require_tuple(config, "s0");
        emit(config, out,
             singular_json(tuple, singular_series_centered(tuple, config.pmax)).dump() + "\n");
        return kExitOk;
    }
    if (command == "correlations") {
        const Tuple tuple = require_tuple(config, "correlations");
        const std::uint64_t x = config.n;
        const auto table = LambdaTable::sieve(x + static_cast<std::uint64_t>(tuple.max_offset()),
                                              config.sieve_config(), config.threads);
        const nlohmann::json result{
            {"tuple", tuple.offsets()},
            {"x", x},
            {"pmax", config.pmax},
            {"lambda_correlation", lambda_correlation(table, x, tuple)},
            {"lambda0_correlation", lambda0_correlation(table, x, tuple)},
            {"singular", singular_series(tuple, config.pmax).value},
            {"s0", singular_series_centered(tuple, config.pmax).value},
            {"error_term", error_term(table, x, tuple, config.pmax)},
            {"lemma1_residual", lemma1_residual(table, x, tuple, config.pmax)}};
        emit(config, out, result.dump() + "\n");
        return kExitOk;
    }
    if (command == "conjecture2") {
        emit(config, out, conjecture2_csv(run_conjecture2(config)));
        return kExitOk;
    }
    if (command == "expansion-check" || command == "identity-suite") {
        const auto checks = run_identity_suite(config);
        std::ostringstream text;
        bool all = true;
        for (const auto& c : checks) {
            text << (c.passed ? "PASS " : "FAIL ") << c.name << " diff=" << format_double(c.difference)
                 << " tol=" << format_double(c.tolerance) << '\n';
            all = all && c.passed;
        }
        if (config.kmax > kMaxExpansionMomentOrder) {
            text << "SKIP expansion K=" << kMaxExpansionMomentOrder + 1 << ".." << config.kmax
                 << " (L_k cost guard k <= 4)\n";
        }
        emit(config, out, text.str());
        if (!all) err << "identity suite: failures detected\n";
        return all ? kExitOk : kExitIdentityFailure;
    }
    if (command == "report") return report(config, out);
    throw ParameterError("unknown command '" + command + "'");
}

}  // namespace

int run_command(const std::string& command, const RunConfig& config, std::ostream& out,
                std::ostream& err) {
    try {
        return dispatch(command, config, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIoError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitParameterError;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return kExitParameterError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIoError;
    }
}

}  // namespace pkml::cli
