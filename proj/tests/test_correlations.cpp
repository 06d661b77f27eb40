#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pkml/correlations.hpp"
#include "pkml/errors.hpp"

using namespace pkml;

namespace {

const std::vector<double>& trial_values() {
    static const auto values = oracle::lambda_list(110'000);
    return values;
}

const LambdaTable& table() {
    static const auto t = LambdaTable::sieve(110'000);
    return t;
}

double signed_subset_sum(std::uint64_t x, const Tuple& tuple) {
    double sum = 0.0;
    const std::size_t k = tuple.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        const double part = lambda_correlation(table(), x, tuple.subset(mask));
        sum += ((k - std::popcount(mask)) % 2 == 0) ? part : -part;
    }
    return sum;
}

Tuple random_tuple(std::mt19937_64& rng, int max_k, std::int64_t max_offset) {
    std::uniform_int_distribution<int> size(1, max_k);
    std::uniform_int_distribution<std::int64_t> offset(0, max_offset);
    std::vector<std::int64_t> picks;
    const int k = size(rng);
    while (static_cast<int>(picks.size()) < k) {
        const auto d = offset(rng);
        if (std::find(picks.begin(), picks.end(), d) == picks.end()) picks.push_back(d);
    }
    return Tuple(picks);
}

}  // namespace

TEST_CASE("lambda_correlation examples") {
    CHECK(lambda_correlation(table(), 10, Tuple{0}) == doctest::Approx(7.832014180505469).epsilon(1e-14));
    CHECK(lambda_correlation(table(), 0, Tuple{0, 2}) == 0.0);
    CHECK(lambda_correlation(table(), 10, Tuple{0, 2}) ==
          doctest::Approx(oracle::correlation_naive(trial_values(), 10, {0, 2}, false)).epsilon(1e-14));
    CHECK(lambda_correlation(table(), 25, Tuple{}) == 25.0);
    CHECK_THROWS_AS(lambda_correlation(table(), 110'000, Tuple{0, 2}), CoverageError);
}

TEST_CASE("k = 1 reduces to a psi difference") {
    for (std::uint64_t x = 0; x <= 10'000; x += 997) {
        for (std::int64_t d = 0; d <= 50; d += 7) {
            const double direct = lambda_correlation(table(), x, Tuple{d});
            const double shifted = table().psi(x + d) - table().psi(d);
            CHECK(direct == doctest::Approx(shifted).epsilon(1e-13));
        }
    }
}

TEST_CASE("error_term") {
    for (std::int64_t d : {0, 3, 10}) {
        const double expected = table().psi(1000 + d) - table().psi(d) - 1000.0;
        CHECK(error_term(table(), 1000, Tuple{d}, 10) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(error_term(table(), 0, Tuple{0, 2}, 100) == 0.0);

    const double s = singular_series(Tuple{0, 2}, 1'000'000).value;
    const double oracle_value = oracle::correlation_naive(trial_values(), 100'000, {0, 2}, false) - s * 1e5;
    CHECK(std::fabs(error_term(table(), 100'000, Tuple{0, 2}, 1'000'000) - oracle_value) <= 1e-6);
}

TEST_CASE("lambda0_correlation") {
    CHECK(lambda0_correlation(table(), 5, Tuple{1}) ==
          doctest::Approx(table().psi(6) - table().psi(1) - 5.0).epsilon(1e-14));
    CHECK(lambda0_correlation(table(), 0, Tuple{1, 2, 3}) == 0.0);
    const Tuple tuple{0, 2, 6};
    const double direct = lambda0_correlation(table(), 1000, tuple);
    CHECK(std::fabs(direct - signed_subset_sum(1000, tuple)) <= 1e-8);
    CHECK(direct == doctest::Approx(oracle::correlation_naive(trial_values(), 1000, {0, 2, 6}, true)));
}

TEST_CASE("inclusion-exclusion over subsets, random tuples") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const Tuple tuple = random_tuple(rng, 3, 20);
        const std::uint64_t x = std::uniform_int_distribution<std::uint64_t>(1, 10'000)(rng);
        const double direct = lambda0_correlation(table(), x, tuple);
        INFO(tuple.to_string() << " x=" << x);
        CHECK(std::fabs(direct - signed_subset_sum(x, tuple)) <= 1e-8 * std::max(1.0, std::fabs(direct)));
    }
}

TEST_CASE("lemma1_residual stays bounded") {
    CHECK(lemma1_residual(table(), 0, Tuple{0, 2}, 1000) == 0.0);
    const double pair = lemma1_residual(table(), 10'000, Tuple{0, 2}, 1'000'000);
    const double triple = lemma1_residual(table(), 10'000, Tuple{0, 2, 6}, 1'000'000);
    CHECK(std::isfinite(pair));
    CHECK(std::isfinite(triple));
    CHECK(pair <= 10.0);
    CHECK(triple <= 10.0);
}

TEST_CASE("avg_sq_error examples") {
    const auto stat = avg_sq_error(table(), 10, 10, 1, 100);
    double expected = 0.0;
    for (std::uint64_t d = 1; d <= 10; ++d) {
        const double e = table().psi(10 + d) - table().psi(d) - 10.0;
        expected += e * e;
    }
    CHECK(stat.V == doctest::Approx(expected).epsilon(1e-12));
    CHECK(stat.normalized == stat.V / (10.0 * 10.0));

    CHECK(avg_sq_error(table(), 5, 2, 3, 100).V == 0.0);
    CHECK(avg_sq_error(table(), 100, 1, 2, 100).V == 0.0);
    CHECK_THROWS_AS(avg_sq_error(table(), 100, 10, 4, 100), SizeError);
    CHECK_THROWS_AS(avg_sq_error(table(), 5, 10, 2, 100), ParameterError);
    CHECK_THROWS_AS(avg_sq_error(table(), 100, 10, 2, 5), ParameterError);
}

TEST_CASE("avg_sq_error fast path matches the tuple loop at x = 1e5, H = 30") {
    const auto fast = avg_sq_error(table(), 100'000, 30, 2, 100'000);
    const double slow = oracle::avg_sq_error_naive(trial_values(), 100'000, 30, 2, 100'000);
    CHECK(std::fabs(fast.V - slow) <= 1e-6 * slow);
}

TEST_CASE("avg_sq_error fast path matches the tuple loop on a grid") {
    for (std::uint64_t k = 1; k <= 2; ++k) {
        for (std::uint64_t H : {2u, 5u, 11u, 20u}) {
            for (std::uint64_t x : {20u, 333u, 10'000u}) {
                const auto fast = avg_sq_error(table(), x, H, k, 1000);
                const double slow = oracle::avg_sq_error_naive(trial_values(), x, H, static_cast<unsigned>(k), 1000);
                INFO("k=" << k << " H=" << H << " x=" << x);
                CHECK(std::fabs(fast.V - slow) <= 1e-9 * (1.0 + slow));
            }
        }
    }
    const auto fast3 = avg_sq_error(table(), 2000, 8, 3, 1000);
    const double slow3 = oracle::avg_sq_error_naive(trial_values(), 2000, 8, 3, 1000);
    CHECK(std::fabs(fast3.V - slow3) <= 1e-9 * (1.0 + slow3));
}

TEST_CASE("avg_sq_error is independent of the thread count") {
    const auto one = avg_sq_error(table(), 50'000, 25, 2, 100'000, 1);
    const auto many = avg_sq_error(table(), 50'000, 25, 2, 100'000, 6);
    CHECK(std::bit_cast<std::uint64_t>(one.V) == std::bit_cast<std::uint64_t>(many.V));
}

TEST_CASE("exponent_fit") {
    const std::vector<std::pair<double, double>> linear{{10, 10}, {100, 100}};
    CHECK(exponent_fit(linear) == doctest::Approx(1.0));
    const std::vector<std::pair<double, double>> flat{{10, 3.5}, {100, 3.5}};
    CHECK(exponent_fit(flat) == doctest::Approx(0.0));
    const std::vector<std::pair<double, double>> square{{10, 10}, {100, 1000}, {1000, 100000}};
    CHECK(exponent_fit(square) == doctest::Approx(2.0));
    const std::vector<std::pair<double, double>> one{{10, 1}};
    CHECK_THROWS_AS(exponent_fit(one), ParameterError);
    const std::vector<std::pair<double, double>> unordered{{100, 1}, {10, 2}};
    CHECK_THROWS_AS(exponent_fit(unordered), ParameterError);
    const std::vector<std::pair<double, double>> zero{{10, 0}, {100, 2}};
    CHECK_THROWS_AS(exponent_fit(zero), ParameterError);
}
