#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "pkml/sieve.hpp"
#include "pkml/singular_series.hpp"

namespace pkml {

// Σ_{1 <= n <= x} ∏_i Λ(n + d_i). The empty tuple gives x.
double lambda_correlation(const LambdaTable& table, std::uint64_t x, const Tuple& tuple);

// Σ_{1 <= n <= x} ∏_i Λ₀(n + d_i).
double lambda0_correlation(const LambdaTable& table, std::uint64_t x, const Tuple& tuple);

// E_k(x; D) = lambda_correlation - 𝔖(D) x.
double error_term(const LambdaTable& table, std::uint64_t x, const Tuple& tuple,
                  std::uint64_t pmax);

// |Σ ∏Λ₀ - 𝔖₀(D) x| / (Σ_{J ⊆ D} |E_{|J|}(x; D_J)| + 1). Bounded by a
// k-dependent constant when the inclusion–exclusion bookkeeping is right.
double lemma1_residual(const LambdaTable& table, std::uint64_t x, const Tuple& tuple,
                       std::uint64_t pmax);

inline constexpr std::uint64_t kMaxAveragedTupleSize = 3;

struct ErrorStat {
    std::uint64_t x = 0;
    std::uint64_t H = 0;
    std::uint64_t k = 0;
    double V = 0.0;           // Σ over ordered distinct d ∈ [1, H]^k of E_k(x; D)²
    double normalized = 0.0;  // V / (x H^k)
};

// Mean-square error term over all ordered tuples of distinct shifts in [1, H].
// Each set of shifts is visited once through its difference shape and base
// shift, then weighted by k!.
ErrorStat avg_sq_error(const LambdaTable& table, std::uint64_t x, std::uint64_t H,
                       std::uint64_t k, std::uint64_t pmax, unsigned threads = 1);

// Least-squares slope of log V against log x.
double exponent_fit(std::span<const std::pair<double, double>> points);

}  // namespace pkml
