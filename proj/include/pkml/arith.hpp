#pragma once

#include <cstdint>
#include <vector>

namespace pkml {

// Λ(n): ln p when n = p^j, otherwise 0. Evaluated by trial division; use
// LambdaTable for ranges.
double von_mangoldt(std::uint64_t n);

// Λ_m(n) = Λ(n)^m (Λ(n) - 1), with Λ^0 = 1 so that m = 0 gives Λ₀.
double lambda_m(std::uint64_t n, unsigned m);

// Λ_m from an already known Λ value.
inline double lambda_m_from(double lambda, unsigned m) {
    double power = 1.0;
    for (unsigned i = 0; i < m; ++i) power *= lambda;
    return power * (lambda - 1.0);
}

// ψ(x) by sieving [1, x] in segments.
double psi(std::uint64_t x);

int mobius(std::uint64_t q);
std::uint64_t euler_phi(std::uint64_t q);

// c_q(d) = Σ_{δ | (q,d)} δ μ(q/δ).
std::int64_t ramanujan_sum(std::uint64_t q, std::int64_t d);

// Smallest prime factor by trial division; returns n for n prime, 0 for n < 2.
std::uint64_t smallest_prime_factor(std::uint64_t n);

bool is_prime(std::uint64_t n);

// All primes p <= limit, ascending.
std::vector<std::uint32_t> primes_up_to(std::uint32_t limit);

// Integer square root, floor.
std::uint64_t isqrt(std::uint64_t n);

}  // namespace pkml
