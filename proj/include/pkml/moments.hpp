#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pkml/rational.hpp"
#include "pkml/sieve.hpp"

namespace pkml {

// Window sums are recomputed from Λ at the start of every block of this many
// steps; blocks are also the unit of parallel work.
inline constexpr std::uint64_t kWindowReseedInterval = std::uint64_t{1} << 20;

// M_K(N; H) = Σ_{n=1}^{N} (ψ(n+H) - ψ(n) - H)^K for K = 1..Kmax, in one
// streaming pass. Result index K-1 holds M_K.
std::vector<double> window_moments(const LambdaTable& table, std::uint64_t N, std::uint64_t H,
                                   unsigned Kmax, unsigned threads = 1);

// Largest relative gap between the running window sum used by
// window_moments and a from-scratch recomputation, sampled every `checkpoint`
// steps.
double max_window_drift(const LambdaTable& table, std::uint64_t N, std::uint64_t H,
                        std::uint64_t checkpoint);

// k-th moment of the standard normal: (k-1)!! for even k, 0 for odd k.
std::uint64_t mu_gauss(unsigned k);

// 1 - C₀ - ln 2π.
double constant_B();

// μ_K H^{K/2} ∫_1^N (ln(x/H) + B)^{K/2} dx. Closed form for K = 2,
// adaptive quadrature for even K >= 4, zero for odd K.
double main_term(std::uint64_t N, std::uint64_t H, unsigned K);

// Same quantity, always by quadrature (used to cross-check the K = 2 form).
double main_term_quadrature(std::uint64_t N, std::uint64_t H, unsigned K);

// ∫_1^N ∏_i (ln x)^{m_i - 1} (ln x - 1) dx over the indices with m_i >= 1.
// Every entry of `m` must be >= 1; empty `m` gives N - 1.
double i_m_integral(double N, std::span<const unsigned> m);

inline constexpr std::size_t kMaxLkTupleSize = 4;

// L_k(m) = Σ_{distinct d ∈ [1,H]^k} Σ_{n=1}^{N} ∏_i Λ_{m_i}(n + d_i).
// The distinctness constraint is removed by Möbius inversion on the lattice
// of set partitions, so each term is a product of window sums.
double l_k(const LambdaTable& table, std::uint64_t N, std::uint64_t H,
           std::span<const unsigned> m, unsigned threads = 1);

struct CompositionTerm {
    unsigned k = 0;
    std::vector<unsigned> M;  // Σ M_i = K, M_i >= 1
    std::vector<unsigned> m;  // 0 <= m_i < M_i
    // (1/k!) multinomial(K; M) ∏ (-1)^{M_i-1-m_i} binom(M_i-1, m_i)
    Rational weight;
    std::vector<unsigned> H_set;  // 0-based i with m_i >= 1
    std::vector<unsigned> I_set;  // 0-based i with m_i = 0
};

inline constexpr unsigned kMaxExpansionOrder = 8;

// All terms of the expansion of M_K into L_k(m), ordered by k, then M, then m
// lexicographically.
std::vector<CompositionTerm> enumerate_expansion(unsigned K);

inline constexpr unsigned kMaxExpansionMomentOrder = 4;

// Σ over enumerate_expansion(K) of weight · L_k(m). Equals M_K(N; H) exactly
// up to rounding.
double expansion_moment(const LambdaTable& table, std::uint64_t N, std::uint64_t H, unsigned K,
                        unsigned threads = 1);

struct MomentReport {
    std::uint64_t N = 0;
    std::uint64_t H = 0;
    unsigned K = 0;
    double m_k_empirical = 0.0;
    double main_term = 0.0;
    std::optional<double> ratio;  // unset when main_term == 0
    bool range_ok = false;        // log N <= H <= N^{1/K}
    std::string note;
};

// True iff log N <= H and H^K <= N.
bool in_theorem_range(std::uint64_t N, std::uint64_t H, unsigned K);

// Builds a report from an already computed M_K.
MomentReport make_moment_report(std::uint64_t N, std::uint64_t H, unsigned K, double empirical);

MomentReport moment_report(const LambdaTable& table, std::uint64_t N, std::uint64_t H, unsigned K,
                           unsigned threads = 1);

}  // namespace pkml
