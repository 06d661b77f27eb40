#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace pkml {

// A set of distinct non-negative shifts, kept sorted ascending.
class Tuple {
public:
    Tuple() = default;
    // Sorts the offsets; throws ParameterError on duplicates or negatives.
    explicit Tuple(std::vector<std::int64_t> offsets);
    Tuple(std::initializer_list<std::int64_t> offsets)
        : Tuple(std::vector<std::int64_t>(offsets)) {}

    [[nodiscard]] std::size_t size() const { return offsets_.size(); }
    [[nodiscard]] bool empty() const { return offsets_.empty(); }
    [[nodiscard]] const std::vector<std::int64_t>& offsets() const { return offsets_; }
    [[nodiscard]] std::int64_t operator[](std::size_t i) const { return offsets_[i]; }
    [[nodiscard]] std::int64_t max_offset() const { return empty() ? 0 : offsets_.back(); }
    // max d_i - min d_i, 0 for fewer than two offsets.
    [[nodiscard]] std::int64_t span() const {
        return size() < 2 ? 0 : offsets_.back() - offsets_.front();
    }

    // D_J for the index subset encoded by the bits of `mask`.
    [[nodiscard]] Tuple subset(std::uint64_t mask) const;
    [[nodiscard]] Tuple shifted(std::int64_t t) const;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const Tuple&, const Tuple&) = default;

private:
    std::vector<std::int64_t> offsets_;
};

struct SingularValue {
    double value = 0.0;
    double tail_bound = 0.0;  // certified bound on |true value - value|
    std::uint64_t pmax = 0;
};

inline constexpr std::size_t kMaxSubsetTupleSize = 20;

// ν_p(D): number of distinct residues of the offsets mod p.
std::uint64_t residue_count(std::uint64_t p, const Tuple& tuple);

// True iff some prime p <= k has ν_p(D) = p, i.e. the tuple is locally obstructed.
bool singular_series_zero_test(const Tuple& tuple);

// 𝔖(D) = ∏_{p <= pmax} (1 - ν_p/p)(1 - 1/p)^{-k}, with
// tail_bound = |value| (exp(k²/pmax) - 1). Requires pmax >= max(2k, span).
SingularValue singular_series(const Tuple& tuple, std::uint64_t pmax);

// 𝔖₀(D) = Σ_{J ⊆ D} (-1)^{k-|J|} 𝔖(D_J), with 𝔖(∅) = 1.
SingularValue singular_series_centered(const Tuple& tuple, std::uint64_t pmax);

// Σ_{q <= Q} μ(q)² c_q(d) / φ(q)², the pair-case q-sum form of 𝔖({0, d}).
double pair_qsum(std::uint64_t d, std::uint64_t q_max);

}  // namespace pkml
