#include "pkml/singular_series.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>

#include "pkml/arith.hpp"
#include "pkml/errors.hpp"
#include "pkml/summation.hpp"

namespace pkml {

Tuple::Tuple(std::vector<std::int64_t> offsets) : offsets_(std::move(offsets)) {
    std::sort(offsets_.begin(), offsets_.end());
    if (!offsets_.empty() && offsets_.front() < 0) {
        throw ParameterError("tuple offsets must be >= 0");
    }
    if (std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end()) {
        throw ParameterError("tuple offsets must be distinct");
    }
}

Tuple Tuple::subset(std::uint64_t mask) const {
    std::vector<std::int64_t> picked;
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
        if (mask >> i & 1u) picked.push_back(offsets_[i]);
    }
    return Tuple(std::move(picked));
}

Tuple Tuple::shifted(std::int64_t t) const {
    std::vector<std::int64_t> moved(offsets_);
    for (auto& d : moved) d += t;
    return Tuple(std::move(moved));
}

std::string Tuple::to_string() const {
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < offsets_.size(); ++i) out << (i ? "," : "") << offsets_[i];
    out << '}';
    return out.str();
}

namespace {

// Primes are shared between calls; the list only grows.
std::shared_ptr<const std::vector<std::uint32_t>> primes_through(std::uint64_t limit) {
    static std::mutex mutex;
    static std::shared_ptr<const std::vector<std::uint32_t>> cached;
    static std::uint64_t cached_limit = 0;
    constexpr std::uint64_t kMaxPmax = std::uint64_t{1} << 31;
    if (limit > kMaxPmax) throw ParameterError("pmax must be <= 2^31");
    std::lock_guard lock(mutex);
    if (!cached || cached_limit < limit) {
        cached = std::make_shared<const std::vector<std::uint32_t>>(
            primes_up_to(static_cast<std::uint32_t>(limit)));
        cached_limit = limit;
    }
    return cached;
}

std::uint64_t residue_count_unchecked(std::uint64_t p, const Tuple& tuple) {
    std::vector<std::uint64_t> residues;
    residues.reserve(tuple.size());
    for (const auto d : tuple.offsets()) residues.push_back(static_cast<std::uint64_t>(d) % p);
    std::sort(residues.begin(), residues.end());
    return static_cast<std::uint64_t>(std::unique(residues.begin(), residues.end()) -
                                      residues.begin());
}

void check_pmax(const Tuple& tuple, std::uint64_t pmax) {
    if (tuple.size() < 2) return;
    const std::uint64_t need =
        std::max<std::uint64_t>(2 * tuple.size(), static_cast<std::uint64_t>(tuple.span()));
    if (pmax < need) {
        throw ParameterError("pmax = " + std::to_string(pmax) + " is below max(2k, span) = " +
                             std::to_string(need) + " for " + tuple.to_string());
    }
}

}  // namespace

std::uint64_t residue_count(std::uint64_t p, const Tuple& tuple) {
    if (!is_prime(p)) throw DomainError("residue_count: " + std::to_string(p) + " is not prime");
    if (tuple.empty()) throw ParameterError("residue_count: empty tuple");
    return residue_count_unchecked(p, tuple);
}

bool singular_series_zero_test(const Tuple& tuple) {
    if (tuple.empty()) throw ParameterError("singular_series_zero_test: empty tuple");
    for (std::uint64_t p = 2; p <= tuple.size(); ++p) {
        if (is_prime(p) && residue_count_unchecked(p, tuple) == p) return true;
    }
    return false;
}

SingularValue singular_series(const Tuple& tuple, std::uint64_t pmax) {
    const std::size_t k = tuple.size();
    // Every local factor is exactly 1 for k <= 1.
    if (k <= 1) return {1.0, 0.0, pmax};
    check_pmax(tuple, pmax);
    if (singular_series_zero_test(tuple)) return {0.0, 0.0, pmax};

    const auto primes = primes_through(pmax);
    const double kk = static_cast<double>(k);
    CompensatedSum log_product;
    for (const std::uint32_t p32 : *primes) {
        if (p32 > pmax) break;
        const double p = p32;
        const auto nu = static_cast<double>(residue_count_unchecked(p32, tuple));
        log_product.add(std::log1p(-nu / p) - kk * std::log1p(-1.0 / p));
    }
    const double value = std::exp(log_product.value());
    const double tail = std::fabs(value) * std::expm1(kk * kk / static_cast<double>(pmax));
    return {value, tail, pmax};
}

SingularValue singular_series_centered(const Tuple& tuple, std::uint64_t pmax) {
    const std::size_t k = tuple.size();
    if (k > kMaxSubsetTupleSize) {
        throw SizeError("s0: subset enumeration refused for k = " + std::to_string(k) + " > 20");
    }
    check_pmax(tuple, pmax);
    CompensatedSum value;
    CompensatedSum tail;
    const std::uint64_t subsets = std::uint64_t{1} << k;
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        const SingularValue part = singular_series(tuple.subset(mask), pmax);
        value.add(((k - size) % 2 == 0) ? part.value : -part.value);
        tail.add(part.tail_bound);
    }
    return {value.value(), tail.value(), pmax};
}

double pair_qsum(std::uint64_t d, std::uint64_t q_max) {
    if (d == 0) throw ParameterError("pair_qsum: d must be >= 1");
    if (q_max == 0) throw ParameterError("pair_qsum: Q must be >= 1");
    CompensatedSum sum;
    for (std::uint64_t q = 1; q <= q_max; ++q) {
        const int mu = mobius(q);
        if (mu == 0) continue;
        const auto phi = static_cast<double>(euler_phi(q));
        sum.add(static_cast<double>(ramanujan_sum(q, static_cast<std::int64_t>(d))) / (phi * phi));
    }
    return sum.value();
}

}  // namespace pkml
