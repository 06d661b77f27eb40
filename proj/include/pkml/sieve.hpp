#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pkml {

inline constexpr std::uint64_t kDefaultSegmentLength = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kMinSegmentLength = std::uint64_t{1} << 10;

struct SieveConfig {
    std::uint64_t segment_length = kDefaultSegmentLength;
    std::optional<std::filesystem::path> cache_dir;

    void validate() const;
};

// A block [base, base + codes.size()) of the integers. codes[i] is the prime
// p when base + i = p^j (j >= 1), otherwise 0. Λ is always recomputed from
// the prime, never stored rounded.
struct Segment {
    std::uint64_t base = 1;
    std::vector<std::uint32_t> codes;

    [[nodiscard]] std::uint64_t size() const { return codes.size(); }
    [[nodiscard]] double lambda_at(std::size_t i) const;

    friend bool operator==(const Segment&, const Segment&) = default;
};

Segment sieve_segment(std::uint64_t base, std::uint64_t length);

// PKML segment files: "PKML", u32 version (1), u64 base, u64 count, then
// count u32 codes; all little-endian.
inline constexpr std::uint32_t kSegmentFileVersion = 1;

void write_segment_file(const std::filesystem::path& path, const Segment& segment);

// Throws IoError if the file cannot be opened; CorruptSegmentFile if the
// header or payload is malformed.
Segment read_segment_file(const std::filesystem::path& path);

class CorruptSegmentFile : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::filesystem::path segment_file_path(const std::filesystem::path& dir, std::uint64_t base,
                                        std::uint64_t length);

struct CacheStats {
    std::uint64_t written = 0;
    std::uint64_t reused = 0;
    std::uint64_t regenerated = 0;
};

// Number of segments of the configured length needed to cover [1, limit].
std::uint64_t segment_count(std::uint64_t limit, std::uint64_t segment_length);

// Loads segment `index` (base = 1 + index * length) from the cache when
// valid, otherwise sieves it and (when a cache dir is configured) writes it.
Segment load_or_sieve_segment(std::uint64_t index, const SieveConfig& config,
                              CacheStats* stats = nullptr);

// Makes sure every segment covering [1, limit] exists in config.cache_dir.
CacheStats populate_cache(std::uint64_t limit, const SieveConfig& config, unsigned threads = 1);

// Λ(n) for 1 <= n <= limit, derived from sieve codes.
class LambdaTable {
public:
    static LambdaTable sieve(std::uint64_t limit, const SieveConfig& config = {},
                             unsigned threads = 1, CacheStats* stats = nullptr);

    // Test hook: values[i] is used as Λ(i + 1).
    static LambdaTable from_values(std::vector<double> values);

    [[nodiscard]] std::uint64_t limit() const { return values_.size() - 1; }

    // Throws CoverageError when n > limit, DomainError when n == 0.
    [[nodiscard]] double lambda(std::uint64_t n) const;
    [[nodiscard]] double lambda0(std::uint64_t n) const { return lambda(n) - 1.0; }
    [[nodiscard]] double lambda_m(std::uint64_t n, unsigned m) const;

    // ψ(x) with compensated accumulation; requires x <= limit.
    [[nodiscard]] double psi(std::uint64_t x) const;

    // Unchecked access; index n is Λ(n) and index 0 holds 0.
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] double operator[](std::uint64_t n) const { return values_[n]; }

    // Throws CoverageError unless n <= limit.
    void require(std::uint64_t n, const char* context) const;

private:
    std::vector<double> values_{0.0};
};

}  // namespace pkml
