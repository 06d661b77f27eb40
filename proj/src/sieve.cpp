#include "pkml/sieve.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <system_error>

#include "pkml/arith.hpp"
#include "pkml/errors.hpp"
#include "pkml/parallel.hpp"
#include "pkml/summation.hpp"

namespace pkml {

void SieveConfig::validate() const {
    if (segment_length < kMinSegmentLength) {
        throw ParameterError("segment_length must be >= 1024, got " +
                             std::to_string(segment_length));
    }
}

double Segment::lambda_at(std::size_t i) const {
    const std::uint32_t p = codes[i];
    return p == 0 ? 0.0 : std::log(static_cast<double>(p));
}

Segment sieve_segment(std::uint64_t base, std::uint64_t length) {
    if (length == 0) throw ParameterError("sieve_segment: empty range");
    if (base == 0) throw DomainError("sieve_segment: base must be >= 1");
    if (base > std::numeric_limits<std::uint64_t>::max() - length) {
        throw ParameterError("sieve_segment: base + length overflows 64 bits");
    }
    const std::uint64_t hi = base + length - 1;
    const std::uint64_t root = isqrt(hi);
    const auto base_primes = primes_up_to(static_cast<std::uint32_t>(root));

    // Smallest prime factor of each composite; ascending prime order means the
    // first writer wins.
    std::vector<std::uint32_t> spf(length, 0);
    for (const std::uint32_t p32 : base_primes) {
        const std::uint64_t p = p32;
        std::uint64_t start = base + (p - base % p) % p;
        if (start < p * p) start = p * p;
        for (std::uint64_t n = start; n <= hi; n += p) {
            auto& slot = spf[n - base];
            if (slot == 0) slot = p32;
        }
    }

    Segment seg{base, std::vector<std::uint32_t>(length, 0)};
    for (std::uint64_t i = 0; i < length; ++i) {
        const std::uint64_t n = base + i;
        if (n < 2) continue;
        const std::uint32_t p = spf[i];
        if (p == 0) {
            if (n > std::numeric_limits<std::uint32_t>::max()) {
                throw ParameterError("sieve_segment: prime " + std::to_string(n) +
                                     " does not fit a 32-bit code");
            }
            seg.codes[i] = static_cast<std::uint32_t>(n);
            continue;
        }
        std::uint64_t m = n;
        while (m % p == 0) m /= p;
        if (m == 1) seg.codes[i] = p;
    }
    return seg;
}

namespace {

constexpr std::array<char, 4> kMagic{'P', 'K', 'M', 'L'};

template <typename T>
void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
    }
}

template <typename T>
T get_le(const unsigned char* p) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(p[i]) << (8 * i);
    return value;
}

constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8;

}  // namespace

void write_segment_file(const std::filesystem::path& path, const Segment& segment) {
    std::string bytes;
    bytes.reserve(kHeaderBytes + 4 * segment.codes.size());
    bytes.append(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(bytes, kSegmentFileVersion);
    put_le<std::uint64_t>(bytes, segment.base);
    put_le<std::uint64_t>(bytes, segment.codes.size());
    for (const std::uint32_t c : segment.codes) put_le<std::uint32_t>(bytes, c);

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

Segment read_segment_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderBytes) throw CorruptSegmentFile(path.string() + ": truncated header");
    if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        throw CorruptSegmentFile(path.string() + ": bad magic");
    }
    const auto version = get_le<std::uint32_t>(bytes.data() + 4);
    if (version != kSegmentFileVersion) {
        throw CorruptSegmentFile(path.string() + ": unsupported version " + std::to_string(version));
    }
    Segment seg;
    seg.base = get_le<std::uint64_t>(bytes.data() + 8);
    const auto count = get_le<std::uint64_t>(bytes.data() + 16);
    if (count > (bytes.size() - kHeaderBytes) / 4 || bytes.size() != kHeaderBytes + 4 * count) {
        throw CorruptSegmentFile(path.string() + ": payload size mismatch");
    }
    seg.codes.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        seg.codes[i] = get_le<std::uint32_t>(bytes.data() + kHeaderBytes + 4 * i);
    }
    return seg;
}

std::filesystem::path segment_file_path(const std::filesystem::path& dir, std::uint64_t base,
                                        std::uint64_t length) {
    return dir / ("segment_" + std::to_string(base) + "_" + std::to_string(length) + ".pkml");
}

std::uint64_t segment_count(std::uint64_t limit, std::uint64_t segment_length) {
    return (limit + segment_length - 1) / segment_length;
}

Segment load_or_sieve_segment(std::uint64_t index, const SieveConfig& config, CacheStats* stats) {
    const std::uint64_t length = config.segment_length;
    const std::uint64_t base = 1 + index * length;
    if (!config.cache_dir) return sieve_segment(base, length);

    const auto path = segment_file_path(*config.cache_dir, base, length);
    bool regenerate = false;
    if (std::filesystem::exists(path)) {
        try {
            Segment seg = read_segment_file(path);
            if (seg.base == base && seg.codes.size() == length) {
                if (stats) ++stats->reused;
                return seg;
            }
            std::cerr << "warning: " << path.string() << ": base/length mismatch, regenerating\n";
        } catch (const CorruptSegmentFile& e) {
            std::cerr << "warning: " << e.what() << ", regenerating\n";
        }
        regenerate = true;
    }
    Segment seg = sieve_segment(base, length);
    write_segment_file(path, seg);
    if (stats) ++(regenerate ? stats->regenerated : stats->written);
    return seg;
}

namespace {

void ensure_cache_dir(const SieveConfig& config) {
    if (!config.cache_dir) return;
    std::error_code ec;
    std::filesystem::create_directories(*config.cache_dir, ec);
    if (ec || !std::filesystem::is_directory(*config.cache_dir)) {
        throw IoError("cannot create cache directory " + config.cache_dir->string());
    }
}

CacheStats sum_stats(const std::vector<CacheStats>& parts) {
    CacheStats total;
    for (const auto& s : parts) {
        total.written += s.written;
        total.reused += s.reused;
        total.regenerated += s.regenerated;
    }
    return total;
}

}  // namespace

CacheStats populate_cache(std::uint64_t limit, const SieveConfig& config, unsigned threads) {
    config.validate();
    if (!config.cache_dir) throw ParameterError("populate_cache: no cache directory configured");
    ensure_cache_dir(config);
    const std::uint64_t count = segment_count(limit, config.segment_length);
    auto parts = parallel_map<CacheStats>(count, threads, [&](std::size_t i) {
        CacheStats s;
        (void)load_or_sieve_segment(i, config, &s);
        return s;
    });
    return sum_stats(parts);
}

LambdaTable LambdaTable::sieve(std::uint64_t limit, const SieveConfig& config, unsigned threads,
                               CacheStats* stats) {
    config.validate();
    ensure_cache_dir(config);
    LambdaTable table;
    table.values_.assign(limit + 1, 0.0);
    if (limit == 0) return table;

    const std::uint64_t length = config.segment_length;
    const std::uint64_t count = segment_count(limit, length);
    auto parts = parallel_map<CacheStats>(count, threads, [&](std::size_t i) {
        CacheStats s;
        const Segment seg = load_or_sieve_segment(i, config, &s);
        const std::uint64_t end = std::min<std::uint64_t>(seg.base + seg.size() - 1, limit);
        for (std::uint64_t n = seg.base; n <= end; ++n) table.values_[n] = seg.lambda_at(n - seg.base);
        return s;
    });
    if (stats) *stats = sum_stats(parts);
    return table;
}

LambdaTable LambdaTable::from_values(std::vector<double> values) {
    LambdaTable table;
    table.values_.reserve(values.size() + 1);
    table.values_.insert(table.values_.end(), values.begin(), values.end());
    return table;
}

void LambdaTable::require(std::uint64_t n, const char* context) const {
    if (n > limit()) {
        throw CoverageError(std::string(context) + ": needs Λ(n) up to n = " + std::to_string(n) +
                            " but the table covers only n <= " + std::to_string(limit()));
    }
}

double LambdaTable::lambda(std::uint64_t n) const {
    if (n == 0) throw DomainError("lambda: n must be >= 1");
    require(n, "lambda");
    return values_[n];
}

double LambdaTable::lambda_m(std::uint64_t n, unsigned m) const {
    return lambda_m_from(lambda(n), m);
}

double LambdaTable::psi(std::uint64_t x) const {
    require(x, "psi");
    CompensatedSum sum;
    for (std::uint64_t n = 1; n <= x; ++n) sum.add(values_[n]);
    return sum.value();
}

}  // namespace pkml
