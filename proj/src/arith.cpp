#include "pkml/arith.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "pkml/errors.hpp"
#include "pkml/sieve.hpp"

namespace pkml {

std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r > n / r) --r;
    while ((r + 1) <= n / (r + 1)) ++r;
    return r;
}

std::uint64_t smallest_prime_factor(std::uint64_t n) {
    if (n < 2) return 0;
    if (n % 2 == 0) return 2;
    if (n % 3 == 0) return 3;
    for (std::uint64_t p = 5; p <= n / p; p += 6) {
        if (n % p == 0) return p;
        if (n % (p + 2) == 0) return p + 2;
    }
    return n;
}

bool is_prime(std::uint64_t n) { return n >= 2 && smallest_prime_factor(n) == n; }

double von_mangoldt(std::uint64_t n) {
    if (n == 0) throw DomainError("von_mangoldt: n must be >= 1");
    const std::uint64_t p = smallest_prime_factor(n);
    if (p == 0) return 0.0;
    std::uint64_t m = n;
    while (m % p == 0) m /= p;
    return m == 1 ? std::log(static_cast<double>(p)) : 0.0;
}

double lambda_m(std::uint64_t n, unsigned m) { return lambda_m_from(von_mangoldt(n), m); }

double psi(std::uint64_t x) {
    if (x < 2) return 0.0;
    return LambdaTable::sieve(x).psi(x);
}

int mobius(std::uint64_t q) {
    if (q == 0) throw DomainError("mobius: q must be >= 1");
    int sign = 1;
    std::uint64_t m = q;
    while (m > 1) {
        const std::uint64_t p = smallest_prime_factor(m);
        m /= p;
        if (m % p == 0) return 0;
        sign = -sign;
    }
    return sign;
}

std::uint64_t euler_phi(std::uint64_t q) {
    if (q == 0) throw DomainError("euler_phi: q must be >= 1");
    std::uint64_t result = q;
    std::uint64_t m = q;
    while (m > 1) {
        const std::uint64_t p = smallest_prime_factor(m);
        while (m % p == 0) m /= p;
        result = result / p * (p - 1);
    }
    return result;
}

std::int64_t ramanujan_sum(std::uint64_t q, std::int64_t d) {
    if (q == 0) throw DomainError("ramanujan_sum: q must be >= 1");
    const std::uint64_t g = std::gcd(q, static_cast<std::uint64_t>(d < 0 ? -d : d));
    std::int64_t total = 0;
    for (std::uint64_t delta = 1; delta <= g / delta; ++delta) {
        if (g % delta != 0) continue;
        total += static_cast<std::int64_t>(delta) * mobius(q / delta);
        const std::uint64_t other = g / delta;
        if (other != delta) total += static_cast<std::int64_t>(other) * mobius(q / other);
    }
    return total;
}

std::vector<std::uint32_t> primes_up_to(std::uint32_t limit) {
    std::vector<std::uint32_t> primes;
    if (limit < 2) return primes;
    std::vector<bool> composite(static_cast<std::size_t>(limit) + 1, false);
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        primes.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return primes;
}

}  // namespace pkml
