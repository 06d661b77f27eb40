#include "pkml/moments.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>

#include "pkml/arith.hpp"
#include "pkml/errors.hpp"
#include "pkml/parallel.hpp"
#include "pkml/quadrature.hpp"
#include "pkml/summation.hpp"

namespace pkml {

namespace {

// Σ_{d=1}^{H} values[n + d], compensated.
double window_sum(std::span<const double> values, std::uint64_t n, std::uint64_t H) {
    CompensatedSum s;
    for (std::uint64_t d = 1; d <= H; ++d) s.add(values[n + d]);
    return s.value();
}

struct Block {
    std::uint64_t first;
    std::uint64_t last;
};

std::vector<Block> split_range(std::uint64_t N, std::uint64_t step) {
    std::vector<Block> blocks;
    for (std::uint64_t start = 1; start <= N; start += step) {
        blocks.push_back({start, std::min(N, start + step - 1)});
        if (N - start < step) break;
    }
    return blocks;
}

}  // namespace

std::vector<double> window_moments(const LambdaTable& table, std::uint64_t N, std::uint64_t H,
                                   unsigned Kmax, unsigned threads) {
    if (N == 0 || H == 0 || Kmax == 0) {
        throw ParameterError("window_moments: N, H and Kmax must be >= 1");
    }
    table.require(N + H, "window_moments");
    const auto lambda = table.values();
    const double h = static_cast<double>(H);
    const auto blocks = split_range(N, kWindowReseedInterval);

    auto partials = parallel_map<std::vector<CompensatedSum>>(
        blocks.size(), threads, [&](std::size_t b) {
            std::vector<CompensatedSum> sums(Kmax);
            const auto [first, last] = blocks[b];
            double window = window_sum(lambda, first, H);
            for (std::uint64_t n = first;; ++n) {
                const double centered = window - h;
                double power = 1.0;
                for (unsigned K = 0; K < Kmax; ++K) {
                    power *= centered;
                    sums[K].add(power);
                }
                if (n == last) break;
                window += lambda[n + H + 1] - lambda[n + 1];
            }
            return sums;
        });

    std::vector<CompensatedSum> total(Kmax);
    for (const auto& part : partials) {
        for (unsigned K = 0; K < Kmax; ++K) total[K].merge(part[K]);
    }
    std::vector<double> out(Kmax);
    for (unsigned K = 0; K < Kmax; ++K) out[K] = total[K].value();
    return out;
}

double max_window_drift(const LambdaTable& table, std::uint64_t N, std::uint64_t H,
                        std::uint64_t checkpoint) {
    if (N == 0 || H == 0 || checkpoint == 0) {
        throw ParameterError("max_window_drift: N, H and checkpoint must be >= 1");
    }
    table.require(N + H, "max_window_drift");
    const auto lambda = table.values();
    double worst = 0.0;
    for (const auto [first, last] : split_range(N, kWindowReseedInterval)) {
        double window = window_sum(lambda, first, H);
        for (std::uint64_t n = first;; ++n) {
            if ((n - first) % checkpoint == 0 || n == last) {
                const double exact = window_sum(lambda, n, H);
                worst = std::max(worst, std::fabs(window - exact) / std::max(1.0, std::fabs(exact)));
            }
            if (n == last) break;
            window += lambda[n + H + 1] - lambda[n + 1];
        }
    }
    return worst;
}

std::uint64_t mu_gauss(unsigned k) {
    if (k == 0) throw ParameterError("mu_gauss: k must be >= 1");
    if (k > 34) throw SizeError("mu_gauss: k > 34 overflows 64 bits");
    if (k % 2 == 1) return 0;
    std::uint64_t product = 1;
    for (std::uint64_t j = 1; j < k; j += 2) product *= j;
    return product;
}

double constant_B() {
    return 1.0 - std::numbers::egamma - std::log(2.0 * std::numbers::pi);
}

double main_term_quadrature(std::uint64_t N, std::uint64_t H, unsigned K) {
    if (N == 0 || H == 0 || K == 0) throw ParameterError("main_term: N, H and K must be >= 1");
    const auto mu = mu_gauss(K);
    if (mu == 0 || N == 1) return 0.0;
    const unsigned half = K / 2;
    const double shift = constant_B() - std::log(static_cast<double>(H));
    // x = e^u turns the log-power integrand into a polynomial times e^u.
    const auto integrand = [&](double u) {
        return std::pow(u + shift, static_cast<double>(half)) * std::exp(u);
    };
    const auto result =
        integrate_adaptive(integrand, 0.0, std::log(static_cast<double>(N)), 1e-12, 0.0, 20000);
    return static_cast<double>(mu) * std::pow(static_cast<double>(H), half) * result.value;
}

double main_term(std::uint64_t N, std::uint64_t H, unsigned K) {
    if (N == 0 || H == 0 || K == 0) throw ParameterError("main_term: N, H and K must be >= 1");
    if (K % 2 == 1) return 0.0;
    if (K != 2) return main_term_quadrature(N, H, K);
    const double h = static_cast<double>(H);
    const double bracket = constant_B() - 1.0;
    const auto antiderivative = [&](double x) { return x * (std::log(x / h) + bracket); };
    return h * (antiderivative(static_cast<double>(N)) - antiderivative(1.0));
}

double i_m_integral(double N, std::span<const unsigned> m) {
    if (!(N >= 1.0)) throw ParameterError("i_m_integral: N must be >= 1");
    for (const unsigned mi : m) {
        if (mi == 0) throw ParameterError("i_m_integral: entries must be >= 1");
    }
    if (m.empty()) return N - 1.0;
    const auto integrand = [&](double u) {
        double product = std::exp(u);
        for (const unsigned mi : m) product *= std::pow(u, static_cast<double>(mi - 1)) * (u - 1.0);
        return product;
    };
    return integrate_adaptive(integrand, 0.0, std::log(N), 1e-12, 1e-14, 20000).value;
}

namespace {

struct SetPartition {
    std::vector<std::vector<unsigned>> blocks;
    double coefficient;  // Möbius value μ(0̂, π) = ∏ (-1)^{|b|-1} (|b|-1)!
};

std::vector<SetPartition> set_partitions(unsigned k) {
    std::vector<SetPartition> out;
    std::vector<unsigned> label(k, 0);
    std::function<void(unsigned, unsigned)> grow = [&](unsigned i, unsigned used) {
        if (i == k) {
            SetPartition p{std::vector<std::vector<unsigned>>(used), 1.0};
            for (unsigned j = 0; j < k; ++j) p.blocks[label[j]].push_back(j);
            for (const auto& block : p.blocks) {
                const auto size = block.size();
                double factorial = 1.0;
                for (std::size_t f = 2; f < size; ++f) factorial *= static_cast<double>(f);
                p.coefficient *= (size % 2 == 1 ? 1.0 : -1.0) * factorial;
            }
            out.push_back(std::move(p));
            return;
        }
        for (unsigned b = 0; b <= used && b < k; ++b) {
            label[i] = b;
            grow(i + 1, b == used ? used + 1 : used);
        }
    };
    grow(0, 0);
    return out;
}

constexpr std::uint64_t kLkReseedInterval = 4096;

}  // namespace

double l_k(const LambdaTable& table, std::uint64_t N, std::uint64_t H,
           std::span<const unsigned> m, unsigned threads) {
    const auto k = static_cast<unsigned>(m.size());
    if (k == 0) throw ParameterError("l_k: m must be non-empty");
    if (k > kMaxLkTupleSize) {
        throw SizeError("l_k: k = " + std::to_string(k) + " exceeds the cost guard of 4");
    }
    if (N == 0 || H < k) return 0.0;
    table.require(N + H, "l_k");
    const auto lambda = table.values();
    const std::uint64_t top = N + H;

    const auto partitions = set_partitions(k);
    auto terms = parallel_map<double>(partitions.size(), threads, [&](std::size_t p) {
        const auto& part = partitions[p];
        // Diagonal weights ∏_{i ∈ b} Λ_{m_i}(y) for each block.
        std::vector<std::vector<double>> weights;
        for (const auto& block : part.blocks) {
            std::vector<double> g(top + 1, 0.0);
            for (std::uint64_t y = 1; y <= top; ++y) {
                double product = 1.0;
                for (const unsigned i : block) product *= lambda_m_from(lambda[y], m[i]);
                g[y] = product;
            }
            weights.push_back(std::move(g));
        }
        CompensatedSum sum;
        std::vector<double> windows(weights.size());
        for (std::uint64_t n = 1; n <= N; ++n) {
            if ((n - 1) % kLkReseedInterval == 0) {
                for (std::size_t b = 0; b < weights.size(); ++b) {
                    windows[b] = window_sum(weights[b], n, H);
                }
            } else {
                for (std::size_t b = 0; b < weights.size(); ++b) {
                    windows[b] += weights[b][n + H] - weights[b][n];
                }
            }
            double product = 1.0;
            for (const double w : windows) product *= w;
            sum.add(product);
        }
        return part.coefficient * sum.value();
    });

    CompensatedSum total;
    for (const double t : terms) total.add(t);
    return total.value();
}

std::vector<CompositionTerm> enumerate_expansion(unsigned K) {
    if (K == 0) throw ParameterError("enumerate_expansion: K must be >= 1");
    if (K > kMaxExpansionOrder) {
        throw SizeError("enumerate_expansion: K = " + std::to_string(K) + " exceeds 8");
    }
    std::int64_t factorial[kMaxExpansionOrder + 1] = {1};
    for (unsigned i = 1; i <= kMaxExpansionOrder; ++i) factorial[i] = factorial[i - 1] * i;
    auto binomial = [&](unsigned n, unsigned r) {
        return factorial[n] / (factorial[r] * factorial[n - r]);
    };

    std::vector<CompositionTerm> terms;
    for (unsigned k = 1; k <= K; ++k) {
        std::vector<unsigned> M(k, 1);
        // Compositions of K into k positive parts, lexicographic.
        std::function<void(unsigned, unsigned)> compose = [&](unsigned i, unsigned remaining) {
            if (i + 1 == k) {
                M[i] = remaining;
                std::int64_t multinomial = factorial[K];
                for (const unsigned part : M) multinomial /= factorial[part];
                std::vector<unsigned> m(k, 0);
                std::function<void(unsigned)> choose = [&](unsigned j) {
                    if (j == k) {
                        CompositionTerm term;
                        term.k = k;
                        term.M = M;
                        term.m = m;
                        std::int64_t numerator = multinomial;
                        for (unsigned t = 0; t < k; ++t) {
                            const bool negative = (M[t] - 1 - m[t]) % 2 == 1;
                            numerator *= (negative ? -1 : 1) * binomial(M[t] - 1, m[t]);
                            (m[t] >= 1 ? term.H_set : term.I_set).push_back(t);
                        }
                        term.weight = Rational(numerator, factorial[k]);
                        terms.push_back(std::move(term));
                        return;
                    }
                    for (unsigned v = 0; v < M[j]; ++v) {
                        m[j] = v;
                        choose(j + 1);
                    }
                };
                choose(0);
                return;
            }
            for (unsigned part = 1; part + (k - i - 1) <= remaining; ++part) {
                M[i] = part;
                compose(i + 1, remaining - part);
            }
        };
        compose(0, K);
    }
    return terms;
}

double expansion_moment(const LambdaTable& table, std::uint64_t N, std::uint64_t H, unsigned K,
                        unsigned threads) {
    if (K == 0) throw ParameterError("expansion_moment: K must be >= 1");
    if (K > kMaxExpansionMomentOrder) {
        throw SizeError("expansion_moment: K = " + std::to_string(K) + " exceeds the cost guard of 4");
    }
    if (H == 0) throw ParameterError("expansion_moment: H must be >= 1");
    if (N == 0) return 0.0;
    std::map<std::vector<unsigned>, double> cache;
    CompensatedSum total;
    for (const auto& term : enumerate_expansion(K)) {
        auto it = cache.find(term.m);
        if (it == cache.end()) it = cache.emplace(term.m, l_k(table, N, H, term.m, threads)).first;
        total.add(term.weight.to_double() * it->second);
    }
    return total.value();
}

bool in_theorem_range(std::uint64_t N, std::uint64_t H, unsigned K) {
    if (static_cast<double>(H) < std::log(static_cast<double>(N))) return false;
    std::uint64_t power = 1;
    for (unsigned i = 0; i < K; ++i) {
        if (power > N / H) return false;
        power *= H;
    }
    return power <= N;
}

MomentReport make_moment_report(std::uint64_t N, std::uint64_t H, unsigned K, double empirical) {
    MomentReport report;
    report.N = N;
    report.H = H;
    report.K = K;
    report.m_k_empirical = empirical;
    report.main_term = main_term(N, H, K);
    if (report.main_term != 0.0) report.ratio = empirical / report.main_term;
    report.range_ok = in_theorem_range(N, H, K);
    if (report.range_ok) {
        report.note = "ok";
    } else if (static_cast<double>(H) < std::log(static_cast<double>(N))) {
        report.note = "H < log N";
    } else {
        report.note = "H > N^(1/K)";
    }
    return report;
}

MomentReport moment_report(const LambdaTable& table, std::uint64_t N, std::uint64_t H, unsigned K,
                           unsigned threads) {
    const auto moments = window_moments(table, N, H, K, threads);
    return make_moment_report(N, H, K, moments[K - 1]);
}

}  // namespace pkml
