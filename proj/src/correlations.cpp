#include "pkml/correlations.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "pkml/errors.hpp"
#include "pkml/parallel.hpp"
#include "pkml/summation.hpp"

namespace pkml {

namespace {

template <typename Factor>
double product_sum(const LambdaTable& table, std::uint64_t x, const Tuple& tuple, Factor factor,
                   const char* context) {
    if (x == 0) return 0.0;
    table.require(x + static_cast<std::uint64_t>(tuple.max_offset()), context);
    const auto lambda = table.values();
    CompensatedSum sum;
    for (std::uint64_t n = 1; n <= x; ++n) {
        double term = 1.0;
        for (const auto d : tuple.offsets()) term *= factor(lambda[n + static_cast<std::uint64_t>(d)]);
        sum.add(term);
    }
    return sum.value();
}

}  // namespace

double lambda_correlation(const LambdaTable& table, std::uint64_t x, const Tuple& tuple) {
    return product_sum(table, x, tuple, [](double l) { return l; }, "lambda_correlation");
}

double lambda0_correlation(const LambdaTable& table, std::uint64_t x, const Tuple& tuple) {
    return product_sum(table, x, tuple, [](double l) { return l - 1.0; }, "lambda0_correlation");
}

double error_term(const LambdaTable& table, std::uint64_t x, const Tuple& tuple,
                  std::uint64_t pmax) {
    const SingularValue s = singular_series(tuple, pmax);
    return lambda_correlation(table, x, tuple) - s.value * static_cast<double>(x);
}

double lemma1_residual(const LambdaTable& table, std::uint64_t x, const Tuple& tuple,
                       std::uint64_t pmax) {
    if (tuple.size() > kMaxSubsetTupleSize) {
        throw SizeError("lemma1_residual: k = " + std::to_string(tuple.size()) + " > 20");
    }
    const double centered = singular_series_centered(tuple, pmax).value;
    if (x == 0) return 0.0;
    const double numerator =
        std::fabs(lambda0_correlation(table, x, tuple) - centered * static_cast<double>(x));
    CompensatedSum errors;
    const std::uint64_t subsets = std::uint64_t{1} << tuple.size();
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        errors.add(std::fabs(error_term(table, x, tuple.subset(mask), pmax)));
    }
    return numerator / (errors.value() + 1.0);
}

ErrorStat avg_sq_error(const LambdaTable& table, std::uint64_t x, std::uint64_t H,
                       std::uint64_t k, std::uint64_t pmax, unsigned threads) {
    if (k == 0) throw ParameterError("avg_sq_error: k must be >= 1");
    if (k > kMaxAveragedTupleSize) {
        throw SizeError("avg_sq_error: k = " + std::to_string(k) + " exceeds the cost guard of 3");
    }
    ErrorStat stat{x, H, k, 0.0, 0.0};
    if (H < k) return stat;
    if (x < H) throw ParameterError("avg_sq_error: requires x >= H");
    table.require(x + H, "avg_sq_error");

    // Difference shapes {0, s_1, ...} with span <= H - 1.
    std::vector<Tuple> shapes;
    if (k == 1) {
        shapes.push_back(Tuple{0});
    } else if (k == 2) {
        for (std::int64_t t = 1; t < static_cast<std::int64_t>(H); ++t) shapes.push_back(Tuple{0, t});
    } else {
        for (std::int64_t t2 = 2; t2 < static_cast<std::int64_t>(H); ++t2) {
            for (std::int64_t t1 = 1; t1 < t2; ++t1) shapes.push_back(Tuple{0, t1, t2});
        }
    }

    const auto lambda = table.values();
    const double xd = static_cast<double>(x);
    auto per_shape = parallel_map<CompensatedSum>(shapes.size(), threads, [&](std::size_t s) {
        const Tuple& shape = shapes[s];
        const double singular = singular_series(shape, pmax).value;
        auto product_at = [&](std::uint64_t m) {
            double term = 1.0;
            for (const auto d : shape.offsets()) term *= lambda[m + static_cast<std::uint64_t>(d)];
            return term;
        };
        // C(a) = Σ_{m=a+1}^{x+a} G(m) for base shift a; C(1) in full, later
        // bases by correction sums over the two ends of the window.
        CompensatedSum first;
        for (std::uint64_t m = 2; m <= x + 1; ++m) first.add(product_at(m));
        const double c1 = first.value();

        CompensatedSum squares;
        CompensatedSum entering;
        CompensatedSum leaving;
        const std::uint64_t last_base = H - static_cast<std::uint64_t>(shape.span());
        for (std::uint64_t a = 1; a <= last_base; ++a) {
            if (a > 1) {
                entering.add(product_at(x + a));
                leaving.add(product_at(a));
            }
            const double correlation = c1 + (entering.value() - leaving.value());
            const double e = correlation - singular * xd;
            squares.add(e * e);
        }
        return squares;
    });

    CompensatedSum total;
    for (const auto& part : per_shape) total.merge(part);
    double orderings = 1.0;
    for (std::uint64_t i = 2; i <= k; ++i) orderings *= static_cast<double>(i);
    stat.V = total.value() * orderings;
    stat.normalized = stat.V / (xd * std::pow(static_cast<double>(H), static_cast<double>(k)));
    return stat;
}

double exponent_fit(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw ParameterError("exponent_fit: need at least two points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].second <= 0.0 || points[i].first <= 0.0) {
            throw ParameterError("exponent_fit: x and V must be positive");
        }
        if (i > 0 && points[i].first <= points[i - 1].first) {
            throw ParameterError("exponent_fit: x must be strictly increasing");
        }
    }
    const double count = static_cast<double>(points.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [x, v] : points) {
        mean_x += std::log(x);
        mean_y += std::log(v);
    }
    mean_x /= count;
    mean_y /= count;
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [x, v] : points) {
        const double dx = std::log(x) - mean_x;
        sxy += dx * (std::log(v) - mean_y);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace pkml
