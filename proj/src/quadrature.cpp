#include "pkml/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "pkml/summation.hpp"

namespace pkml {

namespace {

// Kronrod abscissae on [-1, 1]; odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    double a;
    double b;
    double value;
    double error;

    bool operator<(const Piece& other) const { return error < other.error; }
};

Piece gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kNodes[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[j] * sum;
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
    }
    return {a, b, kronrod * half, std::fabs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol, double abs_tol, std::size_t max_intervals) {
    if (a == b) return {0.0, 0.0, 0, true};

    std::priority_queue<Piece> heap;
    heap.push(gauss_kronrod_15(f, a, b));
    double total = heap.top().value;
    double error = heap.top().error;

    auto done = [&] { return error <= std::max(abs_tol, rel_tol * std::fabs(total)); };
    while (!done() && heap.size() < max_intervals) {
        const Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Piece left = gauss_kronrod_15(f, worst.a, mid);
        const Piece right = gauss_kronrod_15(f, mid, worst.b);
        total += (left.value + right.value) - worst.value;
        error += (left.error + right.error) - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-add from the final partition so the running updates leave no residue.
    QuadratureResult result;
    result.intervals = heap.size();
    std::vector<Piece> pieces;
    pieces.reserve(heap.size());
    while (!heap.empty()) {
        pieces.push_back(heap.top());
        heap.pop();
    }
    std::sort(pieces.begin(), pieces.end(), [](const Piece& l, const Piece& r) { return l.a < r.a; });
    CompensatedSum value;
    CompensatedSum err;
    for (const auto& p : pieces) {
        value.add(p.value);
        err.add(p.error);
    }
    result.value = value.value();
    result.error = err.value();
    result.converged = result.error <= std::max(abs_tol, rel_tol * std::fabs(result.value));
    return result;
}

}  // namespace pkml
