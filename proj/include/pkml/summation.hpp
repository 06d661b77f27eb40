#pragma once

#include <cmath>

namespace pkml {

// Neumaier's variant of Kahan summation. The running compensation also
// absorbs the case where the incoming term is larger than the partial sum.
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double initial) : sum_(initial) {}

    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    // Ordered merge of a partial sum produced elsewhere.
    void merge(const CompensatedSum& other) {
        add(other.sum_);
        add(other.comp_);
    }

    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }

    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace pkml
