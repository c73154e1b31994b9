#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "hazardcp/errors.hpp"

namespace hazardcp {

// Compensated (Kahan) accumulator. Reductions over per-path slots are run
// in index order, so results do not depend on the worker schedule.
class KahanSum {
public:
    void add(double x) {
        const double y = x - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

struct MeanSe {
    double mean = 0.0;
    double std_dev = 0.0;    // sample standard deviation, n-1 denominator
    double std_error = 0.0;  // std_dev / sqrt(n)
    std::size_t n = 0;
};

inline MeanSe mean_and_se(std::span<const double> x) {
    if (x.size() < 2) throw DomainError("n_samples", "need at least 2 samples");
    KahanSum s;
    for (double v : x) s.add(v);
    const double n = static_cast<double>(x.size());
    const double mean = s.value() / n;
    KahanSum ss;
    for (double v : x) {
        const double d = v - mean;
        ss.add(d * d);
    }
    const double var = ss.value() / (n - 1.0);
    const double sd = std::sqrt(var > 0.0 ? var : 0.0);
    return {mean, sd, sd / std::sqrt(n), x.size()};
}

}  // namespace hazardcp
