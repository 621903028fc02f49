#pragma once

#include <cmath>
#include <span>

namespace lorenz {

/// Neumaier's variant of Kahan summation. The running value is usable at
/// every step, so the same accumulator serves prefix sums.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept
    {
        add(x);
        return *this;
    }

    [[nodiscard]] double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) noexcept
{
    CompensatedSum acc;
    for (double v : values) {
        acc.add(v);
    }
    return acc.value();
}

} // namespace lorenz
