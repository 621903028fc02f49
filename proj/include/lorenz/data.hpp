#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lorenz {

/// N units with study values y_i >= 0 and size measures x_i > 0.
/// Immutable once constructed; the constructor enforces the invariants.
class FinitePopulation {
public:
    FinitePopulation(std::vector<double> y, std::vector<double> x);

    [[nodiscard]] std::span<const double> y() const noexcept { return y_; }
    [[nodiscard]] std::span<const double> x() const noexcept { return x_; }
    [[nodiscard]] std::int64_t size() const noexcept { return static_cast<std::int64_t>(y_.size()); }

    [[nodiscard]] bool operator==(const FinitePopulation&) const = default;

private:
    std::vector<double> y_;
    std::vector<double> x_;
};

/// Units drawn by a without-replacement design, with their inclusion
/// probabilities and design weights 1/pi.
struct DrawnSample {
    std::vector<std::int64_t> indices;
    std::vector<double> y;
    std::vector<double> x;
    std::vector<double> pi;
    std::vector<double> weights;

    [[nodiscard]] std::int64_t size() const noexcept { return static_cast<std::int64_t>(indices.size()); }

    /// Builds a sample from parallel arrays; weights are set to 1/pi.
    static DrawnSample from_columns(std::vector<std::int64_t> indices, std::vector<double> y,
                                    std::vector<double> x, std::vector<double> pi);

    /// Checks the structural invariants (equal lengths, distinct indices,
    /// 0 < pi <= 1, weights == 1/pi).
    void validate() const;

    [[nodiscard]] bool operator==(const DrawnSample&) const = default;
};

} // namespace lorenz
