#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace lorenz {

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer, used to derive substream identifiers.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Counter-based random stream. A stream is identified by (seed, stream id);
/// the n-th output is a pure function of (seed, stream id, n), so streams can
/// be created per replicate or per unit without any shared state.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
        : seed_(seed), stream_(stream_id)
    {
    }

    /// Independent child stream. Children of distinct tags (and of distinct
    /// parents) do not overlap with overwhelming probability.
    [[nodiscard]] RandomStream substream(std::uint64_t tag) const noexcept;

    template <typename... Tags>
    [[nodiscard]] RandomStream substream(std::uint64_t tag, std::uint64_t next, Tags... rest) const noexcept
    {
        return substream(tag).substream(next, static_cast<std::uint64_t>(rest)...);
    }

    /// Jump to output block `block` (each block yields two 64-bit words).
    void seek(std::uint64_t block) noexcept
    {
        block_ = block;
        used_ = 2;
    }

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    /// Standard normal by inverse-CDF transform of one uniform.
    double normal() noexcept;

    double exponential(double rate) noexcept;

    /// Uniform integer in [0, bound); bound > 0.
    std::uint64_t uniform_index(std::uint64_t bound) noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int used_ = 2;
};

/// Seed for an independent sub-computation, derived from a base seed and a
/// path of tags (e.g. population size, repetition index).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept;

/// Inverse of the standard normal d.f. on (0, 1), accurate to a few ulp.
double normal_quantile(double u);

/// Standard normal d.f.
double normal_cdf(double z) noexcept;

/// Binomial(trials, p) variate by CDF inversion (with splitting for large
/// means so that the starting mass never underflows).
std::int64_t binomial(RandomStream& rng, std::int64_t trials, double p);

} // namespace lorenz
