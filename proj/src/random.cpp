#include "lorenz/random.hpp"

#include <cmath>
#include <numbers>

#include "lorenz/error.hpp"

namespace lorenz {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

RandomStream RandomStream::substream(std::uint64_t tag) const noexcept
{
    return RandomStream(seed_, mix64(stream_ ^ mix64(tag ^ 0x5851F42D4C957F2Dull)));
}

std::uint64_t RandomStream::next_u64() noexcept
{
    if (used_ == 2) {
        const std::array<std::uint32_t, 4> counter{
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                               static_cast<std::uint32_t>(seed_ >> 32)};
        const auto out = philox4x32_10(counter, key);
        buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        ++block_;
        used_ = 0;
    }
    return buffer_[used_++];
}

double RandomStream::normal() noexcept
{
    return normal_quantile(uniform());
}

double RandomStream::exponential(double rate) noexcept
{
    return -std::log(uniform()) / rate;
}

std::uint64_t RandomStream::uniform_index(std::uint64_t bound) noexcept
{
    __extension__ using u128 = unsigned __int128;
    const u128 product = static_cast<u128>(next_u64()) * bound;
    return static_cast<std::uint64_t>(product >> 64);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept
{
    RandomStream stream(seed);
    for (std::uint64_t tag : tags) {
        stream = stream.substream(tag);
    }
    return mix64(seed ^ stream.stream_id());
}

double normal_cdf(double z) noexcept
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_quantile(double u)
{
    require(u > 0.0 && u < 1.0, "normal_quantile: argument must lie in (0, 1)");

    // Acklam's rational approximation, then one Halley step.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (u < p_low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - p_low) {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Work in the tail nearest to u so the residual keeps its precision.
    const double e = (u < 0.5) ? normal_cdf(x) - u : (1.0 - u) - normal_cdf(-x);
    const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - step / (1.0 + 0.5 * x * step);
}

std::int64_t binomial(RandomStream& rng, std::int64_t trials, double p)
{
    if (trials <= 0 || p <= 0.0) {
        return 0;
    }
    if (p >= 1.0) {
        return trials;
    }
    if (p > 0.5) {
        return trials - binomial(rng, trials, 1.0 - p);
    }
    if (static_cast<double>(trials) * p > 200.0) {
        const std::int64_t half = trials / 2;
        const std::int64_t first = binomial(rng, half, p);
        return first + binomial(rng, trials - half, p);
    }

    const double ratio = p / (1.0 - p);
    double pmf = std::exp(static_cast<double>(trials) * std::log1p(-p));
    double cdf = pmf;
    const double u = rng.uniform();
    std::int64_t k = 0;
    while (u > cdf && k < trials) {
        pmf *= ratio * static_cast<double>(trials - k) / static_cast<double>(k + 1);
        ++k;
        cdf += pmf;
    }
    return k;
}

} // namespace lorenz
