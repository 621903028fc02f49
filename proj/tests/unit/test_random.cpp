#include <doctest.h>

#include <cmath>
#include <set>

#include "lorenz/error.hpp"
#include "lorenz/random.hpp"

using namespace lorenz;

TEST_CASE("philox4x32-10 known-answer vectors")
{
    using Block = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of seed, stream and position")
{
    RandomStream a(42, 7);
    RandomStream b(42, 7);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    RandomStream c(42, 8);
    RandomStream d(43, 7);
    RandomStream e(42, 7);
    const auto first = e.next_u64();
    CHECK(c.next_u64() != first);
    CHECK(d.next_u64() != first);

    // seek lands on the same words as sequential consumption
    RandomStream seq(5);
    for (int i = 0; i < 6; ++i) {
        seq.next_u64();
    }
    RandomStream jump(5);
    jump.seek(3);
    CHECK(seq.next_u64() == jump.next_u64());
}

TEST_CASE("substreams differ from each other and from the parent")
{
    const RandomStream parent(9);
    std::set<std::uint64_t> firsts;
    for (std::uint64_t tag = 0; tag < 50; ++tag) {
        RandomStream child = parent.substream(tag);
        firsts.insert(child.next_u64());
    }
    RandomStream p = parent;
    firsts.insert(p.next_u64());
    CHECK(firsts.size() == 51);
    RandomStream x = parent.substream(3, 4);
    RandomStream y = parent.substream(3).substream(4);
    CHECK(x.next_u64() == y.next_u64());
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
}

TEST_CASE("uniform variates stay inside the open unit interval")
{
    RandomStream rng(1);
    double sum = 0.0;
    const int count = 200000;
    for (int i = 0; i < count; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / count - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / count));

    RandomStream idx(2);
    for (int i = 0; i < 1000; ++i) {
        CHECK(idx.uniform_index(7) < 7);
    }
}

TEST_CASE("normal quantile matches reference values")
{
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
    for (double u : {0.001, 0.1, 0.3, 0.77, 0.9999}) {
        CHECK(normal_cdf(normal_quantile(u)) == doctest::Approx(u).epsilon(1e-13));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), ValidationError);
    CHECK_THROWS_AS(normal_quantile(1.0), ValidationError);
}

TEST_CASE("normal variates have unit variance")
{
    RandomStream rng(3);
    double s1 = 0.0, s2 = 0.0;
    const int count = 200000;
    for (int i = 0; i < count; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
    }
    CHECK(std::abs(s1 / count) < 0.01);
    CHECK(std::abs(s2 / count - 1.0) < 0.015);
}

TEST_CASE("binomial moments and edge cases")
{
    RandomStream rng(4);
    CHECK(binomial(rng, 0, 0.3) == 0);
    CHECK(binomial(rng, 10, 0.0) == 0);
    CHECK(binomial(rng, 10, 1.0) == 10);

    for (auto [trials, p] : {std::pair{12, 0.3}, std::pair{5000, 0.2}, std::pair{100000, 0.9}}) {
        const int count = 20000;
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < count; ++i) {
            const auto k = static_cast<double>(binomial(rng, trials, p));
            REQUIRE(k >= 0);
            REQUIRE(k <= trials);
            s1 += k;
            s2 += k * k;
        }
        const double mean = trials * p;
        const double var = trials * p * (1 - p);
        CHECK(std::abs(s1 / count - mean) < 4.0 * std::sqrt(var / count));
        CHECK(s2 / count - (s1 / count) * (s1 / count) == doctest::Approx(var).epsilon(0.05));
    }
}
