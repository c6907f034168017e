#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qread/rng.hpp"

using namespace qread;
using Catch::Matchers::WithinAbs;

TEST_CASE("streams replay bit-identically") {
    RandomStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct counters give distinct streams") {
    RandomStream a(42, 0), b(42, 1);
    int agreements = 0;
    for (int i = 0; i < 64; ++i) {
        if (a.next_u64() == b.next_u64()) ++agreements;
    }
    REQUIRE(agreements == 0);
}

TEST_CASE("uniform moments") {
    RandomStream rng(1, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    REQUIRE_THAT(sum / n, WithinAbs(0.5, 0.005));
    REQUIRE_THAT(sum2 / n, WithinAbs(1.0 / 3.0, 0.005));
}

TEST_CASE("normal moments") {
    RandomStream rng(2, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next_normal();
        sum += z;
        sum2 += z * z;
        sum4 += z * z * z * z;
    }
    REQUIRE_THAT(sum / n, WithinAbs(0.0, 0.01));
    REQUIRE_THAT(sum2 / n, WithinAbs(1.0, 0.02));
    REQUIRE_THAT(sum4 / n, WithinAbs(3.0, 0.15));
}

TEST_CASE("outcome sampling matches weights") {
    RandomStream rng(3, 0);
    const std::vector<double> weights = {0.5, 0.25, 0.25};
    std::vector<int> counts(3, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(rng.next_outcome(weights))];
    REQUIRE_THAT(counts[0] / double(n), WithinAbs(0.5, 0.01));
    REQUIRE_THAT(counts[1] / double(n), WithinAbs(0.25, 0.01));
    REQUIRE_THAT(counts[2] / double(n), WithinAbs(0.25, 0.01));
}

TEST_CASE("substream keys separate named uses") {
    const std::uint64_t mi = substream_key(123, "mi");
    const std::uint64_t acc = substream_key(123, "acc");
    const std::uint64_t sme = substream_key(123, "sme");
    REQUIRE(mi != acc);
    REQUIRE(mi != sme);
    REQUIRE(acc != sme);
    REQUIRE(substream_key(123, "mi") == mi);
}
