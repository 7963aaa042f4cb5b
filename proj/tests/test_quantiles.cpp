#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "bk2f/quantiles.hpp"

using namespace bk2f;

namespace {

// Independent rank oracle: smallest r with r * 200 >= k * n (1-based).
std::size_t ceil_rank(std::size_t k, std::size_t n) {
    std::size_t r = (k * n) / 200;
    if (r * 200 < k * n) ++r;
    return r;
}

}  // namespace

TEST_CASE("probability grid") {
    CHECK(quantile_probability(0) == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(quantile_probability(99) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(quantile_probability(199) == 1.0);
    const std::vector<double> grid = percentile_grid();
    REQUIRE(grid.size() == 200);
    for (int k = 0; k < 200; ++k) CHECK(grid[k] == quantile_probability(k));
}

TEST_CASE("identity input of size 200 condenses to itself") {
    std::vector<double> v(200);
    for (int i = 0; i < 200; ++i) v[i] = i + 1;
    const std::vector<double> q = condense_percentiles(v);
    REQUIRE(q.size() == 200);
    for (int k = 0; k < 200; ++k) CHECK(q[k] == k + 1);
}

TEST_CASE("size-1000 ramp picks every fifth element") {
    std::vector<double> v(1000);
    for (int i = 0; i < 1000; ++i) v[i] = i + 1;
    std::mt19937_64 rng(1);
    std::shuffle(v.begin(), v.end(), rng);
    const std::vector<double> q = condense_percentiles(v);
    for (int k = 1; k <= 200; ++k) CHECK(q[k - 1] == 5.0 * k);
}

TEST_CASE("single value broadcasts to the whole grid") {
    const std::vector<double> q = condense_percentiles(std::vector<double>{3.25});
    for (double x : q) CHECK(x == 3.25);
}

TEST_CASE("last grid point is the maximum") {
    std::vector<double> v{5.0, -2.0, 17.5, 0.0, 17.25};
    const std::vector<double> q = condense_percentiles(v);
    CHECK(q[199] == 17.5);
}

TEST_CASE("empty input is rejected") {
    std::vector<double> v;
    double out[kNumQuantiles];
    CHECK_THROWS_AS(condense_percentiles(v, out), std::invalid_argument);
}

TEST_CASE("matches the sorted-rank oracle exactly on random inputs") {
    std::mt19937_64 rng(20240901);
    std::uniform_real_distribution<double> usize(0.0, std::log(100000.0));
    std::uniform_real_distribution<double> uval(-5.0, 5.0);
    std::uniform_int_distribution<int> utie(0, 9);
    std::uniform_int_distribution<int> mode(0, 2);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::exp(usize(rng))));
        std::vector<double> v(n);
        const int m = mode(rng);
        for (std::size_t i = 0; i < n; ++i) {
            if (m == 0) v[i] = uval(rng);
            else if (m == 1) v[i] = utie(rng);          // heavy ties
            else v[i] = std::exp(uval(rng));            // positive, skewed
        }
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        const std::vector<double> q = condense_percentiles(v);
        for (std::size_t k = 1; k <= 200; ++k) {
            const std::size_t r = ceil_rank(k, n);
            REQUIRE(r >= 1);
            REQUIRE(r <= n);
            CHECK(q[k - 1] == sorted[r - 1]);
        }
        CHECK(std::is_sorted(q.begin(), q.end()));
        CHECK(q[199] == sorted[n - 1]);
    }
}
