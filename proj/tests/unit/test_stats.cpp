#include <heavytail/stats.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace heavytail;
using Catch::Matchers::WithinAbs;

TEST_CASE("quartiles with the inclusive median", "[stats]")
{
    const Summary odd = summarize({5, 1, 4, 2, 3});
    CHECK(odd.count == 5);
    CHECK(odd.median == 3.0);
    CHECK(odd.q1 == 2.0);
    CHECK(odd.q3 == 4.0);
    CHECK(odd.min == 1.0);
    CHECK(odd.max == 5.0);
    CHECK(odd.mean == 3.0);

    const Summary even = summarize({4, 3, 2, 1});
    CHECK(even.median == 2.5);
    CHECK(even.q1 == 1.5);
    CHECK(even.q3 == 3.5);

    const Summary six = summarize({1, 2, 3, 4, 5, 6});
    CHECK(six.q1 == 2.0);
    CHECK(six.q3 == 5.0);

    const Summary seven = summarize({1, 2, 3, 4, 5, 6, 7});
    CHECK(seven.q1 == 2.5);
    CHECK(seven.q3 == 5.5);

    const Summary one = summarize({7});
    CHECK(one.q1 == 7.0);
    CHECK(one.q3 == 7.0);

    const Summary none = summarize({});
    CHECK(none.count == 0);
    CHECK(std::isnan(none.median));
}

TEST_CASE("median and MSE", "[stats]")
{
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({3, 1, 2, 10}) == 2.5);
    CHECK(std::isnan(median({})));
    const std::vector<double> v{4, 6, 5};
    CHECK_THAT(mean_squared_error(v, 5.0), WithinAbs(2.0 / 3.0, 1e-15));
    CHECK(std::isnan(mean_squared_error(std::vector<double>{}, 1.0)));
}

TEST_CASE("quartiles are ordered", "[stats][property]")
{
    for (int n = 1; n <= 60; ++n) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i)
            v.push_back(std::sin(1.7 * i + n));
        const Summary s = summarize(v);
        CHECK(s.min <= s.q1);
        CHECK(s.q1 <= s.median);
        CHECK(s.median <= s.q3);
        CHECK(s.q3 <= s.max);
    }
}
