#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "popt/schedule.hpp"

using namespace popt;

namespace {
// straight reimplementation of the sampler map, the oracle for the
// frozen values below
std::vector<double> hyperbola_oracle(std::size_t n) {
    std::vector<double> out;
    long double s_end = sqrtl(static_cast<long double>(n) * n + 1.0L);
    for (std::size_t i = 0; i < n; ++i) {
        long double s = n == 1 ? 1.0L
                               : 1.0L + (s_end - 1.0L) * static_cast<long double>(i) /
                                            static_cast<long double>(n - 1);
        out.push_back(static_cast<double>(sqrtl(s * s - 1.0L)));
    }
    return out;  // ascending
}
}  // namespace

TEST_CASE("linear timesteps") {
    CHECK(linear_timesteps(3) == std::vector<double>{2.0, 1.0, 0.0});
    CHECK(linear_timesteps(1) == std::vector<double>{0.0});
    CHECK_THROWS_AS(linear_timesteps(0), std::invalid_argument);

    auto ts = linear_timesteps(1000);
    CHECK(ts.size() == 1000);
    CHECK(ts.front() == 999.0);
    CHECK(ts.back() == 0.0);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) CHECK(ts[i] > ts[i + 1]);
}

TEST_CASE("hyperbola timesteps: small cases against the oracle") {
    CHECK(hyperbola_timesteps(1) == std::vector<double>{0.0});

    auto t2 = hyperbola_timesteps(2);
    CHECK(t2.size() == 2);
    CHECK(t2[0] == 2.0);
    CHECK(t2[1] == 0.0);

    // T = 4: oracle values 4, 2.9153315516, 1.7792764604, 0
    auto t4 = hyperbola_timesteps(4);
    auto oracle = hyperbola_oracle(4);
    REQUIRE(t4.size() == 4);
    CHECK(t4[0] == 4.0);
    CHECK(t4[1] == doctest::Approx(2.9153315516).epsilon(1e-9));
    CHECK(t4[2] == doctest::Approx(1.7792764604).epsilon(1e-9));
    CHECK(t4[3] == 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(t4[i] == doctest::Approx(oracle[3 - i]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(hyperbola_timesteps(0), std::invalid_argument);
}

TEST_CASE("hyperbola interior values match a long-double oracle") {
    for (std::size_t n : {std::size_t{200}, std::size_t{1000}}) {
        auto ts = hyperbola_timesteps(n);
        auto oracle = hyperbola_oracle(n);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            CHECK(ts[i] == doctest::Approx(oracle[n - 1 - i]).epsilon(1e-13));
        }
    }
}

TEST_CASE("hyperbola endpoints are exactly T and 0") {
    for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{4}, std::size_t{200},
                          std::size_t{1000}}) {
        auto ts = hyperbola_timesteps(n);
        CHECK(ts.size() == n);
        CHECK(ts.back() == 0.0);
        if (n > 1) CHECK(ts.front() == static_cast<double>(n));

        // sqrt(T^2 + 1 - 1) stays bit-exact at integer T
        double t = static_cast<double>(n);
        CHECK(std::sqrt(t * t + 1.0 - 1.0) == t);
    }
}

TEST_CASE("both samplers are strictly monotone with the right extremes") {
    for (std::size_t n : {std::size_t{10}, std::size_t{200}}) {
        auto lin = linear_timesteps(n);
        auto hyp = hyperbola_timesteps(n);
        CHECK(lin.size() == n);
        CHECK(hyp.size() == n);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            CHECK(lin[i] > lin[i + 1]);
            CHECK(hyp[i] > hyp[i + 1]);
        }
        CHECK(lin.front() == static_cast<double>(n - 1));
        CHECK(hyp.front() == static_cast<double>(n));
        CHECK(lin.back() == 0.0);
        CHECK(hyp.back() == 0.0);
    }
}

TEST_CASE("hyperbola gaps shrink from t = 0 toward t = T") {
    // the sqrt(s^2-1) map stretches the first s-interval the most, so in
    // ascending order the gap at the small-t end dominates the last one
    for (std::size_t n : {std::size_t{10}, std::size_t{50}, std::size_t{200}}) {
        auto ts = hyperbola_timesteps(n);
        std::vector<double> asc(ts.rbegin(), ts.rend());
        double first_gap = asc[1] - asc[0];
        double last_gap = asc[n - 1] - asc[n - 2];
        CHECK(first_gap > last_gap);
    }
}

TEST_CASE("beta and alpha-bar tables") {
    auto sched = make_schedule(200, SamplerKind::Linear);
    CHECK(sched.betas.size() == 200);
    CHECK(sched.alpha_bars.size() == 200);
    CHECK(sched.betas.front() == doctest::Approx(1e-4));
    CHECK(sched.betas.back() == doctest::Approx(0.02));
    CHECK(sched.alpha_bars[0] == doctest::Approx(1.0 - sched.betas[0]).epsilon(1e-15));
    CHECK(sched.alpha_bars.back() < sched.alpha_bars.front());
    for (std::size_t i = 0; i < 200; ++i) {
        CHECK(sched.betas[i] > 0.0);
        CHECK(sched.betas[i] < 1.0);
        CHECK(sched.alpha_bars[i] > 0.0);
        CHECK(sched.alpha_bars[i] <= 1.0);
        if (i > 0) CHECK(sched.alpha_bars[i] < sched.alpha_bars[i - 1]);
    }
}

TEST_CASE("alpha_bar_at rounds and clamps") {
    auto sched = make_schedule(200, SamplerKind::UnitHyperbola);
    CHECK(alpha_bar_at(sched, 0.0) == sched.alpha_bars[0]);
    CHECK(alpha_bar_at(sched, 1.7793) == sched.alpha_bars[2]);  // round to nearest
    CHECK(alpha_bar_at(sched, 200.0) == sched.alpha_bars[199]);  // clamped at T-1
    CHECK(alpha_bar_at(sched, 41.5) == sched.alpha_bars[42]);
    CHECK_THROWS_AS(alpha_bar_at(sched, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(alpha_bar_at(sched, 200.5), std::invalid_argument);
}

TEST_CASE("schedule kind parsing") {
    CHECK(sampler_kind_from_string("linear") == SamplerKind::Linear);
    CHECK(sampler_kind_from_string("unit_hyperbola") == SamplerKind::UnitHyperbola);
    CHECK_THROWS_AS(sampler_kind_from_string("cosine"), std::invalid_argument);
}
