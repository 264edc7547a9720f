#include <doctest.h>

#include "test_util.hpp"

#include <cmath>

#include "gossip/rng.hpp"
#include "gossip/stats.hpp"

using namespace gossip;

namespace {

// synthetic batch with spreading times = 1 + Geom(p), failures before success
std::vector<TrialResult> geometric_batch(double p, std::int64_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TrialResult> batch(static_cast<std::size_t>(count));
    for (auto& t : batch) {
        std::int64_t rounds = 1;
        while (!rng.chance(p)) ++rounds;
        t.spreading_time = rounds;
        t.completed = true;
    }
    return batch;
}

} // namespace

TEST_CASE("quantile and chi-square helpers against known values") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-4));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1));
    CHECK(student_t_quantile(0.975, 1e9) == doctest::Approx(1.959964).epsilon(1e-4));
    CHECK(chi_square_survival(3.841, 1) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(chi_square_survival(18.307, 10) == doctest::Approx(0.05).epsilon(2e-3));
}

TEST_CASE("linear fit recovers an exact line") {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    const std::vector<double> y = {3.5, 5.5, 7.5, 9.5, 11.5};
    const auto fit = linear_fit(x, y);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("summarize basics") {
    std::vector<TrialResult> constant(5);
    for (auto& t : constant) t.spreading_time = 7;
    const Summary s = summarize(constant);
    CHECK(s.mean == 7.0);
    CHECK(s.variance == 0.0);
    CHECK(s.ci_halfwidth == 0.0);
    CHECK(s.histogram.size() == 1);

    // CI shrinks like 1/sqrt(trials) on i.i.d. data
    const Summary s1 = summarize(geometric_batch(0.5, 4000, 1));
    const Summary s2 = summarize(geometric_batch(0.5, 16000, 2));
    CHECK(s2.ci_halfwidth < s1.ci_halfwidth);
    CHECK(s1.ci_halfwidth / s2.ci_halfwidth == doctest::Approx(2.0).epsilon(0.2));

    // geometric with p=1/2: mean 2 within 3 sigma
    const Summary g = summarize(geometric_batch(0.5, 100000, 3));
    CHECK_NEAR(g.mean, 2.0, 3 * std::sqrt(g.variance / static_cast<double>(g.trials)));
}

TEST_CASE("tail fit recovers geometric slopes") {
    for (const double p : {0.3, 0.5, 0.7}) {
        CAPTURE(p);
        const auto batch = geometric_batch(p, 1000000, 77 + static_cast<std::uint64_t>(p * 10));
        const TailFit fit = fit_tail(batch, 8);
        CHECK_NEAR(fit.slope, std::log(1.0 - p), 0.05);
        CHECK(fit.r2 > 0.98);
    }
}

TEST_CASE("deterministic spreading times have no usable tail") {
    std::vector<TrialResult> batch(1000);
    for (auto& t : batch) t.spreading_time = 12;
    CHECK_THROWS_AS(fit_tail(batch, 8), InsufficientTailError);
}

TEST_CASE("pairwise covariance signs") {
    // pull informs nodes independently: covariance 0 within noise
    const auto pull = estimate_pairwise_covariance(ProtocolSpec::pull(), 64, 16, 300000, 0x10);
    CHECK(std::abs(pull.covariance) <= 3.0 * pull.se);
    CHECK(pull.p1 == doctest::Approx(0.25).epsilon(0.02));

    // push: negative covariance
    const auto push = estimate_pairwise_covariance(ProtocolSpec::push(), 64, 8, 300000, 0x11);
    CHECK(push.covariance <= 3.0 * push.se);

    // push-pull: negative covariance
    const auto pp = estimate_pairwise_covariance(ProtocolSpec::push_pull(), 64, 8, 300000, 0x12);
    CHECK(pp.covariance <= 3.0 * pp.se);
}

TEST_CASE("gap series: push stays inside the known expectation band") {
    const GapSeries series = gap_series(ProtocolSpec::push(), {256, 1024}, 600, 0x5EED);
    REQUIRE(series.points.size() == 2);
    for (const auto& pt : series.points) {
        CAPTURE(pt.n);
        // E[T] in [floor(log2 n) + ln n - 1.116, ceil(log2 n) + ln n + 2.765 + o(1)],
        // i.e. the gap against log2 n + ln n lies within [-1.116 - 1, 2.765 + 1]
        CHECK(pt.gap >= -2.116 - pt.ci_halfwidth);
        CHECK(pt.gap <= 3.765 + pt.ci_halfwidth);
    }
}

TEST_CASE("message growth distinguishes loglog from log trends") {
    // fault-free push-pull with the age limit: transmissions/n flattens;
    // faulty push-pull to completion keeps a log n slope. Unit-scale sizes.
    const std::vector<std::int64_t> sizes = {1 << 10, 1 << 12, 1 << 14};
    const MessageGrowth limited =
        message_growth(ProtocolSpec::push_pull(), StoppingPolicy::with_age_limit(), sizes, 60, 0xA0);
    const MessageGrowth faulty = message_growth(ProtocolSpec::push_pull(0.5), {}, sizes, 60, 0xA1);
    CHECK(limited.points.size() == 3);
    CHECK(faulty.fit_log.slope > 0);
    // faulty push-pull transmissions/n grows much faster
    CHECK(faulty.points.back().transmissions_per_node > limited.points.back().transmissions_per_node);
}
