#include <doctest.h>

#include <cmath>

#include "gossip/analytic.hpp"
#include "gossip/oracle.hpp"
#include "gossip/stats.hpp"

using namespace gossip;

TEST_CASE("pull transition is the binomial law") {
    const auto d = transition_pull(4, 2);
    REQUIRE(d.probs.size() == 3);
    CHECK(d.probs[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(d.probs[1] == doctest::Approx(0.50).epsilon(1e-14));
    CHECK(d.probs[2] == doctest::Approx(0.25).epsilon(1e-14));

    // k = n-1 is a Bernoulli((n-1)p/n)
    const auto b = transition_pull(8, 7, 0.5);
    CHECK(b.probs[1] == doctest::Approx(0.5 * 7.0 / 8.0).epsilon(1e-14));

    CHECK(transition_pull(10, 3).marginal_pk() == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("push transition tiny cases") {
    const auto d1 = transition_push(3, 1);
    CHECK(d1.probs[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(d1.probs[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-13));

    const auto d2 = transition_push(3, 2);
    CHECK(d2.probs[1] == doctest::Approx(5.0 / 9.0).epsilon(1e-13));
}

TEST_CASE("transition rows sum to one and match the closed-form marginals (n <= 64)") {
    for (const double p : {1.0, 0.5}) {
        for (std::int64_t n = 4; n <= 64; n *= 2) {
            for (std::int64_t k = 1; k < n; ++k) {
                CAPTURE(p);
                CAPTURE(n);
                CAPTURE(k);
                const auto push = transition_push(n, k, p);
                double sum = 0;
                for (const double v : push.probs) {
                    REQUIRE(v >= 0.0);
                    REQUIRE(v <= 1.0 + 1e-12);
                    sum += v;
                }
                REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
                const double push_pk = 1.0 - std::pow(1.0 - p / static_cast<double>(n), static_cast<double>(k));
                REQUIRE(push.marginal_pk() == doctest::Approx(push_pk).epsilon(1e-12));

                const auto pp = transition_push_pull(n, k, p);
                const double pp_pk = success_probability(ProtocolSpec::push_pull(p), n, k).value;
                REQUIRE(pp.marginal_pk() == doctest::Approx(pp_pk).epsilon(1e-12));

                const double pull_pk = success_probability(ProtocolSpec::pull(p), n, k).value;
                REQUIRE(transition_pull(n, k, p).marginal_pk() == doctest::Approx(pull_pk).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("variance of the round law stays below its mean for the classics") {
    // negative or zero covariances: Var[X] <= E[X]
    for (std::int64_t n : {16, 64}) {
        for (std::int64_t k = 1; k < n; ++k) {
            REQUIRE(transition_push(n, k).variance() <= transition_push(n, k).mean() + 1e-9);
            REQUIRE(transition_pull(n, k).variance() <= transition_pull(n, k).mean() + 1e-9);
            REQUIRE(transition_push_pull(n, k).variance() <= transition_push_pull(n, k).mean() + 1e-9);
        }
    }
}

TEST_CASE("transition laws match simulated rounds (chi-square)") {
    struct Case {
        ProtocolSpec spec;
        std::int64_t n, k;
    };
    const Case cases[] = {
        {ProtocolSpec::push(), 10, 3},
        {ProtocolSpec::push_pull(), 4, 2},
        {ProtocolSpec::push_pull(0.5), 12, 5},
        {ProtocolSpec::pull(0.5), 12, 5},
    };
    for (const auto& c : cases) {
        CAPTURE(protocol_name(c.spec.kind));
        const auto samples = sample_round_law(c.spec, c.n, c.k, 200000, 0x0C11 + c.n);
        std::vector<std::int64_t> counts(static_cast<std::size_t>(c.n - c.k) + 1, 0);
        for (const auto s : samples) ++counts[static_cast<std::size_t>(s)];
        const auto law = transition_fn_for(c.spec)(c.n, c.k);
        const auto res = chi_square_gof(counts, law.probs);
        CHECK(res.p_value > 0.001);
    }
}

TEST_CASE("exact expected spreading times at n=2") {
    CHECK(exact_expected_time(transition_fn_for(ProtocolSpec::pull()), 2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(exact_expected_time(transition_fn_for(ProtocolSpec::push()), 2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(exact_expected_time(transition_fn_for(ProtocolSpec::push_pull()), 2) ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("exact expected pull time increases with n") {
    double prev = 0;
    for (std::int64_t n = 2; n <= 64; ++n) {
        const double e = exact_expected_time(transition_fn_for(ProtocolSpec::pull()), n);
        REQUIRE(e > prev);
        prev = e;
    }
}

TEST_CASE("absorbing trap is reported") {
    const TransitionFn stuck = [](std::int64_t n, std::int64_t k) {
        TransitionDistribution d{n, k, std::vector<double>(static_cast<std::size_t>(n - k) + 1, 0.0)};
        d.probs[0] = 1.0;
        return d;
    };
    CHECK_THROWS_AS(exact_expected_time(stuck, 4), AbsorbingTrapError);
}

TEST_CASE("spreading time distribution: pull at n=2 is geometric") {
    const auto law = spreading_time_distribution(transition_fn_for(ProtocolSpec::pull()), 2, 40);
    // Pr[T = t] = (1/2)^t
    for (std::int64_t t = 1; t <= 10; ++t)
        CHECK(law[static_cast<std::size_t>(t)] == doctest::Approx(std::pow(0.5, static_cast<double>(t))).epsilon(1e-12));
    double mean = 0, mass = 0;
    for (std::size_t t = 1; t < law.size(); ++t) {
        mean += static_cast<double>(t) * law[t];
        mass += law[t];
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mean == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("oracle rejects protocols without an exchangeable closed-form round law") {
    CHECK_THROWS_AS(transition_fn_for(ProtocolSpec::single_call_pull()), UnsupportedError);
    CHECK_THROWS_AS(transition_fn_for(ProtocolSpec::dynamic_gnp_push(1.0)), UnsupportedError);
}

TEST_CASE("monte carlo means sit within 3 standard errors of the exact value") {
    // the oracle-vs-simulation cross-check at one unit-test size
    const ProtocolSpec spec = ProtocolSpec::push();
    const std::int64_t n = 32;
    const double exact = exact_expected_time(transition_fn_for(spec), n);
    const auto batch = run_batch(spec, n, 30000, 0x9A3E57);
    const Summary s = summarize(batch);
    const double se = std::sqrt(s.variance / static_cast<double>(s.trials));
    CHECK(std::abs(s.mean - exact) <= 3.0 * se);
}
