#include <doctest.h>

#include <set>

#include "gossip/core.hpp"
#include "gossip/rng.hpp"

using namespace gossip;

TEST_CASE("derive_trial_seed is deterministic and collision-free across indices") {
    CHECK(derive_trial_seed(42, 0) == derive_trial_seed(42, 0));

    Rng rng(123);
    for (int s = 0; s < 10000; ++s) {
        const std::uint64_t root = rng.next();
        CHECK(derive_trial_seed(root, 0) != derive_trial_seed(root, 1));
    }
    std::set<std::uint64_t> seen;
    for (std::int64_t i = 0; i < 4096; ++i) seen.insert(derive_trial_seed(7, i));
    CHECK(seen.size() == 4096);
}

TEST_CASE("rng bounded draws are in range and roughly uniform") {
    Rng rng(99);
    std::int64_t counts[7] = {0};
    for (int i = 0; i < 70000; ++i) {
        const auto v = rng.below(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    for (const auto c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("validate_spec accepts the defaults and rejects boundary violations") {
    CHECK(validate_spec(ProtocolSpec::push()).empty());

    ProtocolSpec bad = ProtocolSpec::pull();
    bad.success_prob = 0.0;
    CHECK_FALSE(validate_spec(bad).empty());

    CallDistribution d;
    d.probs = {0.3, 0.4, 0.3};
    const ProtocolSpec rp = ProtocolSpec::r_push(d);
    CHECK(validate_spec(rp).empty());
    CHECK(rp.call_distribution->mean() == doctest::Approx(1.0).epsilon(1e-12));

    // sums off by more than 1e-12 are rejected
    ProtocolSpec rp_bad = rp;
    rp_bad.call_distribution->probs = {0.3, 0.4, 0.3 + 1e-9};
    CHECK_FALSE(validate_spec(rp_bad).empty());

    // parameters on the wrong kind are violations
    ProtocolSpec push_with_density = ProtocolSpec::push();
    push_with_density.edge_density = 1.0;
    CHECK_FALSE(validate_spec(push_with_density).empty());

    ProtocolSpec dyn = ProtocolSpec::dynamic_gnp_push(0.0);
    CHECK_FALSE(validate_spec(dyn).empty());
}

TEST_CASE("r-push-pull records a positive minimal support point") {
    CallDistribution d;
    d.probs = {0.0, 0.5, 0.5};
    CHECK(d.min_support() == 1);
    CHECK(validate_spec(ProtocolSpec::r_push_pull(d)).empty());
}

TEST_CASE("SimState keeps the informed prefix consistent") {
    SimState s(8, 1);
    CHECK(s.informed_count() == 1);
    CHECK(s.informed(0));
    CHECK_FALSE(s.informed(5));
    s.inform(5);
    s.inform(5);  // idempotent
    CHECK(s.informed_count() == 2);
    CHECK(s.informed(5));
    std::int64_t flags = 0;
    for (std::uint32_t v = 0; v < 8; ++v) flags += s.informed(v);
    CHECK(flags == s.informed_count());

    s.rollback_informed(1);
    CHECK_FALSE(s.informed(5));
    CHECK(s.informed(0));
}
