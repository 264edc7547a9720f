#include <doctest.h>

#include "test_util.hpp"

#include <cmath>

#include "gossip/analytic.hpp"

using namespace gossip;

TEST_CASE("success_probability spot values and tagging") {
    CHECK(success_probability(ProtocolSpec::push_pull(), 10, 5).value == doctest::Approx(0.704755).epsilon(1e-6));
    CHECK(success_probability(ProtocolSpec::pull(), 100, 99).value == doctest::Approx(0.99).epsilon(1e-12));
    CHECK_FALSE(success_probability(ProtocolSpec::push(), 10, 5).is_asymptotic);

    const auto sc = success_probability(ProtocolSpec::single_call_push_pull(), 1 << 20, 1 << 19);
    CHECK(sc.is_asymptotic);
    const double c = 1.0 - 1.0 / std::exp(1.0);
    CHECK(sc.value == doctest::Approx(c - 0.25 * c * c).epsilon(1e-12));

    CHECK(success_probability(ProtocolSpec::dynamic_gnp_push(1.0), 1024, 16).is_asymptotic);
    CHECK_THROWS_AS(success_probability(ProtocolSpec::transition_push_pull(), 64, 8), UnsupportedError);
    CHECK(has_exact_pk(ProtocolSpec::r_push_pull(CallDistribution::constant(1))));
    CHECK_FALSE(has_exact_pk(ProtocolSpec::dynamic_gnp_push(2.0)));
}

TEST_CASE("predictions reproduce the headline formulas at n = 2^20") {
    const std::int64_t n = 1 << 20;
    const double ln_n = std::log(static_cast<double>(n));

    CHECK(predict(ProtocolSpec::push(), n).value == doctest::Approx(20.0 + ln_n).epsilon(1e-9));
    CHECK(predict(ProtocolSpec::push(0.5), n).value ==
          doctest::Approx(ln_n / std::log(1.5) + 2.0 * ln_n).epsilon(1e-9));
    CHECK(predict(ProtocolSpec::pull(), n).value ==
          doctest::Approx(20.0 + std::log2(ln_n)).epsilon(1e-9));
    CHECK(predict(ProtocolSpec::push_pull(), n).value ==
          doctest::Approx(ln_n / std::log(3.0) + std::log2(ln_n)).epsilon(1e-9));
    CHECK(predict(ProtocolSpec::push_pull(0.5), n).value ==
          doctest::Approx(20.0 + ln_n / (0.5 + std::log(2.0))).epsilon(1e-9));

    // dynamic graph: log_{2-e^-a} n + ln n / (1 - e^-a)
    const Prediction dyn = predict(ProtocolSpec::dynamic_gnp_push(1.0), n);
    CHECK(dyn.growth_base == doctest::Approx(2.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(*dyn.shrink_coefficient == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-12));
    CHECK(dyn.value == doctest::Approx(ln_n / std::log(2.0 - std::exp(-1.0)) + ln_n / (1.0 - std::exp(-1.0)))
                           .epsilon(1e-12));

    // single-call variants
    const Prediction scpp = predict(ProtocolSpec::single_call_push_pull(), n);
    CHECK(scpp.growth_base == doctest::Approx(3.0 - 2.0 / std::exp(1.0)).epsilon(1e-12));
    CHECK(*scpp.shrink_coefficient == doctest::Approx(0.5).epsilon(1e-12));
    const Prediction scp = predict(ProtocolSpec::single_call_pull(), n);
    CHECK(scp.growth_base == doctest::Approx(2.0 - 1.0 / std::exp(1.0)).epsilon(1e-12));
    CHECK(*scp.shrink_loglog_base == doctest::Approx(2.0).epsilon(1e-12));

    // multiple calls: R uniform on {0,1,2} has E[R]=1, Pr[R=0]=1/3
    const auto rpp = predict(ProtocolSpec::r_push_pull(CallDistribution::uniform(0, 2)), n);
    CHECK(rpp.growth_base == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(*rpp.shrink_coefficient == doctest::Approx(1.0 / (1.0 - std::log(1.0 / 3.0))).epsilon(1e-12));
    // minimal support 1: double logarithmic end phase with base 2
    const auto rpp1 = predict(ProtocolSpec::r_push_pull(CallDistribution::uniform(1, 3)), n);
    CHECK(*rpp1.shrink_loglog_base == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("exactly one shrink term per prediction") {
    const std::int64_t n = 4096;
    const ProtocolSpec specs[] = {
        ProtocolSpec::push(),         ProtocolSpec::pull(),       ProtocolSpec::pull(0.5),
        ProtocolSpec::push_pull(),    ProtocolSpec::push_pull(0.5), ProtocolSpec::dynamic_gnp_push(2.0),
        ProtocolSpec::r_push(CallDistribution::uniform(0, 2)),
        ProtocolSpec::r_push_pull(CallDistribution::uniform(0, 2)),
        ProtocolSpec::single_call_pull(), ProtocolSpec::single_call_push_pull(),
        ProtocolSpec::transition_push_pull(),
    };
    for (const auto& spec : specs) {
        const Prediction p = predict(spec, n);
        CHECK(p.shrink_coefficient.has_value() != p.shrink_loglog_base.has_value());
        CHECK(p.growth_base > 1.0);
    }
}

TEST_CASE("predictions increase with n") {
    const ProtocolSpec specs[] = {
        ProtocolSpec::push(),       ProtocolSpec::pull(),
        ProtocolSpec::push_pull(),  ProtocolSpec::push_pull(0.5),
        ProtocolSpec::dynamic_gnp_push(0.5),
        ProtocolSpec::r_push_pull(CallDistribution::uniform(0, 2)),
        ProtocolSpec::single_call_pull(),
        ProtocolSpec::single_call_push_pull(),
        ProtocolSpec::transition_push_pull(),
    };
    for (const auto& spec : specs) {
        CAPTURE(protocol_name(spec.kind));
        double prev = 0;
        for (std::int64_t n = 64; n <= (1 << 20); n *= 2) {
            const double v = predict(spec, n).value;
            REQUIRE(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("regime classification matches the per-protocol derivations") {
    const auto push = classify_regimes(ProtocolSpec::push());
    CHECK(push.gamma == doctest::Approx(1.0));
    CHECK(push.shrink_kind == ShrinkKind::Exponential);
    CHECK(push.rho == doctest::Approx(1.0));

    const auto pp = classify_regimes(ProtocolSpec::push_pull());
    CHECK(pp.gamma == doctest::Approx(2.0));
    CHECK(pp.shrink_kind == ShrinkKind::DoubleExponential);
    CHECK(pp.ell == doctest::Approx(2.0));

    const auto ppf = classify_regimes(ProtocolSpec::push_pull(0.5));
    CHECK(ppf.gamma == doctest::Approx(1.0));
    CHECK(ppf.shrink_kind == ShrinkKind::Exponential);
    CHECK(ppf.rho == doctest::Approx(0.5 + std::log(2.0)).epsilon(1e-12));

    const auto dyn = classify_regimes(ProtocolSpec::dynamic_gnp_push(1.0));
    CHECK(dyn.gamma == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(dyn.rho == doctest::Approx(dyn.gamma).epsilon(1e-12));
}

TEST_CASE("growth conditions hold for the classics and reject an inflated gamma") {
    for (const auto& spec : {ProtocolSpec::push(), ProtocolSpec::pull(), ProtocolSpec::push_pull(),
                             ProtocolSpec::push_pull(0.5), ProtocolSpec::single_call_pull()}) {
        CAPTURE(protocol_name(spec.kind));
        const auto report = verify_growth_conditions(spec, 1024, classify_regimes(spec));
        CHECK(report.passed);
    }

    auto wrong = classify_regimes(ProtocolSpec::push());
    wrong.gamma = 1.5;
    const auto report = verify_growth_conditions(ProtocolSpec::push(), 1024, wrong);
    CHECK_FALSE(report.passed);
    CHECK(report.first_violation_k >= 1);
    CHECK(report.first_violation_k < 100);  // fails already at small k
}

namespace {

RegimeParams ledger_regime(double gamma, double a, double b, double c, double f) {
    RegimeParams r;
    r.gamma = gamma;
    r.growth_a_upper = a;
    r.growth_b = b;
    r.growth_c = c;
    r.f = f;
    return r;
}

} // namespace

TEST_CASE("growth ledger: pure doubling limit") {
    // a=0, b=0, A -> 0: k_1 -> 2
    const auto ledger = growth_phase_ledger(ledger_regime(1.0, 0.0, 0.0, 0.0, 0.4), 1 << 30, 1e-9, 0.75);
    CHECK(ledger.targets[1] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("growth ledger failure probabilities follow the Cantelli-capped formula") {
    const double A = 0.1, B = 0.75, gamma = 1.0, c = 0.0;
    const auto regime = ledger_regime(gamma, 1.0, 0.0, c, 0.2);
    const auto ledger = growth_phase_ledger(regime, 1 << 20, A, B);
    const double q1 = (gamma + c) / (A * A);
    const double cap = 1.0 / (1.0 + 1.0 / q1);
    CHECK(cap == doctest::Approx(0.990099).epsilon(1e-5));
    // q(16) = 100 * 16^-0.5 = 25, capped
    CHECK((gamma + c) / (A * A) * std::pow(16.0, -0.5) == doctest::Approx(25.0).epsilon(1e-12));
    for (std::size_t j = 0; j < ledger.failure_probs.size(); ++j) {
        const double q = (gamma + c) / (A * A) * std::pow(ledger.targets[j], 1.0 - 2.0 * B);
        REQUIRE(ledger.failure_probs[j] == doctest::Approx(std::min(q, cap)).epsilon(1e-12));
    }
}

TEST_CASE("growth ledger at the frozen spec constants") {
    // gamma=1, a=1, b=0, c=0, A=0.05, B=0.75, f=0.2, n=2^20. Values frozen
    // from running the recursion itself: J=19 (within the |J - 20| <= 6
    // band) and sum Q ~= 18.9, dominated by the Cantelli-capped early
    // phases.
    const auto ledger = growth_phase_ledger(ledger_regime(1.0, 1.0, 0.0, 0.0, 0.2), 1 << 20, 0.05, 0.75);
    CHECK(ledger.phases == 19);
    CHECK(std::abs(static_cast<double>(ledger.phases) - 20.0) <= 6.0);
    CHECK_NEAR(ledger.sum_q, 18.9, 0.4);
    // k_j >= alpha (1+gamma)^j for a stable positive alpha
    double alpha = 1e300;
    for (std::size_t j = 0; j < ledger.targets.size(); ++j)
        alpha = std::min(alpha, ledger.targets[j] / std::pow(2.0, static_cast<double>(j)));
    CHECK(alpha > 0.5);
}

TEST_CASE("growth ledger degenerates when the amplitude eats the first target") {
    CHECK_THROWS_AS(growth_phase_ledger(ledger_regime(1.0, 1.0, 0.0, 0.0, 0.2), 1 << 16, 1.5, 0.75),
                    DegenerateTargetError);
    // af >= 1 violates the upper growth conditions
    CHECK_THROWS_AS(growth_phase_ledger(ledger_regime(1.0, 3.0, 0.0, 0.0, 0.4), 1 << 16, 0.05, 0.75),
                    InvalidParameterError);
}

TEST_CASE("default growth amplitude lands in the stable window") {
    const auto regime = ledger_regime(1.0, 1.0, 0.0, 0.0, 0.2);
    const double A = default_growth_amplitude(regime, 1 << 20);
    CHECK(A > 0.15);
    CHECK(A < 0.35);
    // alpha extracted from the ledger stays stable across sizes (~1%)
    double alpha_small = 1e300, alpha_large = 1e300;
    const auto small = growth_phase_ledger(regime, 1 << 14, A, 0.75);
    for (std::size_t j = 0; j < small.targets.size(); ++j)
        alpha_small = std::min(alpha_small, small.targets[j] / std::pow(2.0, static_cast<double>(j)));
    const auto large = growth_phase_ledger(regime, 1 << 20, A, 0.75);
    for (std::size_t j = 0; j < large.targets.size(); ++j)
        alpha_large = std::min(alpha_large, large.targets[j] / std::pow(2.0, static_cast<double>(j)));
    CHECK(alpha_small / alpha_large < 1.1);
    CHECK(alpha_large / alpha_small < 1.1);
}

namespace {

RegimeParams shrink_regime(double rho, double a, double c, double g) {
    RegimeParams r;
    r.shrink_kind = ShrinkKind::Exponential;
    r.rho = rho;
    r.shrink_a_upper = a;
    r.shrink_c = c;
    r.g = g;
    return r;
}

RegimeParams dexp_regime(double ell, double a, double c, double g) {
    RegimeParams r;
    r.shrink_kind = ShrinkKind::DoubleExponential;
    r.ell = ell;
    r.shrink_a_upper = a;
    r.shrink_c = c;
    r.g = g;
    return r;
}

} // namespace

TEST_CASE("shrink ledger: pure exponential decay limit") {
    // A -> 0, a=0, rho=1: u_j = g n e^-j and J ~ ln(gn)
    const std::int64_t n = 1 << 16;
    const auto ledger = shrink_phase_ledger_exp(shrink_regime(1.0, 0.0, 0.0, 0.5), n, 1e-9, 0.25);
    const double u0 = 0.5 * static_cast<double>(n);
    for (const std::size_t j : {std::size_t{1}, std::size_t{3}, std::size_t{7}})
        CHECK(ledger.targets[j] == doctest::Approx(u0 * std::exp(-static_cast<double>(j))).epsilon(1e-6));
    CHECK_NEAR(static_cast<double>(ledger.phases), std::log(u0), 2.0);
}

TEST_CASE("shrink ledger stays inside the doubled decay envelope at compliant constants") {
    // push-style shrink constants with a g small enough for the envelope
    // lemma's premise; frozen from the recursion: J = 13
    const std::int64_t n = 1 << 20;
    const auto ledger = shrink_phase_ledger_exp(shrink_regime(1.0, 2.0 / std::exp(1.0), 0.0, 0.1), n, 0.02, 0.25);
    const double u0 = ledger.targets[0];
    for (std::size_t j = 0; j < ledger.targets.size(); ++j)
        REQUIRE(ledger.targets[j] <= 2.0 * u0 * std::exp(-static_cast<double>(j)) + 1e-9);
    CHECK(ledger.phases == 13);
}

TEST_CASE("shrink ledger rejects degenerate targets") {
    // e^-rho + a g >= 1
    CHECK_THROWS_AS(shrink_phase_ledger_exp(shrink_regime(0.1, 2.0 / std::exp(1.0), 0.0, 0.5), 1 << 16, 0.05, 0.25),
                    DegenerateTargetError);
}

TEST_CASE("double-exp ledger: closed form equals the recursion") {
    // a=1, l=2, g=1/4: eps_1 = 1/8 both ways
    CHECK(double_exp_target_closed_form(1.0, 2.0, 0.25, 1) == doctest::Approx(0.125).epsilon(1e-14));
    const auto ledger = shrink_phase_ledger_double(dexp_regime(2.0, 1.0, 0.0, 0.25), 1 << 20, 0.2);
    CHECK(ledger.targets[1] == doctest::Approx(0.125).epsilon(1e-14));
    for (std::size_t j = 0; j < ledger.targets.size(); ++j)
        REQUIRE(ledger.targets[j] ==
                doctest::Approx(double_exp_target_closed_form(1.0, 2.0, 0.25, static_cast<std::int64_t>(j)))
                    .epsilon(1e-12));
}

TEST_CASE("double-exp ledger phase count tracks log2 ln n") {
    const std::int64_t n = 1 << 30;
    const auto ledger = shrink_phase_ledger_double(dexp_regime(2.0, 1.0, 0.0, 0.1), n, 0.2);
    const double expect = std::log2(std::log(static_cast<double>(n)));
    CHECK_NEAR(static_cast<double>(ledger.phases), expect, 3.0);
}

TEST_CASE("double-exp ledger rejects a non-decreasing sequence") {
    CHECK_THROWS_AS(shrink_phase_ledger_double(dexp_regime(2.0, 1.0, 0.0, 0.5), 1 << 16, 0.2),
                    NonDecreasingSequenceError);
    CHECK_THROWS_AS(shrink_phase_ledger_double(dexp_regime(2.0, 1.0, 0.0, 0.1), 1 << 16, 0.3),
                    InvalidParameterError);  // alpha >= 1/(2 ell)
}

TEST_CASE("connect bound") {
    const std::int64_t n = 1024;
    const auto b = connect_bound(n, n / 4, n / 2, 0.5);
    CHECK(b.expected == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(b.tail(10) == doctest::Approx(1.5 * std::pow(2.0, -10.0)).epsilon(1e-12));

    // m = l + 1 with p near 1: about one round
    const auto c = connect_bound(n, 512, 513, 1.0 - 1e-9);
    CHECK(c.expected == doctest::Approx(1.0).epsilon(0.01));

    CHECK_THROWS_AS(connect_bound(n, 10, 10, 0.5), InvalidParameterError);
    CHECK_THROWS_AS(connect_bound(n, 10, 20, 1.0), InvalidParameterError);
}

TEST_CASE("overshoot bound shrinks like 1/n") {
    // pull below n/2: p_k <= 1/2, c = 0; landing window [n/2, 0.9n]
    const double b1 = connect_overshoot_bound(1024, 0.5, 0.9, 0.5, 0.0);
    const double b2 = connect_overshoot_bound(4096, 0.5, 0.9, 0.5, 0.0);
    CHECK(b1 == doctest::Approx(0.5 / (1024.0 * 0.15 * 0.15)).epsilon(1e-12));
    CHECK(b1 / b2 == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(connect_overshoot_bound(1024, 0.5, 0.6, 0.5, 0.0), InvalidParameterError);
}
