#include "gossip/analytic.hpp"

#include <cmath>
#include <sstream>

namespace gossip {

namespace {

double pow_int(double base, std::int64_t e) { return std::pow(base, static_cast<double>(e)); }

// Pr[a uniform j-subset of n nodes avoids all k informed] summed over R.
double r_pull_miss_probability(const CallDistribution& dist, std::int64_t n, std::int64_t k) {
    double total = 0;
    for (std::size_t r = 0; r < dist.probs.size(); ++r) {
        const double pr = dist.probs[r];
        if (pr == 0) continue;
        double miss = 1.0;
        for (std::size_t i = 0; i < r; ++i) {
            const double denom = static_cast<double>(n) - static_cast<double>(i);
            miss *= std::max(0.0, (denom - static_cast<double>(k)) / denom);
        }
        total += pr * miss;
    }
    return total;
}

} // namespace

bool has_exact_pk(const ProtocolSpec& spec) {
    switch (spec.kind) {
        case ProtocolKind::Push:
        case ProtocolKind::Pull:
        case ProtocolKind::PushPull:
        case ProtocolKind::RPush:
        case ProtocolKind::RPushPull:
        case ProtocolKind::SingleCallPull:
            return true;
        default:
            return false;
    }
}

PkValue success_probability(const ProtocolSpec& spec, std::int64_t n, std::int64_t k) {
    validate_spec_or_throw(spec);
    if (k < 1 || k >= n) throw InvalidParameterError("success_probability requires 1 <= k < n");
    if (!spec.include_self)
        throw UnsupportedError("closed forms assume the self-call convention (include_self=true)");
    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);
    const double p = spec.success_prob;

    switch (spec.kind) {
        case ProtocolKind::Push:
            return {1.0 - pow_int(1.0 - p / dn, k), false, 0.0};
        case ProtocolKind::Pull:
            return {p * dk / dn, false, 0.0};
        case ProtocolKind::PushPull:
            return {1.0 - (1.0 - p * dk / dn) * pow_int(1.0 - p / dn, k), false, 0.0};
        case ProtocolKind::RPush: {
            const double er = spec.call_distribution->mean();
            return {1.0 - pow_int(1.0 - er / dn, k), false, 0.0};
        }
        case ProtocolKind::RPushPull: {
            const double er = spec.call_distribution->mean();
            const double miss_push = pow_int(1.0 - er / dn, k);
            const double miss_pull = r_pull_miss_probability(*spec.call_distribution, n, k);
            return {1.0 - miss_push * miss_pull, false, 0.0};
        }
        case ProtocolKind::SingleCallPull: {
            const double u = dn - dk;
            return {dk / u * (1.0 - pow_int(1.0 - 1.0 / dn, n - k)), false, 0.0};
        }
        case ProtocolKind::SingleCallPushPull: {
            // eq. for the informing probability at fraction f, up to O(1/n)
            const double f = dk / dn;
            const double c = 1.0 - 1.0 / std::exp(1.0);
            return {2.0 * f * c - f * f * c * c, true, f / dn};
        }
        case ProtocolKind::DynamicGnpPush: {
            const double a = *spec.edge_density;
            const double gamma = 1.0 - std::exp(-a);
            return {1.0 - pow_int(1.0 - gamma / dn, k), true, dk / (dn * dn)};
        }
        case ProtocolKind::TransitionTimePushPull:
            throw UnsupportedError("transition-time push-pull is not homogeneous; p_k depends on the round");
    }
    throw UnsupportedError("unreachable");
}

Prediction predict(const ProtocolSpec& spec, std::int64_t n) {
    validate_spec_or_throw(spec);
    if (n < 2) throw InvalidParameterError("predict requires n >= 2");
    const double ln_n = std::log(static_cast<double>(n));
    const double p = spec.success_prob;

    Prediction pred;
    switch (spec.kind) {
        case ProtocolKind::Push:
            pred.growth_base = 1.0 + p;
            pred.shrink_coefficient = 1.0 / p;
            break;
        case ProtocolKind::Pull:
            pred.growth_base = 1.0 + p;
            if (p < 1.0)
                pred.shrink_coefficient = 1.0 / std::log(1.0 / (1.0 - p));
            else
                pred.shrink_loglog_base = 2.0;
            break;
        case ProtocolKind::PushPull:
            pred.growth_base = 1.0 + 2.0 * p;
            if (p < 1.0)
                pred.shrink_coefficient = 1.0 / (p + std::log(1.0 / (1.0 - p)));
            else
                pred.shrink_loglog_base = 2.0;
            break;
        case ProtocolKind::DynamicGnpPush: {
            const double gamma = 1.0 - std::exp(-*spec.edge_density);
            pred.growth_base = 1.0 + gamma;
            pred.shrink_coefficient = 1.0 / gamma;
            break;
        }
        case ProtocolKind::RPush: {
            const double er = spec.call_distribution->mean();
            if (er <= 0) throw UnsupportedError("r-push with E[R] = 0 never spreads");
            pred.growth_base = 1.0 + er;
            pred.shrink_coefficient = 1.0 / er;
            break;
        }
        case ProtocolKind::RPushPull: {
            const auto& dist = *spec.call_distribution;
            const double er = dist.mean();
            if (er <= 0) throw UnsupportedError("r-push-pull with E[R] = 0 never spreads");
            pred.growth_base = 1.0 + 2.0 * er;
            const int ell = dist.min_support();
            if (ell == 0)
                pred.shrink_coefficient = 1.0 / (er - std::log(dist.prob_zero()));
            else
                pred.shrink_loglog_base = 1.0 + static_cast<double>(ell);
            break;
        }
        case ProtocolKind::SingleCallPull:
            pred.growth_base = 2.0 - 1.0 / std::exp(1.0);
            pred.shrink_loglog_base = 2.0;
            break;
        case ProtocolKind::SingleCallPushPull:
            pred.growth_base = 3.0 - 2.0 / std::exp(1.0);
            pred.shrink_coefficient = 0.5;
            break;
        case ProtocolKind::TransitionTimePushPull:
            pred.growth_base = 3.0 - 2.0 / std::exp(1.0);
            pred.shrink_loglog_base = 2.0;
            break;
    }

    pred.value = ln_n / std::log(pred.growth_base);
    if (pred.shrink_coefficient)
        pred.value += *pred.shrink_coefficient * ln_n;
    else if (pred.shrink_loglog_base)
        pred.value += std::log(ln_n) / std::log(*pred.shrink_loglog_base);
    return pred;
}

RegimeParams classify_regimes(const ProtocolSpec& spec) {
    validate_spec_or_throw(spec);
    const double p = spec.success_prob;
    RegimeParams r;
    switch (spec.kind) {
        case ProtocolKind::Push:
            r.gamma = p;
            r.f = 0.5;
            r.growth_a_upper = 1.0;  // p_k >= pk/n (1 - pk/2n), a=1 covers every p
            r.growth_a_lower = 0.0;
            r.shrink_kind = ShrinkKind::Exponential;
            r.rho = p;
            r.g = 0.5;
            r.shrink_a_upper = 2.0 * p * std::exp(-p);
            r.shrink_a_lower = 0.0;
            r.notes = "bounds derived from the closed form";
            break;
        case ProtocolKind::Pull:
            r.gamma = p;
            r.f = 0.5;
            r.growth_a_upper = 0.0;  // p_k = pk/n exactly
            r.growth_a_lower = 0.0;
            if (p < 1.0) {
                r.shrink_kind = ShrinkKind::Exponential;
                r.rho = std::log(1.0 / (1.0 - p));
                r.shrink_a_upper = p;
                r.shrink_a_lower = p;
                r.g = 0.5;
            } else {
                r.shrink_kind = ShrinkKind::DoubleExponential;
                r.ell = 2.0;
                r.shrink_a_upper = 1.0;  // 1 - p_{n-u} = u/n exactly
                r.shrink_a_lower = 1.0;
                r.g = 0.5;
            }
            r.notes = "bounds derived from the closed form";
            break;
        case ProtocolKind::PushPull:
            r.gamma = 2.0 * p;
            r.f = 0.5;
            r.growth_a_upper = 0.75;  // 2pk/n - 3p^2k^2/2n^2 bound
            r.growth_a_lower = 0.0;
            if (p < 1.0) {
                r.shrink_kind = ShrinkKind::Exponential;
                r.rho = p + std::log(1.0 / (1.0 - p));
                r.shrink_a_upper = 3.0 * p * std::exp(-p);
                r.shrink_a_lower = p * std::exp(-p);
                r.g = std::min(0.5, 0.9 * (1.0 - std::exp(-r.rho)) / r.shrink_a_upper);
            } else {
                r.shrink_kind = ShrinkKind::DoubleExponential;
                r.ell = 2.0;
                r.shrink_a_upper = 1.0;
                r.shrink_a_lower = 1.0 / std::exp(1.0);
                r.g = 0.5;
            }
            r.notes = "bounds derived from the closed form";
            break;
        case ProtocolKind::DynamicGnpPush: {
            const double gamma = 1.0 - std::exp(-*spec.edge_density);
            r.gamma = gamma;
            r.f = 0.5;
            r.growth_a_upper = 1.0;  // module default; the tight bound is (1-e^-a)/2 + O(1/n)
            r.growth_a_lower = 1.0;  // module default for the O(1/n) upper slack
            r.growth_b = 1.0;
            r.shrink_kind = ShrinkKind::Exponential;
            r.rho = gamma;  // lower-shrinking O(log^2 n / n) correction ignored
            r.shrink_a_upper = 2.0 * gamma * std::exp(-gamma);
            r.shrink_a_lower = 0.0;
            r.g = std::min(0.5, 0.9 * (1.0 - std::exp(-r.rho)) / r.shrink_a_upper);
            r.notes = "gamma/rho derived; a,b bounds are module defaults";
            break;
        }
        case ProtocolKind::RPush: {
            const double er = spec.call_distribution->mean();
            const double c = spec.call_distribution->variance() + er * er;
            r.gamma = er;
            r.f = std::min(0.5, 0.45 / std::max(1.0, er));
            r.growth_a_upper = er / 2.0;
            r.growth_a_lower = 0.0;
            r.growth_c = c;
            r.shrink_kind = ShrinkKind::Exponential;
            r.rho = er;
            r.shrink_a_upper = 2.0 * er * std::exp(-er);
            r.shrink_a_lower = 0.0;
            r.shrink_c = c;
            r.g = std::min(0.5, 0.9 * (1.0 - std::exp(-r.rho)) / std::max(1e-9, r.shrink_a_upper));
            r.notes = "gamma/rho derived; covariance constant Var[R]+E[R]^2";
            break;
        }
        case ProtocolKind::RPushPull: {
            const auto& dist = *spec.call_distribution;
            const double er = dist.mean();
            const double c = 2.0 * (dist.variance() + er * er);
            const int ell = dist.min_support();
            r.gamma = 2.0 * er;
            r.f = std::min(0.5, 0.45 / std::max(1.0, er));
            r.growth_a_upper = c;  // module default covering the O(k^2/n^2) slack
            r.growth_a_lower = c;
            r.growth_c = c;
            if (ell == 0) {
                r.shrink_kind = ShrinkKind::Exponential;
                r.rho = er - std::log(dist.prob_zero());
                r.shrink_a_upper = 1.0 + er;  // module default
                r.shrink_a_lower = 0.0;
                r.shrink_c = c;
                r.g = std::min(0.5, 0.9 * (1.0 - std::exp(-r.rho)) / r.shrink_a_upper);
            } else {
                r.shrink_kind = ShrinkKind::DoubleExponential;
                r.ell = 1.0 + static_cast<double>(ell);
                r.shrink_a_upper = 1.0;
                r.shrink_a_lower = std::exp(-er) * dist.probs[static_cast<std::size_t>(ell)];
                r.shrink_c = c;
                r.g = std::min(0.5, 0.9 * std::pow(2.0, -1.0 / (r.ell - 1.0)));
            }
            r.notes = "gamma/rho/ell derived; a bounds are module defaults";
            break;
        }
        case ProtocolKind::SingleCallPull:
            r.gamma = 1.0 - 1.0 / std::exp(1.0);
            r.growth_a_upper = 4.0 / r.gamma;  // from (1-1/e)k/n - 4k^2/n^2 <= p_k
            r.growth_a_lower = 2.0;            // from p_k <= (1-1/e)k/n + 2(1-1/e)k^2/n^2
            r.f = std::min(0.5, 0.9 / r.growth_a_upper);
            r.shrink_kind = ShrinkKind::DoubleExponential;
            r.ell = 2.0;
            r.shrink_a_upper = 1.5;  // u/n <= 1 - p_{n-u} <= 3u/2n
            r.shrink_a_lower = 1.0;
            r.g = std::min(0.5, 0.9 / r.shrink_a_upper);
            r.notes = "bounds derived from the closed form";
            break;
        case ProtocolKind::SingleCallPushPull:
            r.gamma = 2.0 - 2.0 / std::exp(1.0);
            r.growth_a_upper = 1.0;  // module default for the k^2 O(1/n^2) term
            r.growth_a_lower = 1.0;
            r.growth_c = 10.0;  // module default for the c/n conditional-probability bound
            r.f = 0.45;
            r.shrink_kind = ShrinkKind::Exponential;
            r.rho = 2.0;
            r.shrink_a_upper = 1.0;  // module default for the O(1/n) slack
            r.shrink_a_lower = 0.0;
            r.shrink_c = 10.0;
            r.g = std::min(0.5, 0.9 * (1.0 - std::exp(-2.0)));
            r.notes = "gamma/rho derived; a,c bounds are module defaults";
            break;
        case ProtocolKind::TransitionTimePushPull:
            // growth phase runs the single-call push-pull, the end phase the
            // single-call pull
            r.gamma = 2.0 - 2.0 / std::exp(1.0);
            r.growth_a_upper = 1.0;
            r.growth_a_lower = 1.0;
            r.growth_c = 10.0;
            r.f = 0.45;
            r.shrink_kind = ShrinkKind::DoubleExponential;
            r.ell = 2.0;
            r.shrink_a_upper = 1.5;
            r.shrink_a_lower = 1.0;
            r.g = std::min(0.5, 0.9 / 1.5);
            r.notes = "piecewise: single-call push-pull growth, single-call pull shrinking";
            break;
    }
    return r;
}

namespace {

double growth_target_base(const RegimeParams& r, double n, double k) {
    return r.gamma * k * (1.0 - (r.growth_a_upper + 1.0) * k / n - r.growth_b / std::log(n));
}

} // namespace

double default_growth_amplitude(const RegimeParams& regime, std::int64_t n, double B) {
    const double dn = static_cast<double>(n);
    auto passes = [&](double A) {
        // E0 positive at k=1 and increasing on a geometric k-grid up to fn
        double prev = growth_target_base(regime, dn, 1.0) - A;
        if (prev <= 0) return false;
        double k = 1.0;
        while (k < regime.f * dn) {
            const double k_next = std::min(k * 1.25 + 1.0, regime.f * dn);
            const double e0 = growth_target_base(regime, dn, k_next) - A * std::pow(k_next, B);
            if (e0 <= prev) return false;
            prev = e0;
            k = k_next;
        }
        return true;
    };
    double lo = 0.0, hi = 4.0 * regime.gamma;
    if (!passes(1e-9)) throw DegenerateTargetError("growth targets degenerate for every amplitude");
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? lo : hi) = mid;
    }
    return lo / 4.0;
}

PhaseLedger growth_phase_ledger(const RegimeParams& regime, std::int64_t n, double A, double B) {
    if (!(B > 0.5 && B < 1.0)) throw InvalidParameterError("growth ledger requires B in (0.5, 1)");
    if (!(A > 0)) throw InvalidParameterError("growth ledger requires A > 0");
    if (!(regime.growth_a_upper * regime.f < 1.0))
        throw InvalidParameterError("upper growth conditions require a*f < 1");
    const double dn = static_cast<double>(n);

    PhaseLedger ledger;
    ledger.amplitude = A;
    ledger.exponent = B;

    double k = 1.0;
    const double e0_first = growth_target_base(regime, dn, k) - A;
    if (e0_first <= 0)
        throw DegenerateTargetError("E0(1) <= 0: amplitude too large for this regime (A=" + std::to_string(A) + ")");

    const double q1 = (regime.gamma + regime.growth_c) / (A * A);
    const double cantelli_cap = 1.0 / (1.0 + 1.0 / q1);

    ledger.targets.push_back(k);
    while (k < regime.f * dn) {
        const double e0 = growth_target_base(regime, dn, k) - A * std::pow(k, B);
        if (e0 <= 0) break;
        const double q = (regime.gamma + regime.growth_c) / (A * A) * std::pow(k, 1.0 - 2.0 * B);
        ledger.failure_probs.push_back(std::min(q, cantelli_cap));
        k += e0;
        ledger.targets.push_back(k);
    }
    ledger.phases = static_cast<std::int64_t>(ledger.failure_probs.size());
    for (double q : ledger.failure_probs) ledger.sum_q += q;
    return ledger;
}

double default_shrink_amplitude(const RegimeParams& regime, std::int64_t n, double B) {
    if (regime.shrink_kind != ShrinkKind::Exponential)
        throw InvalidParameterError("shrink amplitude default applies to the exponential regime");
    const double dn = static_cast<double>(n);
    const double decay = std::exp(-regime.rho);
    auto passes = [&](double A) {
        // E0(u) < u over [1, gn], checked at the endpoints and a coarse grid
        for (double u = 1.0; u <= regime.g * dn; u = u * 2.0 + 1.0) {
            if (decay + regime.shrink_a_upper * u / dn + A * std::pow(u, -B) >= 1.0) return false;
        }
        const double ug = regime.g * dn;
        return decay + regime.shrink_a_upper * regime.g + A * std::pow(ug, -B) < 1.0;
    };
    if (!passes(1e-12)) throw DegenerateTargetError("shrink targets degenerate: e^-rho + a g >= 1");
    double lo = 0.0, hi = 2.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? lo : hi) = mid;
    }
    return lo / 2.0;
}

PhaseLedger shrink_phase_ledger_exp(const RegimeParams& regime, std::int64_t n, double A, double B) {
    if (regime.shrink_kind != ShrinkKind::Exponential)
        throw InvalidParameterError("regime has no exponential shrinking phase");
    if (!(B > 0.0 && B < 0.5)) throw InvalidParameterError("shrink ledger requires B in (0, 0.5)");
    if (!(A > 0)) throw InvalidParameterError("shrink ledger requires A > 0");
    const double dn = static_cast<double>(n);
    const double decay = std::exp(-regime.rho);
    if (decay + regime.shrink_a_upper * regime.g >= 1.0)
        throw DegenerateTargetError("upper shrinking conditions require e^-rho + a g < 1");

    PhaseLedger ledger;
    ledger.amplitude = A;
    ledger.exponent = B;

    double u = regime.g * dn;
    ledger.targets.push_back(u);
    while (u > 1.0) {
        const double e0 = u * (decay + regime.shrink_a_upper * u / dn) + A * std::pow(u, 1.0 - B);
        if (e0 >= u)
            throw DegenerateTargetError("E0(u) >= u at u=" + std::to_string(u) + ": amplitude too large");
        u = e0;
        ledger.targets.push_back(u);
        const double q =
            ((1.0 + regime.shrink_a_upper) * decay + regime.shrink_c) / (A * A) * std::pow(u, 2.0 * B - 1.0);
        ledger.failure_probs.push_back(std::min(1.0, q));
        if (ledger.targets.size() > 1u << 22) throw GossipError("shrink ledger did not terminate");
    }
    ledger.phases = static_cast<std::int64_t>(ledger.failure_probs.size());
    for (double q : ledger.failure_probs) ledger.sum_q += q;
    return ledger;
}

double double_exp_target_closed_form(double a, double ell, double g, std::int64_t j) {
    // (2a)^((ell^j - 1)/(ell - 1)) g^(ell^j), evaluated in log space
    const double ellj = std::pow(ell, static_cast<double>(j));
    return std::exp((ellj - 1.0) / (ell - 1.0) * std::log(2.0 * a) + ellj * std::log(g));
}

PhaseLedger shrink_phase_ledger_double(const RegimeParams& regime, std::int64_t n, double alpha) {
    if (regime.shrink_kind != ShrinkKind::DoubleExponential)
        throw InvalidParameterError("regime has no double exponential shrinking phase");
    const double a = regime.shrink_a_upper;
    const double ell = regime.ell;
    const double g = regime.g;
    if (!(ell > 1.0)) throw InvalidParameterError("double exponential shrinking requires ell > 1");
    if (!(alpha > 0.0 && alpha < 1.0 / (2.0 * ell)))
        throw InvalidParameterError("double-exp ledger requires alpha in (0, 1/(2 ell))");
    if (g >= std::pow(2.0 * a, -1.0 / (ell - 1.0)))
        throw NonDecreasingSequenceError("eps_j does not decrease: g >= (2a)^(-1/(ell-1))");

    const double floor_eps = std::pow(static_cast<double>(n), -alpha);
    const double q = (1.0 + regime.shrink_c) / (a * a) * std::pow(static_cast<double>(n), 2.0 * alpha * ell - 1.0);

    PhaseLedger ledger;
    ledger.amplitude = a;
    ledger.exponent = alpha;
    double eps = g;
    ledger.targets.push_back(eps);
    std::int64_t j = 0;
    while (eps > floor_eps) {
        eps = 2.0 * a * std::pow(eps, ell);
        ++j;
        const double closed = double_exp_target_closed_form(a, ell, g, j);
        if (std::abs(eps - closed) > 1e-12 * closed)
            throw GossipError("double-exp recursion disagrees with the closed form");
        ledger.targets.push_back(eps);
        ledger.failure_probs.push_back(std::min(1.0, q));
        if (j > 4096) throw GossipError("double-exp ledger did not terminate");
    }
    ledger.phases = j;
    for (double f : ledger.failure_probs) ledger.sum_q += f;
    return ledger;
}

ConnectBound connect_bound(std::int64_t n, std::int64_t l_count, std::int64_t m_count, double p_min) {
    if (!(0 < l_count && l_count < m_count && m_count < n))
        throw InvalidParameterError("connect_bound requires 0 < l < m < n");
    if (!(p_min > 0.0 && p_min < 1.0)) throw InvalidParameterError("connect_bound requires p_min in (0,1)");
    ConnectBound b;
    b.ratio = static_cast<double>(n - l_count) / static_cast<double>(n - m_count);
    b.p_min = p_min;
    b.expected = b.ratio / p_min;
    return b;
}

double ConnectBound::tail(std::int64_t r) const { return ratio * std::pow(1.0 - p_min, static_cast<double>(r)); }

double connect_overshoot_bound(std::int64_t n, double f, double f_prime, double p_max, double c) {
    if (!(0.0 < f && f < f_prime && f_prime < 1.0))
        throw InvalidParameterError("connect_overshoot_bound requires 0 < f < f' < 1");
    if (!(p_max > 0.0 && p_max < 1.0)) throw InvalidParameterError("connect_overshoot_bound requires p_max in (0,1)");
    const double slack = f_prime - f - p_max * (1.0 - f);
    if (slack <= 0.0)
        throw InvalidParameterError("connect_overshoot_bound requires f' > f + p_max (1 - f)");
    return (p_max + c) / (static_cast<double>(n) * slack * slack);
}

GrowthConditionReport verify_growth_conditions(const ProtocolSpec& spec, std::int64_t n, const RegimeParams& regime) {
    GrowthConditionReport report;
    const double dn = static_cast<double>(n);
    const double b_term = regime.growth_b / std::log(dn);
    const std::int64_t k_max = static_cast<std::int64_t>(regime.f * dn);
    for (std::int64_t k = 1; k < k_max; ++k) {
        const double pk = success_probability(spec, n, k).value;
        const double base = regime.gamma * static_cast<double>(k) / dn;
        const double lower = base * (1.0 - regime.growth_a_upper * static_cast<double>(k) / dn - b_term);
        const double upper = base * (1.0 + regime.growth_a_lower * static_cast<double>(k) / dn + b_term);
        if (pk < lower - 1e-15) {
            report.passed = false;
            report.first_violation_k = k;
            report.violated_side = "upper";  // the upper growth condition's lower bound on p_k
            return report;
        }
        if (pk > upper + 1e-15) {
            report.passed = false;
            report.first_violation_k = k;
            report.violated_side = "lower";
            return report;
        }
    }
    return report;
}

} // namespace gossip
