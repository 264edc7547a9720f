#include "gossip/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gossip {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kNegativeClamp = -1e-14;

void normalize_row(std::vector<double>& probs, const char* what) {
    double sum = 0;
    for (double& p : probs) {
        if (p < 0) {
            if (p < kNegativeClamp) throw GossipError(std::string(what) + ": negative probability in row");
            p = 0;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) throw GossipError(std::string(what) + ": row does not sum to 1");
}

std::vector<double> binomial_pmf(std::int64_t m, double p) {
    std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
    if (m == 0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p >= 1.0) {
        pmf[static_cast<std::size_t>(m)] = 1.0;
        return pmf;
    }
    // stable forward recurrence from the mode-free end in log space
    const double logp = std::log(p), logq = std::log1p(-p);
    double logc = static_cast<double>(m) * logq;  // log C(m,0) q^m
    for (std::int64_t j = 0; j <= m; ++j) {
        pmf[static_cast<std::size_t>(j)] = std::exp(logc);
        if (j < m)
            logc += std::log(static_cast<double>(m - j)) - std::log(static_cast<double>(j + 1)) + logp - logq;
    }
    return pmf;
}

// Law of the number of distinct uninformed targets hit, via a subtraction-free
// DP over the k push calls: each call succeeds with prob p and lands uniformly
// on n targets, h tracks distinct uninformed targets hit so far. Exact up to
// rounding; no cancellation.
std::vector<double> push_hits_dp(std::int64_t n, std::int64_t k, double p) {
    const std::int64_t u = n - k;
    std::vector<double> cur(static_cast<std::size_t>(u) + 1, 0.0), next(static_cast<std::size_t>(u) + 1, 0.0);
    cur[0] = 1.0;
    const double dn = static_cast<double>(n);
    for (std::int64_t call = 0; call < k; ++call) {
        std::fill(next.begin(), next.end(), 0.0);
        const std::int64_t hmax = std::min<std::int64_t>(call, u);
        for (std::int64_t h = 0; h <= hmax; ++h) {
            const double w = cur[static_cast<std::size_t>(h)];
            if (w == 0.0) continue;
            const double fresh = p * static_cast<double>(u - h) / dn;
            next[static_cast<std::size_t>(h)] += w * (1.0 - fresh);
            if (h < u) next[static_cast<std::size_t>(h) + 1] += w * fresh;
        }
        std::swap(cur, next);
    }
    return cur;
}

// Inclusion-exclusion closed form with compensated summation. Mixing
// Pr[exactly j new | s successes] = C(u,j) sum_i (-1)^i C(j,i) ((k+j-i)/n)^s
// over s ~ Bin(k, p) collapses each power sum to (1-p + p(k+j-i)/n)^k.
// Returns false when the alternating sum cancels away more than 6 digits.
bool push_hits_inclusion_exclusion(std::int64_t n, std::int64_t k, double p, std::vector<double>& out) {
    const std::int64_t u = n - k;
    out.assign(static_cast<std::size_t>(u) + 1, 0.0);

    std::vector<double> log_choose_u(static_cast<std::size_t>(u) + 1, 0.0);
    for (std::int64_t j = 1; j <= u; ++j)
        log_choose_u[static_cast<std::size_t>(j)] = log_choose_u[static_cast<std::size_t>(j - 1)] +
                                                    std::log(static_cast<double>(u - j + 1)) -
                                                    std::log(static_cast<double>(j));

    const double q = 1.0 - p;
    bool stable = true;
    for (std::int64_t j = 0; j <= u; ++j) {
        long double acc = 0.0L, comp = 0.0L;
        double max_term = 0.0;
        double log_choose_j = 0.0;
        for (std::int64_t i = 0; i <= j; ++i) {
            if (i > 0) log_choose_j += std::log(static_cast<double>(j - i + 1)) - std::log(static_cast<double>(i));
            const double base = q + p * static_cast<double>(k + j - i) / static_cast<double>(n);
            const double mag = std::exp(log_choose_u[static_cast<std::size_t>(j)] + log_choose_j +
                                        static_cast<double>(k) * std::log(base));
            max_term = std::max(max_term, mag);
            const long double term = (i % 2 == 0 ? 1.0L : -1.0L) * static_cast<long double>(mag);
            const long double y = term - comp;
            const long double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        const double total = static_cast<double>(acc);
        out[static_cast<std::size_t>(j)] = total;
        if (max_term > 1e6 * std::max(std::abs(total), 1e-300)) stable = false;
    }
    return stable;
}

} // namespace

double TransitionDistribution::mean() const {
    double m = 0;
    for (std::size_t j = 0; j < probs.size(); ++j) m += static_cast<double>(j) * probs[j];
    return m;
}

double TransitionDistribution::variance() const {
    const double m = mean();
    double s = 0;
    for (std::size_t j = 0; j < probs.size(); ++j) s += static_cast<double>(j) * static_cast<double>(j) * probs[j];
    return s - m * m;
}

TransitionDistribution transition_pull(std::int64_t n, std::int64_t k, double success_prob) {
    if (k < 1 || k >= n) throw InvalidParameterError("transition_pull requires 1 <= k < n");
    TransitionDistribution d{n, k, binomial_pmf(n - k, success_prob * static_cast<double>(k) / static_cast<double>(n))};
    normalize_row(d.probs, "transition_pull");
    return d;
}

TransitionDistribution transition_push(std::int64_t n, std::int64_t k, double success_prob) {
    if (k < 1 || k >= n) throw InvalidParameterError("transition_push requires 1 <= k < n");
    TransitionDistribution d;
    d.n = n;
    d.k = k;
    // Closed form first; on cancellation switch to the stable DP, which
    // computes the same law without alternating signs.
    if (!push_hits_inclusion_exclusion(n, k, success_prob, d.probs)) d.probs = push_hits_dp(n, k, success_prob);
    normalize_row(d.probs, "transition_push");
    return d;
}

TransitionDistribution transition_push_pull(std::int64_t n, std::int64_t k, double success_prob) {
    if (k < 1 || k >= n) throw InvalidParameterError("transition_push_pull requires 1 <= k < n");
    const std::int64_t u = n - k;
    const std::vector<double> push_hits = push_hits_dp(n, k, success_prob);
    const double pull_p = success_prob * static_cast<double>(k) / static_cast<double>(n);

    // Mixture over the push-hit count h; the remaining u-h nodes pull
    // independently. Exchangeability over the uninformed nodes makes the
    // composition exact.
    TransitionDistribution d;
    d.n = n;
    d.k = k;
    d.probs.assign(static_cast<std::size_t>(u) + 1, 0.0);
    for (std::int64_t h = 0; h <= u; ++h) {
        const double wh = push_hits[static_cast<std::size_t>(h)];
        if (wh == 0.0) continue;
        const auto pulls = binomial_pmf(u - h, pull_p);
        for (std::int64_t j = 0; j <= u - h; ++j)
            d.probs[static_cast<std::size_t>(h + j)] += wh * pulls[static_cast<std::size_t>(j)];
    }
    normalize_row(d.probs, "transition_push_pull");
    return d;
}

double exact_expected_time(const TransitionFn& transition, std::int64_t n) {
    if (n < 2) throw InvalidParameterError("exact_expected_time requires n >= 2");
    std::vector<double> expected(static_cast<std::size_t>(n) + 1, 0.0);  // E[T | k informed]
    for (std::int64_t k = n - 1; k >= 1; --k) {
        const TransitionDistribution row = transition(n, k);
        const double stay = row.probs[0];
        if (stay >= 1.0)
            throw AbsorbingTrapError("absorbing trap: P(stay)=1 at k=" + std::to_string(k));
        double acc = 1.0;
        for (std::int64_t j = 1; j <= n - k; ++j)
            acc += row.probs[static_cast<std::size_t>(j)] * expected[static_cast<std::size_t>(k + j)];
        expected[static_cast<std::size_t>(k)] = acc / (1.0 - stay);
    }
    return expected[1];
}

std::vector<double> spreading_time_distribution(const TransitionFn& transition, std::int64_t n,
                                                std::int64_t round_cap) {
    if (n < 2) throw InvalidParameterError("spreading_time_distribution requires n >= 2");
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (std::int64_t k = 1; k < n; ++k) rows[static_cast<std::size_t>(k)] = transition(n, k).probs;

    std::vector<double> pi(static_cast<std::size_t>(n) + 1, 0.0), next(static_cast<std::size_t>(n) + 1, 0.0);
    pi[1] = 1.0;
    std::vector<double> law;
    law.reserve(static_cast<std::size_t>(round_cap) + 1);
    law.push_back(0.0);  // T >= 1 for n >= 2
    double absorbed_before = 0.0;
    for (std::int64_t t = 1; t <= round_cap; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::int64_t k = 1; k < n; ++k) {
            const double w = pi[static_cast<std::size_t>(k)];
            if (w == 0.0) continue;
            const auto& row = rows[static_cast<std::size_t>(k)];
            for (std::int64_t j = 0; j <= n - k; ++j)
                next[static_cast<std::size_t>(k + j)] += w * row[static_cast<std::size_t>(j)];
        }
        next[static_cast<std::size_t>(n)] += pi[static_cast<std::size_t>(n)];
        law.push_back(next[static_cast<std::size_t>(n)] - absorbed_before);
        absorbed_before = next[static_cast<std::size_t>(n)];
        std::swap(pi, next);
    }
    return law;
}

TransitionFn transition_fn_for(const ProtocolSpec& spec) {
    validate_spec_or_throw(spec);
    if (!spec.include_self)
        throw UnsupportedError("exact transition laws assume the self-call convention (include_self=true)");
    const double p = spec.success_prob;
    switch (spec.kind) {
        case ProtocolKind::Push:
            return [p](std::int64_t n, std::int64_t k) { return transition_push(n, k, p); };
        case ProtocolKind::Pull:
            return [p](std::int64_t n, std::int64_t k) { return transition_pull(n, k, p); };
        case ProtocolKind::PushPull:
            return [p](std::int64_t n, std::int64_t k) { return transition_push_pull(n, k, p); };
        default:
            throw UnsupportedError(std::string("no exact transition law for ") + protocol_name(spec.kind) +
                                   "; use Monte Carlo with large trial counts instead");
    }
}

} // namespace gossip
