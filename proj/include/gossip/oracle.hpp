#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gossip/core.hpp"

namespace gossip {

// Exact law of the number of newly informed nodes in one round with k of n
// informed. probs[j] = Pr[exactly j newly informed], j in [0 .. n-k].
struct TransitionDistribution {
    std::int64_t n = 0;
    std::int64_t k = 0;
    std::vector<double> probs;

    double mean() const;
    double variance() const;
    // Per-node marginal informing probability, mean / (n - k).
    double marginal_pk() const { return mean() / static_cast<double>(n - k); }
};

TransitionDistribution transition_pull(std::int64_t n, std::int64_t k, double success_prob = 1.0);
TransitionDistribution transition_push(std::int64_t n, std::int64_t k, double success_prob = 1.0);
TransitionDistribution transition_push_pull(std::int64_t n, std::int64_t k, double success_prob = 1.0);

using TransitionFn = std::function<TransitionDistribution(std::int64_t n, std::int64_t k)>;

// E[T(1,n)] from the absorbing chain on the informed count:
// E[T|k] = (1 + sum_{m>k} P(k,m) E[T|m]) / (1 - P(k,k)), solved from k=n-1
// down to 1. Throws AbsorbingTrapError when some k < n has P(k,k) = 1.
double exact_expected_time(const TransitionFn& transition, std::int64_t n);

// Distribution of T(1,n) up to round_cap: result[t] = Pr[T = t], t >= 1.
// The slack (1 - sum) is the mass beyond the cap.
std::vector<double> spreading_time_distribution(const TransitionFn& transition, std::int64_t n,
                                                std::int64_t round_cap);

TransitionFn transition_fn_for(const ProtocolSpec& spec);

// Largest n the oracle accepts (documented limit of the exact computation).
inline constexpr std::int64_t kOracleMaxN = 300;

} // namespace gossip
