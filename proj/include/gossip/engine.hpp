#pragma once

#include <cstdint>
#include <vector>

#include "gossip/core.hpp"
#include "gossip/protocols.hpp"

namespace gossip {

// Marker for "derive the age limit from n": ceil(log3 n) + 3 ceil(log2 ln n).
inline constexpr std::int64_t kAgeLimitAuto = -1;

std::int64_t default_age_limit(std::int64_t n);

struct StoppingPolicy {
    enum class Mode { UntilAllInformed, RoundCap, AgeLimit };

    Mode mode = Mode::UntilAllInformed;
    std::int64_t max_rounds = 0;  // RoundCap only
    std::int64_t age_limit = 0;   // AgeLimit: informed nodes stop pushing once the rumor is this old

    static StoppingPolicy until_all_informed() { return {}; }
    static StoppingPolicy round_cap(std::int64_t max_rounds) { return {Mode::RoundCap, max_rounds, 0}; }
    static StoppingPolicy with_age_limit(std::int64_t limit = kAgeLimitAuto) { return {Mode::AgeLimit, 0, limit}; }
};

struct RoundCapExceededError : GossipError {
    RoundCapExceededError(std::string msg, TrialResult partial_result)
        : GossipError(std::move(msg)), partial(std::move(partial_result)) {}
    TrialResult partial;
};

// Default cap: 64 * (log2 n + ln n) rounds. Exceeding any cap throws
// RoundCapExceededError; nothing is silently truncated.
std::int64_t default_round_cap(std::int64_t n);

// One full trial from a single informed node until everyone is informed (or
// the cap). Deterministic in (spec, n, policy, seed).
TrialResult run_trial(const ProtocolSpec& spec, std::int64_t n, const StoppingPolicy& policy, std::uint64_t seed,
                      bool record_trace = false);

// Batch of trials; trial i runs with derive_trial_seed(root_seed, i). Output
// is ordered by trial index and independent of scheduling. parallelism <= 0
// resolves to GOSSIPSIM_THREADS or the OpenMP default.
std::vector<TrialResult> run_batch(const ProtocolSpec& spec, std::int64_t n, std::int64_t trials,
                                   std::uint64_t root_seed, const StoppingPolicy& policy = {}, int parallelism = 0,
                                   bool record_trace = false);

// Serial reference for run_batch; the parallel path must match it
// bit-for-bit.
std::vector<TrialResult> run_batch_serial(const ProtocolSpec& spec, std::int64_t n, std::int64_t trials,
                                          std::uint64_t root_seed, const StoppingPolicy& policy = {},
                                          bool record_trace = false);

// First-crossing T(k,m) on a recorded trace: first round with count >= m
// minus first round with count >= k. Throws InvalidParameterError when the
// trace never reaches m.
std::int64_t measure_first_passage(const std::vector<std::int64_t>& trace, std::int64_t m, std::int64_t k = 1);

int resolve_parallelism(int requested);

} // namespace gossip
