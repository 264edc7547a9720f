#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gossip/core.hpp"
#include "gossip/rng.hpp"

namespace gossip {

struct RoundOutcome {
    std::int64_t newly_informed = 0;
    std::int64_t calls = 0;
    std::int64_t transmissions = 0;
};

// One round's calls in the ordered-calls setting: callers_by_order lists the
// caller ids sorted by ascending call order (a uniformly random bijection
// onto 1..#callers), target_by_order[i] is the target of callers_by_order[i].
// A target answers the incoming call of minimal order, i.e. the first one in
// this sequence that reaches it. Self-calls compete like any other call and
// an accepted self-call transmits nothing.
struct OrderedCallTable {
    std::vector<std::uint32_t> callers_by_order;
    std::vector<std::uint32_t> target_by_order;

    std::size_t size() const { return callers_by_order.size(); }
};

// Reusable per-round buffers. One instance per concurrently running trial.
struct RoundScratch {
    std::vector<std::uint32_t> newly;
    std::vector<std::uint32_t> buf_a;      // caller lists / edge owners
    std::vector<std::uint32_t> buf_b;      // edge partners / accepted targets
    std::vector<std::uint32_t> adj;        // flattened adjacency
    std::vector<std::int64_t> counts;      // adjacency offsets
    std::vector<std::int64_t> counts2;     // fill cursors
    std::vector<std::uint64_t> stamp;      // epoch-stamped claim marks, lazily sized
    std::vector<std::uint32_t> claim;      // accepted caller per target
    std::vector<std::uint32_t> target_of;  // outgoing target per caller
    std::uint64_t epoch = 0;
    OrderedCallTable table;

    void ensure(std::int64_t n);
};

// Fills table with one round of ordered calls from the given caller set.
// Consumes rng in a fixed sequence: the order shuffle first, then one target
// per caller in order. Targets are uniform over n nodes (or n-1 when
// include_self is false).
void sample_ordered_calls(std::span<const std::uint32_t> callers, std::int64_t n, bool include_self,
                          OrderedCallTable& table, Rng& rng);

// Round semantics. Each function advances the informed set by one round of
// the protocol, reading "informed" as informed-at-round-start throughout.
// Counting convention: `calls` counts every call attempted (failed, dropped
// and self calls included); `transmissions` counts calls that moved a rumor
// copy, i.e. successful calls with an informed endpoint and distinct caller
// and target (for the single-call protocols only the accepted call at each
// target can transmit).
RoundOutcome round_push(SimState& state, double success_prob, bool include_self, RoundScratch& scratch, Rng& rng);
RoundOutcome round_pull(SimState& state, double success_prob, bool include_self, RoundScratch& scratch, Rng& rng);
RoundOutcome round_push_pull(SimState& state, double success_prob, bool include_self, RoundScratch& scratch, Rng& rng);

// Fresh G(n, a/n) every round, sampled sparsely: only pairs with an informed
// endpoint are enumerated (geometric index skipping), so a round costs
// expected O(a * k) rather than O(n^2). Each informed node with at least one
// neighbor calls a uniform neighbor. Randomness order: edge skips, then one
// neighbor choice per informed node in prefix order.
RoundOutcome round_dynamic_gnp_push(SimState& state, double edge_density, RoundScratch& scratch, Rng& rng);

RoundOutcome round_r_push(SimState& state, const CallDistribution& dist, bool include_self, RoundScratch& scratch,
                          Rng& rng);
RoundOutcome round_r_push_pull(SimState& state, const CallDistribution& dist, bool include_self, RoundScratch& scratch,
                               Rng& rng);
// Pull half of the R-protocol only; used when an age limit has silenced the
// push side.
RoundOutcome round_r_pull_only(SimState& state, const CallDistribution& dist, bool include_self, RoundScratch& scratch,
                               Rng& rng);

RoundOutcome round_single_call_pull(SimState& state, bool include_self, RoundScratch& scratch, Rng& rng);
RoundOutcome round_single_call_push_pull(SimState& state, bool include_self, RoundScratch& scratch, Rng& rng);

// Single-call push-pull while the rumor is younger than transition_time
// (rumor age = state.round), single-call pull afterwards.
RoundOutcome round_transition_push_pull(SimState& state, std::int64_t transition_time, bool include_self,
                                        RoundScratch& scratch, Rng& rng);

// Dispatch on spec.kind. pushes_enabled=false silences informed nodes'
// calls (age-limit support); pull sides are unaffected.
RoundOutcome step_round(SimState& state, const ProtocolSpec& spec, std::int64_t transition_time, bool pushes_enabled,
                        RoundScratch& scratch, Rng& rng);

// Default transition time for the transition protocol: ceil(log_{3-2/e} n).
std::int64_t default_transition_time(std::int64_t n);

} // namespace gossip
