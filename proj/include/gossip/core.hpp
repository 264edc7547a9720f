#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gossip {

struct GossipError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidParameterError : GossipError {
    using GossipError::GossipError;
};
struct UnsupportedError : GossipError {
    using GossipError::GossipError;
};
struct DegenerateTargetError : GossipError {
    using GossipError::GossipError;
};
struct NonDecreasingSequenceError : GossipError {
    using GossipError::GossipError;
};
struct AbsorbingTrapError : GossipError {
    using GossipError::GossipError;
};
struct InsufficientTailError : GossipError {
    using GossipError::GossipError;
};

enum class ProtocolKind {
    Push,
    Pull,
    PushPull,
    DynamicGnpPush,
    RPush,
    RPushPull,
    SingleCallPull,
    SingleCallPushPull,
    TransitionTimePushPull,
};

const char* protocol_name(ProtocolKind kind);
std::optional<ProtocolKind> protocol_from_name(const std::string& name);

// Finite distribution of the per-round call count R; probs[r] = Pr[R = r].
struct CallDistribution {
    std::vector<double> probs;

    double mean() const;
    double variance() const;
    // Smallest r with Pr[R = r] > 0.
    int min_support() const;
    int max_support() const { return static_cast<int>(probs.size()) - 1; }
    double prob_zero() const { return probs.empty() ? 0.0 : probs[0]; }

    static CallDistribution constant(int r);
    static CallDistribution uniform(int lo, int hi);
};

// Sentinel for "never switch": the transition protocol stays push-pull forever.
inline constexpr std::int64_t kNoTransition = std::numeric_limits<std::int64_t>::max();

struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::Push;
    double success_prob = 1.0;                          // Push / Pull / PushPull
    std::optional<CallDistribution> call_distribution;  // RPush / RPushPull
    std::optional<double> edge_density;                 // DynamicGnpPush: edge prob a/n
    std::optional<std::int64_t> transition_time;        // TransitionTimePushPull; unset = ceil(log_{3-2/e} n)
    bool include_self = true;

    static ProtocolSpec push(double p = 1.0) { return {ProtocolKind::Push, p, {}, {}, {}, true}; }
    static ProtocolSpec pull(double p = 1.0) { return {ProtocolKind::Pull, p, {}, {}, {}, true}; }
    static ProtocolSpec push_pull(double p = 1.0) { return {ProtocolKind::PushPull, p, {}, {}, {}, true}; }
    static ProtocolSpec dynamic_gnp_push(double a) { return {ProtocolKind::DynamicGnpPush, 1.0, {}, a, {}, true}; }
    static ProtocolSpec r_push(CallDistribution d) { return {ProtocolKind::RPush, 1.0, std::move(d), {}, {}, true}; }
    static ProtocolSpec r_push_pull(CallDistribution d) { return {ProtocolKind::RPushPull, 1.0, std::move(d), {}, {}, true}; }
    static ProtocolSpec single_call_pull() { return {ProtocolKind::SingleCallPull, 1.0, {}, {}, {}, true}; }
    static ProtocolSpec single_call_push_pull() { return {ProtocolKind::SingleCallPushPull, 1.0, {}, {}, {}, true}; }
    static ProtocolSpec transition_push_pull(std::optional<std::int64_t> t = {}) {
        return {ProtocolKind::TransitionTimePushPull, 1.0, {}, {}, t, true};
    }
};

// Returns the empty list iff the spec is valid; otherwise one message per
// violated invariant (parameters set on a kind they do not apply to count
// as violations).
std::vector<std::string> validate_spec(const ProtocolSpec& spec);

// validate_spec, throwing InvalidParameterError on the first failure.
void validate_spec_or_throw(const ProtocolSpec& spec);

// Round state for one trial. Membership is kept as a permutation of the node
// ids: node_at[0..informed_count) are informed. Swapping a node into the
// informed prefix is O(1) and never moves nodes already informed at the start
// of a round, so "informed at round start" stays readable mid-round.
class SimState {
  public:
    SimState(std::int64_t n, std::int64_t initially_informed = 1);

    std::int64_t n() const { return n_; }
    std::int64_t informed_count() const { return informed_count_; }
    bool informed(std::uint32_t node) const { return pos_of_[node] < informed_count_; }
    std::uint32_t node_at(std::int64_t pos) const { return node_at_[pos]; }
    std::int64_t position_of(std::uint32_t node) const { return pos_of_[node]; }

    void inform(std::uint32_t node) {
        const std::int64_t p = pos_of_[node];
        if (p < informed_count_) return;
        const std::uint32_t other = node_at_[informed_count_];
        node_at_[informed_count_] = node;
        node_at_[p] = other;
        pos_of_[node] = informed_count_;
        pos_of_[other] = p;
        ++informed_count_;
    }

    // Drops every node informed after `count` back to uninformed. Used by
    // single-round replay estimators; O(1).
    void rollback_informed(std::int64_t count) { informed_count_ = count; }

    void reset(std::int64_t initially_informed = 1);

    std::int64_t round = 0;
    std::int64_t calls_placed = 0;
    std::int64_t rumor_transmissions = 0;

  private:
    std::int64_t n_;
    std::int64_t informed_count_;
    std::vector<std::uint32_t> node_at_;
    std::vector<std::int64_t> pos_of_;
};

struct TrialResult {
    std::int64_t spreading_time = 0;
    std::int64_t calls_placed = 0;
    std::int64_t rumor_transmissions = 0;
    std::optional<std::vector<std::int64_t>> trace;  // trace[t] = informed count after round t; trace[0] = 1
    std::uint64_t seed = 0;
    bool completed = true;

    bool operator==(const TrialResult&) const = default;
};

// Leading-order spreading time: log_{growth_base} n plus either
// shrink_coefficient * ln n or log_{shrink_loglog_base} ln n.
struct Prediction {
    double growth_base = 2.0;
    std::optional<double> shrink_coefficient;
    std::optional<double> shrink_loglog_base;
    double value = 0.0;
};

} // namespace gossip
