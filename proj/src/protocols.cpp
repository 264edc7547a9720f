#include "gossip/protocols.hpp"

#include <algorithm>
#include <cmath>

namespace gossip {

void RoundScratch::ensure(std::int64_t n) {
    const auto un = static_cast<std::size_t>(n);
    if (stamp.size() < un) stamp.resize(un, 0);
    if (claim.size() < un) claim.resize(un, 0);
    if (target_of.size() < un) target_of.resize(un, 0);
}

namespace {

inline std::uint32_t draw_target(Rng& rng, std::int64_t n, bool include_self, std::uint32_t caller) {
    if (include_self) return static_cast<std::uint32_t>(rng.index(n));
    auto t = static_cast<std::uint32_t>(rng.index(n - 1));
    if (t >= caller) ++t;
    return t;
}

inline int sample_call_count(const CallDistribution& dist, Rng& rng) {
    double x = rng.uniform();
    for (std::size_t r = 0; r + 1 < dist.probs.size(); ++r) {
        x -= dist.probs[r];
        if (x < 0) return static_cast<int>(r);
    }
    return static_cast<int>(dist.probs.size()) - 1;
}

inline void apply_informs(SimState& state, const std::vector<std::uint32_t>& newly) {
    for (std::uint32_t node : newly) state.inform(node);
}

} // namespace

void sample_ordered_calls(std::span<const std::uint32_t> callers, std::int64_t n, bool include_self,
                          OrderedCallTable& table, Rng& rng) {
    const std::size_t m = callers.size();
    table.callers_by_order.assign(callers.begin(), callers.end());
    auto& order = table.callers_by_order;
    for (std::size_t i = m; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    table.target_by_order.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        table.target_by_order[i] = draw_target(rng, n, include_self, order[i]);
}

RoundOutcome round_push(SimState& state, double success_prob, bool include_self, RoundScratch& scratch, Rng& rng) {
    (void)scratch;
    RoundOutcome out;
    const std::int64_t start_k = state.informed_count();
    const bool faulty = success_prob < 1.0;
    for (std::int64_t i = 0; i < start_k; ++i) {
        const std::uint32_t caller = state.node_at(i);
        const std::uint32_t t = draw_target(rng, state.n(), include_self, caller);
        ++out.calls;
        if (faulty && !rng.chance(success_prob)) continue;
        if (t == caller) continue;
        ++out.transmissions;
        state.inform(t);
    }
    out.newly_informed = state.informed_count() - start_k;
    return out;
}

RoundOutcome round_pull(SimState& state, double success_prob, bool include_self, RoundScratch& scratch, Rng& rng) {
    RoundOutcome out;
    const std::int64_t start_k = state.informed_count();
    const std::int64_t n = state.n();
    const bool faulty = success_prob < 1.0;
    auto& newly = scratch.newly;
    newly.clear();
    for (std::int64_t pos = start_k; pos < n; ++pos) {
        const std::uint32_t caller = state.node_at(pos);
        const std::uint32_t t = draw_target(rng, n, include_self, caller);
        ++out.calls;
        if (faulty && !rng.chance(success_prob)) continue;
        if (state.informed(t)) {  // informed at round start: prefix positions never move
            ++out.transmissions;
            newly.push_back(caller);
        }
    }
    apply_informs(state, newly);
    out.newly_informed = state.informed_count() - start_k;
    return out;
}

RoundOutcome round_push_pull(SimState& state, double success_prob, bool include_self, RoundScratch& scratch, Rng& rng) {
    RoundOutcome out;
    const std::int64_t start_k = state.informed_count();
    const std::int64_t n = state.n();
    const bool faulty = success_prob < 1.0;
    auto& newly = scratch.newly;
    newly.clear();
    auto informed_at_start = [&](std::uint32_t node) { return state.informed(node); };

    for (std::int64_t i = 0; i < start_k; ++i) {
        const std::uint32_t caller = state.node_at(i);
        const std::uint32_t t = draw_target(rng, n, include_self, caller);
        ++out.calls;
        if (faulty && !rng.chance(success_prob)) continue;
        if (t == caller) continue;
        ++out.transmissions;
        if (!informed_at_start(t)) newly.push_back(t);
    }
    for (std::int64_t pos = start_k; pos < n; ++pos) {
        const std::uint32_t caller = state.node_at(pos);
        const std::uint32_t t = draw_target(rng, n, include_self, caller);
        ++out.calls;
        if (faulty && !rng.chance(success_prob)) continue;
        if (informed_at_start(t)) {
            ++out.transmissions;
            newly.push_back(caller);
        }
    }
    apply_informs(state, newly);
    out.newly_informed = state.informed_count() - start_k;
    return out;
}

RoundOutcome round_dynamic_gnp_push(SimState& state, double edge_density, RoundScratch& scratch, Rng& rng) {
    RoundOutcome out;
    const std::int64_t n = state.n();
    const std::int64_t k = state.informed_count();
    const std::int64_t u = n - k;
    const double p_edge = std::min(1.0, edge_density / static_cast<double>(n));

    // Ordered pair list restricted to pairs with an informed endpoint: block i
    // (i-th informed node) pairs it with informed prefix indices > i, then
    // with all uninformed nodes; block width n-1-i. Informed-informed pairs
    // appear in exactly one block, so each is sampled once.
    const std::int64_t total_pairs = k * u + k * (k - 1) / 2;
    auto block_start = [&](std::int64_t i) { return i * (n - 1) - i * (i - 1) / 2; };

    auto& edge_owner = scratch.buf_a;    // informed prefix index
    auto& edge_partner = scratch.buf_b;  // partner node id
    edge_owner.clear();
    edge_partner.clear();

    if (p_edge < 1.0) {
        std::int64_t cursor = -1;
        const double inv_log_q = 1.0 / std::log1p(-p_edge);
        auto advance = [&]() {
            const double skip = std::floor(std::log1p(-rng.uniform()) * inv_log_q);
            cursor += 1 + static_cast<std::int64_t>(skip);
        };
        advance();
        while (cursor < total_pairs) {
            // invert block_start around the cursor
            const double nn = static_cast<double>(2 * n - 1);
            std::int64_t i = static_cast<std::int64_t>((nn - std::sqrt(std::max(0.0, nn * nn - 8.0 * static_cast<double>(cursor)))) / 2.0);
            i = std::clamp<std::int64_t>(i, 0, k - 1);
            while (i + 1 <= k - 1 && block_start(i + 1) <= cursor) ++i;
            while (block_start(i) > cursor) --i;
            const std::int64_t offset = cursor - block_start(i);
            const std::int64_t informed_partners = k - 1 - i;
            const std::uint32_t partner = offset < informed_partners
                                              ? state.node_at(i + 1 + offset)
                                              : state.node_at(k + (offset - informed_partners));
            edge_owner.push_back(static_cast<std::uint32_t>(i));
            edge_partner.push_back(partner);
            advance();
        }
    } else {
        // dense fallback, exact enumeration
        for (std::int64_t i = 0; i < k; ++i)
            for (std::int64_t o = 0; o < n - 1 - i; ++o) {
                const std::int64_t informed_partners = k - 1 - i;
                const std::uint32_t partner =
                    o < informed_partners ? state.node_at(i + 1 + o) : state.node_at(k + (o - informed_partners));
                edge_owner.push_back(static_cast<std::uint32_t>(i));
                edge_partner.push_back(partner);
            }
    }

    // adjacency of the informed nodes, counting sort by prefix index
    auto& offsets = scratch.counts;
    auto& cursors = scratch.counts2;
    offsets.assign(static_cast<std::size_t>(k) + 1, 0);
    for (std::size_t e = 0; e < edge_owner.size(); ++e) {
        ++offsets[edge_owner[e] + 1];
        const std::uint32_t w = edge_partner[e];
        if (state.informed(w)) ++offsets[static_cast<std::size_t>(state.position_of(w)) + 1];
    }
    for (std::int64_t i = 0; i < k; ++i) offsets[static_cast<std::size_t>(i) + 1] += offsets[static_cast<std::size_t>(i)];
    auto& adj = scratch.adj;
    adj.resize(static_cast<std::size_t>(offsets[static_cast<std::size_t>(k)]));
    cursors.assign(offsets.begin(), offsets.end() - 1);
    for (std::size_t e = 0; e < edge_owner.size(); ++e) {
        const std::uint32_t i = edge_owner[e];
        const std::uint32_t w = edge_partner[e];
        adj[static_cast<std::size_t>(cursors[i]++)] = w;
        if (state.informed(w))
            adj[static_cast<std::size_t>(cursors[static_cast<std::size_t>(state.position_of(w))]++)] = state.node_at(i);
    }

    const std::int64_t start_k = k;
    for (std::int64_t i = 0; i < k; ++i) {
        const std::int64_t deg = offsets[static_cast<std::size_t>(i) + 1] - offsets[static_cast<std::size_t>(i)];
        if (deg == 0) continue;  // isolated informed node places no call
        const std::int64_t o = rng.index(deg);
        const std::uint32_t w = adj[static_cast<std::size_t>(offsets[static_cast<std::size_t>(i)] + o)];
        ++out.calls;
        ++out.transmissions;
        state.inform(w);
    }
    out.newly_informed = state.informed_count() - start_k;
    return out;
}

RoundOutcome round_r_push(SimState& state, const CallDistribution& dist, bool include_self, RoundScratch& scratch,
                          Rng& rng) {
    RoundOutcome out;
    const std::int64_t start_k = state.informed_count();
    const std::int64_t n = state.n();
    scratch.ensure(n);
    const std::int64_t pool = include_self ? n : n - 1;
    for (std::int64_t i = 0; i < start_k; ++i) {
        const std::uint32_t caller = state.node_at(i);
        const auto r = static_cast<std::int64_t>(sample_call_count(dist, rng));
        const std::int64_t r_eff = std::min(r, pool);  // r > n clamps to n distinct targets
        const std::uint64_t epoch = ++scratch.epoch;
        for (std::int64_t j = 0; j < r_eff; ++j) {
            std::uint32_t t;
            do {
                t = draw_target(rng, n, include_self, caller);
            } while (scratch.stamp[t] == epoch);
            scratch.stamp[t] = epoch;
            ++out.calls;
            if (t == caller) continue;
            ++out.transmissions;
            state.inform(t);
        }
    }
    out.newly_informed = state.informed_count() - start_k;
    return out;
}

namespace {

RoundOutcome r_pull_decisions(SimState& state, const CallDistribution& dist, bool include_self, RoundScratch& scratch,
                              Rng& rng, std::vector<std::uint32_t>& newly) {
    RoundOutcome out;
    const std::int64_t start_k = state.informed_count();
    const std::int64_t n = state.n();
    const std::int64_t pool = include_self ? n : n - 1;
    for (std::int64_t pos = start_k; pos < n; ++pos) {
        const std::uint32_t caller = state.node_at(pos);
        const auto r = static_cast<std::int64_t>(sample_call_count(dist, rng));
        const std::int64_t r_eff = std::min(r, pool);
        const std::uint64_t epoch = ++scratch.epoch;
        bool hit_informed = false;
        for (std::int64_t j = 0; j < r_eff; ++j) {
            std::uint32_t t;
            do {
                t = draw_target(rng, n, include_self, caller);
            } while (scratch.stamp[t] == epoch);
            scratch.stamp[t] = epoch;
            ++out.calls;
            if (state.informed(t)) {
                ++out.transmissions;
                hit_informed = true;
            }
        }
        if (hit_informed) newly.push_back(caller);
    }
    return out;
}

} // namespace

RoundOutcome round_r_push_pull(SimState& state, const CallDistribution& dist, bool include_self, RoundScratch& scratch,
                               Rng& rng) {
    RoundOutcome out;
    const std::int64_t start_k = state.informed_count();
    const std::int64_t n = state.n();
    scratch.ensure(n);
    const std::int64_t pool = include_self ? n : n - 1;
    auto& newly = scratch.newly;
    newly.clear();
    // push side first, informs deferred so the uninformed iteration stays intact
    for (std::int64_t i = 0; i < start_k; ++i) {
        const std::uint32_t caller = state.node_at(i);
        const auto r = static_cast<std::int64_t>(sample_call_count(dist, rng));
        const std::int64_t r_eff = std::min(r, pool);
        const std::uint64_t epoch = ++scratch.epoch;
        for (std::int64_t j = 0; j < r_eff; ++j) {
            std::uint32_t t;
            do {
                t = draw_target(rng, n, include_self, caller);
            } while (scratch.stamp[t] == epoch);
            scratch.stamp[t] = epoch;
            ++out.calls;
            if (t == caller) continue;
            ++out.transmissions;
            if (!state.informed(t)) newly.push_back(t);
        }
    }
    const RoundOutcome pull = r_pull_decisions(state, dist, include_self, scratch, rng, newly);
    out.calls += pull.calls;
    out.transmissions += pull.transmissions;
    apply_informs(state, newly);
    out.newly_informed = state.informed_count() - start_k;
    return out;
}

RoundOutcome round_r_pull_only(SimState& state, const CallDistribution& dist, bool include_self, RoundScratch& scratch,
                               Rng& rng) {
    const std::int64_t start_k = state.informed_count();
    scratch.ensure(state.n());
    auto& newly = scratch.newly;
    newly.clear();
    RoundOutcome out = r_pull_decisions(state, dist, include_self, scratch, rng, newly);
    apply_informs(state, newly);
    out.newly_informed = state.informed_count() - start_k;
    return out;
}

RoundOutcome round_single_call_pull(SimState& state, bool include_self, RoundScratch& scratch, Rng& rng) {
    RoundOutcome out;
    const std::int64_t start_k = state.informed_count();
    const std::int64_t n = state.n();
    scratch.ensure(n);
    auto& callers = scratch.buf_a;
    callers.clear();
    for (std::int64_t pos = start_k; pos < n; ++pos) callers.push_back(state.node_at(pos));
    sample_ordered_calls(callers, n, include_self, scratch.table, rng);

    const std::uint64_t epoch = ++scratch.epoch;
    auto& newly = scratch.newly;
    newly.clear();
    for (std::size_t i = 0; i < scratch.table.size(); ++i) {
        const std::uint32_t c = scratch.table.callers_by_order[i];
        const std::uint32_t t = scratch.table.target_by_order[i];
        ++out.calls;
        if (scratch.stamp[t] == epoch) continue;  // a lower-order call already claimed this target
        scratch.stamp[t] = epoch;
        if (state.informed(t)) {
            ++out.transmissions;
            newly.push_back(c);
        }
    }
    apply_informs(state, newly);
    out.newly_informed = state.informed_count() - start_k;
    return out;
}

RoundOutcome round_single_call_push_pull(SimState& state, bool include_self, RoundScratch& scratch, Rng& rng) {
    RoundOutcome out;
    const std::int64_t start_k = state.informed_count();
    const std::int64_t n = state.n();
    scratch.ensure(n);
    auto& callers = scratch.buf_a;
    callers.resize(static_cast<std::size_t>(n));
    for (std::int64_t v = 0; v < n; ++v) callers[static_cast<std::size_t>(v)] = static_cast<std::uint32_t>(v);
    sample_ordered_calls(callers, n, include_self, scratch.table, rng);

    const std::uint64_t epoch = ++scratch.epoch;
    auto& accepted_targets = scratch.buf_b;
    accepted_targets.clear();
    for (std::size_t i = 0; i < scratch.table.size(); ++i) {
        const std::uint32_t c = scratch.table.callers_by_order[i];
        const std::uint32_t t = scratch.table.target_by_order[i];
        scratch.target_of[c] = t;
        ++out.calls;
        if (scratch.stamp[t] != epoch) {
            scratch.stamp[t] = epoch;
            scratch.claim[t] = c;
            accepted_targets.push_back(t);
        }
    }
    for (const std::uint32_t t : accepted_targets) {
        const std::uint32_t c = scratch.claim[t];
        if (c != t && (state.informed(c) || state.informed(t))) ++out.transmissions;
    }
    auto& newly = scratch.newly;
    newly.clear();
    for (std::int64_t pos = start_k; pos < n; ++pos) {
        const std::uint32_t x = state.node_at(pos);
        const bool pushed = scratch.stamp[x] == epoch && scratch.claim[x] != x && state.informed(scratch.claim[x]);
        const std::uint32_t t = scratch.target_of[x];
        const bool pulled = scratch.stamp[t] == epoch && scratch.claim[t] == x && state.informed(t);
        if (pushed || pulled) newly.push_back(x);
    }
    apply_informs(state, newly);
    out.newly_informed = state.informed_count() - start_k;
    return out;
}

RoundOutcome round_transition_push_pull(SimState& state, std::int64_t transition_time, bool include_self,
                                        RoundScratch& scratch, Rng& rng) {
    if (state.round < transition_time) return round_single_call_push_pull(state, include_self, scratch, rng);
    return round_single_call_pull(state, include_self, scratch, rng);
}

std::int64_t default_transition_time(std::int64_t n) {
    const double base = 3.0 - 2.0 / std::exp(1.0);
    return static_cast<std::int64_t>(std::ceil(std::log(static_cast<double>(n)) / std::log(base)));
}

RoundOutcome step_round(SimState& state, const ProtocolSpec& spec, std::int64_t transition_time, bool pushes_enabled,
                        RoundScratch& scratch, Rng& rng) {
    switch (spec.kind) {
        case ProtocolKind::Push:
            return pushes_enabled ? round_push(state, spec.success_prob, spec.include_self, scratch, rng)
                                  : RoundOutcome{};
        case ProtocolKind::Pull:
            return round_pull(state, spec.success_prob, spec.include_self, scratch, rng);
        case ProtocolKind::PushPull:
            return pushes_enabled ? round_push_pull(state, spec.success_prob, spec.include_self, scratch, rng)
                                  : round_pull(state, spec.success_prob, spec.include_self, scratch, rng);
        case ProtocolKind::DynamicGnpPush:
            return pushes_enabled ? round_dynamic_gnp_push(state, *spec.edge_density, scratch, rng) : RoundOutcome{};
        case ProtocolKind::RPush:
            return pushes_enabled ? round_r_push(state, *spec.call_distribution, spec.include_self, scratch, rng)
                                  : RoundOutcome{};
        case ProtocolKind::RPushPull:
            return pushes_enabled ? round_r_push_pull(state, *spec.call_distribution, spec.include_self, scratch, rng)
                                  : round_r_pull_only(state, *spec.call_distribution, spec.include_self, scratch, rng);
        case ProtocolKind::SingleCallPull:
            return round_single_call_pull(state, spec.include_self, scratch, rng);
        case ProtocolKind::SingleCallPushPull:
            return pushes_enabled ? round_single_call_push_pull(state, spec.include_self, scratch, rng)
                                  : round_single_call_pull(state, spec.include_self, scratch, rng);
        case ProtocolKind::TransitionTimePushPull:
            return round_transition_push_pull(state, transition_time, spec.include_self, scratch, rng);
    }
    return {};
}

} // namespace gossip
