#include "gossip/engine.hpp"

#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gossip {

namespace {

bool has_push_component(ProtocolKind k) {
    return k != ProtocolKind::Pull && k != ProtocolKind::SingleCallPull;
}

void validate_policy(const ProtocolSpec& spec, const StoppingPolicy& policy) {
    switch (policy.mode) {
        case StoppingPolicy::Mode::UntilAllInformed:
            break;
        case StoppingPolicy::Mode::RoundCap:
            if (policy.max_rounds < 1) throw InvalidParameterError("RoundCap requires max_rounds >= 1");
            break;
        case StoppingPolicy::Mode::AgeLimit:
            if (policy.age_limit < 0 && policy.age_limit != kAgeLimitAuto)
                throw InvalidParameterError("AgeLimit requires a non-negative limit");
            if (!has_push_component(spec.kind))
                throw InvalidParameterError("AgeLimit is only valid for protocols with a push component");
            if (spec.kind == ProtocolKind::TransitionTimePushPull)
                throw InvalidParameterError("AgeLimit conflicts with the transition-time protocol");
            break;
    }
}

} // namespace

std::int64_t default_round_cap(std::int64_t n) {
    const double d = static_cast<double>(n);
    return static_cast<std::int64_t>(std::ceil(64.0 * (std::log2(d) + std::log(d))));
}

std::int64_t default_age_limit(std::int64_t n) {
    const double d = static_cast<double>(n);
    return static_cast<std::int64_t>(std::ceil(std::log(d) / std::log(3.0))) +
           3 * static_cast<std::int64_t>(std::ceil(std::log2(std::log(d))));
}

namespace {

TrialResult run_trial_impl(const ProtocolSpec& spec, std::int64_t n, const StoppingPolicy& policy, std::uint64_t seed,
                           bool record_trace, SimState& state, RoundScratch& scratch) {
    state.reset(1);
    Rng rng(seed);

    const std::int64_t cap = policy.mode == StoppingPolicy::Mode::RoundCap ? policy.max_rounds : default_round_cap(n);
    const std::int64_t transition = spec.kind == ProtocolKind::TransitionTimePushPull
                                        ? spec.transition_time.value_or(default_transition_time(n))
                                        : 0;
    const std::int64_t age_limit = policy.age_limit == kAgeLimitAuto ? default_age_limit(n) : policy.age_limit;

    TrialResult res;
    res.seed = seed;
    if (record_trace) res.trace = std::vector<std::int64_t>{1};

    while (state.informed_count() < n) {
        if (state.round >= cap) {
            res.spreading_time = state.round;
            res.calls_placed = state.calls_placed;
            res.rumor_transmissions = state.rumor_transmissions;
            res.completed = false;
            throw RoundCapExceededError("round cap " + std::to_string(cap) + " exceeded at n=" + std::to_string(n) +
                                            " (" + protocol_name(spec.kind) + ")",
                                        res);
        }
        const bool pushes_enabled = policy.mode != StoppingPolicy::Mode::AgeLimit || state.round < age_limit;
        const RoundOutcome out = step_round(state, spec, transition, pushes_enabled, scratch, rng);
        ++state.round;
        state.calls_placed += out.calls;
        state.rumor_transmissions += out.transmissions;
        if (record_trace) res.trace->push_back(state.informed_count());
    }

    res.spreading_time = state.round;
    res.calls_placed = state.calls_placed;
    res.rumor_transmissions = state.rumor_transmissions;
    res.completed = true;
    return res;
}

} // namespace

TrialResult run_trial(const ProtocolSpec& spec, std::int64_t n, const StoppingPolicy& policy, std::uint64_t seed,
                      bool record_trace) {
    if (n < 2) throw InvalidParameterError("run_trial requires n >= 2");
    validate_spec_or_throw(spec);
    validate_policy(spec, policy);
    SimState state(n);
    RoundScratch scratch;
    return run_trial_impl(spec, n, policy, seed, record_trace, state, scratch);
}

std::vector<TrialResult> run_batch_serial(const ProtocolSpec& spec, std::int64_t n, std::int64_t trials,
                                          std::uint64_t root_seed, const StoppingPolicy& policy, bool record_trace) {
    if (trials < 1) throw InvalidParameterError("run_batch requires trials >= 1");
    if (n < 2) throw InvalidParameterError("run_batch requires n >= 2");
    validate_spec_or_throw(spec);
    validate_policy(spec, policy);

    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    SimState state(n);
    RoundScratch scratch;
    for (std::int64_t i = 0; i < trials; ++i) {
        try {
            results[static_cast<std::size_t>(i)] =
                run_trial_impl(spec, n, policy, derive_trial_seed(root_seed, i), record_trace, state, scratch);
        } catch (const RoundCapExceededError& e) {
            throw RoundCapExceededError("trial " + std::to_string(i) + ": " + e.what(), e.partial);
        }
    }
    return results;
}

int resolve_parallelism(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GOSSIPSIM_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::vector<TrialResult> run_batch(const ProtocolSpec& spec, std::int64_t n, std::int64_t trials,
                                   std::uint64_t root_seed, const StoppingPolicy& policy, int parallelism,
                                   bool record_trace) {
    if (trials < 1) throw InvalidParameterError("run_batch requires trials >= 1");
    if (n < 2) throw InvalidParameterError("run_batch requires n >= 2");
    validate_spec_or_throw(spec);
    validate_policy(spec, policy);

    const int threads = resolve_parallelism(parallelism);
    if (threads <= 1) return run_batch_serial(spec, n, trials, root_seed, policy, record_trace);

    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    std::exception_ptr first_error;

#ifdef _OPENMP
#pragma omp parallel num_threads(threads)
    {
        SimState state(n);
        RoundScratch scratch;
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < trials; ++i) {
            try {
                results[static_cast<std::size_t>(i)] =
                    run_trial_impl(spec, n, policy, derive_trial_seed(root_seed, i), record_trace, state, scratch);
            } catch (const RoundCapExceededError& e) {
#pragma omp critical(gossip_batch_error)
                if (!first_error)
                    first_error = std::make_exception_ptr(
                        RoundCapExceededError("trial " + std::to_string(i) + ": " + e.what(), e.partial));
            } catch (...) {
#pragma omp critical(gossip_batch_error)
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
#else
    return run_batch_serial(spec, n, trials, root_seed, policy, record_trace);
#endif

    if (first_error) std::rethrow_exception(first_error);
    return results;
}

std::int64_t measure_first_passage(const std::vector<std::int64_t>& trace, std::int64_t m, std::int64_t k) {
    if (trace.empty()) throw InvalidParameterError("measure_first_passage: empty trace");
    std::int64_t s = -1, t = -1;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (s < 0 && trace[i] >= k) s = static_cast<std::int64_t>(i);
        if (trace[i] >= m) {
            t = static_cast<std::int64_t>(i);
            break;
        }
    }
    if (s < 0 || t < 0) throw InvalidParameterError("measure_first_passage: trace never reaches the threshold");
    return t - s;
}

} // namespace gossip
