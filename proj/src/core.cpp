#include "gossip/core.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace gossip {

const char* protocol_name(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::Push: return "push";
        case ProtocolKind::Pull: return "pull";
        case ProtocolKind::PushPull: return "push-pull";
        case ProtocolKind::DynamicGnpPush: return "dynamic-gnp-push";
        case ProtocolKind::RPush: return "r-push";
        case ProtocolKind::RPushPull: return "r-push-pull";
        case ProtocolKind::SingleCallPull: return "single-call-pull";
        case ProtocolKind::SingleCallPushPull: return "single-call-push-pull";
        case ProtocolKind::TransitionTimePushPull: return "transition-push-pull";
    }
    return "?";
}

std::optional<ProtocolKind> protocol_from_name(const std::string& name) {
    auto norm = name;
    for (auto& c : norm)
        if (c == '_') c = '-';
    if (norm == "push") return ProtocolKind::Push;
    if (norm == "pull") return ProtocolKind::Pull;
    if (norm == "push-pull" || norm == "pushpull") return ProtocolKind::PushPull;
    if (norm == "dynamic-gnp-push" || norm == "dynamic-push" || norm == "gnp-push") return ProtocolKind::DynamicGnpPush;
    if (norm == "r-push" || norm == "rpush") return ProtocolKind::RPush;
    if (norm == "r-push-pull" || norm == "rpushpull") return ProtocolKind::RPushPull;
    if (norm == "single-call-pull") return ProtocolKind::SingleCallPull;
    if (norm == "single-call-push-pull") return ProtocolKind::SingleCallPushPull;
    if (norm == "transition-push-pull" || norm == "transition-time-push-pull") return ProtocolKind::TransitionTimePushPull;
    return std::nullopt;
}

double CallDistribution::mean() const {
    double m = 0;
    for (std::size_t r = 0; r < probs.size(); ++r) m += static_cast<double>(r) * probs[r];
    return m;
}

double CallDistribution::variance() const {
    const double m = mean();
    double s = 0;
    for (std::size_t r = 0; r < probs.size(); ++r) s += static_cast<double>(r) * static_cast<double>(r) * probs[r];
    return s - m * m;
}

int CallDistribution::min_support() const {
    for (std::size_t r = 0; r < probs.size(); ++r)
        if (probs[r] > 0) return static_cast<int>(r);
    return -1;
}

CallDistribution CallDistribution::constant(int r) {
    CallDistribution d;
    d.probs.assign(static_cast<std::size_t>(r) + 1, 0.0);
    d.probs[static_cast<std::size_t>(r)] = 1.0;
    return d;
}

CallDistribution CallDistribution::uniform(int lo, int hi) {
    CallDistribution d;
    d.probs.assign(static_cast<std::size_t>(hi) + 1, 0.0);
    for (int r = lo; r <= hi; ++r) d.probs[static_cast<std::size_t>(r)] = 1.0 / (hi - lo + 1);
    return d;
}

namespace {

constexpr double kDistributionSumTolerance = 1e-12;

bool uses_success_prob(ProtocolKind k) {
    return k == ProtocolKind::Push || k == ProtocolKind::Pull || k == ProtocolKind::PushPull;
}

} // namespace

std::vector<std::string> validate_spec(const ProtocolSpec& spec) {
    std::vector<std::string> errs;
    const ProtocolKind k = spec.kind;

    if (!(spec.success_prob > 0.0 && spec.success_prob <= 1.0))
        errs.push_back("success_prob must lie in (0,1]");
    if (!uses_success_prob(k) && spec.success_prob != 1.0)
        errs.push_back(std::string("success_prob is not a parameter of ") + protocol_name(k));

    if (k == ProtocolKind::RPush || k == ProtocolKind::RPushPull) {
        if (!spec.call_distribution) {
            errs.push_back("call_distribution is required for R-protocols");
        } else {
            const auto& d = *spec.call_distribution;
            if (d.probs.empty()) errs.push_back("call_distribution is empty");
            double sum = 0;
            bool negative = false;
            for (double p : d.probs) {
                if (p < 0) negative = true;
                sum += p;
            }
            if (negative) errs.push_back("call_distribution has a negative probability");
            if (std::abs(sum - 1.0) > kDistributionSumTolerance)
                errs.push_back("call_distribution probabilities must sum to 1 within 1e-12");
            if (!d.probs.empty() && d.min_support() < 0)
                errs.push_back("call_distribution has empty support");
        }
    } else if (spec.call_distribution) {
        errs.push_back(std::string("call_distribution is not a parameter of ") + protocol_name(k));
    }

    if (k == ProtocolKind::DynamicGnpPush) {
        if (!spec.edge_density)
            errs.push_back("edge_density is required for dynamic-gnp-push");
        else if (!(*spec.edge_density > 0.0))
            errs.push_back("edge_density must be positive");
    } else if (spec.edge_density) {
        errs.push_back(std::string("edge_density is not a parameter of ") + protocol_name(k));
    }

    if (k == ProtocolKind::TransitionTimePushPull) {
        if (spec.transition_time && *spec.transition_time < 0)
            errs.push_back("transition_time must be non-negative");
    } else if (spec.transition_time) {
        errs.push_back(std::string("transition_time is not a parameter of ") + protocol_name(k));
    }

    return errs;
}

void validate_spec_or_throw(const ProtocolSpec& spec) {
    const auto errs = validate_spec(spec);
    if (errs.empty()) return;
    std::ostringstream os;
    os << "invalid " << protocol_name(spec.kind) << " spec:";
    for (const auto& e : errs) os << " [" << e << "]";
    throw InvalidParameterError(os.str());
}

SimState::SimState(std::int64_t n, std::int64_t initially_informed) : n_(n), informed_count_(0) {
    if (n < 2) throw InvalidParameterError("SimState requires n >= 2");
    node_at_.resize(static_cast<std::size_t>(n));
    pos_of_.resize(static_cast<std::size_t>(n));
    reset(initially_informed);
}

void SimState::reset(std::int64_t initially_informed) {
    if (initially_informed < 1 || initially_informed > n_)
        throw InvalidParameterError("initially_informed out of range");
    for (std::int64_t i = 0; i < n_; ++i) {
        node_at_[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i);
        pos_of_[static_cast<std::size_t>(i)] = i;
    }
    informed_count_ = initially_informed;
    round = 0;
    calls_placed = 0;
    rumor_transmissions = 0;
}

} // namespace gossip
