#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gossip/core.hpp"

namespace gossip {

// Per-node informing probability at informed count k. Asymptotic formulas
// (dynamic G(n,p) push and single-call push-pull have no exact finite-n
// closed form) carry is_asymptotic plus the scale of the neglected term.
struct PkValue {
    double value = 0;
    bool is_asymptotic = false;
    double error_scale = 0;
};

PkValue success_probability(const ProtocolSpec& spec, std::int64_t n, std::int64_t k);

// True when success_probability returns an exact (non-asymptotic) closed form.
bool has_exact_pk(const ProtocolSpec& spec);

// Leading-order expected spreading time (O(1) not estimated).
Prediction predict(const ProtocolSpec& spec, std::int64_t n);

enum class ShrinkKind { Exponential, DoubleExponential };

// Growth/shrink condition constants for one protocol. gamma with f and the
// growth a/b/c constants bound p_k in [1, fn); the shrink block holds either
// rho (uninformed count decays by e^-rho per round) or ell (uninformed
// fraction is raised to the ell-th power per round) on [n - gn, n].
// Upper-side constants serve upper bounds on the spreading time (lower
// bounds on progress) and vice versa.
struct RegimeParams {
    double gamma = 1.0;
    double f = 0.5;
    double growth_a_upper = 0;
    double growth_a_lower = 0;
    double growth_b = 0;
    double growth_c = 0;

    ShrinkKind shrink_kind = ShrinkKind::Exponential;
    double rho = 1.0;  // Exponential
    double ell = 2.0;  // DoubleExponential
    double g = 0.5;
    double shrink_a_upper = 0;
    double shrink_a_lower = 0;
    double shrink_c = 0;

    // which constants are derived vs module defaults
    std::string notes;
};

RegimeParams classify_regimes(const ProtocolSpec& spec);

// Target sequence with per-phase failure probabilities. For growth ledgers
// targets are the k_j (increasing, k_0 = 1, k_{j+1} = k_j + E0(k_j)); for
// exponential shrinking the u_j (decreasing from gn); for double exponential
// shrinking the eps_j (decreasing fractions from g). failure_probs[j] bounds
// the probability that phase j needs more than one round (growth/shrink) or
// is leapfrogged (lower bounds).
struct PhaseLedger {
    std::vector<double> targets;
    std::vector<double> failure_probs;
    std::int64_t phases = 0;  // J
    double sum_q = 0;
    double amplitude = 0;  // A used
    double exponent = 0;   // B (or alpha for the double-exp ledger)
};

// E(k) = gamma k (1 - (a+1)k/n - b/ln n), E0(k) = E(k) - A k^B, B in (0.5,1).
// q(k) = (gamma+c)/A^2 k^(1-2B), per-phase failure min(q(k_j), 1/(1+1/q(1))).
// Throws DegenerateTargetError when E0(1) <= 0.
PhaseLedger growth_phase_ledger(const RegimeParams& regime, std::int64_t n, double A, double B);

// E(u) = u(e^-rho + a u/n), E0(u) = E(u) + A u^(1-B), B in (0,0.5); u_0 = gn
// down to u_J <= 1. Requires E0(u) < u on [1, gn] (DegenerateTargetError
// otherwise). failure_probs[j] = min(1, q(u_{j+1})).
PhaseLedger shrink_phase_ledger_exp(const RegimeParams& regime, std::int64_t n, double A, double B);

// eps_0 = g, eps_{j+1} = 2a eps_j^ell down to n^-alpha, alpha < 1/(2 ell).
// Requires g < (2a)^(-1/(ell-1)) (NonDecreasingSequenceError otherwise). The
// recursion is checked against the closed form
// eps_j = (2a)^((ell^j - 1)/(ell - 1)) g^(ell^j) to relative 1e-12.
PhaseLedger shrink_phase_ledger_double(const RegimeParams& regime, std::int64_t n, double alpha);

// closed form for the double-exp target sequence, exposed for cross-checks
double double_exp_target_closed_form(double a, double ell, double g, std::int64_t j);

// Module defaults for the ledger constants: B = 3/4 (growth) and 1/4
// (shrinking); A by binary search for the largest value passing the
// monotonicity checks, scaled back by 4 to keep the target sequences well
// inside the validated region.
double default_growth_amplitude(const RegimeParams& regime, std::int64_t n, double B = 0.75);
double default_shrink_amplitude(const RegimeParams& regime, std::int64_t n, double B = 0.25);

inline constexpr double kDefaultGrowthB = 0.75;
inline constexpr double kDefaultShrinkB = 0.25;
inline constexpr double kDefaultDoubleExpAlphaFactor = 0.8;  // alpha = 0.8 / (2 ell)

// Expected-rounds bound for bridging two informed counts when p_k >= p_min
// on [l, m): E[T(l,m)] <= (n-l)/(n-m) / p_min, tail (n-l)/(n-m) (1-p_min)^r.
struct ConnectBound {
    double expected = 0;
    double ratio = 0;
    double p_min = 0;
    double tail(std::int64_t r) const;
};

ConnectBound connect_bound(std::int64_t n, std::int64_t l_count, std::int64_t m_count, double p_min);

// Chebyshev bound on jumping over [f n, f' n] in one round when p_k <= p_max
// and c_k <= c/n hold below f n: at most (p_max + c) / (n (f' - f - p_max(1-f))^2).
// Requires f' > f + p_max (1 - f).
double connect_overshoot_bound(std::int64_t n, double f, double f_prime, double p_max, double c);

// Checks both growth inequalities for every k < f n against the exact p_k:
//   p_k >= gamma k/n (1 - a_upper k/n - b/ln n)   (upper conditions)
//   p_k <= gamma k/n (1 + a_lower k/n + b/ln n)   (lower conditions)
struct GrowthConditionReport {
    bool passed = true;
    std::int64_t first_violation_k = -1;
    std::string violated_side;  // "upper" or "lower"
};

GrowthConditionReport verify_growth_conditions(const ProtocolSpec& spec, std::int64_t n, const RegimeParams& regime);

} // namespace gossip
