#pragma once

#include <cstdint>
#include <vector>

#include "gossip/core.hpp"
#include "gossip/engine.hpp"

namespace gossip {

// --- small numeric helpers -------------------------------------------------

double normal_quantile(double p);
// Student-t quantile via the normal quantile with a Cornish-Fisher
// correction; adequate for the df >= 30 regimes used here.
double student_t_quantile(double p, double df);
// Regularized upper incomplete gamma Q(s, x).
double gamma_q(double s, double x);
// P[Chi2_df >= x]
double chi_square_survival(double x, double df);

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ChiSquareResult {
    double statistic = 0;
    std::int64_t df = 0;
    double p_value = 1.0;
};
// Goodness of fit of observed counts against expected probabilities; bins
// with expected count below min_expected are pooled from the right.
ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& counts, const std::vector<double>& expected_probs,
                               double min_expected = 5.0);

// --- estimators -------------------------------------------------------------

struct Summary {
    double mean = 0;
    double variance = 0;  // unbiased
    double ci_halfwidth = 0;
    double ci_level = 0.95;
    std::int64_t trials = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> histogram;  // (T, count), sorted by T
};

Summary summarize(const std::vector<TrialResult>& batch, double ci_level = 0.95);

struct GapPoint {
    std::int64_t n = 0;
    double mean = 0;
    double prediction = 0;
    double gap = 0;
    double ci_halfwidth = 0;
};

struct GapSeries {
    std::vector<GapPoint> points;  // sorted by n
};

// Runs one batch per n and subtracts the leading-order prediction; the gap
// is the empirical realization of the O(1) term.
GapSeries gap_series(const ProtocolSpec& spec, const std::vector<std::int64_t>& n_list, std::int64_t trials,
                     std::uint64_t root_seed, const StoppingPolicy& policy = {}, int parallelism = 0,
                     double ci_level = 0.95);

struct TailFit {
    std::vector<std::int64_t> offsets;
    std::vector<double> log_survival;
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    std::int64_t center = 0;  // round(mean), offsets are relative to it
};

// Least-squares line on (r, log Pr[T >= round(mean) + r]) over offsets with
// at least 30 exceedances. Throws InsufficientTailError with fewer than 3
// usable offsets.
TailFit fit_tail(const std::vector<TrialResult>& batch, std::int64_t r_max);

struct CovarianceEstimate {
    double covariance = 0;
    double se = 0;  // batch-means standard error
    double p1 = 0;
    double p2 = 0;
    std::int64_t replays = 0;
};

// Replays one round from a constructed state with k informed (any k-prefix,
// by homogeneity) and tracks the informing indicators of two fixed
// uninformed nodes.
CovarianceEstimate estimate_pairwise_covariance(const ProtocolSpec& spec, std::int64_t n, std::int64_t k,
                                                std::int64_t replays, std::uint64_t root_seed, int parallelism = 0);

// Empirical per-node informing frequency at fixed (n, k) over single-round
// replays of one tracked uninformed node.
double empirical_pk(const ProtocolSpec& spec, std::int64_t n, std::int64_t k, std::int64_t replays,
                    std::uint64_t root_seed, int parallelism = 0);

// Per-node informing counts over replays for every uninformed node
// (homogeneity checks).
std::vector<std::int64_t> per_node_inform_counts(const ProtocolSpec& spec, std::int64_t n, std::int64_t k,
                                                 std::int64_t replays, std::uint64_t root_seed, int parallelism = 0);

// One-round newly-informed samples at fixed (n, k) (transition-law checks).
std::vector<std::int64_t> sample_round_law(const ProtocolSpec& spec, std::int64_t n, std::int64_t k,
                                           std::int64_t replays, std::uint64_t root_seed, int parallelism = 0);

struct MessageGrowthPoint {
    std::int64_t n = 0;
    double transmissions_per_node = 0;
    double completion_fraction = 0;  // trials fully informed by the age limit (1.0 without one)
};

struct MessageGrowth {
    std::vector<MessageGrowthPoint> points;
    LinearFit fit_log;     // transmissions/n against ln n
    LinearFit fit_loglog;  // transmissions/n against ln ln n
    bool loglog_fits_better = false;
};

MessageGrowth message_growth(const ProtocolSpec& spec, const StoppingPolicy& policy,
                             const std::vector<std::int64_t>& n_list, std::int64_t trials, std::uint64_t root_seed,
                             int parallelism = 0);

} // namespace gossip
