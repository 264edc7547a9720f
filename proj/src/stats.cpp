#include "gossip/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gossip/analytic.hpp"
#include "gossip/protocols.hpp"
#include "gossip/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gossip {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidParameterError("normal_quantile requires p in (0,1)");
    // Acklam's rational approximation, |relative error| < 1.15e-9
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double student_t_quantile(double p, double df) {
    const double z = normal_quantile(p);
    const double z3 = z * z * z, z5 = z3 * z * z;
    return z + (z3 + z) / (4.0 * df) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * df * df);
}

namespace {

double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    for (int k = 1; k < 1000; ++k) {
        term *= x / (s + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

double gamma_q_contfrac(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

} // namespace

double gamma_q(double s, double x) {
    if (x < 0 || s <= 0) throw InvalidParameterError("gamma_q requires x >= 0, s > 0");
    if (x == 0) return 1.0;
    if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
    return gamma_q_contfrac(s, x);
}

double chi_square_survival(double x, double df) { return gamma_q(df / 2.0, x / 2.0); }

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidParameterError("linear_fit requires >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    LinearFit fit;
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0;
    const double mean_y = sy / n;
    double ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = fit.intercept + fit.slope * x[i];
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& counts, const std::vector<double>& expected_probs,
                               double min_expected) {
    if (counts.size() != expected_probs.size()) throw InvalidParameterError("chi_square_gof: size mismatch");
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw InvalidParameterError("chi_square_gof: empty sample");

    // pool adjacent bins until each merged bin expects at least min_expected
    std::vector<double> obs, exp;
    double acc_o = 0, acc_e = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        acc_o += static_cast<double>(counts[i]);
        acc_e += expected_probs[i] * static_cast<double>(total);
        if (acc_e >= min_expected) {
            obs.push_back(acc_o);
            exp.push_back(acc_e);
            acc_o = acc_e = 0;
        }
    }
    if (acc_e > 0 || acc_o > 0) {
        if (!exp.empty()) {
            obs.back() += acc_o;
            exp.back() += acc_e;
        } else {
            obs.push_back(acc_o);
            exp.push_back(acc_e);
        }
    }

    ChiSquareResult res;
    res.df = static_cast<std::int64_t>(obs.size()) - 1;
    if (res.df < 1) {
        res.p_value = 1.0;
        return res;
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double diff = obs[i] - exp[i];
        res.statistic += diff * diff / exp[i];
    }
    res.p_value = chi_square_survival(res.statistic, static_cast<double>(res.df));
    return res;
}

Summary summarize(const std::vector<TrialResult>& batch, double ci_level) {
    if (batch.empty()) throw InvalidParameterError("summarize: empty batch");
    Summary s;
    s.trials = static_cast<std::int64_t>(batch.size());
    s.ci_level = ci_level;
    double sum = 0;
    std::map<std::int64_t, std::int64_t> hist;
    for (const auto& t : batch) {
        sum += static_cast<double>(t.spreading_time);
        ++hist[t.spreading_time];
    }
    s.mean = sum / static_cast<double>(s.trials);
    double ss = 0;
    for (const auto& t : batch) {
        const double d = static_cast<double>(t.spreading_time) - s.mean;
        ss += d * d;
    }
    s.variance = s.trials > 1 ? ss / static_cast<double>(s.trials - 1) : 0.0;
    if (s.trials > 1 && s.variance > 0) {
        const double t_crit = student_t_quantile(0.5 + ci_level / 2.0, static_cast<double>(s.trials - 1));
        s.ci_halfwidth = t_crit * std::sqrt(s.variance / static_cast<double>(s.trials));
    }
    s.histogram.assign(hist.begin(), hist.end());
    return s;
}

GapSeries gap_series(const ProtocolSpec& spec, const std::vector<std::int64_t>& n_list, std::int64_t trials,
                     std::uint64_t root_seed, const StoppingPolicy& policy, int parallelism, double ci_level) {
    GapSeries series;
    auto sorted = n_list;
    std::sort(sorted.begin(), sorted.end());
    for (const std::int64_t n : sorted) {
        const auto batch = run_batch(spec, n, trials, mix64(root_seed ^ static_cast<std::uint64_t>(n)), policy,
                                     parallelism, false);
        const Summary s = summarize(batch, ci_level);
        GapPoint pt;
        pt.n = n;
        pt.mean = s.mean;
        pt.prediction = predict(spec, n).value;
        pt.gap = pt.mean - pt.prediction;
        pt.ci_halfwidth = s.ci_halfwidth;
        series.points.push_back(pt);
    }
    return series;
}

TailFit fit_tail(const std::vector<TrialResult>& batch, std::int64_t r_max) {
    if (batch.empty()) throw InsufficientTailError("fit_tail: empty batch");
    const Summary s = summarize(batch);
    const std::int64_t center = std::llround(s.mean);
    const auto trials = static_cast<double>(batch.size());

    TailFit fit;
    fit.center = center;
    std::vector<double> xs, ys;
    for (std::int64_t r = 1; r <= r_max; ++r) {
        std::int64_t exceed = 0;
        for (const auto& t : batch)
            if (t.spreading_time >= center + r) ++exceed;
        if (exceed < 30) continue;  // too noisy to use
        fit.offsets.push_back(r);
        fit.log_survival.push_back(std::log(static_cast<double>(exceed) / trials));
        xs.push_back(static_cast<double>(r));
        ys.push_back(fit.log_survival.back());
    }
    if (fit.offsets.size() < 3)
        throw InsufficientTailError("fit_tail: fewer than 3 offsets with 30+ exceedances");
    const LinearFit lf = linear_fit(xs, ys);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r2 = lf.r2;
    return fit;
}

namespace {

// One-round replay harness over a constructed k-informed state.
struct ReplayKernel {
    SimState state;
    RoundScratch scratch;
    const ProtocolSpec& spec;
    std::int64_t transition;
    std::int64_t k;

    ReplayKernel(const ProtocolSpec& s, std::int64_t n, std::int64_t k_informed)
        : state(n, k_informed), spec(s),
          transition(s.kind == ProtocolKind::TransitionTimePushPull
                         ? s.transition_time.value_or(default_transition_time(n))
                         : 0),
          k(k_informed) {}

    // Runs one round; caller inspects state then must call rollback().
    void run_round(std::uint64_t seed) {
        Rng rng(seed);
        step_round(state, spec, transition, true, scratch, rng);
    }

    void rollback() { state.rollback_informed(k); }
};

} // namespace

CovarianceEstimate estimate_pairwise_covariance(const ProtocolSpec& spec, std::int64_t n, std::int64_t k,
                                                std::int64_t replays, std::uint64_t root_seed, int parallelism) {
    validate_spec_or_throw(spec);
    if (k < 1 || k > n - 2) throw InvalidParameterError("covariance estimate needs two uninformed nodes");
    const auto x1 = static_cast<std::uint32_t>(k);
    const auto x2 = static_cast<std::uint32_t>(k + 1);

    const std::int64_t num_batches = std::min<std::int64_t>(100, replays);
    std::vector<double> batch_cov(static_cast<std::size_t>(num_batches), 0.0);
    std::int64_t c1 = 0, c2 = 0, c12 = 0;

    const int threads = resolve_parallelism(parallelism);
#ifdef _OPENMP
#pragma omp parallel num_threads(threads) reduction(+ : c1, c2, c12)
#endif
    {
        ReplayKernel kernel(spec, n, k);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (std::int64_t b = 0; b < num_batches; ++b) {
            const std::int64_t lo = b * replays / num_batches;
            const std::int64_t hi = (b + 1) * replays / num_batches;
            std::int64_t b1 = 0, b2 = 0, b12 = 0;
            for (std::int64_t i = lo; i < hi; ++i) {
                kernel.run_round(derive_trial_seed(root_seed, i));
                const bool i1 = kernel.state.informed(x1);
                const bool i2 = kernel.state.informed(x2);
                kernel.rollback();
                b1 += i1;
                b2 += i2;
                b12 += i1 && i2;
            }
            const double m = static_cast<double>(hi - lo);
            batch_cov[static_cast<std::size_t>(b)] =
                static_cast<double>(b12) / m - (static_cast<double>(b1) / m) * (static_cast<double>(b2) / m);
            c1 += b1;
            c2 += b2;
            c12 += b12;
        }
    }
    (void)threads;

    CovarianceEstimate est;
    est.replays = replays;
    const double r = static_cast<double>(replays);
    est.p1 = static_cast<double>(c1) / r;
    est.p2 = static_cast<double>(c2) / r;
    est.covariance = static_cast<double>(c12) / r - est.p1 * est.p2;
    double mean_b = 0;
    for (double v : batch_cov) mean_b += v;
    mean_b /= static_cast<double>(num_batches);
    double ss = 0;
    for (double v : batch_cov) ss += (v - mean_b) * (v - mean_b);
    const double var_b = num_batches > 1 ? ss / static_cast<double>(num_batches - 1) : 0.0;
    est.se = std::sqrt(var_b / static_cast<double>(num_batches));
    return est;
}

double empirical_pk(const ProtocolSpec& spec, std::int64_t n, std::int64_t k, std::int64_t replays,
                    std::uint64_t root_seed, int parallelism) {
    validate_spec_or_throw(spec);
    if (k < 1 || k > n - 1) throw InvalidParameterError("empirical_pk requires 1 <= k < n");
    const auto tracked = static_cast<std::uint32_t>(k);  // first uninformed node
    std::int64_t hits = 0;

    const int threads = resolve_parallelism(parallelism);
#ifdef _OPENMP
#pragma omp parallel num_threads(threads) reduction(+ : hits)
#endif
    {
        ReplayKernel kernel(spec, n, k);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (std::int64_t i = 0; i < replays; ++i) {
            kernel.run_round(derive_trial_seed(root_seed, i));
            hits += kernel.state.informed(tracked);
            kernel.rollback();
        }
    }
    (void)threads;
    return static_cast<double>(hits) / static_cast<double>(replays);
}

std::vector<std::int64_t> per_node_inform_counts(const ProtocolSpec& spec, std::int64_t n, std::int64_t k,
                                                 std::int64_t replays, std::uint64_t root_seed, int parallelism) {
    (void)parallelism;
    validate_spec_or_throw(spec);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
    ReplayKernel kernel(spec, n, k);
    for (std::int64_t i = 0; i < replays; ++i) {
        kernel.run_round(derive_trial_seed(root_seed, i));
        for (std::int64_t node = k; node < n; ++node)
            counts[static_cast<std::size_t>(node)] += kernel.state.informed(static_cast<std::uint32_t>(node));
        kernel.rollback();
    }
    return counts;
}

std::vector<std::int64_t> sample_round_law(const ProtocolSpec& spec, std::int64_t n, std::int64_t k,
                                           std::int64_t replays, std::uint64_t root_seed, int parallelism) {
    (void)parallelism;
    validate_spec_or_throw(spec);
    std::vector<std::int64_t> samples(static_cast<std::size_t>(replays), 0);
    ReplayKernel kernel(spec, n, k);
    for (std::int64_t i = 0; i < replays; ++i) {
        kernel.run_round(derive_trial_seed(root_seed, i));
        samples[static_cast<std::size_t>(i)] = kernel.state.informed_count() - k;
        kernel.rollback();
    }
    return samples;
}

MessageGrowth message_growth(const ProtocolSpec& spec, const StoppingPolicy& policy,
                             const std::vector<std::int64_t>& n_list, std::int64_t trials, std::uint64_t root_seed,
                             int parallelism) {
    MessageGrowth mg;
    auto sorted = n_list;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> xs_log, xs_loglog, ys;
    for (const std::int64_t n : sorted) {
        const auto batch = run_batch(spec, n, trials, mix64(root_seed ^ static_cast<std::uint64_t>(n)), policy,
                                     parallelism, false);
        const std::int64_t limit = policy.age_limit == kAgeLimitAuto ? default_age_limit(n) : policy.age_limit;
        MessageGrowthPoint pt;
        pt.n = n;
        double total = 0;
        std::int64_t by_limit = 0;
        for (const auto& t : batch) {
            total += static_cast<double>(t.rumor_transmissions);
            if (policy.mode != StoppingPolicy::Mode::AgeLimit || t.spreading_time <= limit) ++by_limit;
        }
        pt.transmissions_per_node = total / static_cast<double>(batch.size()) / static_cast<double>(n);
        pt.completion_fraction = static_cast<double>(by_limit) / static_cast<double>(batch.size());
        mg.points.push_back(pt);
        const double ln_n = std::log(static_cast<double>(n));
        xs_log.push_back(ln_n);
        xs_loglog.push_back(std::log(ln_n));
        ys.push_back(pt.transmissions_per_node);
    }
    mg.fit_log = linear_fit(xs_log, ys);
    mg.fit_loglog = linear_fit(xs_loglog, ys);
    mg.loglog_fits_better = mg.fit_loglog.r2 > mg.fit_log.r2;
    return mg;
}

} // namespace gossip
