#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gossip/core.hpp"
#include "gossip/engine.hpp"
#include "gossip/stats.hpp"

namespace gossip {

struct ExperimentConfig {
    ProtocolSpec spec;
    std::vector<std::int64_t> n_list;
    std::int64_t trials = 1000;
    std::uint64_t root_seed = 1;
    StoppingPolicy policy;
    std::string out_csv;
    std::string out_summary;
    int parallelism = 0;
    bool record_trace = false;

    // acceptance-policy thresholds, tunable via config
    double gap_stability_threshold = 0.5;
    double tail_r2_threshold = 0.9;
    double ci_level = 0.95;
    std::int64_t tail_r_max = 8;

    // Strict parse: unknown keys are rejected, missing required keys are
    // named in the error.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
};

// RFC 4180 field quoting; floats are written with 17 significant digits.
std::string csv_escape(const std::string& field);
std::string format_double(double v);

void write_trials_csv(std::ostream& os, const ProtocolSpec& spec, std::int64_t n,
                      const std::vector<TrialResult>& batch);

// simulate: one batch per n; writes CSV rows ordered by (n, trial) plus a
// JSON summary (mean, CI, prediction, gap, tail fit when available).
int cmd_simulate(const ExperimentConfig& config, std::ostream& out);

int cmd_predict(const ProtocolSpec& spec, std::int64_t n, std::ostream& out);

// oracle: exact E[T] and the distribution of T up to the default round cap.
int cmd_oracle(const ProtocolSpec& spec, std::int64_t n, const std::string& out_path, std::ostream& out);

// verify: reduced-size verification battery with one machine-readable
// verdict per check (growth conditions incl. a negative control, oracle vs
// Monte Carlo, gap stability, tail decay, covariance signs).
int cmd_verify(const ExperimentConfig& config, std::ostream& out);

// sweep: gap series over n_list, one CSV row per n.
int cmd_sweep(const ExperimentConfig& config, std::ostream& out);

} // namespace gossip
