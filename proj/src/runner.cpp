#include "gossip/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "gossip/analytic.hpp"
#include "gossip/oracle.hpp"
#include "gossip/protocols.hpp"

namespace gossip {

using nlohmann::json;

namespace {

const std::set<std::string>& allowed_keys() {
    static const std::set<std::string> keys = {
        "protocol",   "success_prob", "edge_density", "call_distribution", "transition_time",
        "include_self", "n", "n_list", "trials", "seed", "policy", "out_csv", "out_summary",
        "parallelism", "record_trace", "thresholds"};
    return keys;
}

StoppingPolicy policy_from_json(const json& j) {
    StoppingPolicy p;
    if (!j.is_object()) throw InvalidParameterError("config: policy must be an object");
    const std::string mode = j.value("mode", "until_all_informed");
    if (mode == "until_all_informed") {
        p.mode = StoppingPolicy::Mode::UntilAllInformed;
    } else if (mode == "round_cap") {
        if (!j.contains("max_rounds")) throw InvalidParameterError("config: policy.max_rounds is required");
        p = StoppingPolicy::round_cap(j.at("max_rounds").get<std::int64_t>());
    } else if (mode == "age_limit") {
        if (!j.contains("age_limit")) throw InvalidParameterError("config: policy.age_limit is required");
        p = StoppingPolicy::with_age_limit(j.at("age_limit").get<std::int64_t>());
    } else {
        throw InvalidParameterError("config: unknown policy.mode '" + mode + "'");
    }
    for (const auto& [key, _] : j.items())
        if (key != "mode" && key != "max_rounds" && key != "age_limit")
            throw InvalidParameterError("config: unknown policy key '" + key + "'");
    return p;
}

json policy_to_json(const StoppingPolicy& p) {
    switch (p.mode) {
        case StoppingPolicy::Mode::RoundCap:
            return {{"mode", "round_cap"}, {"max_rounds", p.max_rounds}};
        case StoppingPolicy::Mode::AgeLimit:
            return {{"mode", "age_limit"}, {"age_limit", p.age_limit}};
        default:
            return {{"mode", "until_all_informed"}};
    }
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw InvalidParameterError("config: top level must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed_keys().count(key)) throw InvalidParameterError("config: unknown key '" + key + "'");

    ExperimentConfig c;
    if (!j.contains("protocol")) throw InvalidParameterError("config: missing required field 'protocol'");
    const auto kind = protocol_from_name(j.at("protocol").get<std::string>());
    if (!kind) throw InvalidParameterError("config: unknown protocol '" + j.at("protocol").get<std::string>() + "'");
    c.spec.kind = *kind;
    if (j.contains("success_prob")) c.spec.success_prob = j.at("success_prob").get<double>();
    if (j.contains("edge_density")) c.spec.edge_density = j.at("edge_density").get<double>();
    if (j.contains("call_distribution")) {
        CallDistribution d;
        d.probs = j.at("call_distribution").get<std::vector<double>>();
        c.spec.call_distribution = std::move(d);
    }
    if (j.contains("transition_time")) c.spec.transition_time = j.at("transition_time").get<std::int64_t>();
    if (j.contains("include_self")) c.spec.include_self = j.at("include_self").get<bool>();

    if (j.contains("n")) c.n_list.push_back(j.at("n").get<std::int64_t>());
    if (j.contains("n_list"))
        for (const auto& v : j.at("n_list")) c.n_list.push_back(v.get<std::int64_t>());
    if (c.n_list.empty()) throw InvalidParameterError("config: missing required field 'n' or 'n_list'");

    if (j.contains("trials")) c.trials = j.at("trials").get<std::int64_t>();
    if (j.contains("seed")) c.root_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("policy")) c.policy = policy_from_json(j.at("policy"));
    if (j.contains("out_csv")) c.out_csv = j.at("out_csv").get<std::string>();
    if (j.contains("out_summary")) c.out_summary = j.at("out_summary").get<std::string>();
    if (j.contains("parallelism")) c.parallelism = j.at("parallelism").get<int>();
    if (j.contains("record_trace")) c.record_trace = j.at("record_trace").get<bool>();
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        for (const auto& [key, _] : t.items())
            if (key != "gap_stability" && key != "tail_r2" && key != "ci_level" && key != "tail_r_max")
                throw InvalidParameterError("config: unknown thresholds key '" + key + "'");
        c.gap_stability_threshold = t.value("gap_stability", c.gap_stability_threshold);
        c.tail_r2_threshold = t.value("tail_r2", c.tail_r2_threshold);
        c.ci_level = t.value("ci_level", c.ci_level);
        c.tail_r_max = t.value("tail_r_max", c.tail_r_max);
    }

    validate_spec_or_throw(c.spec);
    if (c.trials < 1) throw InvalidParameterError("config: trials must be >= 1");
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameterError("config: cannot open '" + path + "'");
    json j;
    in >> j;
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json j;
    j["protocol"] = protocol_name(spec.kind);
    if (spec.success_prob != 1.0) j["success_prob"] = spec.success_prob;
    if (spec.edge_density) j["edge_density"] = *spec.edge_density;
    if (spec.call_distribution) j["call_distribution"] = spec.call_distribution->probs;
    if (spec.transition_time) j["transition_time"] = *spec.transition_time;
    if (!spec.include_self) j["include_self"] = false;
    j["n_list"] = n_list;
    j["trials"] = trials;
    j["seed"] = root_seed;
    j["policy"] = policy_to_json(policy);
    if (!out_csv.empty()) j["out_csv"] = out_csv;
    if (!out_summary.empty()) j["out_summary"] = out_summary;
    if (parallelism != 0) j["parallelism"] = parallelism;
    if (record_trace) j["record_trace"] = record_trace;
    j["thresholds"] = {{"gap_stability", gap_stability_threshold},
                       {"tail_r2", tail_r2_threshold},
                       {"ci_level", ci_level},
                       {"tail_r_max", tail_r_max}};
    return j;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trials_csv(std::ostream& os, const ProtocolSpec& spec, std::int64_t n,
                      const std::vector<TrialResult>& batch) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& t = batch[i];
        os << csv_escape(protocol_name(spec.kind)) << ',' << n << ',' << i << ',' << t.seed << ','
           << t.spreading_time << ',' << t.calls_placed << ',' << t.rumor_transmissions << '\n';
    }
}

namespace {

json summary_to_json(const Summary& s) {
    return {{"mean", s.mean},
            {"variance", s.variance},
            {"ci_halfwidth", s.ci_halfwidth},
            {"ci_level", s.ci_level},
            {"trials", s.trials}};
}

} // namespace

int cmd_simulate(const ExperimentConfig& config, std::ostream& out) {
    std::ofstream csv;
    std::ostream* csv_os = nullptr;
    if (!config.out_csv.empty()) {
        csv.open(config.out_csv, std::ios::trunc);
        if (!csv) throw GossipError("cannot open CSV output '" + config.out_csv + "'");
        csv_os = &csv;
    }
    if (csv_os) *csv_os << "protocol,n,trial,seed,T,calls,transmissions\n";

    json summary;
    summary["config"] = config.to_json();
    summary["results"] = json::array();

    auto n_sorted = config.n_list;
    std::sort(n_sorted.begin(), n_sorted.end());
    for (const std::int64_t n : n_sorted) {
        const auto batch = run_batch(config.spec, n, config.trials, config.root_seed, config.policy,
                                     config.parallelism, config.record_trace);
        if (csv_os) write_trials_csv(*csv_os, config.spec, n, batch);
        const Summary s = summarize(batch, config.ci_level);

        json entry;
        entry["n"] = n;
        entry["summary"] = summary_to_json(s);
        try {
            const double prediction = predict(config.spec, n).value;
            entry["prediction"] = prediction;
            entry["gap"] = s.mean - prediction;
        } catch (const UnsupportedError&) {
            entry["prediction"] = nullptr;
        }
        try {
            const TailFit tf = fit_tail(batch, config.tail_r_max);
            entry["tail"] = {{"slope", tf.slope}, {"intercept", tf.intercept}, {"r2", tf.r2}, {"center", tf.center}};
        } catch (const InsufficientTailError& e) {
            entry["tail"] = nullptr;
            entry["tail_note"] = e.what();
        }
        summary["results"].push_back(entry);
        out << protocol_name(config.spec.kind) << " n=" << n << " mean=" << format_double(s.mean)
            << " ci=" << format_double(s.ci_halfwidth) << "\n";
    }

    if (!config.out_summary.empty()) {
        std::ofstream js(config.out_summary, std::ios::trunc);
        if (!js) throw GossipError("cannot open summary output '" + config.out_summary + "'");
        js << summary.dump(2) << "\n";
    }
    return 0;
}

int cmd_predict(const ProtocolSpec& spec, std::int64_t n, std::ostream& out) {
    const Prediction p = predict(spec, n);
    out << protocol_name(spec.kind) << " n=" << n << "\n";
    out << "  growth term: log_" << format_double(p.growth_base) << "(n) = "
        << format_double(std::log(static_cast<double>(n)) / std::log(p.growth_base)) << "\n";
    if (p.shrink_coefficient)
        out << "  shrink term: " << format_double(*p.shrink_coefficient)
            << " * ln(n) = " << format_double(*p.shrink_coefficient * std::log(static_cast<double>(n))) << "\n";
    if (p.shrink_loglog_base)
        out << "  shrink term: log_" << format_double(*p.shrink_loglog_base) << "(ln n) = "
            << format_double(std::log(std::log(static_cast<double>(n))) / std::log(*p.shrink_loglog_base)) << "\n";
    out << "  leading-order E[T] = " << format_double(p.value) << "  (additive O(1) not estimated)\n";
    return 0;
}

int cmd_oracle(const ProtocolSpec& spec, std::int64_t n, const std::string& out_path, std::ostream& out) {
    if (n > kOracleMaxN)
        throw UnsupportedError("exact computation is limited to n <= " + std::to_string(kOracleMaxN) +
                               "; use simulate for larger n");
    const TransitionFn fn = transition_fn_for(spec);
    const double expected = exact_expected_time(fn, n);
    out << protocol_name(spec.kind) << " n=" << n << " exact E[T] = " << format_double(expected) << "\n";
    if (!out_path.empty()) {
        const auto law = spreading_time_distribution(fn, n, default_round_cap(n));
        std::ofstream os(out_path, std::ios::trunc);
        if (!os) throw GossipError("cannot open output '" + out_path + "'");
        os << "t,prob\n";
        for (std::size_t t = 1; t < law.size(); ++t) os << t << ',' << format_double(law[t]) << '\n';
        out << "  distribution written to " << out_path << "\n";
    }
    return 0;
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& out) {
    const GapSeries series = gap_series(config.spec, config.n_list, config.trials, config.root_seed, config.policy,
                                        config.parallelism, config.ci_level);
    std::ofstream csv;
    std::ostream* os = &out;
    if (!config.out_csv.empty()) {
        csv.open(config.out_csv, std::ios::trunc);
        if (!csv) throw GossipError("cannot open CSV output '" + config.out_csv + "'");
        os = &csv;
    }
    *os << "protocol,n,mean,prediction,gap,ci_halfwidth\n";
    for (const auto& pt : series.points)
        *os << protocol_name(config.spec.kind) << ',' << pt.n << ',' << format_double(pt.mean) << ','
            << format_double(pt.prediction) << ',' << format_double(pt.gap) << ','
            << format_double(pt.ci_halfwidth) << '\n';
    if (!config.out_csv.empty())
        out << "sweep written to " << config.out_csv << " (" << series.points.size() << " rows)\n";
    return 0;
}

namespace {

json verdict(const std::string& check, bool pass, const json& details) {
    return {{"check", check}, {"pass", pass}, {"details", details}};
}

} // namespace

int cmd_verify(const ExperimentConfig& config, std::ostream& out) {
    json verdicts = json::array();
    bool all_pass = true;
    bool partial = false;
    auto add = [&](const std::string& check, bool pass, const json& details) {
        verdicts.push_back(verdict(check, pass, details));
        all_pass = all_pass && pass;
    };

    // growth conditions on the exact closed forms
    for (const auto& spec : {ProtocolSpec::push(), ProtocolSpec::pull(), ProtocolSpec::push_pull()}) {
        const auto regime = classify_regimes(spec);
        const auto report = verify_growth_conditions(spec, 1024, regime);
        add(std::string("growth-conditions-") + protocol_name(spec.kind), report.passed,
            {{"n", 1024}, {"gamma", regime.gamma}});
    }
    // negative control: an inflated gamma must be rejected
    {
        auto regime = classify_regimes(ProtocolSpec::push());
        regime.gamma = 1.5;
        const auto report = verify_growth_conditions(ProtocolSpec::push(), 1024, regime);
        add("growth-conditions-negative-control", !report.passed,
            {{"expected", "violation"}, {"first_violation_k", report.first_violation_k}});
    }

    // oracle vs Monte Carlo at small n
    for (const auto& spec : {ProtocolSpec::push(), ProtocolSpec::pull(0.5), ProtocolSpec::push_pull()}) {
        const std::int64_t n = 32;
        const double exact = exact_expected_time(transition_fn_for(spec), n);
        const auto batch = run_batch(spec, n, 20000, mix64(config.root_seed ^ 0xABCDu), {}, config.parallelism);
        const Summary s = summarize(batch);
        const double se = std::sqrt(s.variance / static_cast<double>(s.trials));
        const bool pass = std::abs(s.mean - exact) <= 3.0 * se;
        add(std::string("oracle-vs-monte-carlo-") + protocol_name(spec.kind), pass,
            {{"n", n}, {"exact", exact}, {"mc_mean", s.mean}, {"se", se}});
    }

    // gap stability at reduced sizes
    {
        const auto series = gap_series(ProtocolSpec::push(), {1 << 10, 1 << 12}, 400,
                                       mix64(config.root_seed ^ 0x9157u), {}, config.parallelism);
        const double diff = std::abs(series.points[1].gap - series.points[0].gap);
        const double ci = std::sqrt(series.points[0].ci_halfwidth * series.points[0].ci_halfwidth +
                                    series.points[1].ci_halfwidth * series.points[1].ci_halfwidth);
        const bool pass = diff <= config.gap_stability_threshold + ci;
        add("gap-stability-push", pass, {{"gap_small", series.points[0].gap}, {"gap_large", series.points[1].gap}});
    }

    // tail decay at reduced size
    try {
        const auto batch = run_batch(ProtocolSpec::push(), 1 << 12, 20000, mix64(config.root_seed ^ 0x7712u), {},
                                     config.parallelism);
        const TailFit tf = fit_tail(batch, config.tail_r_max);
        const bool pass = tf.slope < 0 && tf.r2 >= config.tail_r2_threshold;
        add("tail-decay-push", pass, {{"slope", tf.slope}, {"r2", tf.r2}});
    } catch (const InsufficientTailError& e) {
        partial = true;
        add("tail-decay-push", false, {{"error", e.what()}, {"partial", true}});
    }

    // covariance signs at reduced replay counts
    {
        const auto pull = estimate_pairwise_covariance(ProtocolSpec::pull(), 128, 32, 200000,
                                                       mix64(config.root_seed ^ 0x51u), config.parallelism);
        add("covariance-pull-zero", std::abs(pull.covariance) <= 3.0 * pull.se,
            {{"cov", pull.covariance}, {"se", pull.se}});
        const auto push = estimate_pairwise_covariance(ProtocolSpec::push(), 128, 32, 200000,
                                                       mix64(config.root_seed ^ 0x52u), config.parallelism);
        add("covariance-push-nonpositive", push.covariance <= 3.0 * push.se,
            {{"cov", push.covariance}, {"se", push.se}});
    }

    json result;
    result["verdicts"] = verdicts;
    result["all_pass"] = all_pass;
    result["partial"] = partial;
    out << result.dump(2) << "\n";
    if (!config.out_summary.empty()) {
        std::ofstream js(config.out_summary, std::ios::trunc);
        js << result.dump(2) << "\n";
    }
    return all_pass ? 0 : 1;
}

} // namespace gossip
