#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "gossip/runner.hpp"

namespace {

using namespace gossip;

struct ProtocolFlags {
    std::string protocol = "push";
    double fail = 0.0;  // per-call failure probability 1-p; 0 = fault-free
    std::optional<double> edge_density;
    std::string r_dist;
    std::optional<std::int64_t> transition_time;
    bool no_self = false;
};

CallDistribution parse_r_dist(const std::string& text) {
    // "0:0.3,1:0.4,2:0.3" or plain "0.3,0.4,0.3" (probabilities by r)
    CallDistribution d;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            d.probs.push_back(std::stod(item));
        } else {
            const auto r = static_cast<std::size_t>(std::stoll(item.substr(0, colon)));
            if (d.probs.size() <= r) d.probs.resize(r + 1, 0.0);
            d.probs[r] = std::stod(item.substr(colon + 1));
        }
    }
    return d;
}

ProtocolSpec spec_from_flags(const ProtocolFlags& f) {
    ProtocolSpec spec;
    const auto kind = protocol_from_name(f.protocol);
    if (!kind) throw InvalidParameterError("unknown protocol '" + f.protocol + "'");
    spec.kind = *kind;
    if (f.fail > 0.0) spec.success_prob = 1.0 - f.fail;
    if (f.edge_density) spec.edge_density = f.edge_density;
    if (!f.r_dist.empty()) spec.call_distribution = parse_r_dist(f.r_dist);
    if (f.transition_time) spec.transition_time = f.transition_time;
    spec.include_self = !f.no_self;
    validate_spec_or_throw(spec);
    return spec;
}

void add_protocol_flags(CLI::App* cmd, ProtocolFlags& f) {
    cmd->add_option("--protocol", f.protocol,
                    "push | pull | push-pull | dynamic-gnp-push | r-push | r-push-pull | "
                    "single-call-pull | single-call-push-pull | transition-push-pull");
    cmd->add_option("--fail", f.fail, "per-call failure probability 1-p")->check(CLI::Range(0.0, 0.999999));
    cmd->add_option("--edge-density", f.edge_density, "edge probability a/n for dynamic-gnp-push");
    cmd->add_option("--r-dist", f.r_dist, "call-count distribution, e.g. 0:0.3,1:0.4,2:0.3");
    cmd->add_option("--transition-time", f.transition_time, "rounds before single-call push-pull switches to pull");
    cmd->add_flag("--no-self", f.no_self, "draw targets among the other n-1 nodes");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation, exact computation and verification for randomized rumor spreading on complete graphs"};
    app.require_subcommand(1);

    ProtocolFlags flags;
    std::int64_t n = 1024;
    std::string n_list_text;
    std::int64_t trials = 1000;
    std::uint64_t seed = 1;
    std::int64_t age_limit = -2;  // unset
    std::string out_prefix;
    std::string config_path;
    int parallelism = 0;

    auto add_common = [&](CLI::App* cmd, bool with_protocol) {
        if (with_protocol) add_protocol_flags(cmd, flags);
        cmd->add_option("--n", n, "node count");
        cmd->add_option("--n-list", n_list_text, "comma-separated node counts");
        cmd->add_option("--trials", trials, "trials per n");
        cmd->add_option("--seed", seed, "root seed");
        cmd->add_option("--age-limit", age_limit, "informed nodes stop pushing at this rumor age (-1 = auto)");
        cmd->add_option("--out", out_prefix, "output prefix; writes <out>.csv and <out>.json");
        cmd->add_option("--parallelism", parallelism, "worker threads (0 = GOSSIPSIM_THREADS or all cores)");
        cmd->add_option("--config", config_path, "JSON config file (overrides the flags above)");
    };

    auto* simulate = app.add_subcommand("simulate", "run trial batches and write CSV + JSON summaries");
    add_common(simulate, true);
    auto* predict = app.add_subcommand("predict", "print the leading-order spreading time prediction");
    add_protocol_flags(predict, flags);
    predict->add_option("--n", n, "node count");
    auto* oracle = app.add_subcommand("oracle", "exact expected spreading time for small n");
    add_protocol_flags(oracle, flags);
    oracle->add_option("--n", n, "node count (<= 300)");
    oracle->add_option("--out", out_prefix, "also write the distribution of T as CSV");
    auto* verify = app.add_subcommand("verify", "run the reduced verification battery");
    add_common(verify, false);
    auto* sweep = app.add_subcommand("sweep", "gap series over a list of n");
    add_common(sweep, true);

    CLI11_PARSE(app, argc, argv);

    try {
        auto build_config = [&]() {
            if (!config_path.empty()) return ExperimentConfig::from_file(config_path);
            ExperimentConfig cfg;
            cfg.spec = spec_from_flags(flags);
            if (!n_list_text.empty()) {
                std::stringstream ss(n_list_text);
                std::string item;
                while (std::getline(ss, item, ',')) cfg.n_list.push_back(std::stoll(item));
            } else {
                cfg.n_list.push_back(n);
            }
            cfg.trials = trials;
            cfg.root_seed = seed;
            cfg.parallelism = parallelism;
            if (age_limit != -2) cfg.policy = StoppingPolicy::with_age_limit(age_limit);
            if (!out_prefix.empty()) {
                cfg.out_csv = out_prefix + ".csv";
                cfg.out_summary = out_prefix + ".json";
            }
            return cfg;
        };

        if (simulate->parsed()) return cmd_simulate(build_config(), std::cout);
        if (predict->parsed()) return cmd_predict(spec_from_flags(flags), n, std::cout);
        if (oracle->parsed())
            return cmd_oracle(spec_from_flags(flags), n, out_prefix.empty() ? "" : out_prefix + ".csv", std::cout);
        if (verify->parsed()) return cmd_verify(build_config(), std::cout);
        if (sweep->parsed()) return cmd_sweep(build_config(), std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
