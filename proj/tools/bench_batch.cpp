// Benchmark of the OpenMP batch runner against the serial reference, with an
// equality check on the results.
#include <chrono>
#include <cstdlib>
#include <iostream>

#include "gossip/engine.hpp"
#include "gossip/stats.hpp"

using namespace gossip;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    std::int64_t n = 1 << 14;
    std::int64_t trials = 2000;
    if (argc > 1) n = std::atoll(argv[1]);
    if (argc > 2) trials = std::atoll(argv[2]);

    const ProtocolSpec specs[] = {ProtocolSpec::push(), ProtocolSpec::push_pull(),
                                  ProtocolSpec::single_call_push_pull()};
    for (const auto& spec : specs) {
        const auto t0 = clock_type::now();
        const auto serial = run_batch_serial(spec, n, trials, 42);
        const double t_serial = seconds_since(t0);

        const auto t1 = clock_type::now();
        const auto parallel = run_batch(spec, n, trials, 42, {}, 0);
        const double t_parallel = seconds_since(t1);

        const bool equal = serial == parallel;
        const Summary s = summarize(serial);
        std::cout << protocol_name(spec.kind) << " n=" << n << " trials=" << trials << ": serial " << t_serial
                  << "s, parallel " << t_parallel << "s, speedup " << t_serial / t_parallel
                  << (equal ? " (results identical)" : " (RESULTS DIFFER!)") << ", mean T = " << s.mean << "\n";
        if (!equal) return 1;
    }
    return 0;
}
