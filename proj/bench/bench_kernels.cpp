// Serial vs OpenMP timings for the three data-parallel kernels. The
// parallel paths must reproduce the serial results (bit-exact for the
// generator, below EM tolerance for the reductions); this binary checks
// that while it measures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "judgedist/em.hpp"
#include "judgedist/evaluate.hpp"
#include "judgedist/simulate.hpp"

using namespace judgedist;

namespace {

double time_ms(const std::function<void()>& fn) {
    auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool match) {
    std::printf("%-28s %10.1f %10.1f %9.2fx   %s\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms,
                match ? "results match" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serially\n\n");
#endif
    std::printf("%-28s %10s %10s %10s\n", "kernel", "serial/ms", "omp/ms",
                "speedup");

    const MixtureParams gen{0.7, 8, 2, 1.5, 6};

    // record generation, per-record derived streams
    GeneratorSpec spec{gen, 11, 400000, 99};
    std::vector<JudgmentRecord> serial_records, parallel_records;
    double ts = time_ms([&] { serial_records = sample_judgments_serial(spec); });
    double tp = time_ms([&] { parallel_records = sample_judgments(spec); });
    bool same = serial_records.size() == parallel_records.size();
    for (std::size_t i = 0; same && i < serial_records.size(); ++i) {
        same = serial_records[i].bits == parallel_records[i].bits &&
               serial_records[i].id == parallel_records[i].id;
    }
    row("sample_judgments", ts, tp, same);

    // EM responsibility reduction
    std::vector<JudgmentSample> samples;
    samples.reserve(serial_records.size());
    for (const auto& rec : serial_records) samples.push_back(to_sample(rec));
    EmConfig em;
    MixtureParams init{0.6, 5, 2, 1, 4};
    MixtureParams out_serial, out_parallel;
    ts = time_ms([&] {
        for (int i = 0; i < 5; ++i) out_serial = em_step_serial(samples, init, em);
    });
    tp = time_ms([&] {
        for (int i = 0; i < 5; ++i) out_parallel = em_step(samples, init, em);
    });
    bool close = std::abs(out_serial.alpha1 - out_parallel.alpha1) < em.tol / 10 &&
                 std::abs(out_serial.w - out_parallel.w) < em.tol / 10;
    row("em_step x5", ts, tp, close);

    // hypergeometric sub-ensemble scan
    double rate_serial = 0.0, rate_parallel = 0.0;
    ts = time_ms([&] { rate_serial = actual_error_rate_serial(serial_records, 5); });
    tp = time_ms([&] { rate_parallel = actual_error_rate(serial_records, 5); });
    row("actual_error_rate k=5", ts, tp,
        std::abs(rate_serial - rate_parallel) < 1e-12);

    return 0;
}
