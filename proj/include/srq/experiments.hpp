#ifndef SRQ_EXPERIMENTS_HPP
#define SRQ_EXPERIMENTS_HPP

#include "srq/config.hpp"
#include "srq/metrics.hpp"
#include "srq/training.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace srq {

enum class SweepAxis { corruption_fraction, q };

SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepSpec {
    SweepAxis axis = SweepAxis::corruption_fraction;
    std::vector<double> values;
    std::vector<std::string> methods;  // subset of {SRGAN_E, SRGAN_QE, SRGAN_SQE}
    double fixed_fraction = 0.3;       // corruption fraction for the q axis
    RunConfig base;

    void validate() const;
};

struct SweepCell {
    std::string method;
    double axis_value = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    MetricReport report;  // clean-test aggregate when ok
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepCell> cells;
};

// q / lambda_S deltas of the paper's ablations; lambda_M and lambda_D keep
// their defaults.
void apply_ablation(const std::string& name, RunConfig& config);

// Trains and evaluates every (method, axis value) cell on its own corrupted
// copy of the training split; the test split stays clean and identical
// across cells. Failed cells are recorded, not fatal.
SweepResult run_sweep(const SweepSpec& spec, const std::vector<PatchPair>& pairs,
                      const std::filesystem::path& out_dir);

// grid.csv plus one SVG line plot per metric.
std::vector<std::filesystem::path> emit_plots(const SweepResult& result,
                                              const std::filesystem::path& out_dir);

std::string sweep_grid_csv(const SweepResult& result);

// evaluate a trained generator on clean test pairs
MetricReport evaluate_generator(Network& generator, const std::vector<PatchPair>& test_pairs);

}  // namespace srq

#endif
