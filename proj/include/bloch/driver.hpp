#pragma once

#include "bloch/config.hpp"
#include "bloch/emit.hpp"
#include "bloch/spectral_measures.hpp"

#include <filesystem>
#include <vector>

namespace bloch {

struct Check {
    std::string name;
    bool passed = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyReport {
    int grid_n = 0;
    std::vector<Check> checks;
    AtomReport atoms;

    bool all_passed() const;
};

/// Runs the invariant suite on one model. Failures are recorded, not thrown.
VerifyReport verify_model(const LatticeModel& model, const RunConfig& cfg, int threads);

ojson model_echo(const ModelSpec& spec, const LatticeModel& model);

/// Harper spectra for every flux p/q in lowest terms with q <= q_max, 0 <= p < q.
OutputRecord run_butterfly(int q_max, int grid_n, int threads);
OutputRecord run_verify(const LatticeModel& model, const RunConfig& cfg, int threads);
OutputRecord run_task(const LatticeModel& model, const TaskSpec& task, const RunConfig& cfg, int threads);

struct RunSummary {
    std::vector<std::filesystem::path> files;
    bool verify_failed = false;
};

/// Builds the model, runs every task in order and writes one file per task
/// (bands.csv, bands_2.csv, ... when a kind repeats).
RunSummary run_all(const RunConfig& cfg, int threads);

} // namespace bloch
