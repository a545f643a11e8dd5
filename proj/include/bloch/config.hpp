#pragma once

#include "bloch/fiber_assembly.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bloch {

struct ModelSpec {
    std::string name = "square_laplacian"; // free_chain | square_laplacian | harper | lieb | continuum
    long p = 0;
    long q = 1;
    int dim = 2;
    int m = 8;
    std::string potential = "zero";
    std::string magnetic = "zero";
};

enum class TaskKind { bands, butterfly, fermi, ids, verify, lift, classify };
std::string to_string(TaskKind kind);

struct TaskSpec {
    TaskKind kind = TaskKind::bands;
    int q_max = 0;         // butterfly
    double energy = 0.0;   // fermi
    double lo = 0.0;       // ids
    double hi = 0.0;       // ids
    int steps = 0;         // ids
    int band = 0;          // lift
    std::vector<double> k; // lift
};

enum class OutputFormat { csv, json, gnuplot };
std::string to_string(OutputFormat format);
OutputFormat parse_format(const std::string& text);

struct Tolerances {
    std::optional<double> flat_tol; // default 1e-9 * spectral width
    std::optional<double> tie_tol;  // default 1e-12 * energy scale
    std::optional<double> fermi_tol; // default 1e-9 * energy scale
};

struct RunConfig {
    ModelSpec model;
    int grid_n = 64;
    std::vector<TaskSpec> tasks;
    std::string output_dir = ".";
    OutputFormat format = OutputFormat::csv;
    int threads = 0; // 0: not set in the file
    bool polish = false;
    bool broken_gauge = false;
    bool ids_per_site = false;
    bool record_timing = true;
    std::uint64_t seed = 20240601;
    Tolerances tolerances;
};

/// Parses the flat key=value format. Tokens are separated by whitespace,
/// spaces around '=' are allowed, '#' starts a comment, and optional
/// section headers [model], [run], [tasks], [tolerances] only group keys.
/// `task` may be repeated. Throws ConfigError with the line number.
RunConfig parse_config(const std::string& text);

LatticeModel build_model(const ModelSpec& spec);

} // namespace bloch
