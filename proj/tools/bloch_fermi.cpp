#include "bloch/config.hpp"
#include "bloch/driver.hpp"
#include "bloch/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum Exit { ok = 0, verify_failed = 1, config_error = 2, io_error = 3 };

int resolve_threads(int from_cli, int from_file)
{
    if (from_cli > 0) return from_cli;
    if (const char* env = std::getenv("BLOCH_FERMI_THREADS")) {
        try {
            const int t = std::stoi(env);
            if (t > 0) return t;
        } catch (const std::exception&) {
        }
        throw bloch::ConfigError(0, std::string("BLOCH_FERMI_THREADS must be a positive integer, got '") + env + "'");
    }
    return from_file > 0 ? from_file : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Band structure, Fermi surfaces and spectral measures of periodic lattice operators"};
    std::string config_path, out_dir, format;
    int grid = 0, threads = 0;
    bool no_timing = false;
    app.add_option("config", config_path, "configuration file")->required();
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--grid", grid, "points per Brillouin-zone direction (overrides grid_N)");
    app.add_option("--format", format, "csv, json or gnuplot")->check(CLI::IsMember({"csv", "json", "gnuplot"}));
    app.add_option("--threads", threads, "worker threads (fallback: BLOCH_FERMI_THREADS)");
    app.add_flag("--no-timing", no_timing, "omit wall-clock time from the provenance block");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : config_error;
    }

    try {
        std::ifstream in(config_path);
        if (!in) throw bloch::IoError("cannot read config file " + config_path);
        std::stringstream text;
        text << in.rdbuf();
        bloch::RunConfig cfg = bloch::parse_config(text.str());
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (!format.empty()) cfg.format = bloch::parse_format(format);
        if (grid != 0) {
            if (grid < 2) throw bloch::ConfigError(0, "range error: --grid must be >= 2");
            cfg.grid_n = grid;
        }
        if (threads < 0) throw bloch::ConfigError(0, "range error: --threads must be >= 1");
        if (no_timing) cfg.record_timing = false;

        const auto summary = bloch::run_all(cfg, resolve_threads(threads, cfg.threads));
        for (const auto& f : summary.files) std::cout << f.string() << '\n';
        if (summary.verify_failed) {
            std::cerr << "verification failed\n";
            return verify_failed;
        }
        return ok;
    } catch (const bloch::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return config_error;
    } catch (const bloch::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return io_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return config_error;
    }
}
