#pragma once

#include "bloch/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace bloch {

using ojson = nlohmann::ordered_json;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// One whitespace-separated gnuplot block; blocks are separated by a blank line.
struct PlotBlock {
    std::string title;
    std::vector<std::vector<double>> rows;
};

struct OutputRecord {
    int schema_version = 1;
    std::string task;
    ojson model;
    ojson payload;
    ojson provenance;
    Table table;
    std::vector<PlotBlock> blocks;
    /// Set by the verify task when some check failed.
    bool failed = false;
};

/// Shortest form that reads back to the same double (17 significant digits).
std::string format_double(double v);

ojson to_json(const OutputRecord& record);
OutputRecord record_from_json(const ojson& j);

std::string render_csv(const OutputRecord& record);
std::string render_gnuplot(const OutputRecord& record);
std::string render(const OutputRecord& record, OutputFormat format);

std::string file_extension(OutputFormat format);

/// Writes <dir>/<stem>.<ext>, creating dir if needed. Throws IoError with the path.
std::filesystem::path emit(const OutputRecord& record, OutputFormat format, const std::filesystem::path& dir,
                           const std::string& stem);

} // namespace bloch
