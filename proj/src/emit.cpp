#include "bloch/emit.hpp"

#include "bloch/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bloch {

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ojson to_json(const OutputRecord& record)
{
    ojson j;
    j["schema_version"] = record.schema_version;
    j["task"] = record.task;
    j["model"] = record.model;
    j["payload"] = record.payload;
    j["provenance"] = record.provenance;
    if (record.task == "verify") j["failed"] = record.failed;
    return j;
}

OutputRecord record_from_json(const ojson& j)
{
    OutputRecord r;
    try {
        r.schema_version = j.at("schema_version").get<int>();
        r.task = j.at("task").get<std::string>();
        r.model = j.at("model");
        r.payload = j.at("payload");
        r.provenance = j.at("provenance");
        r.failed = j.value("failed", false);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed output record: ") + e.what());
    }
    if (r.schema_version != 1)
        throw InputError("unsupported schema_version " + std::to_string(r.schema_version));
    return r;
}

std::string render_csv(const OutputRecord& record)
{
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(record.table.header);
    for (const auto& row : record.table.rows) line(row);
    return out.str();
}

std::string render_gnuplot(const OutputRecord& record)
{
    std::ostringstream out;
    out << "# " << record.task << '\n';
    if (record.blocks.empty()) {
        out << '#';
        for (const auto& h : record.table.header) out << ' ' << h;
        out << '\n';
        for (const auto& row : record.table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
            out << '\n';
        }
        return out.str();
    }
    for (std::size_t b = 0; b < record.blocks.size(); ++b) {
        if (b) out << "\n\n";
        out << "# " << record.blocks[b].title << '\n';
        for (const auto& row : record.blocks[b].rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << format_double(row[i]);
            out << '\n';
        }
    }
    return out.str();
}

std::string render(const OutputRecord& record, OutputFormat format)
{
    switch (format) {
    case OutputFormat::csv: return render_csv(record);
    case OutputFormat::json: return to_json(record).dump(2) + "\n";
    case OutputFormat::gnuplot: return render_gnuplot(record);
    }
    return {};
}

std::string file_extension(OutputFormat format)
{
    switch (format) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::gnuplot: return "dat";
    }
    return "out";
}

std::filesystem::path emit(const OutputRecord& record, OutputFormat format, const std::filesystem::path& dir,
                           const std::string& stem)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto path = dir / (stem + "." + file_extension(format));
    const std::string text = render(record, format);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + path.string() + " for writing");
    file << text;
    file.close();
    if (!file) throw IoError("write failed for " + path.string());
    return path;
}

} // namespace bloch
