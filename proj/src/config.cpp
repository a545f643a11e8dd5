#include "bloch/config.hpp"

#include "bloch/errors.hpp"
#include "bloch/models.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace bloch {

namespace {

long parse_long(const std::string& key, const std::string& value, int line)
{
    long out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(line, "type mismatch: " + key + " expects an integer, got '" + value + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& value, int line)
{
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size())
        throw ConfigError(line, "type mismatch: " + key + " expects a number, got '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value, int line)
{
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(line, "type mismatch: " + key + " expects true or false, got '" + value + "'");
}

std::vector<std::string> split_args(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

TaskSpec parse_task(const std::string& value, int line)
{
    static const std::regex shape(R"(^([a-z_]+)(?:\(([^()]*)\))?$)");
    std::smatch m;
    if (!std::regex_match(value, m, shape)) throw ConfigError(line, "malformed task '" + value + "'");
    const std::string name = m[1];
    const bool has_args = m[2].matched;
    const auto args = has_args ? split_args(m[2]) : std::vector<std::string>{};
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (args.size() < lo || args.size() > hi)
            throw ConfigError(line, "task " + name + " takes " + std::to_string(lo) +
                                        (hi != lo ? "-" + std::to_string(hi) : "") + " arguments");
    };
    TaskSpec t;
    if (name == "bands" || name == "verify" || name == "classify") {
        need(0, 0);
        t.kind = name == "bands" ? TaskKind::bands : name == "verify" ? TaskKind::verify : TaskKind::classify;
    } else if (name == "butterfly") {
        need(0, 1);
        t.kind = TaskKind::butterfly;
        if (!args.empty()) {
            t.q_max = static_cast<int>(parse_long("butterfly q_max", args[0], line));
            if (t.q_max < 1) throw ConfigError(line, "range error: butterfly q_max must be >= 1");
        }
    } else if (name == "fermi") {
        need(1, 1);
        t.kind = TaskKind::fermi;
        t.energy = parse_double("fermi energy", args[0], line);
    } else if (name == "ids") {
        need(3, 3);
        t.kind = TaskKind::ids;
        t.lo = parse_double("ids lo", args[0], line);
        t.hi = parse_double("ids hi", args[1], line);
        t.steps = static_cast<int>(parse_long("ids steps", args[2], line));
        if (!(t.lo < t.hi)) throw ConfigError(line, "range error: ids energy range needs lo < hi");
        if (t.steps < 1) throw ConfigError(line, "range error: ids steps must be >= 1");
    } else if (name == "lift") {
        need(2, 4);
        t.kind = TaskKind::lift;
        t.band = static_cast<int>(parse_long("lift band", args[0], line));
        for (std::size_t i = 1; i < args.size(); ++i) t.k.push_back(parse_double("lift k", args[i], line));
    } else {
        throw ConfigError(line, "unknown task '" + name + "'");
    }
    return t;
}

} // namespace

std::string to_string(TaskKind kind)
{
    switch (kind) {
    case TaskKind::bands: return "bands";
    case TaskKind::butterfly: return "butterfly";
    case TaskKind::fermi: return "fermi";
    case TaskKind::ids: return "ids";
    case TaskKind::verify: return "verify";
    case TaskKind::lift: return "lift";
    case TaskKind::classify: return "classify";
    }
    return "unknown";
}

std::string to_string(OutputFormat format)
{
    switch (format) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::gnuplot: return "gnuplot";
    }
    return "csv";
}

OutputFormat parse_format(const std::string& text)
{
    if (text == "csv") return OutputFormat::csv;
    if (text == "json") return OutputFormat::json;
    if (text == "gnuplot") return OutputFormat::gnuplot;
    throw ConfigError(0, "unknown output format '" + text + "' (csv, json, gnuplot)");
}

RunConfig parse_config(const std::string& text)
{
    static const std::set<std::string> sections = {"model", "run", "tasks", "tolerances"};
    static const std::set<std::string> models = {"free_chain", "square_laplacian", "harper", "lieb", "continuum"};
    static const std::regex around_eq(R"(\s*=\s*)");

    RunConfig cfg;
    int q_max = 0;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = std::regex_replace(raw, around_eq, "=");
        std::istringstream tokens(line);
        std::string tok;
        while (tokens >> tok) {
            if (tok.front() == '[') {
                if (tok.back() != ']' || !sections.contains(tok.substr(1, tok.size() - 2)))
                    throw ConfigError(line_no, "unknown section " + tok);
                continue;
            }
            const auto eq = tok.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size())
                throw ConfigError(line_no, "expected key=value, got '" + tok + "'");
            const std::string key = tok.substr(0, eq);
            const std::string value = tok.substr(eq + 1);

            if (key == "model") {
                if (!models.contains(value)) throw ConfigError(line_no, "unknown model '" + value + "'");
                cfg.model.name = value;
            } else if (key == "p") {
                cfg.model.p = parse_long(key, value, line_no);
            } else if (key == "q") {
                cfg.model.q = parse_long(key, value, line_no);
                if (cfg.model.q < 1) throw ConfigError(line_no, "range error: q must be >= 1");
            } else if (key == "dim") {
                cfg.model.dim = static_cast<int>(parse_long(key, value, line_no));
                if (cfg.model.dim < 1 || cfg.model.dim > 3) throw ConfigError(line_no, "range error: dim must be 1, 2 or 3");
            } else if (key == "m") {
                cfg.model.m = static_cast<int>(parse_long(key, value, line_no));
                if (cfg.model.m < 4) throw ConfigError(line_no, "range error: m must be >= 4");
            } else if (key == "V") {
                cfg.model.potential = value;
            } else if (key == "a") {
                cfg.model.magnetic = value;
            } else if (key == "grid_N") {
                cfg.grid_n = static_cast<int>(parse_long(key, value, line_no));
                if (cfg.grid_n < 2) throw ConfigError(line_no, "range error: grid_N must be >= 2, got " + value);
            } else if (key == "task") {
                cfg.tasks.push_back(parse_task(value, line_no));
            } else if (key == "q_max") {
                q_max = static_cast<int>(parse_long(key, value, line_no));
                if (q_max < 1) throw ConfigError(line_no, "range error: q_max must be >= 1");
            } else if (key == "output_dir") {
                cfg.output_dir = value;
            } else if (key == "format") {
                try {
                    cfg.format = parse_format(value);
                } catch (const ConfigError& e) {
                    throw ConfigError(line_no, e.what());
                }
            } else if (key == "threads") {
                cfg.threads = static_cast<int>(parse_long(key, value, line_no));
                if (cfg.threads < 1) throw ConfigError(line_no, "range error: threads must be >= 1");
            } else if (key == "polish") {
                cfg.polish = parse_bool(key, value, line_no);
            } else if (key == "broken_gauge") {
                cfg.broken_gauge = parse_bool(key, value, line_no);
            } else if (key == "ids_per_site") {
                cfg.ids_per_site = parse_bool(key, value, line_no);
            } else if (key == "record_timing") {
                cfg.record_timing = parse_bool(key, value, line_no);
            } else if (key == "seed") {
                const long s = parse_long(key, value, line_no);
                if (s < 0) throw ConfigError(line_no, "range error: seed must be >= 0");
                cfg.seed = static_cast<std::uint64_t>(s);
            } else if (key == "flat_tol" || key == "tie_tol" || key == "fermi_tol") {
                const double v = parse_double(key, value, line_no);
                if (!(v > 0.0)) throw ConfigError(line_no, "range error: " + key + " must be positive");
                (key == "flat_tol"  ? cfg.tolerances.flat_tol
                 : key == "tie_tol" ? cfg.tolerances.tie_tol
                                    : cfg.tolerances.fermi_tol) = v;
            } else {
                throw ConfigError(line_no, "unknown key '" + key + "'");
            }
        }
    }
    for (auto& t : cfg.tasks) {
        if (t.kind != TaskKind::butterfly || t.q_max > 0) continue;
        if (q_max == 0) throw ConfigError(0, "butterfly task needs q_max (butterfly(Q) or q_max=Q)");
        t.q_max = q_max;
    }
    if (cfg.tasks.empty()) throw ConfigError(0, "no task given");
    return cfg;
}

LatticeModel build_model(const ModelSpec& spec)
{
    if (spec.name == "free_chain") return free_chain();
    if (spec.name == "square_laplacian") return square_laplacian();
    if (spec.name == "harper") return harper(Rational(spec.p, spec.q));
    if (spec.name == "lieb") return lieb();
    if (spec.name == "continuum") return continuum(spec.dim, spec.m, spec.potential, spec.magnetic);
    throw ConfigError(0, "unknown model '" + spec.name + "'");
}

} // namespace bloch
