#include "bloch/config.hpp"
#include "bloch/driver.hpp"
#include "bloch/emit.hpp"
#include "bloch/errors.hpp"
#include "bloch/models.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bloch;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string config_error(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::path(TEST_SCRATCH_DIR) / name;
    fs::remove_all(p);
    return p;
}

bool same_bits(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

void compare_bitwise(const ojson& a, const ojson& b)
{
    if (a.is_number_float() || b.is_number_float()) {
        REQUIRE(a.is_number_float());
        REQUIRE(b.is_number_float());
        CHECK(same_bits(a.get<double>(), b.get<double>()));
    } else if (a.is_structured()) {
        REQUIRE(a.type() == b.type());
        REQUIRE(a.size() == b.size());
        auto ia = a.begin();
        auto ib = b.begin();
        for (; ia != a.end(); ++ia, ++ib) compare_bitwise(*ia, *ib);
    } else {
        CHECK(a == b);
    }
}

} // namespace

TEST_CASE("minimal config gets defaults")
{
    const RunConfig c = parse_config("model=harper p=1 q=3 task=bands");
    CHECK(c.model.name == "harper");
    CHECK(c.model.p == 1);
    CHECK(c.model.q == 3);
    CHECK(c.grid_n == 64);
    REQUIRE(c.tasks.size() == 1);
    CHECK(c.tasks[0].kind == TaskKind::bands);
    CHECK(c.format == OutputFormat::csv);
    CHECK_FALSE(c.tolerances.flat_tol.has_value());
}

TEST_CASE("range errors name the key and line")
{
    const std::string msg = config_error("model=free_chain\ngrid_N=0\ntask=bands\n");
    CHECK(msg.find("grid_N") != std::string::npos);
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(config_error("task=ids(2,1,10)").find("lo < hi") != std::string::npos);
    CHECK(config_error("task=butterfly(0)").find("q_max") != std::string::npos);
}

TEST_CASE("unknown keys and type mismatches")
{
    CHECK(config_error("model=lieb\n# comment\ncolour=red task=bands").find("line 3: unknown key 'colour'") !=
          std::string::npos);
    CHECK(config_error("grid_N=many task=bands").find("type mismatch") != std::string::npos);
    CHECK(config_error("model=graphene task=bands").find("unknown model") != std::string::npos);
    CHECK(config_error("[plots]\ntask=bands").find("unknown section") != std::string::npos);
    CHECK(config_error("model=lieb").find("no task") != std::string::npos);
    CHECK(config_error("task=fermi").find("fermi") != std::string::npos);
}

TEST_CASE("full butterfly config")
{
    const RunConfig c = parse_config(
        "# Hofstadter sweep\n[model]\nmodel = harper\n[run]\ngrid_N = 32\noutput_dir = out\nformat = json\n"
        "threads = 2\n[tolerances]\nflat_tol = 1e-8\n[tasks]\ntask = butterfly(20)\n");
    REQUIRE(c.tasks.size() == 1);
    CHECK(c.tasks[0].kind == TaskKind::butterfly);
    CHECK(c.tasks[0].q_max == 20);
    CHECK(c.grid_n == 32);
    CHECK(c.output_dir == "out");
    CHECK(c.format == OutputFormat::json);
    CHECK(c.threads == 2);
    CHECK(*c.tolerances.flat_tol == 1e-8);
    CHECK(parse_config("q_max=7 task=butterfly").tasks[0].q_max == 7);
}

TEST_CASE("task arguments")
{
    const RunConfig c =
        parse_config("model=continuum dim=1 m=6 V=cos:2 task=fermi(1.5) task=ids(-1,3,10) task=lift(2,0.25)");
    CHECK(c.tasks[0].energy == 1.5);
    CHECK(c.tasks[1].lo == -1.0);
    CHECK(c.tasks[1].hi == 3.0);
    CHECK(c.tasks[1].steps == 10);
    CHECK(c.tasks[2].band == 2);
    CHECK(c.tasks[2].k == std::vector<double>{0.25});
    const auto m = build_model(c.model);
    CHECK(m.sites == 6);
    CHECK(m.rank == 1);
}

TEST_CASE("butterfly with q_max = 1 is the free square lattice")
{
    const OutputRecord r = run_butterfly(1, 64, 1);
    REQUIRE(r.table.rows.size() == 1);
    CHECK(r.table.rows[0][2] == "0");
    CHECK(std::stod(r.table.rows[0][3]) == -4.0);
    CHECK(std::stod(r.table.rows[0][4]) == 4.0);
}

TEST_CASE("butterfly at half flux and conjugate fluxes")
{
    const OutputRecord r = run_butterfly(5, 32, 1);
    for (const auto& e : r.payload["fluxes"]) {
        CHECK(e["mirror_residual"].get<double>() <= 1e-10);
        if (e["p"] == 1 && e["q"] == 2) {
            const auto& iv = e["intervals"];
            CHECK(iv.front()[0].get<double>() == doctest::Approx(-2.0 * std::sqrt(2.0)).epsilon(1e-12));
            CHECK(iv.back()[1].get<double>() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
        }
    }
    CHECK(r.payload["conjugate_flux_residual"].get<double>() <= 1e-10);
    // fractions with q <= 5: 1 + 1 + 2 + 2 + 4
    CHECK(r.payload["fluxes"].size() == 10);
}

TEST_CASE("bands CSV for one band on two points")
{
    RunConfig cfg = parse_config("model=free_chain grid_N=2 task=bands");
    cfg.output_dir = scratch("bands").string();
    const auto summary = run_all(cfg, 1);
    REQUIRE(summary.files.size() == 1);
    const auto lines = lines_of(slurp(summary.files[0]));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "k1,E0");
    CHECK(lines[1] == "0,-2");
    CHECK(lines[2] == "0.5,2");
}

TEST_CASE("IDS task emits steps + 1 monotone rows")
{
    RunConfig cfg = parse_config("model=square_laplacian grid_N=16 task=ids(-1,9,100)");
    cfg.output_dir = scratch("ids").string();
    const auto lines = lines_of(slurp(run_all(cfg, 1).files[0]));
    REQUIRE(lines.size() == 102);
    double prev = -1.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const double v = std::stod(lines[i].substr(lines[i].find(',') + 1));
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(lines[1] == "-1,0");
    CHECK(lines.back() == "9,1");
}

TEST_CASE("Fermi gnuplot blocks repeat the first vertex of closed loops")
{
    RunConfig cfg = parse_config("model=square_laplacian grid_N=24 format=gnuplot task=fermi(2)");
    cfg.output_dir = scratch("fermi").string();
    const std::string text = slurp(run_all(cfg, 1).files[0]);
    const auto lines = lines_of(text);
    std::vector<std::string> block;
    int closed_blocks = 0;
    for (std::size_t i = 0; i <= lines.size(); ++i) {
        if (i == lines.size() || lines[i].empty()) {
            if (!block.empty()) {
                CHECK(block.front() == block.back());
                ++closed_blocks;
            }
            block.clear();
        } else if (lines[i][0] != '#') {
            block.push_back(lines[i]);
        }
    }
    CHECK(closed_blocks == 1);
    CHECK(text.find(" closed") != std::string::npos);
}

TEST_CASE("JSON output round-trips bit for bit")
{
    RunConfig cfg = parse_config("model=harper p=2 q=5 grid_N=8 format=json task=bands task=classify task=bands");
    cfg.output_dir = scratch("json").string();
    const auto summary = run_all(cfg, 1);
    REQUIRE(summary.files.size() == 3);
    CHECK(summary.files[2].filename() == "bands_2.json");
    for (const auto& f : summary.files) {
        const ojson j = ojson::parse(slurp(f));
        const OutputRecord r = record_from_json(j);
        CHECK(r.schema_version == 1);
        CHECK(j.begin().key() == "schema_version");
        compare_bitwise(j["payload"], r.payload);
        compare_bitwise(to_json(r), j);
        CHECK(to_json(r).dump(2) + "\n" == slurp(f));
    }
    CHECK_THROWS_AS(record_from_json(ojson{{"task", "bands"}}), InputError);
}

TEST_CASE("doubles are written with 17 significant digits")
{
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(M_PI)) == M_PI);
}

TEST_CASE("timing can be left out of provenance")
{
    RunConfig cfg = parse_config("model=free_chain grid_N=4 format=json task=bands");
    cfg.record_timing = false;
    cfg.output_dir = scratch("timing").string();
    const ojson j = ojson::parse(slurp(run_all(cfg, 1).files[0]));
    CHECK_FALSE(j["provenance"].contains("wall_time_s"));
    CHECK(j["provenance"]["grid_N"] == 4);
}

TEST_CASE("verify suite on built-in models")
{
    RunConfig cfg = parse_config("model=square_laplacian grid_N=32 task=verify");
    const VerifyReport sq = verify_model(square_laplacian(), cfg, 1);
    for (const auto& c : sq.checks) CHECK_MESSAGE(c.passed, c.name);
    CHECK(sq.atoms.atoms.empty());

    const VerifyReport lb = verify_model(lieb(), cfg, 1);
    CHECK(lb.all_passed());
    REQUIRE(lb.atoms.atoms.size() == 1);
    CHECK(std::abs(lb.atoms.atoms[0].energy) < 1e-12);

    cfg.broken_gauge = true;
    const VerifyReport broken = verify_model(harper(Rational(1, 2)), cfg, 1);
    CHECK_FALSE(broken.all_passed());
    for (const auto& c : broken.checks)
        CHECK_MESSAGE(c.passed == (c.name != "translation_commutator"), c.name);
}

TEST_CASE("IO failures carry the path")
{
    RunConfig cfg = parse_config("model=free_chain grid_N=4 task=bands");
    const fs::path blocker = scratch("blocker");
    fs::create_directories(blocker.parent_path());
    std::ofstream(blocker) << "x";
    cfg.output_dir = (blocker / "sub").string();
    try {
        run_all(cfg, 1);
        FAIL("expected an IO error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("blocker") != std::string::npos);
    }
}

TEST_CASE("lift task validation")
{
    CHECK_THROWS_AS(run_all(parse_config("model=lieb task=lift(0,0.1)"), 1), ConfigError);
    CHECK_THROWS_AS(run_all(parse_config("model=lieb task=lift(5,0.1,0.2)"), 1), ConfigError);
    CHECK_THROWS_AS(run_all(parse_config("model=continuum V=bogus task=bands"), 1), ConfigError);
}
