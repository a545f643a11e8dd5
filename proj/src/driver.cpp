#include "bloch/driver.hpp"

#include "bloch/errors.hpp"
#include "bloch/models.hpp"

#include <chrono>
#include <map>
#include <numeric>

namespace bloch {

namespace {

ojson optional_number(const std::optional<double>& v)
{
    return v ? ojson(*v) : ojson(nullptr);
}

ojson intervals_json(const std::vector<Interval>& ivs)
{
    ojson a = ojson::array();
    for (const auto& iv : ivs) a.push_back({iv.lo, iv.hi});
    return a;
}

double fermi_tolerance(const RunConfig& cfg, const BandData& bands)
{
    return cfg.tolerances.fermi_tol.value_or(1e-9 * bands.energy_scale());
}

double flat_tolerance(const RunConfig& cfg, const BandData& bands)
{
    return cfg.tolerances.flat_tol.value_or(default_flat_tolerance(bands));
}

IdsOptions ids_options(const RunConfig& cfg)
{
    IdsOptions o;
    o.per_site = cfg.ids_per_site;
    o.tie_tol = cfg.tolerances.tie_tol.value_or(-1.0);
    return o;
}

OutputRecord run_bands(const LatticeModel& model, const RunConfig& cfg, int threads)
{
    const CharacterGrid grid(model.rank, cfg.grid_n);
    const BandData bands = band_functions(model, grid, {false, threads});
    const auto spectrum = cfg.polish ? spectrum_union(bands, model) : spectrum_union(bands);
    auto ranges = band_ranges(bands);
    if (cfg.polish) ranges = polish_band_ranges(model, bands, ranges);

    OutputRecord r;
    r.task = "bands";
    for (int d = 0; d < model.rank; ++d) r.table.header.push_back("k" + std::to_string(d + 1));
    for (int b = 0; b < bands.band_count(); ++b) r.table.header.push_back("E" + std::to_string(b));
    ojson ks = ojson::array(), es = ojson::array();
    for (std::size_t p = 0; p < bands.point_count(); ++p) {
        const auto k = grid.coordinates(p);
        const auto e = bands.energies_at(p);
        std::vector<std::string> row;
        for (double x : k) row.push_back(format_double(x));
        for (double x : e) row.push_back(format_double(x));
        r.table.rows.push_back(std::move(row));
        ks.push_back(k);
        es.push_back(std::vector<double>(e.begin(), e.end()));
    }
    for (int b = 0; b < bands.band_count(); ++b) {
        PlotBlock block{"band " + std::to_string(b), {}};
        for (std::size_t p = 0; p < bands.point_count(); ++p) {
            auto row = grid.coordinates(p);
            row.push_back(bands.energy(p, b));
            block.rows.push_back(std::move(row));
        }
        r.blocks.push_back(std::move(block));
    }
    r.payload["grid_N"] = cfg.grid_n;
    r.payload["band_count"] = bands.band_count();
    r.payload["polished"] = cfg.polish;
    r.payload["band_ranges"] = intervals_json(ranges);
    r.payload["spectrum"] = intervals_json(spectrum.intervals);
    r.payload["k"] = std::move(ks);
    r.payload["energies"] = std::move(es);
    return r;
}

OutputRecord run_fermi(const LatticeModel& model, const TaskSpec& task, const RunConfig& cfg, int threads)
{
    const CharacterGrid grid(model.rank, cfg.grid_n);
    const BandData bands = band_functions(model, grid, {false, threads});
    const double tol = fermi_tolerance(cfg, bands);
    const FermiSurfaceSet fs = fermi_surface(bands, task.energy, tol);

    OutputRecord r;
    r.task = "fermi";
    r.payload["level"] = task.energy;
    r.payload["tolerance"] = tol;
    r.payload["fermi_measure"] = fermi_measure(bands, EnergyBorelSet::point(task.energy), tol).value;
    ojson pts = ojson::array();
    for (std::size_t p : fs.points) pts.push_back(grid.coordinates(p));
    r.payload["points"] = std::move(pts);
    ojson contours = ojson::array();
    if (model.rank == 2) {
        r.table.header = {"band", "contour", "vertex", "k1", "k2"};
        for (std::size_t c = 0; c < fs.contours.size(); ++c) {
            const auto& line = fs.contours[c];
            ojson verts = ojson::array();
            PlotBlock block{"band " + std::to_string(line.band) + " contour " + std::to_string(c) +
                                (line.closed ? " closed" : " open"),
                            {}};
            for (std::size_t v = 0; v < line.vertices.size(); ++v) {
                const auto& x = line.vertices[v];
                verts.push_back({x[0], x[1]});
                block.rows.push_back({x[0], x[1]});
                r.table.rows.push_back({std::to_string(line.band), std::to_string(c), std::to_string(v),
                                        format_double(x[0]), format_double(x[1])});
            }
            contours.push_back({{"band", line.band},
                                {"closed", line.closed},
                                {"winding", {line.winding[0], line.winding[1]}},
                                {"vertices", std::move(verts)}});
            r.blocks.push_back(std::move(block));
        }
    } else {
        for (int d = 0; d < model.rank; ++d) r.table.header.push_back("k" + std::to_string(d + 1));
        PlotBlock block{"fermi points", {}};
        for (std::size_t p : fs.points) {
            const auto k = grid.coordinates(p);
            std::vector<std::string> row;
            for (double x : k) row.push_back(format_double(x));
            r.table.rows.push_back(std::move(row));
            block.rows.push_back(k);
        }
        r.blocks.push_back(std::move(block));
    }
    r.payload["contours"] = std::move(contours);
    return r;
}

OutputRecord run_ids(const LatticeModel& model, const TaskSpec& task, const RunConfig& cfg, int threads)
{
    const BandData bands = band_functions(model, CharacterGrid(model.rank, cfg.grid_n), {false, threads});
    const IdsOptions opts = ids_options(cfg);
    OutputRecord r;
    r.task = "ids";
    r.table.header = {"E", "ids"};
    ojson rows = ojson::array();
    PlotBlock block{"ids", {}};
    for (int i = 0; i <= task.steps; ++i) {
        const double e = i == task.steps ? task.hi : task.lo + (task.hi - task.lo) * i / task.steps;
        const double v = ids(bands, e, opts).value;
        r.table.rows.push_back({format_double(e), format_double(v)});
        rows.push_back({e, v});
        block.rows.push_back({e, v});
    }
    r.blocks.push_back(std::move(block));
    r.payload["per_site"] = opts.per_site;
    r.payload["rows"] = std::move(rows);
    return r;
}

OutputRecord run_lift(const LatticeModel& model, const TaskSpec& task)
{
    const int cells = static_cast<int>(std::max(3L, 2 * model.hopping_range() + 1));
    const LiftResult lift = reverse_bloch_lift(model, Character(task.k), task.band, cells);
    OutputRecord r;
    r.task = "lift";
    for (int d = 0; d < model.rank; ++d) r.table.header.push_back("c" + std::to_string(d + 1));
    for (const char* h : {"site", "re", "im", "abs"}) r.table.header.push_back(h);
    PlotBlock block{"section", {}};
    for (std::size_t c = 0; c < lift.section.cell_count(); ++c) {
        const IntVec cell = lift.section.cell(c);
        for (int i = 0; i < model.sites; ++i) {
            const cplx v = lift.section.at(c, i);
            std::vector<std::string> row;
            std::vector<double> nums;
            for (long x : cell) {
                row.push_back(std::to_string(x));
                nums.push_back(static_cast<double>(x));
            }
            row.push_back(std::to_string(i));
            for (double x : {v.real(), v.imag(), std::abs(v)}) row.push_back(format_double(x));
            nums.insert(nums.end(), {static_cast<double>(i), v.real(), v.imag(), std::abs(v)});
            r.table.rows.push_back(std::move(row));
            block.rows.push_back(std::move(nums));
        }
    }
    r.blocks.push_back(std::move(block));
    r.payload["k"] = task.k;
    r.payload["band"] = task.band;
    r.payload["patch_cells"] = cells;
    r.payload["energy"] = lift.energy;
    r.payload["sup_norm"] = lift.sup_norm;
    r.payload["max_cell_amplitude"] = lift.max_cell_amplitude;
    r.payload["residual"] = lift.residual;
    return r;
}

OutputRecord run_classify(const LatticeModel& model, const RunConfig& cfg, int threads)
{
    const BandData bands = band_functions(model, CharacterGrid(model.rank, cfg.grid_n), {false, threads});
    const double flat_tol = flat_tolerance(cfg, bands);
    const auto pieces = classify_spectrum(bands, flat_tol);
    const AtomReport atoms = detect_atoms(bands, flat_tol);
    const DensityStability density = ids_density_stability(model, cfg.grid_n, 7, threads);

    OutputRecord r;
    r.task = "classify";
    r.table.header = {"lo", "hi", "type"};
    ojson jp = ojson::array();
    for (const auto& p : pieces) {
        r.table.rows.push_back({format_double(p.interval.lo), format_double(p.interval.hi), to_string(p.type)});
        jp.push_back({{"lo", p.interval.lo}, {"hi", p.interval.hi}, {"type", to_string(p.type)}});
    }
    ojson ja = ojson::array();
    for (const auto& a : atoms.atoms) ja.push_back({{"energy", a.energy}, {"bands", a.bands}, {"measure", a.measure}});
    ojson samples = ojson::array();
    for (const auto& s : density.samples)
        samples.push_back({{"energy", s.energy}, {"coarse", s.coarse}, {"fine", s.fine}, {"drift", s.drift}});
    r.payload["flat_tol"] = flat_tol;
    r.payload["pieces"] = std::move(jp);
    r.payload["atoms"] = std::move(ja);
    r.payload["singular_continuous"] =
        "not numerically certifiable; the IDS density refinement test below is a finite-grid proxy";
    r.payload["density_refinement"] = {{"coarse_grid_N", cfg.grid_n},
                                       {"fine_grid_N", 2 * cfg.grid_n},
                                       {"half_width", density.half_width},
                                       {"max_drift", density.max_drift},
                                       {"threshold", 0.2},
                                       {"passed", density.max_drift < 0.2},
                                       {"samples", std::move(samples)}};
    return r;
}

ojson provenance(const RunConfig& cfg, double wall_seconds)
{
    ojson p;
    p["grid_N"] = cfg.grid_n;
    p["tolerances"] = {{"flat_tol", optional_number(cfg.tolerances.flat_tol)},
                       {"tie_tol", optional_number(cfg.tolerances.tie_tol)},
                       {"fermi_tol", optional_number(cfg.tolerances.fermi_tol)}};
    p["seed"] = cfg.seed;
    if (cfg.record_timing) p["wall_time_s"] = wall_seconds;
    return p;
}

} // namespace

ojson model_echo(const ModelSpec& spec, const LatticeModel& model)
{
    ojson m;
    m["name"] = spec.name;
    if (spec.name == "harper") {
        m["p"] = spec.p;
        m["q"] = spec.q;
    }
    if (spec.name == "continuum") {
        m["dim"] = spec.dim;
        m["m"] = spec.m;
        m["V"] = spec.potential;
        m["a"] = spec.magnetic;
    }
    m["rank"] = model.rank;
    m["sites"] = model.sites;
    return m;
}

OutputRecord run_butterfly(int q_max, int grid_n, int threads)
{
    if (q_max < 1) throw InputError("butterfly needs q_max >= 1");
    const CharacterGrid grid(2, grid_n);
    OutputRecord r;
    r.task = "butterfly";
    r.table.header = {"p", "q", "flux", "lo", "hi"};
    ojson entries = ojson::array();
    std::map<std::pair<long, long>, std::vector<Interval>> spectra;
    for (long q = 1; q <= q_max; ++q) {
        for (long p = 0; p < q; ++p) {
            if (std::gcd(p, q) != 1) continue;
            const BandData bands = band_functions(harper(Rational(p, q)), grid, {false, threads});
            const auto ivs = spectrum_union(bands).intervals;
            const double flux = static_cast<double>(p) / static_cast<double>(q);
            PlotBlock block{"flux " + std::to_string(p) + "/" + std::to_string(q), {}};
            // E -> -E: the interval list reversed and negated matches itself.
            double mirror = 0.0;
            for (std::size_t i = 0; i < ivs.size(); ++i) {
                const auto& j = ivs[ivs.size() - 1 - i];
                mirror = std::max({mirror, std::abs(ivs[i].lo + j.hi), std::abs(ivs[i].hi + j.lo)});
            }
            for (const auto& iv : ivs) {
                r.table.rows.push_back({std::to_string(p), std::to_string(q), format_double(flux),
                                        format_double(iv.lo), format_double(iv.hi)});
                block.rows.push_back({flux, iv.lo});
                block.rows.push_back({flux, iv.hi});
            }
            r.blocks.push_back(std::move(block));
            entries.push_back({{"p", p},
                               {"q", q},
                               {"flux", flux},
                               {"intervals", intervals_json(ivs)},
                               {"mirror_residual", mirror}});
            spectra[{p, q}] = ivs;
        }
    }
    double conj = 0.0;
    for (const auto& [pq, ivs] : spectra) {
        const auto& other = spectra.at({(pq.second - pq.first) % pq.second, pq.second});
        if (other.size() != ivs.size()) {
            conj = std::numeric_limits<double>::infinity();
            break;
        }
        for (std::size_t i = 0; i < ivs.size(); ++i)
            conj = std::max({conj, std::abs(ivs[i].lo - other[i].lo), std::abs(ivs[i].hi - other[i].hi)});
    }
    r.payload["q_max"] = q_max;
    r.payload["grid_N"] = grid_n;
    r.payload["fluxes"] = std::move(entries);
    r.payload["conjugate_flux_residual"] = std::isfinite(conj) ? ojson(conj) : ojson("interval count mismatch");
    return r;
}

OutputRecord run_verify(const LatticeModel& model, const RunConfig& cfg, int threads)
{
    const VerifyReport report = verify_model(model, cfg, threads);
    OutputRecord r;
    r.task = "verify";
    r.failed = !report.all_passed();
    r.table.header = {"check", "passed", "residual", "tolerance"};
    ojson checks = ojson::array();
    for (const auto& c : report.checks) {
        r.table.rows.push_back({c.name, c.passed ? "true" : "false", format_double(c.residual),
                                format_double(c.tolerance)});
        ojson jc = {{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}, {"tolerance", c.tolerance}};
        if (!c.detail.empty()) jc["detail"] = c.detail;
        checks.push_back(std::move(jc));
    }
    ojson atoms = ojson::array();
    for (const auto& a : report.atoms.atoms) atoms.push_back(a.energy);
    r.payload["grid_N"] = report.grid_n;
    r.payload["checks"] = std::move(checks);
    r.payload["atoms"] = std::move(atoms);
    r.payload["flat_tol"] = report.atoms.flat_tol;
    r.payload["all_passed"] = report.all_passed();
    return r;
}

OutputRecord run_task(const LatticeModel& model, const TaskSpec& task, const RunConfig& cfg, int threads)
{
    switch (task.kind) {
    case TaskKind::bands: return run_bands(model, cfg, threads);
    case TaskKind::butterfly: return run_butterfly(task.q_max, cfg.grid_n, threads);
    case TaskKind::fermi: return run_fermi(model, task, cfg, threads);
    case TaskKind::ids: return run_ids(model, task, cfg, threads);
    case TaskKind::verify: return run_verify(model, cfg, threads);
    case TaskKind::lift: return run_lift(model, task);
    case TaskKind::classify: return run_classify(model, cfg, threads);
    }
    throw InputError("unknown task");
}

RunSummary run_all(const RunConfig& cfg, int threads)
{
    LatticeModel model;
    try {
        model = build_model(cfg.model);
    } catch (const ModelError& e) {
        throw ConfigError(0, e.what());
    } catch (const InputError& e) {
        throw ConfigError(0, e.what());
    }
    for (const auto& t : cfg.tasks) {
        if (t.kind != TaskKind::lift) continue;
        if (static_cast<int>(t.k.size()) != model.rank)
            throw ConfigError(0, "lift needs " + std::to_string(model.rank) + " k coordinates for model " +
                                     cfg.model.name);
        if (t.band < 0 || t.band >= model.sites)
            throw ConfigError(0, "lift band must lie in [0, " + std::to_string(model.sites - 1) + "]");
    }

    const ojson echo = model_echo(cfg.model, model);
    RunSummary summary;
    std::map<std::string, int> seen;
    for (const auto& t : cfg.tasks) {
        const auto start = std::chrono::steady_clock::now();
        OutputRecord rec = run_task(model, t, cfg, threads);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.model = t.kind == TaskKind::butterfly ? ojson{{"name", "harper"}, {"rank", 2}} : echo;
        rec.provenance = provenance(cfg, wall);
        summary.verify_failed = summary.verify_failed || rec.failed;
        const int n = ++seen[rec.task];
        const std::string stem = n == 1 ? rec.task : rec.task + "_" + std::to_string(n);
        summary.files.push_back(emit(rec, cfg.format, cfg.output_dir, stem));
    }
    return summary;
}

} // namespace bloch
