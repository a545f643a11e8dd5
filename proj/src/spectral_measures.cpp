#include "bloch/spectral_measures.hpp"

#include "bloch/errors.hpp"
#include "bloch/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bloch {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

bool lower_ok(const EnergyInterval& iv, double e, double tol)
{
    return iv.lo_closed ? e >= iv.lo - tol : e > iv.lo + tol;
}

bool upper_ok(const EnergyInterval& iv, double e, double tol)
{
    return iv.hi_closed ? e <= iv.hi + tol : e < iv.hi - tol;
}

} // namespace

EnergyBorelSet::EnergyBorelSet(std::vector<EnergyInterval> intervals) : intervals_(std::move(intervals))
{
    for (const auto& iv : intervals_)
        if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi)
            throw InputError("energy interval needs lo <= hi");
}

EnergyBorelSet EnergyBorelSet::whole_line()
{
    return EnergyBorelSet({{-inf, inf, true, true}});
}

EnergyBorelSet EnergyBorelSet::canonical() const
{
    std::vector<EnergyInterval> sorted;
    for (const auto& iv : intervals_)
        if (iv.lo < iv.hi || (iv.lo_closed && iv.hi_closed)) sorted.push_back(iv);
    std::sort(sorted.begin(), sorted.end(), [](const EnergyInterval& a, const EnergyInterval& b) {
        return a.lo < b.lo || (a.lo == b.lo && a.lo_closed && !b.lo_closed);
    });
    std::vector<EnergyInterval> merged;
    for (const auto& iv : sorted) {
        if (!merged.empty()) {
            auto& last = merged.back();
            const bool joins = iv.lo < last.hi || (iv.lo == last.hi && (iv.lo_closed || last.hi_closed));
            if (joins) {
                if (iv.hi > last.hi) {
                    last.hi = iv.hi;
                    last.hi_closed = iv.hi_closed;
                } else if (iv.hi == last.hi) {
                    last.hi_closed = last.hi_closed || iv.hi_closed;
                }
                continue;
            }
        }
        merged.push_back(iv);
    }
    return EnergyBorelSet(std::move(merged));
}

EnergyBorelSet EnergyBorelSet::united(const EnergyBorelSet& other) const
{
    std::vector<EnergyInterval> all = intervals_;
    all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
    return EnergyBorelSet(std::move(all)).canonical();
}

bool EnergyBorelSet::contains(double e, double tol) const
{
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [&](const EnergyInterval& iv) { return lower_ok(iv, e, tol) && upper_ok(iv, e, tol); });
}

std::string to_string(MeasureKind kind)
{
    switch (kind) {
    case MeasureKind::fermi: return "fermi";
    case MeasureKind::ids: return "ids";
    case MeasureKind::determinant: return "determinant";
    case MeasureKind::spectral_at_vector: return "spectral_at_vector";
    }
    return "unknown";
}

double membership_tolerance(const BandData& bands)
{
    return 1e-12 * bands.energy_scale();
}

FermiSurfaceSet fermi_surface(const BandData& bands, double level, double tol)
{
    if (!(tol > 0.0)) throw InputError("fermi surface tolerance must be positive");
    FermiSurfaceSet out;
    out.level = level;
    if (level < bands.min_energy() - tol || level > bands.max_energy() + tol) return out;
    for (std::size_t p = 0; p < bands.point_count(); ++p) {
        const auto e = bands.energies_at(p);
        if (std::any_of(e.begin(), e.end(), [&](double v) { return std::abs(v - level) <= tol; }))
            out.points.push_back(p);
    }
    if (bands.grid().rank() == 2) {
        const int n = bands.grid().points_per_dim();
        std::vector<double> sheet(bands.point_count());
        for (int b = 0; b < bands.band_count(); ++b) {
            for (std::size_t p = 0; p < bands.point_count(); ++p) sheet[p] = bands.energy(p, b);
            auto lines = periodic_isolines(sheet, n, level, b);
            out.contours.insert(out.contours.end(), std::make_move_iterator(lines.begin()),
                                std::make_move_iterator(lines.end()));
        }
    }
    return out;
}

MeasureEstimate fermi_measure(const BandData& bands, const EnergyBorelSet& set, double tol)
{
    const EnergyBorelSet b = set.canonical();
    std::size_t hits = 0;
    for (std::size_t p = 0; p < bands.point_count(); ++p) {
        const auto e = bands.energies_at(p);
        if (std::any_of(e.begin(), e.end(), [&](double v) { return b.contains(v, tol); })) ++hits;
    }
    return {static_cast<double>(hits) * bands.grid().weight(), bands.grid().points_per_dim(), MeasureKind::fermi};
}

MeasureEstimate fermi_measure(const BandData& bands, const EnergyBorelSet& set)
{
    return fermi_measure(bands, set, membership_tolerance(bands));
}

MeasureEstimate ids(const BandData& bands, double energy, IdsOptions options)
{
    const double tie = options.tie_tol >= 0.0 ? options.tie_tol : 1e-12 * bands.energy_scale();
    // Counts are accumulated in half units so the sum is exact.
    long long halves = 0;
    for (double e : bands.energies()) {
        if (e < energy - tie)
            halves += 2;
        else if (e <= energy + tie)
            halves += 1;
    }
    double value = 0.5 * static_cast<double>(halves) * bands.grid().weight();
    if (options.per_site) value /= bands.band_count();
    return {value, bands.grid().points_per_dim(), MeasureKind::ids};
}

MeasureEstimate ids_measure(const BandData& bands, const EnergyBorelSet& set, double tol)
{
    const EnergyBorelSet b = set.canonical();
    long long count = 0;
    for (double e : bands.energies())
        if (b.contains(e, tol)) ++count;
    return {static_cast<double>(count) * bands.grid().weight(), bands.grid().points_per_dim(), MeasureKind::ids};
}

CharacteristicData::CharacteristicData(const LatticeModel& model, const CharacterGrid& grid, int threads)
    : grid_(grid), dim_(model.sites)
{
    const auto d = static_cast<std::size_t>(dim_);
    diagonal_.resize(grid.size() * d);
    offdiag_sq_.resize(grid.size() * d, 0.0);
    parallel_for(grid.size(), threads, [&](std::size_t p) {
        const Eigen::MatrixXcd m = fiber_matrix(model, grid.point(p));
        double* diag = diagonal_.data() + p * d;
        double* off = offdiag_sq_.data() + p * d;
        if (d == 1) {
            diag[0] = m(0, 0).real();
            return;
        }
        Eigen::Tridiagonalization<Eigen::MatrixXcd> tri(m);
        const Eigen::VectorXd dg = tri.diagonal();
        const Eigen::VectorXd sub = tri.subDiagonal();
        for (std::size_t i = 0; i < d; ++i) diag[i] = dg[static_cast<Eigen::Index>(i)];
        for (std::size_t i = 0; i + 1 < d; ++i) off[i] = sub[static_cast<Eigen::Index>(i)] * sub[static_cast<Eigen::Index>(i)];
    });
}

int CharacteristicData::roots_below(std::size_t point, double x) const
{
    // Signs of the ratios of consecutive leading principal minors of
    // T - x; each negative ratio is one sign change of the Sturm sequence.
    const auto d = static_cast<std::size_t>(dim_);
    const double* diag = diagonal_.data() + point * d;
    const double* off = offdiag_sq_.data() + point * d;
    double scale = std::abs(x);
    for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::abs(diag[i]) + std::sqrt(off[i]));
    const double pivot_min = std::numeric_limits<double>::min() * std::max(1.0, scale);
    int count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        q = diag[i] - x - (i > 0 ? off[i - 1] / q : 0.0);
        if (std::abs(q) < pivot_min) q = -pivot_min;
        if (q < 0.0) ++count;
    }
    return count;
}

MeasureEstimate determinant_measure(const CharacteristicData& chars, const EnergyBorelSet& set, double tol)
{
    const EnergyBorelSet b = set.canonical();
    std::size_t hits = 0;
    for (std::size_t p = 0; p < chars.grid().size(); ++p) {
        for (const auto& iv : b.intervals()) {
            // Roots in the widened/narrowed interval, matching EnergyBorelSet::contains.
            const double lo = iv.lo_closed ? iv.lo - tol : std::nextafter(iv.lo + tol, inf);
            const double hi = iv.hi_closed ? std::nextafter(iv.hi + tol, inf) : iv.hi - tol;
            if (!(lo < hi)) continue;
            const int below_hi = std::isinf(hi) ? chars.dimension() : chars.roots_below(p, hi);
            const int below_lo = std::isinf(lo) ? 0 : chars.roots_below(p, lo);
            if (below_hi - below_lo > 0) {
                ++hits;
                break;
            }
        }
    }
    return {static_cast<double>(hits) * chars.grid().weight(), chars.grid().points_per_dim(),
            MeasureKind::determinant};
}

MeasureEstimate spectral_measure_at(const BandData& bands, const std::vector<Eigen::VectorXcd>& field,
                                    const EnergyBorelSet& set, double tol)
{
    if (!bands.has_vectors()) throw ContractError("spectral measure needs band data with eigenvectors");
    if (!field.empty() && field.size() != bands.point_count())
        throw InputError("vector field must have one vector per grid point");
    const EnergyBorelSet b = set.canonical();
    const int d = bands.band_count();
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(d);
    double total = 0.0;
    for (std::size_t p = 0; p < bands.point_count(); ++p) {
        const Eigen::VectorXcd& f = field.empty() ? ones : field[p];
        if (f.size() != d) throw InputError("vector field has the wrong dimension");
        const Eigen::MatrixXcd& v = bands.vectors_at(p);
        double local = 0.0;
        for (int n = 0; n < d; ++n)
            if (b.contains(bands.energy(p, n), tol)) local += std::norm(v.col(n).dot(f));
        total += local;
    }
    return {total * bands.grid().weight(), bands.grid().points_per_dim(), MeasureKind::spectral_at_vector};
}

double default_flat_tolerance(const BandData& bands)
{
    const double width = bands.max_energy() - bands.min_energy();
    return width > 0.0 ? 1e-9 * width : 1e-9 * bands.energy_scale();
}

AtomReport detect_atoms(const BandData& bands, double flat_tol)
{
    if (!(flat_tol > 0.0)) throw InputError("flat-band tolerance must be positive");
    AtomReport report;
    report.flat_tol = flat_tol;
    const auto ranges = band_ranges(bands);
    for (int n = 0; n < bands.band_count(); ++n) {
        if (ranges[n].hi - ranges[n].lo > flat_tol) continue;
        const double energy = 0.5 * (ranges[n].lo + ranges[n].hi);
        auto same = std::find_if(report.atoms.begin(), report.atoms.end(),
                                 [&](const Atom& a) { return std::abs(a.energy - energy) <= flat_tol; });
        if (same != report.atoms.end()) {
            same->bands.push_back(n);
            continue;
        }
        report.atoms.push_back({energy, {n}, 0.0});
    }
    for (auto& atom : report.atoms) {
        std::size_t hits = 0;
        for (std::size_t p = 0; p < bands.point_count(); ++p)
            for (int n : atom.bands)
                if (std::abs(bands.energy(p, n) - atom.energy) <= flat_tol) {
                    ++hits;
                    break;
                }
        atom.measure = static_cast<double>(hits) * bands.grid().weight();
    }
    std::erase_if(report.atoms, [](const Atom& a) { return a.measure <= 0.5; });
    return report;
}

std::string to_string(SpectralType type)
{
    return type == SpectralType::pure_point ? "pure_point" : "absolutely_continuous";
}

std::vector<SpectralPiece> classify_spectrum(const BandData& bands, double flat_tol)
{
    const AtomReport atoms = detect_atoms(bands, flat_tol);
    const auto ranges = band_ranges(bands);
    std::vector<Interval> dispersive;
    for (int n = 0; n < bands.band_count(); ++n) {
        const bool flat = std::any_of(atoms.atoms.begin(), atoms.atoms.end(), [&](const Atom& a) {
            return std::find(a.bands.begin(), a.bands.end(), n) != a.bands.end();
        });
        if (!flat) dispersive.push_back(ranges[n]);
    }
    std::vector<SpectralPiece> pieces;
    for (const auto& iv : merge_intervals(dispersive, default_touch_tolerance(bands)).intervals) {
        double lo = iv.lo;
        for (const auto& atom : atoms.atoms) {
            if (atom.energy > lo + flat_tol && atom.energy < iv.hi - flat_tol) {
                pieces.push_back({{lo, atom.energy}, SpectralType::absolutely_continuous});
                lo = atom.energy;
            }
        }
        pieces.push_back({{lo, iv.hi}, SpectralType::absolutely_continuous});
    }
    for (const auto& atom : atoms.atoms)
        pieces.push_back({{atom.energy, atom.energy}, SpectralType::pure_point});
    std::stable_sort(pieces.begin(), pieces.end(), [](const SpectralPiece& a, const SpectralPiece& b) {
        if (a.interval.lo != b.interval.lo) return a.interval.lo < b.interval.lo;
        // at a shared endpoint the atom sits between the two a.c. pieces
        const auto rank = [](const SpectralPiece& p) {
            if (p.type == SpectralType::pure_point) return 1;
            return p.interval.hi == p.interval.lo ? 0 : 2;
        };
        return rank(a) < rank(b);
    });
    return pieces;
}

LiftResult reverse_bloch_lift(const LatticeModel& model, const Character& k, int band, int patch_cells)
{
    if (band < 0 || band >= model.sites) throw InputError("band index out of range");
    const long range = model.hopping_range();
    if (patch_cells < 3 || patch_cells < 2 * range + 1)
        throw DomainError("lift patch of " + std::to_string(patch_cells) +
                          " cells per direction is too small for hopping range " + std::to_string(range) +
                          " (need at least " + std::to_string(std::max(3L, 2 * range + 1)) + ")");
    const FiberSpectrum sp = solve_fiber(assemble_fiber(model, k));
    const Eigen::VectorXcd v = sp.vectors.col(band);

    LiftResult out;
    out.energy = sp.values[band];
    out.section.rank = model.rank;
    out.section.cells_per_dim = patch_cells;
    out.section.sites = model.sites;
    out.section.values.resize(out.section.cell_count() * model.sites);
    for (std::size_t c = 0; c < out.section.cell_count(); ++c) {
        const cplx phase = character_pairing(k, out.section.cell(c));
        for (int i = 0; i < model.sites; ++i) out.section.at(c, i) = phase * v[i];
    }
    for (const auto& value : out.section.values) out.sup_norm = std::max(out.sup_norm, std::abs(value));
    out.max_cell_amplitude = v.cwiseAbs().maxCoeff();

    std::vector<bool> interior;
    const CellField hs = apply_cell_operator(model, out.section, interior);
    for (std::size_t c = 0; c < interior.size(); ++c) {
        if (!interior[c]) continue;
        for (int i = 0; i < model.sites; ++i)
            out.residual = std::max(out.residual, std::abs(hs.at(c, i) - out.energy * out.section.at(c, i)));
    }
    return out;
}

DensityStability ids_density_stability(const LatticeModel& model, int coarse_n, int samples_per_interval,
                                       int threads)
{
    const BandData coarse = band_functions(model, CharacterGrid(model.rank, coarse_n), {false, threads});
    const BandData fine = band_functions(model, CharacterGrid(model.rank, 2 * coarse_n), {false, threads});
    DensityStability out;
    const double width = fine.max_energy() - fine.min_energy();
    const double h = width / 100.0;
    out.half_width = h;
    if (!(h > 0.0)) return out;

    const double flat_tol = default_flat_tolerance(fine);
    const AtomReport atoms = detect_atoms(fine, flat_tol);
    std::vector<double> edges;
    for (const auto& r : band_ranges(fine)) {
        edges.push_back(r.lo);
        edges.push_back(r.hi);
    }
    for (const auto& a : atoms.atoms) edges.push_back(a.energy);
    const auto far_from_edges = [&](double e) {
        return std::all_of(edges.begin(), edges.end(), [&](double x) { return std::abs(e - x) > 2.0 * h; });
    };

    const auto density = [h](const BandData& b, double e) {
        return (ids(b, e + h).value - ids(b, e - h).value) / (2.0 * h);
    };
    for (const auto& piece : classify_spectrum(fine, flat_tol)) {
        if (piece.type != SpectralType::absolutely_continuous) continue;
        const double lo = piece.interval.lo, hi = piece.interval.hi;
        for (int s = 1; s <= samples_per_interval; ++s) {
            const double e = lo + (hi - lo) * s / (samples_per_interval + 1);
            if (!far_from_edges(e)) continue;
            DensitySample sample{e, density(coarse, e), density(fine, e), 0.0};
            const double denom = std::max(sample.coarse, sample.fine);
            sample.drift = denom > 0.0 ? std::abs(sample.fine - sample.coarse) / denom : 0.0;
            out.max_drift = std::max(out.max_drift, sample.drift);
            out.samples.push_back(sample);
        }
    }
    return out;
}

} // namespace bloch
