#include "bloch/band_solver.hpp"

#include "bloch/errors.hpp"
#include "bloch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bloch {

namespace {

constexpr double hermitian_tol = 1e-13;

std::string describe_k(const std::vector<double>& k)
{
    std::ostringstream os;
    os.precision(17);
    os << "k=(";
    for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
    os << ")";
    return os.str();
}

void fix_phases(Eigen::MatrixXcd& vectors)
{
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
            const double a = std::abs(vectors(r, c));
            if (a > best_abs * (1.0 + 1e-12)) {
                best_abs = a;
                best = r;
            }
        }
        if (best_abs > 0.0) vectors.col(c) *= std::conj(vectors(best, c)) / best_abs;
        vectors(best, c) = std::abs(vectors(best, c));
    }
}

/// Golden-section search for the maximum of f on [a, b].
template <class F>
double golden_max(F&& f, double a, double b, int iterations = 60)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iterations; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? c : d;
}

} // namespace

FiberSpectrum solve_hermitian(const Eigen::MatrixXcd& m, bool with_vectors)
{
    if (m.rows() != m.cols()) throw ContractError("fiber matrix is not square");
    if (m.size() == 0) return {};
    if (hermiticity_defect(m) > hermitian_tol) throw ContractError("fiber matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        m, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ContractError("Hermitian eigensolver did not converge");
    FiberSpectrum out;
    out.values = es.eigenvalues();
    if (with_vectors) {
        out.vectors = es.eigenvectors();
        fix_phases(out.vectors);
    }
    return out;
}

FiberSpectrum solve_fiber(const FiberOperator& fiber)
{
    return solve_hermitian(fiber.matrix, true);
}

BandData::BandData(CharacterGrid grid, int band_count)
    : grid_(std::move(grid)), bands_(band_count), energies_(grid_.size() * static_cast<std::size_t>(band_count))
{
}

const Eigen::MatrixXcd& BandData::vectors_at(std::size_t point) const
{
    if (vectors_.empty()) throw ContractError("band data was computed without eigenvectors");
    return vectors_[point];
}

double BandData::min_energy() const
{
    return *std::min_element(energies_.begin(), energies_.end());
}

double BandData::max_energy() const
{
    return *std::max_element(energies_.begin(), energies_.end());
}

double BandData::energy_scale() const
{
    return std::max({1.0, std::abs(min_energy()), std::abs(max_energy())});
}

BandData band_functions(const LatticeModel& model, const CharacterGrid& grid, SolveOptions options)
{
    if (grid.rank() != model.rank)
        throw InputError("grid rank " + std::to_string(grid.rank()) + " does not match model rank " +
                         std::to_string(model.rank));
    BandData bands(grid, model.sites);
    auto& energies = bands.mutable_energies();
    auto& vectors = bands.mutable_vectors();
    if (options.store_vectors) vectors.resize(grid.size());
    const auto d = static_cast<std::size_t>(model.sites);
    parallel_for(grid.size(), options.threads, [&](std::size_t i) {
        const Character k = grid.point(i);
        try {
            FiberSpectrum sp = solve_hermitian(assemble_fiber(model, k).matrix, options.store_vectors);
            std::copy(sp.values.data(), sp.values.data() + d, energies.begin() + static_cast<std::ptrdiff_t>(i * d));
            if (options.store_vectors) vectors[i] = std::move(sp.vectors);
        } catch (const std::exception& e) {
            throw ContractError(std::string(e.what()) + " at grid point " + describe_k(k.k()));
        }
    });
    return bands;
}

std::vector<Interval> band_ranges(const BandData& bands)
{
    std::vector<Interval> ranges(bands.band_count(), Interval{INFINITY, -INFINITY});
    for (std::size_t p = 0; p < bands.point_count(); ++p)
        for (int n = 0; n < bands.band_count(); ++n) {
            const double e = bands.energy(p, n);
            ranges[n].lo = std::min(ranges[n].lo, e);
            ranges[n].hi = std::max(ranges[n].hi, e);
        }
    return ranges;
}

std::vector<Interval> polish_band_ranges(const LatticeModel& model, const BandData& bands,
                                         std::vector<Interval> ranges)
{
    const CharacterGrid& grid = bands.grid();
    const double h = 1.0 / grid.points_per_dim();
    auto band_value = [&](const std::vector<double>& k, int n) {
        return solve_hermitian(fiber_matrix(model, Character(k)), false).values[n];
    };
    for (int n = 0; n < bands.band_count(); ++n) {
        for (int sign : {+1, -1}) {
            std::size_t best = 0;
            double best_value = -INFINITY;
            for (std::size_t p = 0; p < bands.point_count(); ++p) {
                const double v = sign * bands.energy(p, n);
                if (v > best_value) {
                    best_value = v;
                    best = p;
                }
            }
            std::vector<double> k = grid.coordinates(best);
            for (int sweep = 0; sweep < 4; ++sweep)
                for (int d = 0; d < grid.rank(); ++d) {
                    const double centre = k[d];
                    const double arg = golden_max(
                        [&](double t) {
                            std::vector<double> trial = k;
                            trial[d] = t;
                            return sign * band_value(trial, n);
                        },
                        centre - h, centre + h);
                    const double candidate = [&] {
                        std::vector<double> trial = k;
                        trial[d] = arg;
                        return sign * band_value(trial, n);
                    }();
                    if (candidate > best_value) {
                        best_value = candidate;
                        k[d] = arg;
                    }
                }
            if (sign > 0)
                ranges[n].hi = std::max(ranges[n].hi, best_value);
            else
                ranges[n].lo = std::min(ranges[n].lo, -best_value);
        }
    }
    return ranges;
}

SpectrumIntervals merge_intervals(std::vector<Interval> intervals, double touch_tol)
{
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
    SpectrumIntervals out;
    for (const auto& iv : intervals) {
        if (!out.intervals.empty() && iv.lo <= out.intervals.back().hi + touch_tol)
            out.intervals.back().hi = std::max(out.intervals.back().hi, iv.hi);
        else
            out.intervals.push_back(iv);
    }
    return out;
}

double default_touch_tolerance(const BandData& bands)
{
    return 1e-10 * bands.energy_scale();
}

SpectrumIntervals spectrum_union(const BandData& bands)
{
    return merge_intervals(band_ranges(bands), default_touch_tolerance(bands));
}

SpectrumIntervals spectrum_union(const BandData& bands, const LatticeModel& polish_with)
{
    return merge_intervals(polish_band_ranges(polish_with, bands, band_ranges(bands)),
                           default_touch_tolerance(bands));
}

} // namespace bloch
