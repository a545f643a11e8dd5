#pragma once

#include "bloch/fiber_assembly.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace bloch {

struct FiberSpectrum {
    Eigen::VectorXd values;   // ascending, repeated with multiplicity
    Eigen::MatrixXcd vectors; // orthonormal columns
};

/// Full Hermitian eigendecomposition. Each eigenvector is rotated so its
/// largest-modulus component is real and positive.
/// Throws ContractError for non-Hermitian input.
FiberSpectrum solve_fiber(const FiberOperator& fiber);
FiberSpectrum solve_hermitian(const Eigen::MatrixXcd& m, bool with_vectors = true);

struct SolveOptions {
    bool store_vectors = false;
    int threads = 1;
};

/// Band functions E_0 <= ... <= E_{d-1} sampled on a character grid.
class BandData {
public:
    BandData(CharacterGrid grid, int band_count);

    const CharacterGrid& grid() const noexcept { return grid_; }
    int band_count() const noexcept { return bands_; }
    std::size_t point_count() const noexcept { return grid_.size(); }

    double energy(std::size_t point, int band) const { return energies_[point * bands_ + band]; }
    std::span<const double> energies_at(std::size_t point) const
    {
        return {energies_.data() + point * bands_, static_cast<std::size_t>(bands_)};
    }
    const std::vector<double>& energies() const noexcept { return energies_; }

    bool has_vectors() const noexcept { return !vectors_.empty(); }
    const Eigen::MatrixXcd& vectors_at(std::size_t point) const;

    double min_energy() const;
    double max_energy() const;
    /// max |E| over all samples, at least 1.
    double energy_scale() const;

    // filled by band_functions
    std::vector<double>& mutable_energies() { return energies_; }
    std::vector<Eigen::MatrixXcd>& mutable_vectors() { return vectors_; }

private:
    CharacterGrid grid_;
    int bands_;
    std::vector<double> energies_;
    std::vector<Eigen::MatrixXcd> vectors_;
};

BandData band_functions(const LatticeModel& model, const CharacterGrid& grid, SolveOptions options = {});

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct SpectrumIntervals {
    std::vector<Interval> intervals;
};

/// Per band [min_k E_n, max_k E_n] over the sampled grid.
std::vector<Interval> band_ranges(const BandData& bands);

/// Widens each band range by golden-section refinement of E_n(k) around the
/// grid extremum, one coordinate at a time. Never shrinks a range.
std::vector<Interval> polish_band_ranges(const LatticeModel& model, const BandData& bands,
                                         std::vector<Interval> ranges);

/// Sorts and merges overlapping intervals and intervals whose gap is <= touch_tol.
SpectrumIntervals merge_intervals(std::vector<Interval> intervals, double touch_tol);

/// Default touching tolerance: 1e-10 * energy scale.
double default_touch_tolerance(const BandData& bands);

SpectrumIntervals spectrum_union(const BandData& bands);
/// Same, with band edges polished on the model.
SpectrumIntervals spectrum_union(const BandData& bands, const LatticeModel& polish_with);

} // namespace bloch
