#pragma once

#include "bloch/band_solver.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace bloch {

struct EnergyInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = true;
    bool hi_closed = true;
};

/// Finite union of intervals standing in for a Borel set of energies.
class EnergyBorelSet {
public:
    EnergyBorelSet() = default;
    explicit EnergyBorelSet(std::vector<EnergyInterval> intervals);

    static EnergyBorelSet point(double e) { return EnergyBorelSet({{e, e, true, true}}); }
    static EnergyBorelSet closed(double lo, double hi) { return EnergyBorelSet({{lo, hi, true, true}}); }
    static EnergyBorelSet window(double centre, double half_width)
    {
        return closed(centre - half_width, centre + half_width);
    }
    static EnergyBorelSet whole_line();

    /// Sorted, pairwise disjoint representation.
    EnergyBorelSet canonical() const;
    EnergyBorelSet united(const EnergyBorelSet& other) const;

    /// Membership with closed endpoints widened and open endpoints narrowed by tol.
    bool contains(double e, double tol) const;

    const std::vector<EnergyInterval>& intervals() const noexcept { return intervals_; }

private:
    std::vector<EnergyInterval> intervals_;
};

enum class MeasureKind { fermi, ids, determinant, spectral_at_vector };
std::string to_string(MeasureKind kind);

struct MeasureEstimate {
    double value = 0.0;
    int grid_n = 0;
    MeasureKind kind = MeasureKind::fermi;
};

/// Energy tolerance used for set membership: 1e-12 * energy scale.
double membership_tolerance(const BandData& bands);

struct ContourPolyline {
    int band = 0;
    /// Unwrapped torus coordinates; a closed loop repeats its first vertex.
    std::vector<std::array<double, 2>> vertices;
    bool closed = false;
    /// Integer translation between last and first vertex (zero for
    /// contractible loops, a lattice vector for loops winding the torus).
    std::array<long, 2> winding{0, 0};
};

struct FermiSurfaceSet {
    double level = 0.0;
    std::vector<std::size_t> points; // grid points with some |E_n - E| <= tol
    std::vector<ContourPolyline> contours;
};

/// Marching-squares isolines of one periodic N x N sheet; saddles are
/// resolved with the cell-centre average.
std::vector<ContourPolyline> periodic_isolines(std::span<const double> values, int n, double level, int band);

FermiSurfaceSet fermi_surface(const BandData& bands, double level, double tol);

MeasureEstimate fermi_measure(const BandData& bands, const EnergyBorelSet& set, double tol);
MeasureEstimate fermi_measure(const BandData& bands, const EnergyBorelSet& set);

struct IdsOptions {
    bool per_site = false;
    /// Eigenvalues within tie_tol of E count one half. Negative: 1e-12 * scale.
    double tie_tol = -1.0;
};

/// Haar average of the eigenvalue counting function at E.
MeasureEstimate ids(const BandData& bands, double energy, IdsOptions options = {});

/// mu^N(B): Haar average of #{n : E_n(k) in B}.
MeasureEstimate ids_measure(const BandData& bands, const EnergyBorelSet& set, double tol);

/// Real symmetric tridiagonal forms of every fiber on a grid, for counting
/// roots of det(M(k) - lambda) without diagonalizing.
class CharacteristicData {
public:
    CharacteristicData(const LatticeModel& model, const CharacterGrid& grid, int threads = 1);

    const CharacterGrid& grid() const noexcept { return grid_; }
    /// Number of roots of det(M(k) - lambda) strictly below x (Sturm count).
    int roots_below(std::size_t point, double x) const;
    int dimension() const noexcept { return dim_; }

private:
    CharacterGrid grid_;
    int dim_;
    std::vector<double> diagonal_;
    std::vector<double> offdiag_sq_;
};

MeasureEstimate determinant_measure(const CharacteristicData& chars, const EnergyBorelSet& set, double tol);

/// Haar average of sum_{n : E_n(k) in B} |<v_n(k), f_k>|^2. An empty field
/// means the constant section (all ones) at every point.
MeasureEstimate spectral_measure_at(const BandData& bands, const std::vector<Eigen::VectorXcd>& field,
                                    const EnergyBorelSet& set, double tol);

struct Atom {
    double energy = 0.0;
    std::vector<int> bands;
    double measure = 0.0;
};

struct AtomReport {
    std::vector<Atom> atoms;
    double flat_tol = 0.0;
};

/// 1e-9 * spectral width (or 1e-9 * energy scale for a single level).
double default_flat_tolerance(const BandData& bands);

AtomReport detect_atoms(const BandData& bands, double flat_tol);

enum class SpectralType { pure_point, absolutely_continuous };
std::string to_string(SpectralType type);

struct SpectralPiece {
    Interval interval;
    SpectralType type = SpectralType::absolutely_continuous;
};

/// Dispersive bands give absolutely continuous intervals, flat bands give
/// pure-point atoms; a.c. intervals are split at atoms they contain.
std::vector<SpectralPiece> classify_spectrum(const BandData& bands, double flat_tol);

struct LiftResult {
    CellField section;
    double energy = 0.0;
    double sup_norm = 0.0;
    double max_cell_amplitude = 0.0;
    double residual = 0.0;
};

/// Extends the fiber eigenvector v_n(k) quasi-periodically,
/// s(c + g) = chi_k(g) s(c), to a cube of patch_cells^rank cells and
/// measures ||(H - E_n) s||_inf on interior cells.
LiftResult reverse_bloch_lift(const LatticeModel& model, const Character& k, int band, int patch_cells);

struct DensitySample {
    double energy = 0.0;
    double coarse = 0.0;
    double fine = 0.0;
    double drift = 0.0; // |fine - coarse| / max(fine, coarse)
};

struct DensityStability {
    double half_width = 0.0;
    std::vector<DensitySample> samples;
    double max_drift = 0.0;
};

/// Central IDS difference quotients (ids(E+h) - ids(E-h)) / 2h on grids N
/// and 2N at energies inside the absolutely continuous part, at least 2h
/// away from band edges and atoms. h = spectral width / 100.
DensityStability ids_density_stability(const LatticeModel& model, int coarse_n, int samples_per_interval = 7,
                                       int threads = 1);

} // namespace bloch
