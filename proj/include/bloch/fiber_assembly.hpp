#pragma once

#include "bloch/lattice_characters.hpp"
#include "bloch/magnetic_structure.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace bloch {

enum class ModelKind { tight_binding, continuum_fd };

/// Matrix element <from| H |to in cell offset>: the fiber picks up
/// amplitude * chi_k(offset) at M[from][to].
struct Hopping {
    int from = 0;
    int to = 0;
    IntVec offset;
    cplx amplitude;
};

/// Discretized fundamental domain [0,1)^dim with m points per direction.
struct ContinuumData {
    int dim = 1;
    int grid_per_dim = 0;
    std::vector<double> potential;               // m^dim values, row-major (last coordinate fastest)
    std::vector<std::vector<double>> link_phase; // per direction: a(x -> x + h e_d)
};

/// Site-level description of nearest-neighbour models on Z^2 whose
/// magnetic unit cell is the potential cell.
struct SquareLatticeData {
    MagneticPotential potential = MagneticPotential::zero();
    double hopping = 0.0;
    double onsite = 0.0;
};

class LatticeModel {
public:
    std::string name;
    ModelKind kind = ModelKind::tight_binding;
    int rank = 1;
    int sites = 1;
    std::vector<Hopping> hoppings;
    std::optional<FluxData> flux;
    std::optional<Superlattice> superlattice;
    std::optional<ContinuumData> continuum;
    std::optional<SquareLatticeData> square;

    /// Largest |offset|_inf over all hoppings.
    long hopping_range() const;
    /// max_i sum_j |t_ij|: an upper bound on every fiber norm.
    double row_sum_norm() const;
};

/// Throws ModelError unless every hopping (i, j, g, t) is matched by
/// (j, i, -g, conj t) and all amplitudes are finite.
void validate_model(const LatticeModel& model);

LatticeModel make_tight_binding(std::string name, int rank, int sites, std::vector<Hopping> hoppings);

/// Adds the pair (from, to, offset, t) and (to, from, -offset, conj t);
/// on-site terms (from == to, offset == 0) are added once and must be real.
void add_hermitian_pair(std::vector<Hopping>& hops, int from, int to, IntVec offset, cplx amplitude);

/// Peierls-substituted nearest-neighbour model on Z^2 with the potential's
/// cell as magnetic unit cell: amplitude hopping * exp(-i a(x -> y)).
LatticeModel peierls_square_model(std::string name, const MagneticPotential& a, double hopping, double onsite);

/// Second-order central differences scaled by m^2 with link phases, plus V;
/// boundary links become cell-crossing hoppings.
LatticeModel make_continuum_model(std::string name, ContinuumData data);

/// k-independent diagonal model diag(values).
LatticeModel make_onsite_model(std::string name, int rank, const std::vector<double>& values);

struct FiberOperator {
    Character k;
    Eigen::MatrixXcd matrix;
    std::string model_id;
};

/// M[i][j] = sum over hoppings of t * chi_k(offset).
Eigen::MatrixXcd fiber_matrix(const LatticeModel& model, const Character& k);

FiberOperator assemble_tb_fiber(const LatticeModel& model, const Character& k);
FiberOperator assemble_continuum_fiber(const LatticeModel& model, const Character& k);
FiberOperator assemble_fiber(const LatticeModel& model, const Character& k);

/// ||M - M^*||_inf / max(||M||_inf, tiny).
double hermiticity_defect(const Eigen::MatrixXcd& m);

/// Largest |eigenvalue| of a Hermitian matrix.
double hermitian_norm(const Eigen::MatrixXcd& m);

struct LipschitzReport {
    double max_ratio = 0.0;
    int grid_n = 0;
};

/// max over grid neighbours (k, k + e_d / N) of ||M(k) - M(k')||_2 / |k - k'|.
LipschitzReport family_lipschitz_check(const LatticeModel& model, const CharacterGrid& grid, int threads = 1);

/// Sections on a box of cells [0, L)^rank times internal sites.
struct CellField {
    int rank = 1;
    int cells_per_dim = 0;
    int sites = 1;
    std::vector<cplx> values;

    std::size_t cell_count() const;
    std::size_t cell_index(std::span<const long> cell) const;
    IntVec cell(std::size_t index) const;
    cplx& at(std::size_t cell, int site) { return values[cell * sites + site]; }
    cplx at(std::size_t cell, int site) const { return values[cell * sites + site]; }
};

/// Applies the real-space operator defined by the hopping list. Only cells
/// whose whole hopping neighbourhood lies inside the box are written; the
/// returned mask marks them.
CellField apply_cell_operator(const LatticeModel& model, const CellField& s, std::vector<bool>& interior);

} // namespace bloch
