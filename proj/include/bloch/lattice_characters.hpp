#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bloch {

using cplx = std::complex<double>;
using IntVec = std::vector<long>;

inline constexpr double two_pi = 6.283185307179586476925286766559005768;

/// exp(2*pi*i*turns), exact at multiples of a quarter turn.
cplx unit_phase(double turns);

/// Free abelian symmetry group Z^n with the identity basis.
class LatticeGroup {
public:
    explicit LatticeGroup(int rank);
    LatticeGroup(int rank, std::vector<std::string> generator_labels);

    int rank() const noexcept { return rank_; }
    const std::vector<std::string>& generator_labels() const noexcept { return labels_; }

private:
    int rank_;
    std::vector<std::string> labels_;
};

/// Point of the Brillouin torus [0,1)^n, i.e. the character
/// gamma -> exp(2 pi i k.gamma) of Z^n.
class Character {
public:
    explicit Character(std::vector<double> k);

    const std::vector<double>& k() const noexcept { return k_; }
    int rank() const noexcept { return static_cast<int>(k_.size()); }

private:
    std::vector<double> k_;
};

cplx character_pairing(const Character& k, std::span<const long> gamma);

/// Uniform N^n grid {(j_1/N, ..., j_n/N)} with equal Haar weights 1/N^n.
/// Flat indices are row-major: the last coordinate varies fastest.
class CharacterGrid {
public:
    CharacterGrid(int rank, int points_per_dim);

    int rank() const noexcept { return rank_; }
    int points_per_dim() const noexcept { return n_; }
    std::size_t size() const noexcept { return size_; }
    double weight() const noexcept { return 1.0 / static_cast<double>(size_); }

    IntVec multi_index(std::size_t flat) const;
    /// Flat index of a multi-index; components are reduced mod N.
    std::size_t flat_index(std::span<const long> j) const;
    std::vector<double> coordinates(std::size_t flat) const;
    Character point(std::size_t flat) const { return Character(coordinates(flat)); }

private:
    int rank_;
    int n_;
    std::size_t size_;
};

CharacterGrid haar_grid(const LatticeGroup& lattice, int points_per_dim);

/// (1/N^n) sum_{k in grid} chi_k(gamma): the discrete character relation.
cplx grid_character_average(const CharacterGrid& grid, std::span<const long> gamma);

/// Compensated (Neumaier) sum of all grid weights.
double total_weight(const CharacterGrid& grid);

/// Exact fraction p/q with q >= 1 and gcd(p, q) = 1.
struct Rational {
    long p = 0;
    long q = 1;

    Rational() = default;
    Rational(long num, long den);

    double value() const noexcept { return static_cast<double>(p) / static_cast<double>(q); }
    bool is_integer() const noexcept { return q == 1; }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Finite-index sublattice spanned by the columns of index_matrix.
struct Superlattice {
    std::vector<IntVec> index_matrix; // row-major n x n
    long index = 1;

    /// i-th generator (column i of the index matrix).
    IntVec generator(int i) const;
};

/// Sublattice diag(q, 1) on which uniform flux p/q per plaquette becomes integral.
Superlattice superlattice_for_flux(Rational flux, const LatticeGroup& lattice);

} // namespace bloch
