#include "bloch/lattice_characters.hpp"

#include "bloch/errors.hpp"

#include <cmath>
#include <numeric>

namespace bloch {

namespace {

double reduce_mod_one(double x)
{
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

} // namespace

cplx unit_phase(double turns)
{
    // Evaluated on |turns| so that unit_phase(-t) is exactly conj(unit_phase(t)).
    const double r = reduce_mod_one(std::abs(turns));
    cplx z;
    if (r == 0.0)
        z = {1.0, 0.0};
    else if (r == 0.25)
        z = {0.0, 1.0};
    else if (r == 0.5)
        z = {-1.0, 0.0};
    else if (r == 0.75)
        z = {0.0, -1.0};
    else
        z = {std::cos(two_pi * r), std::sin(two_pi * r)};
    return turns < 0.0 ? std::conj(z) : z;
}

LatticeGroup::LatticeGroup(int rank) : rank_(rank)
{
    if (rank < 1 || rank > 3) throw InputError("lattice rank must be 1, 2 or 3");
    static const char* names[] = {"e1", "e2", "e3"};
    for (int i = 0; i < rank; ++i) labels_.emplace_back(names[i]);
}

LatticeGroup::LatticeGroup(int rank, std::vector<std::string> generator_labels)
    : rank_(rank), labels_(std::move(generator_labels))
{
    if (rank < 1 || rank > 3) throw InputError("lattice rank must be 1, 2 or 3");
    if (static_cast<int>(labels_.size()) != rank)
        throw InputError("need one generator label per lattice direction");
}

Character::Character(std::vector<double> k) : k_(std::move(k))
{
    if (k_.empty() || k_.size() > 3) throw InputError("character rank must be 1, 2 or 3");
    for (double& c : k_) {
        if (!std::isfinite(c)) throw InputError("character coordinate is not finite");
        c = reduce_mod_one(c);
    }
}

cplx character_pairing(const Character& k, std::span<const long> gamma)
{
    if (static_cast<int>(gamma.size()) != k.rank())
        throw InputError("character pairing: gamma has dimension " + std::to_string(gamma.size()) +
                         ", character has rank " + std::to_string(k.rank()));
    // remainder() is exact and odd, so the pairing with -gamma is the exact conjugate.
    double turns = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i)
        turns += std::remainder(k.k()[i] * static_cast<double>(gamma[i]), 1.0);
    return unit_phase(turns);
}

CharacterGrid::CharacterGrid(int rank, int points_per_dim) : rank_(rank), n_(points_per_dim)
{
    if (rank < 1 || rank > 3) throw InputError("grid rank must be 1, 2 or 3");
    if (points_per_dim < 1) throw InputError("grid points per dimension must be >= 1");
    size_ = 1;
    for (int i = 0; i < rank; ++i) size_ *= static_cast<std::size_t>(points_per_dim);
}

IntVec CharacterGrid::multi_index(std::size_t flat) const
{
    IntVec j(rank_);
    for (int d = rank_ - 1; d >= 0; --d) {
        j[d] = static_cast<long>(flat % static_cast<std::size_t>(n_));
        flat /= static_cast<std::size_t>(n_);
    }
    return j;
}

std::size_t CharacterGrid::flat_index(std::span<const long> j) const
{
    if (static_cast<int>(j.size()) != rank_) throw InputError("grid index has wrong dimension");
    std::size_t flat = 0;
    for (int d = 0; d < rank_; ++d) {
        long r = j[d] % n_;
        if (r < 0) r += n_;
        flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(r);
    }
    return flat;
}

std::vector<double> CharacterGrid::coordinates(std::size_t flat) const
{
    const IntVec j = multi_index(flat);
    std::vector<double> k(rank_);
    for (int d = 0; d < rank_; ++d) k[d] = static_cast<double>(j[d]) / n_;
    return k;
}

CharacterGrid haar_grid(const LatticeGroup& lattice, int points_per_dim)
{
    return CharacterGrid(lattice.rank(), points_per_dim);
}

cplx grid_character_average(const CharacterGrid& grid, std::span<const long> gamma)
{
    if (static_cast<int>(gamma.size()) != grid.rank()) throw InputError("gamma has wrong dimension");
    cplx sum{0.0, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) sum += character_pairing(grid.point(i), gamma);
    return sum * grid.weight();
}

double total_weight(const CharacterGrid& grid)
{
    const double w = grid.weight();
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = sum + w;
        comp += std::abs(sum) >= w ? (sum - t) + w : (w - t) + sum;
        sum = t;
    }
    return sum + comp;
}

Rational::Rational(long num, long den)
{
    if (den == 0) throw InputError("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long g = std::gcd(num, den);
    p = num / g;
    q = den / g;
}

IntVec Superlattice::generator(int i) const
{
    IntVec g(index_matrix.size());
    for (std::size_t r = 0; r < index_matrix.size(); ++r) g[r] = index_matrix[r][i];
    return g;
}

Superlattice superlattice_for_flux(Rational flux, const LatticeGroup& lattice)
{
    if (lattice.rank() != 2) throw InputError("flux superlattices are defined for rank-2 lattices only");
    if (flux.q < 1) throw InputError("flux denominator must be >= 1");
    Superlattice s;
    s.index_matrix = {{flux.q, 0}, {0, 1}};
    s.index = flux.q;
    return s;
}

} // namespace bloch
