#include "bloch/errors.hpp"
#include "bloch/lattice_characters.hpp"

#include <doctest.h>

#include <cmath>

using namespace bloch;

namespace {

// exp(2 pi i k.gamma) straight from the definition
cplx direct_pairing(const std::vector<double>& k, const IntVec& gamma)
{
    double s = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) s += k[i] * static_cast<double>(gamma[i]);
    return std::polar(1.0, 2.0 * M_PI * s);
}

} // namespace

TEST_CASE("pairing at simple characters")
{
    const IntVec one{1};
    CHECK(character_pairing(Character({0.25}), one) == cplx(0.0, 1.0));
    CHECK(character_pairing(Character({0.5}), one) == cplx(-1.0, 0.0));
    const IntVec diag{1, 1};
    CHECK(std::abs(character_pairing(Character({0.5, 0.5}), diag) - 1.0) < 1e-15);
    const IntVec g{3, -2, 5};
    const std::vector<double> k{0.13, 0.71, 0.402};
    CHECK(std::abs(character_pairing(Character(k), g) - direct_pairing(k, g)) < 1e-13);
}

TEST_CASE("pairing rejects mismatched dimensions")
{
    const IntVec g{1, 0};
    CHECK_THROWS_AS(character_pairing(Character({0.1}), g), InputError);
}

TEST_CASE("characters are reduced into the unit cube")
{
    const Character k({1.25, -0.25});
    CHECK(k.k()[0] == doctest::Approx(0.25));
    CHECK(k.k()[1] == doctest::Approx(0.75));
}

TEST_CASE("unit phase is exact at quarter turns")
{
    CHECK(unit_phase(0.0) == cplx(1.0, 0.0));
    CHECK(unit_phase(0.25) == cplx(0.0, 1.0));
    CHECK(unit_phase(-0.5) == cplx(-1.0, 0.0));
    CHECK(unit_phase(2.75) == cplx(0.0, -1.0));
}

TEST_CASE("grid layout is row-major with the last coordinate fastest")
{
    const CharacterGrid grid(2, 4);
    CHECK(grid.size() == 16);
    CHECK(grid.weight() == 1.0 / 16.0);
    CHECK(grid.multi_index(1) == IntVec{0, 1});
    CHECK(grid.multi_index(4) == IntVec{1, 0});
    CHECK(grid.coordinates(5) == std::vector<double>{0.25, 0.25});
    const IntVec wrapped{5, -1};
    CHECK(grid.flat_index(wrapped) == 7);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(grid.flat_index(grid.multi_index(i)) == i);
}

TEST_CASE("discrete character averages vanish off the dual lattice")
{
    for (int rank = 1; rank <= 3; ++rank) {
        const int n = rank == 3 ? 3 : 5;
        const CharacterGrid grid(rank, n);
        const CharacterGrid gammas(rank, 13);
        for (std::size_t g = 0; g < gammas.size(); ++g) {
            IntVec gamma = gammas.multi_index(g);
            bool multiple = true;
            for (auto& c : gamma) {
                c -= 6;
                multiple = multiple && c % n == 0;
            }
            const cplx avg = grid_character_average(grid, gamma);
            CHECK(std::abs(avg - (multiple ? 1.0 : 0.0)) < 1e-13);
        }
    }
}

TEST_CASE("Haar weights sum to one")
{
    CHECK(total_weight(CharacterGrid(2, 64)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(total_weight(CharacterGrid(3, 7)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(haar_grid(LatticeGroup(2), 8).size() == 64);
}

TEST_CASE("lattice group ranks")
{
    CHECK_THROWS_AS(LatticeGroup(0), InputError);
    CHECK_THROWS_AS(LatticeGroup(4), InputError);
    CHECK_THROWS_AS(LatticeGroup(2, {"x"}), InputError);
    CHECK(LatticeGroup(2, {"x", "y"}).generator_labels().size() == 2);
}

TEST_CASE("rationals are normalized")
{
    const Rational r(2, -4);
    CHECK(r.p == -1);
    CHECK(r.q == 2);
    CHECK(Rational(6, 3).is_integer());
    CHECK(Rational(1, 3).value() == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(Rational(1, 0), InputError);
}

TEST_CASE("flux superlattice is q x 1")
{
    const Superlattice s = superlattice_for_flux(Rational(2, 5), LatticeGroup(2));
    CHECK(s.index == 5);
    CHECK(s.generator(0) == IntVec{5, 0});
    CHECK(s.generator(1) == IntVec{0, 1});
    CHECK_THROWS_AS(superlattice_for_flux(Rational(1, 2), LatticeGroup(1)), InputError);
}
