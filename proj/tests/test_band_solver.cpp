#include "bloch/band_solver.hpp"
#include "bloch/errors.hpp"
#include "bloch/models.hpp"

#include <doctest.h>

#include <cmath>

using namespace bloch;

TEST_CASE("Hermitian solve sorts and fixes phases")
{
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(0, 0) = 3.0;
    m(1, 1) = 1.0;
    m(2, 2) = 2.0;
    m(0, 1) = cplx(0.0, 0.1);
    m(1, 0) = cplx(0.0, -0.1);
    const FiberSpectrum sp = solve_hermitian(m);
    CHECK(sp.values[0] < sp.values[1]);
    CHECK(sp.values[1] < sp.values[2]);
    CHECK(sp.values[1] == doctest::Approx(2.0));
    for (int c = 0; c < 3; ++c) {
        Eigen::Index big = 0;
        sp.vectors.col(c).cwiseAbs().maxCoeff(&big);
        CHECK(sp.vectors(big, c).imag() == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(sp.vectors(big, c).real() > 0.0);
        CHECK((m * sp.vectors.col(c) - sp.values[c] * sp.vectors.col(c)).norm() < 1e-14);
    }
    CHECK((sp.vectors.adjoint() * sp.vectors - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("non-Hermitian input is a contract violation")
{
    Eigen::MatrixXcd m(2, 2);
    m << 1.0, 2.0, 0.0, 1.0;
    CHECK_THROWS_AS(solve_hermitian(m), ContractError);
}

TEST_CASE("chain band on a four-point grid")
{
    const BandData b = band_functions(free_chain(), CharacterGrid(1, 4));
    REQUIRE(b.point_count() == 4);
    const double expected[] = {-2.0, 0.0, 2.0, 0.0};
    for (int p = 0; p < 4; ++p) CHECK(std::abs(b.energy(p, 0) - expected[p]) < 1e-15);
    CHECK_FALSE(b.has_vectors());
    CHECK_THROWS_AS(b.vectors_at(0), ContractError);
}

TEST_CASE("square Laplacian spectrum is [0, 8]")
{
    const BandData b = band_functions(square_laplacian(), CharacterGrid(2, 64));
    const auto u = spectrum_union(b);
    REQUIRE(u.intervals.size() == 1);
    CHECK(std::abs(u.intervals[0].lo) < 1e-14);
    CHECK(std::abs(u.intervals[0].hi - 8.0) < 1e-14);
    CHECK(b.energy_scale() == doctest::Approx(8.0));
}

TEST_CASE("polishing recovers edges missed by the grid")
{
    const auto model = free_chain();
    const BandData b = band_functions(model, CharacterGrid(1, 5));
    const auto raw = band_ranges(b);
    CHECK(raw[0].hi < 2.0 - 0.1);
    const auto polished = polish_band_ranges(model, b, raw);
    CHECK(std::abs(polished[0].hi - 2.0) < 1e-9);
    CHECK(polished[0].lo <= raw[0].lo);

    const auto sq = square_laplacian();
    const BandData b3 = band_functions(sq, CharacterGrid(2, 3));
    const auto u = spectrum_union(b3, sq);
    REQUIRE(u.intervals.size() == 1);
    CHECK(std::abs(u.intervals[0].lo) < 1e-6);
    CHECK(std::abs(u.intervals[0].hi - 8.0) < 1e-6);
}

TEST_CASE("interval merging")
{
    const auto m = merge_intervals({{2.0, 3.0}, {0.0, 1.0}, {1.0 + 1e-12, 1.5}, {2.5, 2.7}, {5.0, 6.0}}, 1e-10);
    REQUIRE(m.intervals.size() == 3);
    CHECK(m.intervals[0] == Interval{0.0, 1.5});
    CHECK(m.intervals[1] == Interval{2.0, 3.0});
    CHECK(m.intervals[2] == Interval{5.0, 6.0});
}

TEST_CASE("Harper half flux band edges")
{
    const BandData b = band_functions(harper(Rational(1, 2)), CharacterGrid(2, 16));
    const auto r = band_ranges(b);
    REQUIRE(r.size() == 2);
    CHECK(r[0].lo == doctest::Approx(-2.0 * std::sqrt(2.0)).epsilon(1e-13));
    CHECK(r[1].hi == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));
    CHECK(std::abs(r[0].hi) < 1e-13);
    CHECK(std::abs(r[1].lo) < 1e-13);
}

TEST_CASE("stored eigenvectors and threaded solves")
{
    const auto model = harper(Rational(1, 3));
    const CharacterGrid grid(2, 6);
    const BandData serial = band_functions(model, grid, {true, 1});
    const BandData threaded = band_functions(model, grid, {true, 3});
    CHECK(serial.energies() == threaded.energies());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto m = fiber_matrix(model, grid.point(p));
        const auto& v = serial.vectors_at(p);
        for (int n = 0; n < 3; ++n) CHECK((m * v.col(n) - serial.energy(p, n) * v.col(n)).norm() < 1e-13);
    }
    CHECK_THROWS_AS(band_functions(model, CharacterGrid(1, 4)), InputError);
}
