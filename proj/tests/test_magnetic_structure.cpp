#include "bloch/errors.hpp"
#include "bloch/magnetic_structure.hpp"

#include <doctest.h>

#include <cmath>

using namespace bloch;

namespace {

double phase_distance(double a, double b)
{
    return std::abs(wrap_phase(a - b));
}

} // namespace

TEST_CASE("wrap_phase lands in (-pi, pi]")
{
    CHECK(wrap_phase(3.0 * M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_phase(-M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_phase(0.5) == doctest::Approx(0.5));
}

TEST_CASE("Landau gauge carries uniform flux p/q")
{
    for (long q = 1; q <= 6; ++q)
        for (long p = 0; p < q; ++p) {
            const Rational phi(p, q);
            const FluxData f = flux_from_potential(MagneticPotential::landau(phi));
            REQUIRE(f.per_plaquette.has_value());
            CHECK(*f.per_plaquette == phi);
            for (double w : f.plaquette_flux) CHECK(phase_distance(w, 2.0 * M_PI * phi.value()) < 1e-12);
        }
}

TEST_CASE("zero potential has integral flux")
{
    const FluxData f = flux_from_potential(MagneticPotential::zero(2, 3));
    CHECK(is_integral_flux(f));
    CHECK(f.period_x == 1);
    CHECK(f.period_y == 1);
}

TEST_CASE("gauge function of the x translation in Landau gauge")
{
    // d chi = a - gamma.a with a_y(x) = 2 pi phi x gives chi(x, y) = 2 pi phi y.
    const Rational phi(1, 3);
    const auto a = MagneticPotential::landau(phi);
    const Box2 patch = Box2::centered(5);
    const GaugeFunction chi = gauge_function({1, 0}, a, {0, 0}, patch);
    for (std::size_t i = 0; i < patch.size(); ++i) {
        const Vec2 s = patch.site(i);
        CHECK(phase_distance(chi.at(s), 2.0 * M_PI * phi.value() * static_cast<double>(s.y)) < 1e-12);
    }
    const GaugeFunction chi_y = gauge_function({0, 1}, a, {0, 0}, patch);
    for (double v : chi_y.values) CHECK(phase_distance(v, 0.0) < 1e-12);
}

TEST_CASE("gauge function needs a gamma-periodic field")
{
    // two columns with different plaquette flux
    const MagneticPotential a(2, 1, {0.0, 0.0}, {0.0, 0.7});
    CHECK_THROWS_AS(gauge_function({1, 0}, a, {0, 0}, Box2::centered(3)), PreconditionError);
    CHECK_NOTHROW(gauge_function({2, 0}, a, {0, 0}, Box2::centered(3)));
}

TEST_CASE("commutator phase of unit translations is exp(2 pi i p/q)")
{
    for (long q = 1; q <= 8; ++q)
        for (long p = 0; p < q; ++p) {
            const auto a = MagneticPotential::landau(Rational(p, q));
            const cplx ratio = cocycle({1, 0}, {0, 1}, a) / cocycle({0, 1}, {1, 0}, a);
            const cplx expected = std::polar(1.0, 2.0 * M_PI * static_cast<double>(p) / static_cast<double>(q));
            CHECK(std::abs(ratio - expected) < 1e-12);
        }
}

TEST_CASE("cocycle identity and superlattice triviality")
{
    const auto a = MagneticPotential::landau(Rational(2, 5));
    const Vec2 g[] = {{1, 0}, {0, 1}, {2, -1}, {-3, 2}, {1, 1}};
    for (Vec2 g1 : g)
        for (Vec2 g2 : g)
            for (Vec2 g3 : g) {
                const cplx lhs = cocycle(g1, g2, a) * cocycle(g1 + g2, g3, a);
                const cplx rhs = cocycle(g2, g3, a) * cocycle(g1, g2 + g3, a);
                CHECK(std::abs(lhs - rhs) < 1e-12);
            }
    const cplx sup = cocycle({5, 0}, {0, 1}, a) / cocycle({0, 1}, {5, 0}, a);
    CHECK(std::abs(sup - 1.0) < 1e-12);
}

TEST_CASE("magnetic translations commute with the Peierls Hamiltonian")
{
    const auto a = MagneticPotential::landau(Rational(1, 3));
    const auto h = square_lattice_hamiltonian(a, 1.0, 0.0);
    const Box2 patch = Box2::centered(8);
    const std::vector<Translation> magnetic = {magnetic_translation({1, 0}, a), magnetic_translation({0, 1}, a),
                                               magnetic_translation({3, 0}, a)};
    CHECK(check_periodicity(h, magnetic, patch) < 1e-12);

    const std::vector<Translation> naive = {plain_translation({1, 0})};
    CHECK(check_periodicity(h, naive, patch) > 0.1);
    // the naive shift along y and by the whole magnetic cell is harmless
    const std::vector<Translation> cell = {plain_translation({0, 1}), plain_translation({3, 0})};
    CHECK(check_periodicity(h, cell, patch) < 1e-12);
}

TEST_CASE("translation patch too small")
{
    const auto a = MagneticPotential::landau(Rational(1, 2));
    PatchField s{Box2::centered(1), std::vector<cplx>(9, cplx(1.0))};
    CHECK_THROWS_AS(magnetic_translation_apply({4, 0}, s, a), DomainError);
}

TEST_CASE("gradient potentials are pure gauge")
{
    const std::vector<double> phi = {0.3, -1.2, 2.0, 0.1, 0.5, -0.4};
    const auto a = MagneticPotential::gradient(3, 2, phi);
    const FluxData f = flux_from_potential(a);
    for (double w : f.plaquette_flux) CHECK(phase_distance(w, 0.0) < 1e-12);
    CHECK(a.edge({0, 0}, {1, 0}) == doctest::Approx(-1.2 - 0.3));
    CHECK(a.edge({1, 0}, {0, 0}) == doctest::Approx(0.3 + 1.2));
}

TEST_CASE("edges must join nearest neighbours")
{
    CHECK_THROWS_AS(MagneticPotential::zero().edge({0, 0}, {2, 0}), InputError);
    CHECK_THROWS_AS(MagneticPotential(2, 2, {0.0}, {0.0}), InputError);
}
