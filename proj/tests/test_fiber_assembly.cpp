#include "bloch/band_solver.hpp"
#include "bloch/errors.hpp"
#include "bloch/fiber_assembly.hpp"
#include "bloch/models.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace bloch;

namespace {

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXcd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// Harper chain on q sites with diagonal 2 cos 2 pi (k2 + j p/q) and a
// Bloch phase on the bond closing the ring.
Eigen::MatrixXcd harper_reference(long p, long q, double k1, double k2)
{
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(q, q);
    for (long j = 0; j < q; ++j)
        h(j, j) = 2.0 * std::cos(2.0 * M_PI * (k2 + static_cast<double>(j * p) / static_cast<double>(q)));
    if (q == 1) {
        h(0, 0) += 2.0 * std::cos(2.0 * M_PI * k1);
        return h;
    }
    for (long j = 0; j + 1 < q; ++j) {
        h(j, j + 1) += 1.0;
        h(j + 1, j) += 1.0;
    }
    const cplx bloch = std::polar(1.0, 2.0 * M_PI * k1);
    h(q - 1, 0) += bloch;
    h(0, q - 1) += std::conj(bloch);
    return h;
}

} // namespace

TEST_CASE("free chain fiber is -2 cos 2 pi k")
{
    const auto model = free_chain();
    for (double k : {0.0, 0.1, 0.25, 0.5, 0.77}) {
        const auto m = fiber_matrix(model, Character({k}));
        REQUIRE(m.rows() == 1);
        CHECK(std::abs(m(0, 0) - (-2.0 * std::cos(2.0 * M_PI * k))) < 1e-14);
    }
}

TEST_CASE("square Laplacian fiber")
{
    const auto model = square_laplacian();
    for (auto k : {std::vector<double>{0.0, 0.0}, {0.5, 0.5}, {0.1, 0.35}}) {
        const auto m = fiber_matrix(model, Character(k));
        const double e = 4.0 - 2.0 * std::cos(2.0 * M_PI * k[0]) - 2.0 * std::cos(2.0 * M_PI * k[1]);
        CHECK(std::abs(m(0, 0) - e) < 1e-14);
    }
}

TEST_CASE("Harper fibers match the reference chain")
{
    for (long q = 1; q <= 6; ++q)
        for (long p = 0; p < q; ++p) {
            if (std::gcd(p, q) != 1) continue;
            const auto model = harper(Rational(p, q));
            for (auto k : {std::vector<double>{0.0, 0.0}, {0.13, 0.41}, {0.5, 0.25}}) {
                const auto ours = sorted_eigenvalues(fiber_matrix(model, Character(k)));
                const auto ref = sorted_eigenvalues(harper_reference(p, q, k[0], k[1]));
                CHECK((ours - ref).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
}

TEST_CASE("Harper half flux at k = 0 has eigenvalues +-2 sqrt 2")
{
    const auto ev = sorted_eigenvalues(fiber_matrix(harper(Rational(1, 2)), Character({0.0, 0.0})));
    CHECK(ev[0] == doctest::Approx(-2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(ev[1] == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("one-dimensional continuum fiber spectrum")
{
    const int m = 8;
    const auto model = continuum(1, m, "zero", "zero");
    for (double k : {0.0, 0.3, 0.5}) {
        std::vector<double> ref;
        for (int j = 0; j < m; ++j)
            ref.push_back(m * m * (2.0 - 2.0 * std::cos(2.0 * M_PI * (j + k) / m)));
        std::sort(ref.begin(), ref.end());
        const auto ev = sorted_eigenvalues(assemble_fiber(model, Character({k})).matrix);
        for (int j = 0; j < m; ++j) CHECK(std::abs(ev[j] - ref[j]) < 1e-11 * m * m);
    }
}

TEST_CASE("constant potential shifts the continuum spectrum")
{
    const auto free = continuum(2, 5, "zero", "zero");
    const auto shifted = continuum(2, 5, "const:1.5", "zero");
    const Character k({0.2, 0.7});
    const auto a = sorted_eigenvalues(fiber_matrix(free, k));
    const auto b = sorted_eigenvalues(fiber_matrix(shifted, k));
    CHECK(((b.array() - 1.5) - a.array()).abs().maxCoeff() < 1e-11);
}

TEST_CASE("gradient magnetic potential is unitarily equivalent")
{
    const int m = 6;
    const double amp = 0.3;
    const auto plain = continuum(2, m, "cos:1", "zero");
    const auto gauged = continuum(2, m, "cos:1", "gradient:0.3");
    const auto phi = continuum_gauge_scalar(2, m, amp);
    Eigen::VectorXcd u(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) u[i] = std::polar(1.0, phi[i]);
    const Character k({0.31, 0.62});
    const Eigen::MatrixXcd expected = u.asDiagonal() * fiber_matrix(plain, k) * u.conjugate().asDiagonal();
    CHECK((fiber_matrix(gauged, k) - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("model validation")
{
    std::vector<Hopping> hops{{0, 0, {1}, cplx(1.0)}};
    CHECK_THROWS_AS(make_tight_binding("broken", 1, 1, hops), ModelError);
    std::vector<Hopping> pairs;
    CHECK_THROWS_AS(add_hermitian_pair(pairs, 0, 0, {0}, cplx(1.0, 0.5)), ModelError);
    add_hermitian_pair(pairs, 0, 1, {1}, cplx(0.0, 2.0));
    CHECK(pairs.size() == 2);
    CHECK(pairs[1].amplitude == cplx(0.0, -2.0));
    CHECK(pairs[1].offset == IntVec{-1});
    CHECK_NOTHROW(make_tight_binding("dimer", 1, 2, pairs));
    CHECK_THROWS_AS(continuum(2, 3, "zero", "zero"), ModelError);
    CHECK_THROWS_AS(continuum(1, 8, "zero", "uniform:1"), ModelError);
    CHECK_THROWS_AS(continuum(2, 8, "zero", "uniform:0.5"), ModelError);
}

TEST_CASE("fiber assembly checks kinds and ranks")
{
    CHECK_THROWS_AS(assemble_tb_fiber(continuum(1, 4, "zero", "zero"), Character({0.1})), ModelError);
    CHECK_THROWS_AS(assemble_continuum_fiber(free_chain(), Character({0.1})), ModelError);
    CHECK_THROWS_AS(fiber_matrix(free_chain(), Character({0.1, 0.2})), InputError);
}

TEST_CASE("fibers are Hermitian")
{
    for (const auto& model : {free_chain(), square_laplacian(), harper(Rational(2, 5)), lieb(),
                              continuum(2, 6, "cos:2", "uniform:1")}) {
        const CharacterGrid grid(model.rank, 5);
        for (std::size_t p = 0; p < grid.size(); ++p)
            CHECK(hermiticity_defect(fiber_matrix(model, grid.point(p))) < 1e-15);
    }
}

TEST_CASE("Lipschitz ratio of the chain approaches 4 pi")
{
    const auto r = family_lipschitz_check(free_chain(), CharacterGrid(1, 256));
    CHECK(r.max_ratio <= 4.0 * M_PI + 1e-9);
    CHECK(r.max_ratio > 0.999 * 4.0 * M_PI);
    CHECK(r.grid_n == 256);
}

TEST_CASE("cell operator on a plane wave")
{
    const auto model = square_laplacian();
    CellField s;
    s.rank = 2;
    s.cells_per_dim = 5;
    s.sites = 1;
    s.values.resize(s.cell_count());
    const std::vector<double> k{0.2, 0.1};
    for (std::size_t c = 0; c < s.cell_count(); ++c) {
        const IntVec x = s.cell(c);
        s.values[c] = std::polar(1.0, 2.0 * M_PI * (k[0] * x[0] + k[1] * x[1]));
    }
    std::vector<bool> interior;
    const CellField hs = apply_cell_operator(model, s, interior);
    const double e = 4.0 - 2.0 * std::cos(2.0 * M_PI * k[0]) - 2.0 * std::cos(2.0 * M_PI * k[1]);
    int inner = 0;
    for (std::size_t c = 0; c < s.cell_count(); ++c) {
        if (!interior[c]) continue;
        ++inner;
        CHECK(std::abs(hs.values[c] - e * s.values[c]) < 1e-13);
    }
    CHECK(inner == 9);
}
