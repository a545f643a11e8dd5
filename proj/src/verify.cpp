#include "bloch/driver.hpp"

#include "bloch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bloch {

namespace {

class Suite {
public:
    void add(std::string name, double residual, double tol, std::string detail = {})
    {
        const bool ok = std::isfinite(residual) && residual <= tol;
        checks.push_back({std::move(name), ok, residual, tol, std::move(detail)});
    }

    std::vector<Check> checks;
};

int verify_grid(const LatticeModel& model, int requested)
{
    // Keep the dense eigen-solves within a desk-scale budget.
    int n = requested;
    const double cubic = std::pow(static_cast<double>(model.sites), 3.0);
    while (n > 4 && std::pow(static_cast<double>(n), model.rank) * cubic > 4e9) n /= 2;
    return n;
}

int small_grid(const LatticeModel& model, int cap)
{
    return std::min(cap, model.rank >= 3 ? 4 : 8);
}

EnergyBorelSet random_set(std::mt19937_64& rng, const BandData& bands, const std::vector<Atom>& atoms)
{
    const double lo = bands.min_energy(), hi = bands.max_energy();
    const double pad = 0.1 * std::max(hi - lo, 1.0);
    std::uniform_real_distribution<double> energy(lo - pad, hi + pad);
    std::uniform_int_distribution<int> pieces(1, 3), kind(0, 5), coin(0, 1);
    std::uniform_int_distribution<std::size_t> sample(0, bands.energies().size() - 1);
    std::vector<EnergyInterval> ivs;
    const int count = pieces(rng);
    for (int i = 0; i < count; ++i) {
        const int k = kind(rng);
        if (k == 0) {
            const double e = bands.energies()[sample(rng)];
            ivs.push_back({e, e, true, true});
        } else if (k == 1 && !atoms.empty()) {
            const double e = atoms[sample(rng) % atoms.size()].energy;
            ivs.push_back({e, e, true, true});
        } else if (k == 2) {
            // endpoint exactly on a sampled eigenvalue
            const double e = bands.energies()[sample(rng)];
            const double f = energy(rng);
            ivs.push_back({std::min(e, f), std::max(e, f), coin(rng) == 1, coin(rng) == 1});
        } else {
            double a = energy(rng), b = energy(rng);
            if (a > b) std::swap(a, b);
            ivs.push_back({a, b, coin(rng) == 1, coin(rng) == 1});
        }
        auto& iv = ivs.back();
        if (iv.lo == iv.hi) iv.lo_closed = iv.hi_closed = true;
    }
    return EnergyBorelSet(std::move(ivs));
}

void character_checks(Suite& s, const LatticeModel& model, int n_main)
{
    const int n = std::min(n_main, model.rank >= 3 ? 4 : 6);
    const CharacterGrid grid(model.rank, n);
    double worst = 0.0;
    const long span = n + 1;
    const CharacterGrid gammas(model.rank, static_cast<int>(2 * span + 1));
    for (std::size_t g = 0; g < gammas.size(); ++g) {
        IntVec gamma = gammas.multi_index(g);
        bool multiple = true;
        for (auto& c : gamma) {
            c -= span;
            multiple = multiple && c % n == 0;
        }
        const cplx avg = grid_character_average(grid, gamma);
        worst = std::max(worst, std::abs(avg - cplx(multiple ? 1.0 : 0.0)));
    }
    s.add("character_orthogonality", worst, 1e-12);
    s.add("haar_total_weight", std::abs(total_weight(CharacterGrid(model.rank, n_main)) - 1.0), 1e-14);
}

} // namespace

bool VerifyReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

VerifyReport verify_model(const LatticeModel& model, const RunConfig& cfg, int threads)
{
    VerifyReport report;
    Suite s;
    std::mt19937_64 rng(cfg.seed);
    const int n = verify_grid(model, cfg.grid_n);
    report.grid_n = n;
    const CharacterGrid grid(model.rank, n);

    character_checks(s, model, n);

    // Fibers with vectors on a small grid
    const CharacterGrid small(model.rank, small_grid(model, n));
    const BandData vbands = band_functions(model, small, {true, threads});
    {
        double herm = 0.0, resid = 0.0;
        for (std::size_t p = 0; p < small.size(); ++p) {
            const Eigen::MatrixXcd m = fiber_matrix(model, small.point(p));
            herm = std::max(herm, hermiticity_defect(m));
            const auto& v = vbands.vectors_at(p);
            for (int b = 0; b < vbands.band_count(); ++b)
                resid = std::max(resid, (m * v.col(b) - vbands.energy(p, b) * v.col(b)).cwiseAbs().maxCoeff());
        }
        s.add("fiber_hermiticity", herm, 1e-13);
        s.add("eigenpair_residual", resid, 1e-11 * std::max(1.0, model.row_sum_norm()));
    }

    // k-periodicity: shifting k by a lattice vector gives the same fiber
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (int t = 0; t < 5; ++t) {
            std::vector<double> k(model.rank), k2(model.rank);
            for (int d = 0; d < model.rank; ++d) {
                k[d] = unit(rng);
                k2[d] = k[d] + (d % 2 ? -1.0 : 1.0);
            }
            const auto a = solve_hermitian(fiber_matrix(model, Character(k)), false).values;
            const auto b = solve_hermitian(fiber_matrix(model, Character(k2)), false).values;
            worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
        }
        s.add("k_periodicity", worst, 1e-12 * std::max(1.0, model.row_sum_norm()));
    }

    const BandData bands = band_functions(model, grid, {false, threads});
    const double tol = membership_tolerance(bands);
    const double scale = bands.energy_scale();

    // Haar average of the band sum equals the cell trace.
    {
        long double sum = 0.0L;
        for (double e : bands.energies()) sum += e;
        const double avg = static_cast<double>(sum / static_cast<long double>(bands.point_count()));
        double trace = 0.0;
        for (const auto& h : model.hoppings)
            if (h.from == h.to && std::all_of(h.offset.begin(), h.offset.end(), [](long x) { return x == 0; }))
                trace += h.amplitude.real();
        s.add("trace_identity", std::abs(avg - trace) / (scale * model.sites), 1e-12);
    }

    // Counting function limits
    {
        const double below = ids(bands, bands.min_energy() - 1.0).value;
        const double above = ids(bands, bands.max_energy() + 1.0).value;
        s.add("ids_limits", std::max(std::abs(below), std::abs(above - model.sites)), 0.0);
    }

    // Serial and threaded band computations agree bit for bit.
    {
        const BandData a = band_functions(model, small, {false, 1});
        const BandData b = band_functions(model, small, {false, std::max(2, threads)});
        std::size_t differ = 0;
        for (std::size_t i = 0; i < a.energies().size(); ++i)
            if (a.energies()[i] != b.energies()[i]) ++differ;
        s.add("serial_parallel_identical", static_cast<double>(differ), 0.0);
    }

    report.atoms = detect_atoms(bands, cfg.tolerances.flat_tol.value_or(default_flat_tolerance(bands)));

    // Measure relations
    {
        const CharacteristicData chars(model, grid, threads);
        double det_gap = 0.0;
        int null_mismatch = 0;
        double sub_violation = 0.0, mono_violation = 0.0;
        EnergyBorelSet previous = random_set(rng, bands, report.atoms.atoms);
        for (int t = 0; t < 100; ++t) {
            const EnergyBorelSet b = random_set(rng, bands, report.atoms.atoms);
            const double f = fermi_measure(bands, b, tol).value;
            const double d = determinant_measure(chars, b, tol).value;
            const double nn = ids_measure(bands, b, tol).value;
            det_gap = std::max(det_gap, std::abs(f - d));
            if ((f == 0.0) != (nn == 0.0)) ++null_mismatch;
            const EnergyBorelSet u = b.united(previous);
            const double fu = fermi_measure(bands, u, tol).value;
            const double fp = fermi_measure(bands, previous, tol).value;
            sub_violation = std::max(sub_violation, fu - (f + fp));
            mono_violation = std::max(mono_violation, std::max(f, fp) - fu);
            previous = b;
        }
        s.add("determinant_equals_fermi", det_gap, 0.0);
        s.add("null_sets_agree", null_mismatch, 0.0);
        s.add("fermi_subadditive", std::max(0.0, sub_violation), 1e-15);
        s.add("fermi_monotone", std::max(0.0, mono_violation), 0.0);
    }

    // Domination of vector spectral measures by the IDS
    {
        const double vtol = membership_tolerance(vbands);
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> amp(0.1, 3.0);
        double worst = -std::numeric_limits<double>::infinity();
        for (int t = 0; t < 200; ++t) {
            const double a = amp(rng);
            std::vector<Eigen::VectorXcd> field(small.size(), Eigen::VectorXcd(model.sites));
            double norm2 = 0.0;
            for (auto& f : field) {
                for (int i = 0; i < model.sites; ++i) f[i] = a * cplx(gauss(rng), gauss(rng));
                norm2 = std::max(norm2, f.squaredNorm());
            }
            const EnergyBorelSet b = random_set(rng, vbands, {});
            const double mu_f = spectral_measure_at(vbands, field, b, vtol).value;
            const double mu_n = ids_measure(vbands, b, vtol).value;
            worst = std::max(worst, mu_f - norm2 * mu_n);
        }
        s.add("spectral_measure_domination", std::max(0.0, worst), 1e-12);
    }

    // Atoms of the Fermi measure are exactly the jumps of the IDS.
    {
        const IdsOptions opts{false, tol};
        const double delta = std::max(10.0 * report.atoms.flat_tol, 1e-9 * scale);
        double jump_err = 0.0;
        for (const auto& a : report.atoms.atoms) {
            const double jump = ids(bands, a.energy + delta, opts).value - ids(bands, a.energy - delta, opts).value;
            jump_err = std::max(jump_err, std::abs(jump - static_cast<double>(a.bands.size())));
        }
        // Dispersive bands touching the atom at isolated grid points add O(1/N^rank).
        s.add("atom_ids_jump", jump_err, std::max(1e-3, 4.0 * model.sites * grid.weight()));

        std::vector<double> probes;
        for (const auto& r : band_ranges(bands)) probes.insert(probes.end(), {r.lo, r.hi});
        std::uniform_real_distribution<double> e(bands.min_energy(), bands.max_energy());
        for (int i = 0; i < 20; ++i) probes.push_back(e(rng));
        double spurious = 0.0;
        for (double x : probes) {
            const bool is_atom = std::any_of(report.atoms.atoms.begin(), report.atoms.atoms.end(), [&](const Atom& a) {
                return std::abs(a.energy - x) <= report.atoms.flat_tol;
            });
            if (!is_atom) spurious = std::max(spurious, ids_measure(bands, EnergyBorelSet::point(x), tol).value);
        }
        s.add("no_jump_off_atoms", spurious, 0.5);
    }

    // Lipschitz constant of the fiber family is stable under refinement.
    {
        const int n1 = std::min(16, std::max(4, n / 2));
        const double r1 = family_lipschitz_check(model, CharacterGrid(model.rank, n1), threads).max_ratio;
        const double r2 = family_lipschitz_check(model, CharacterGrid(model.rank, 2 * n1), threads).max_ratio;
        const double denom = std::max({r1, r2, 1e-300});
        s.add("lipschitz_refinement_drift", std::abs(r2 - r1) / denom, 0.1);
    }

    // Magnetic translations
    if (model.square) {
        const auto& sq = *model.square;
        const MagneticPotential& a = sq.potential;
        const double hnorm = 4.0 * std::abs(sq.hopping) + std::abs(sq.onsite);
        std::vector<Vec2> gens = {{1, 0}, {0, 1}, {a.cell_x(), 0}, {0, a.cell_y()}};
        std::vector<Translation> trans;
        for (Vec2 g : gens)
            trans.push_back(cfg.broken_gauge ? plain_translation(g) : magnetic_translation(g, a));
        const long half = 3 * std::max(a.cell_x(), a.cell_y()) + 4;
        const double comm = check_periodicity(square_lattice_hamiltonian(a, sq.hopping, sq.onsite), trans,
                                              Box2::centered(half), cfg.seed, 3);
        s.add("translation_commutator", comm, 1e-12 * hnorm,
              cfg.broken_gauge ? "naive translations (broken gauge fixture)" : "magnetic translations");

        if (model.flux && model.flux->per_plaquette) {
            const Rational phi = *model.flux->per_plaquette;
            const cplx expected = unit_phase(phi.value());
            const cplx ratio = cocycle({1, 0}, {0, 1}, a) / cocycle({0, 1}, {1, 0}, a);
            s.add("commutator_phase", std::abs(ratio - expected), 1e-12);
            const cplx sup = cocycle({a.cell_x(), 0}, {0, a.cell_y()}, a) / cocycle({0, a.cell_y()}, {a.cell_x(), 0}, a);
            s.add("superlattice_phase_trivial", std::abs(sup - 1.0), 1e-12);
        }
        std::uniform_int_distribution<long> c(-3, 3);
        double identity = 0.0;
        for (int t = 0; t < 50; ++t) {
            const Vec2 g1{c(rng), c(rng)}, g2{c(rng), c(rng)}, g3{c(rng), c(rng)};
            const cplx lhs = cocycle(g1, g2, a) * cocycle(g1 + g2, g3, a);
            const cplx rhs = cocycle(g2, g3, a) * cocycle(g1, g2 + g3, a);
            identity = std::max(identity, std::abs(lhs - rhs));
        }
        s.add("cocycle_identity", identity, 1e-12);
    }

    // Bounded generalized eigensections from fiber eigenvectors
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> band(0, model.sites - 1);
        const int cells = static_cast<int>(std::max(3L, 2 * model.hopping_range() + 1));
        double resid = 0.0, bound = 0.0;
        for (int t = 0; t < 3; ++t) {
            std::vector<double> k(model.rank);
            for (auto& x : k) x = unit(rng);
            const LiftResult lift = reverse_bloch_lift(model, Character(k), band(rng), cells);
            resid = std::max(resid, lift.residual);
            bound = std::max(bound, std::abs(lift.sup_norm - lift.max_cell_amplitude));
        }
        const double hn = std::max(1.0, model.row_sum_norm());
        s.add("lift_residual", resid, 1e-10 * hn);
        s.add("lift_bounded", bound, 1e-12);
    }

    report.checks = std::move(s.checks);
    return report;
}

} // namespace bloch
