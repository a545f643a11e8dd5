#include "bloch/models.hpp"

#include "bloch/errors.hpp"

#include <cmath>
#include <string>

namespace bloch {

namespace {

double spec_number(const std::string& spec, const std::string& prefix)
{
    const std::string body = spec.substr(prefix.size());
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(body, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != body.size()) throw ModelError("cannot read a number from '" + spec + "'");
    return v;
}

bool starts_with(const std::string& s, const std::string& prefix)
{
    return s.rfind(prefix, 0) == 0;
}

} // namespace

LatticeModel free_chain()
{
    std::vector<Hopping> hops;
    add_hermitian_pair(hops, 0, 0, {1}, -1.0);
    return make_tight_binding("free_chain", 1, 1, std::move(hops));
}

LatticeModel square_laplacian()
{
    return peierls_square_model("square_laplacian", MagneticPotential::zero(), -1.0, 4.0);
}

LatticeModel harper(Rational flux)
{
    LatticeModel m = peierls_square_model("harper", MagneticPotential::landau(flux), 1.0, 0.0);
    m.flux->per_plaquette = Rational(((flux.p % flux.q) + flux.q) % flux.q, flux.q);
    return m;
}

LatticeModel lieb()
{
    // 0: corner site, 1: site on the x-bond, 2: site on the y-bond
    std::vector<Hopping> hops;
    add_hermitian_pair(hops, 0, 1, {0, 0}, -1.0);
    add_hermitian_pair(hops, 0, 1, {-1, 0}, -1.0);
    add_hermitian_pair(hops, 0, 2, {0, 0}, -1.0);
    add_hermitian_pair(hops, 0, 2, {0, -1}, -1.0);
    LatticeModel m = make_tight_binding("lieb", 2, 3, std::move(hops));
    m.flux = FluxData::uniform(Rational(0, 1));
    return m;
}

std::vector<double> continuum_gauge_scalar(int dim, int grid_per_dim, double amp)
{
    const CharacterGrid layout(dim, grid_per_dim);
    std::vector<double> phi(layout.size());
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto x = layout.coordinates(i);
        phi[i] = amp * std::sin(two_pi * x[0]);
        if (dim > 1) phi[i] += amp * std::cos(two_pi * x[1]);
    }
    return phi;
}

LatticeModel continuum(int dim, int grid_per_dim, const std::string& potential_spec,
                       const std::string& magnetic_spec)
{
    if (dim < 1 || dim > 3) throw ModelError("continuum dimension must be 1, 2 or 3");
    if (grid_per_dim < 4)
        throw ModelError("continuum grid needs at least 4 points per dimension, got " + std::to_string(grid_per_dim));
    const CharacterGrid layout(dim, grid_per_dim);
    const std::size_t n = layout.size();
    const int m = grid_per_dim;

    ContinuumData data;
    data.dim = dim;
    data.grid_per_dim = m;
    data.potential.assign(n, 0.0);
    if (potential_spec == "zero") {
    } else if (starts_with(potential_spec, "const:")) {
        data.potential.assign(n, spec_number(potential_spec, "const:"));
    } else if (starts_with(potential_spec, "cos:")) {
        const double amp = spec_number(potential_spec, "cos:");
        for (std::size_t i = 0; i < n; ++i)
            for (double x : layout.coordinates(i)) data.potential[i] += amp * std::cos(two_pi * x);
    } else {
        throw ModelError("unknown potential '" + potential_spec + "' (zero, const:c, cos:amp)");
    }

    data.link_phase.assign(dim, std::vector<double>(n, 0.0));
    std::optional<FluxData> flux = FluxData::uniform(Rational(0, 1));
    if (magnetic_spec == "zero") {
    } else if (starts_with(magnetic_spec, "gradient:")) {
        const auto phi = continuum_gauge_scalar(dim, m, spec_number(magnetic_spec, "gradient:"));
        for (std::size_t i = 0; i < n; ++i) {
            const IntVec j = layout.multi_index(i);
            for (int d = 0; d < dim; ++d) {
                IntVec nb = j;
                nb[d] += 1;
                data.link_phase[d][i] = phi[layout.flat_index(nb)] - phi[i];
            }
        }
    } else if (starts_with(magnetic_spec, "uniform:")) {
        if (dim != 2) throw ModelError("uniform magnetic field needs dim = 2");
        const double turns = spec_number(magnetic_spec, "uniform:");
        if (turns != std::round(turns)) throw ModelError("flux through the fundamental domain must be an integer");
        const double mm = static_cast<double>(m) * m;
        // Landau gauge along x2, with the compensating transition on the x1 seam.
        for (std::size_t i = 0; i < n; ++i) {
            const IntVec j = layout.multi_index(i);
            data.link_phase[1][i] = two_pi * turns * static_cast<double>(j[0]) / mm;
            if (j[0] == m - 1) data.link_phase[0][i] = -two_pi * turns * static_cast<double>(j[1]) / m;
        }
        FluxData f;
        f.per_plaquette.reset();
        f.cell_x = f.cell_y = m;
        f.period_x = f.period_y = m;
        f.plaquette_flux.assign(n, two_pi * turns / mm);
        f.total_flux_per_cell = two_pi * turns;
        flux = f;
    } else {
        throw ModelError("unknown magnetic potential '" + magnetic_spec + "' (zero, gradient:amp, uniform:n)");
    }

    LatticeModel model = make_continuum_model("continuum", std::move(data));
    model.flux = flux;
    return model;
}

} // namespace bloch
