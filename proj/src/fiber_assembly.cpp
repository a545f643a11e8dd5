#include "bloch/fiber_assembly.hpp"

#include "bloch/errors.hpp"
#include "bloch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace bloch {

namespace {

IntVec negated(const IntVec& v)
{
    IntVec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = -v[i];
    return r;
}

bool is_zero(const IntVec& v)
{
    return std::all_of(v.begin(), v.end(), [](long c) { return c == 0; });
}

} // namespace

long LatticeModel::hopping_range() const
{
    long r = 0;
    for (const auto& h : hoppings)
        for (long c : h.offset) r = std::max(r, std::abs(c));
    return r;
}

double LatticeModel::row_sum_norm() const
{
    std::vector<double> rows(sites, 0.0);
    for (const auto& h : hoppings) rows[h.from] += std::abs(h.amplitude);
    return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

void add_hermitian_pair(std::vector<Hopping>& hops, int from, int to, IntVec offset, cplx amplitude)
{
    if (from == to && is_zero(offset)) {
        if (amplitude.imag() != 0.0) throw ModelError("on-site term must be real");
        hops.push_back({from, to, std::move(offset), amplitude});
        return;
    }
    IntVec back = negated(offset);
    hops.push_back({from, to, std::move(offset), amplitude});
    hops.push_back({to, from, std::move(back), std::conj(amplitude)});
}

void validate_model(const LatticeModel& model)
{
    if (model.rank < 1 || model.rank > 3) throw ModelError("model rank must be 1, 2 or 3");
    if (model.sites < 1) throw ModelError("model needs at least one internal site");
    using Key = std::tuple<int, int, IntVec>;
    std::map<Key, cplx> summed;
    double scale = 0.0;
    for (const auto& h : model.hoppings) {
        if (h.from < 0 || h.from >= model.sites || h.to < 0 || h.to >= model.sites)
            throw ModelError("hopping refers to a site outside the unit cell");
        if (static_cast<int>(h.offset.size()) != model.rank)
            throw ModelError("hopping offset has dimension " + std::to_string(h.offset.size()) +
                             ", model rank is " + std::to_string(model.rank));
        if (!std::isfinite(h.amplitude.real()) || !std::isfinite(h.amplitude.imag()))
            throw ModelError("hopping amplitude is not finite");
        summed[{h.from, h.to, h.offset}] += h.amplitude;
        scale = std::max(scale, std::abs(h.amplitude));
    }
    const double tol = 1e-13 * std::max(1.0, scale);
    for (const auto& [key, t] : summed) {
        const auto& [from, to, offset] = key;
        const auto partner = summed.find({to, from, negated(offset)});
        const cplx back = partner == summed.end() ? cplx{} : partner->second;
        if (std::abs(back - std::conj(t)) > tol)
            throw ModelError("hopping list is not Hermitian: term (" + std::to_string(from) + "->" +
                             std::to_string(to) + ") has no conjugate partner");
    }
}

LatticeModel make_tight_binding(std::string name, int rank, int sites, std::vector<Hopping> hoppings)
{
    LatticeModel m;
    m.name = std::move(name);
    m.kind = ModelKind::tight_binding;
    m.rank = rank;
    m.sites = sites;
    m.hoppings = std::move(hoppings);
    validate_model(m);
    return m;
}

LatticeModel peierls_square_model(std::string name, const MagneticPotential& a, double hopping, double onsite)
{
    const long cx = a.cell_x(), cy = a.cell_y();
    const auto site_of = [cx](long x, long y) { return static_cast<int>(y * cx + x); };
    std::vector<Hopping> hops;
    for (long y = 0; y < cy; ++y)
        for (long x = 0; x < cx; ++x) {
            const int here = site_of(x, y);
            if (onsite != 0.0) add_hermitian_pair(hops, here, here, {0, 0}, onsite);
            if (hopping == 0.0) continue;
            // +x neighbour
            {
                const long nx = x + 1;
                const long cell = nx / cx;
                add_hermitian_pair(hops, here, site_of(nx % cx, y), {cell, 0},
                                   hopping * std::polar(1.0, -a.edge({x, y}, {nx, y})));
            }
            // +y neighbour
            {
                const long ny = y + 1;
                const long cell = ny / cy;
                add_hermitian_pair(hops, here, site_of(x, ny % cy), {0, cell},
                                   hopping * std::polar(1.0, -a.edge({x, y}, {x, ny})));
            }
        }
    LatticeModel m = make_tight_binding(std::move(name), 2, static_cast<int>(cx * cy), std::move(hops));
    m.flux = flux_from_potential(a);
    Superlattice sl;
    sl.index_matrix = {{cx, 0}, {0, cy}};
    sl.index = cx * cy;
    m.superlattice = sl;
    m.square = SquareLatticeData{a, hopping, onsite};
    return m;
}

LatticeModel make_continuum_model(std::string name, ContinuumData data)
{
    const int dim = data.dim;
    const int m = data.grid_per_dim;
    if (dim < 1 || dim > 3) throw ModelError("continuum dimension must be 1, 2 or 3");
    if (m < 4) throw ModelError("continuum grid needs at least 4 points per dimension, got " + std::to_string(m));
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(m);
    if (data.potential.size() != n)
        throw ModelError("continuum potential needs " + std::to_string(n) + " values");
    for (double v : data.potential)
        if (!std::isfinite(v)) throw ModelError("continuum potential must be real and finite");
    if (data.link_phase.empty()) data.link_phase.assign(dim, std::vector<double>(n, 0.0));
    if (static_cast<int>(data.link_phase.size()) != dim)
        throw ModelError("continuum link phases needed for every direction");
    for (const auto& lp : data.link_phase) {
        if (lp.size() != n) throw ModelError("continuum link phases have the wrong size");
        for (double v : lp)
            if (!std::isfinite(v)) throw ModelError("continuum link phase is not finite");
    }

    const double scale = static_cast<double>(m) * static_cast<double>(m);
    const CharacterGrid layout(dim, m);
    std::vector<Hopping> hops;
    for (std::size_t i = 0; i < n; ++i) {
        const int site = static_cast<int>(i);
        add_hermitian_pair(hops, site, site, IntVec(dim, 0), 2.0 * dim * scale + data.potential[i]);
        const IntVec j = layout.multi_index(i);
        for (int d = 0; d < dim; ++d) {
            IntVec nb = j;
            IntVec offset(dim, 0);
            nb[d] += 1;
            if (nb[d] == m) {
                nb[d] = 0;
                offset[d] = 1;
            }
            const int target = static_cast<int>(layout.flat_index(nb));
            add_hermitian_pair(hops, site, target, std::move(offset),
                               -scale * std::polar(1.0, -data.link_phase[d][i]));
        }
    }
    LatticeModel model = make_tight_binding(std::move(name), dim, static_cast<int>(n), std::move(hops));
    model.kind = ModelKind::continuum_fd;
    model.continuum = std::move(data);
    return model;
}

LatticeModel make_onsite_model(std::string name, int rank, const std::vector<double>& values)
{
    std::vector<Hopping> hops;
    for (std::size_t i = 0; i < values.size(); ++i)
        add_hermitian_pair(hops, static_cast<int>(i), static_cast<int>(i), IntVec(rank, 0), values[i]);
    return make_tight_binding(std::move(name), rank, static_cast<int>(values.size()), std::move(hops));
}

Eigen::MatrixXcd fiber_matrix(const LatticeModel& model, const Character& k)
{
    if (k.rank() != model.rank)
        throw InputError("character of rank " + std::to_string(k.rank()) + " for a rank-" +
                         std::to_string(model.rank) + " model");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(model.sites, model.sites);
    for (const auto& h : model.hoppings) m(h.from, h.to) += h.amplitude * character_pairing(k, h.offset);
    return m;
}

FiberOperator assemble_tb_fiber(const LatticeModel& model, const Character& k)
{
    if (model.kind != ModelKind::tight_binding)
        throw ModelError("assemble_tb_fiber called on a continuum model");
    return {k, fiber_matrix(model, k), model.name};
}

FiberOperator assemble_continuum_fiber(const LatticeModel& model, const Character& k)
{
    if (model.kind != ModelKind::continuum_fd || !model.continuum)
        throw ModelError("assemble_continuum_fiber called on a tight-binding model");
    return {k, fiber_matrix(model, k), model.name};
}

FiberOperator assemble_fiber(const LatticeModel& model, const Character& k)
{
    return model.kind == ModelKind::continuum_fd ? assemble_continuum_fiber(model, k)
                                                 : assemble_tb_fiber(model, k);
}

double hermiticity_defect(const Eigen::MatrixXcd& m)
{
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    const double defect = (m - m.adjoint()).cwiseAbs().rowwise().sum().maxCoeff();
    return defect / std::max(norm, 1e-300);
}

double hermitian_norm(const Eigen::MatrixXcd& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

LipschitzReport family_lipschitz_check(const LatticeModel& model, const CharacterGrid& grid, int threads)
{
    if (grid.rank() != model.rank) throw InputError("grid rank does not match the model");
    const double step = 1.0 / grid.points_per_dim();
    std::vector<double> ratios(grid.size(), 0.0);
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const IntVec j = grid.multi_index(i);
        const Eigen::MatrixXcd here = fiber_matrix(model, grid.point(i));
        double worst = 0.0;
        for (int d = 0; d < grid.rank(); ++d) {
            IntVec nb = j;
            nb[d] += 1;
            const Eigen::MatrixXcd there = fiber_matrix(model, grid.point(grid.flat_index(nb)));
            worst = std::max(worst, hermitian_norm(there - here) / step);
        }
        ratios[i] = worst;
    });
    return {*std::max_element(ratios.begin(), ratios.end()), grid.points_per_dim()};
}

std::size_t CellField::cell_count() const
{
    std::size_t n = 1;
    for (int d = 0; d < rank; ++d) n *= static_cast<std::size_t>(cells_per_dim);
    return n;
}

std::size_t CellField::cell_index(std::span<const long> cell) const
{
    std::size_t flat = 0;
    for (int d = 0; d < rank; ++d) flat = flat * cells_per_dim + static_cast<std::size_t>(cell[d]);
    return flat;
}

IntVec CellField::cell(std::size_t index) const
{
    IntVec c(rank);
    for (int d = rank - 1; d >= 0; --d) {
        c[d] = static_cast<long>(index % cells_per_dim);
        index /= cells_per_dim;
    }
    return c;
}

CellField apply_cell_operator(const LatticeModel& model, const CellField& s, std::vector<bool>& interior)
{
    if (s.rank != model.rank || s.sites != model.sites) throw InputError("cell field does not match the model");
    CellField out = s;
    std::fill(out.values.begin(), out.values.end(), cplx{});
    const std::size_t cells = s.cell_count();
    interior.assign(cells, false);
    const long range = model.hopping_range();
    for (std::size_t c = 0; c < cells; ++c) {
        const IntVec cell = s.cell(c);
        const bool inside = std::all_of(cell.begin(), cell.end(), [&](long v) {
            return v - range >= 0 && v + range < s.cells_per_dim;
        });
        if (!inside) continue;
        interior[c] = true;
        IntVec target(model.rank);
        for (const auto& h : model.hoppings) {
            for (int d = 0; d < model.rank; ++d) target[d] = cell[d] + h.offset[d];
            out.at(c, h.from) += h.amplitude * s.at(s.cell_index(target), h.to);
        }
    }
    return out;
}

} // namespace bloch
