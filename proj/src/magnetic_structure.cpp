#include "bloch/magnetic_structure.hpp"

#include "bloch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace bloch {

namespace {

long floor_mod(long v, long m)
{
    long r = v % m;
    return r < 0 ? r + m : r;
}

std::string site_str(Vec2 s)
{
    return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + ")";
}

/// Oriented sum of a one-form around the unit plaquette with lower-left corner s.
template <class EdgeFn>
double plaquette_sum(EdgeFn&& edge, Vec2 s)
{
    const Vec2 e1{1, 0}, e2{0, 1};
    return edge(s, s + e1) + edge(s + e1, s + e1 + e2) + edge(s + e1 + e2, s + e2) + edge(s + e2, s);
}

/// Sum of edge(x, x') along the staircase path from -> to, moving along
/// `first` axis and then the other one.
template <class EdgeFn>
double path_sum(EdgeFn&& edge, Vec2 from, Vec2 to, PathOrder order)
{
    double total = 0.0;
    Vec2 cur = from;
    auto walk_x = [&] {
        const long step = to.x >= cur.x ? 1 : -1;
        while (cur.x != to.x) {
            const Vec2 next{cur.x + step, cur.y};
            total += edge(cur, next);
            cur = next;
        }
    };
    auto walk_y = [&] {
        const long step = to.y >= cur.y ? 1 : -1;
        while (cur.y != to.y) {
            const Vec2 next{cur.x, cur.y + step};
            total += edge(cur, next);
            cur = next;
        }
    };
    if (order == PathOrder::x_first) {
        walk_x();
        walk_y();
    } else {
        walk_y();
        walk_x();
    }
    return total;
}

double reduce_two_pi(double angle)
{
    double r = std::fmod(angle, two_pi);
    if (r < 0) r += two_pi;
    if (two_pi - r < 1e-12) r = 0.0;
    if (r < 1e-12) r = 0.0;
    return r;
}

} // namespace

Box2 intersect(const Box2& a, const Box2& b)
{
    const long x0 = std::max(a.x0, b.x0);
    const long y0 = std::max(a.y0, b.y0);
    const long x1 = std::min(a.x0 + a.nx, b.x0 + b.nx);
    const long y1 = std::min(a.y0 + a.ny, b.y0 + b.ny);
    return {x0, y0, std::max(0L, x1 - x0), std::max(0L, y1 - y0)};
}

double wrap_phase(double angle)
{
    double r = std::remainder(angle, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

MagneticPotential::MagneticPotential(long cell_x, long cell_y, std::vector<double> ax, std::vector<double> ay)
    : cx_(cell_x), cy_(cell_y), ax_(std::move(ax)), ay_(std::move(ay))
{
    if (cx_ < 1 || cy_ < 1) throw InputError("magnetic cell dimensions must be positive");
    const auto cells = static_cast<std::size_t>(cx_ * cy_);
    if (ax_.size() != cells || ay_.size() != cells)
        throw InputError("magnetic potential: expected " + std::to_string(cells) +
                         " edge values per direction, got " + std::to_string(ax_.size()) + " and " +
                         std::to_string(ay_.size()));
    for (double v : ax_)
        if (!std::isfinite(v)) throw InputError("magnetic potential has a non-finite edge value");
    for (double v : ay_)
        if (!std::isfinite(v)) throw InputError("magnetic potential has a non-finite edge value");
}

MagneticPotential MagneticPotential::zero(long cell_x, long cell_y)
{
    const auto n = static_cast<std::size_t>(std::max(1L, cell_x * cell_y));
    return {cell_x, cell_y, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

MagneticPotential MagneticPotential::landau(Rational flux)
{
    const long q = flux.q;
    std::vector<double> ax(q, 0.0), ay(q);
    for (long m = 0; m < q; ++m) ay[m] = two_pi * static_cast<double>(flux.p * m % q) / static_cast<double>(q);
    return {q, 1, std::move(ax), std::move(ay)};
}

MagneticPotential MagneticPotential::gradient(long cell_x, long cell_y, std::span<const double> phi)
{
    if (static_cast<long>(phi.size()) != cell_x * cell_y)
        throw InputError("gradient potential: scalar has the wrong number of values");
    auto value = [&](long x, long y) {
        return phi[floor_mod(y, cell_y) * cell_x + floor_mod(x, cell_x)];
    };
    std::vector<double> ax(phi.size()), ay(phi.size());
    for (long y = 0; y < cell_y; ++y)
        for (long x = 0; x < cell_x; ++x) {
            ax[y * cell_x + x] = value(x + 1, y) - value(x, y);
            ay[y * cell_x + x] = value(x, y + 1) - value(x, y);
        }
    return {cell_x, cell_y, std::move(ax), std::move(ay)};
}

std::size_t MagneticPotential::cell_index(Vec2 s) const
{
    return static_cast<std::size_t>(floor_mod(s.y, cy_) * cx_ + floor_mod(s.x, cx_));
}

double MagneticPotential::forward(Vec2 s, int dir) const
{
    return dir == 0 ? ax_[cell_index(s)] : ay_[cell_index(s)];
}

double MagneticPotential::edge(Vec2 from, Vec2 to) const
{
    const Vec2 d = to - from;
    if (d.x == 1 && d.y == 0) return forward(from, 0);
    if (d.x == -1 && d.y == 0) return -forward(to, 0);
    if (d.x == 0 && d.y == 1) return forward(from, 1);
    if (d.x == 0 && d.y == -1) return -forward(to, 1);
    throw InputError("edge " + site_str(from) + "->" + site_str(to) + " does not join nearest neighbours");
}

MagneticPotential MagneticPotential::plus(const MagneticPotential& other) const
{
    const long cx = std::lcm(cx_, other.cx_);
    const long cy = std::lcm(cy_, other.cy_);
    std::vector<double> ax(cx * cy), ay(cx * cy);
    for (long y = 0; y < cy; ++y)
        for (long x = 0; x < cx; ++x) {
            ax[y * cx + x] = forward({x, y}, 0) + other.forward({x, y}, 0);
            ay[y * cx + x] = forward({x, y}, 1) + other.forward({x, y}, 1);
        }
    return {cx, cy, std::move(ax), std::move(ay)};
}

FluxData FluxData::uniform(Rational flux)
{
    FluxData f;
    f.per_plaquette = flux;
    f.plaquette_flux = {reduce_two_pi(two_pi * flux.value())};
    f.total_flux_per_cell = two_pi * flux.value();
    return f;
}

FluxData flux_from_potential(const MagneticPotential& a)
{
    FluxData f;
    f.cell_x = a.cell_x();
    f.cell_y = a.cell_y();
    const auto edge = [&](Vec2 u, Vec2 v) { return a.edge(u, v); };
    f.plaquette_flux.resize(static_cast<std::size_t>(f.cell_x * f.cell_y));
    for (long y = 0; y < f.cell_y; ++y)
        for (long x = 0; x < f.cell_x; ++x)
            f.plaquette_flux[y * f.cell_x + x] = reduce_two_pi(plaquette_sum(edge, {x, y}));

    auto at = [&](long x, long y) { return f.plaquette_flux[floor_mod(y, f.cell_y) * f.cell_x + floor_mod(x, f.cell_x)]; };
    auto is_period = [&](long px, long py) {
        for (long y = 0; y < f.cell_y; ++y)
            for (long x = 0; x < f.cell_x; ++x)
                if (std::abs(wrap_phase(at(x + px, y) - at(x, y))) > 1e-12 ||
                    std::abs(wrap_phase(at(x, y + py) - at(x, y))) > 1e-12)
                    return false;
        return true;
    };
    f.period_x = f.cell_x;
    f.period_y = f.cell_y;
    for (long px = 1; px <= f.cell_x; ++px) {
        if (f.cell_x % px) continue;
        bool found = false;
        for (long py = 1; py <= f.cell_y; ++py) {
            if (f.cell_y % py) continue;
            if (is_period(px, py)) {
                f.period_x = px;
                f.period_y = py;
                found = true;
                break;
            }
        }
        if (found) break;
    }
    double total = 0.0;
    for (long y = 0; y < f.period_y; ++y)
        for (long x = 0; x < f.period_x; ++x) total += at(x, y);
    f.total_flux_per_cell = total;

    // Uniform fields with a small-denominator flux are stored exactly.
    if (f.period_x == 1 && f.period_y == 1) {
        const double turns = f.plaquette_flux[0] / two_pi;
        for (long q = 1; q <= 4096; ++q) {
            const double pq = turns * static_cast<double>(q);
            const double p = std::round(pq);
            if (std::abs(pq - p) < 1e-9 * static_cast<double>(q)) {
                f.per_plaquette = Rational(static_cast<long>(p), q);
                break;
            }
        }
    }
    return f;
}

bool is_integral_flux(const FluxData& flux)
{
    if (flux.per_plaquette) return flux.per_plaquette->is_integer();
    const double turns = flux.total_flux_per_cell / two_pi;
    return std::abs(turns - std::round(turns)) <= 1e-12 * std::max(1.0, std::abs(turns));
}

double gauge_path_sum(Vec2 gamma, const MagneticPotential& a, Vec2 base, Vec2 target, PathOrder order)
{
    const auto form = [&](Vec2 u, Vec2 v) { return a.edge(u, v) - a.translated_edge(gamma, u, v); };
    return path_sum(form, base, target, order);
}

GaugeFunction gauge_function(Vec2 gamma, const MagneticPotential& a, Vec2 base, const Box2& patch)
{
    if (patch.empty() || !patch.contains(base))
        throw InputError("gauge function: patch must contain the base point " + site_str(base));
    const auto form = [&](Vec2 u, Vec2 v) { return a.edge(u, v) - a.translated_edge(gamma, u, v); };
    for (long y = patch.y0; y + 1 < patch.y0 + patch.ny; ++y)
        for (long x = patch.x0; x + 1 < patch.x0 + patch.nx; ++x) {
            const double curl = wrap_phase(plaquette_sum(form, {x, y}));
            if (std::abs(curl) > 1e-9)
                throw PreconditionError("magnetic field is not periodic under gamma=" + site_str(gamma) +
                                        ": plaquette " + site_str({x, y}) + " changes by " +
                                        std::to_string(curl));
        }

    GaugeFunction g{gamma, patch, std::vector<double>(patch.size())};
    // Row of the base point first, then every column upwards/downwards.
    for (long x = patch.x0; x < patch.x0 + patch.nx; ++x) {
        const Vec2 on_row{x, base.y};
        const double row_value = path_sum(form, base, on_row, PathOrder::x_first);
        for (long y = patch.y0; y < patch.y0 + patch.ny; ++y) {
            const Vec2 s{x, y};
            g.values[patch.index(s)] = row_value + path_sum(form, on_row, s, PathOrder::x_first);
        }
    }
    return g;
}

PatchField magnetic_translation_apply(Vec2 gamma, const PatchField& s, const MagneticPotential& a, Vec2 base)
{
    const Box2 out_box = intersect(s.box, s.box.shifted(gamma));
    if (out_box.empty())
        throw DomainError("magnetic translation by " + site_str(gamma) + ": patch of " +
                          std::to_string(s.box.nx) + "x" + std::to_string(s.box.ny) +
                          " sites needs more than " + std::to_string(std::max(std::abs(gamma.x), std::abs(gamma.y))) +
                          " sites per direction");
    PatchField out{out_box, std::vector<cplx>(out_box.size())};
    for (std::size_t i = 0; i < out_box.size(); ++i) {
        const Vec2 x = out_box.site(i);
        const double chi = gauge_path_sum(gamma, a, base, x);
        out.values[i] = std::polar(1.0, chi) * s.at(x - gamma);
    }
    return out;
}

cplx cocycle(Vec2 gamma1, Vec2 gamma2, const MagneticPotential& a, Vec2 base)
{
    const Vec2 g12 = gamma1 + gamma2;
    const auto form = [&](Vec2 u, Vec2 v) {
        return a.translated_edge(g12, u, v) - a.translated_edge(gamma1, u, v);
    };
    return std::polar(1.0, path_sum(form, base, base + gamma1, PathOrder::x_first));
}

Translation magnetic_translation(Vec2 gamma, MagneticPotential a, Vec2 base)
{
    return {gamma, [gamma, a = std::move(a), base](const PatchField& s) {
                return magnetic_translation_apply(gamma, s, a, base);
            }};
}

Translation plain_translation(Vec2 gamma)
{
    return {gamma, [gamma](const PatchField& s) {
                return magnetic_translation_apply(gamma, s, MagneticPotential::zero(), {});
            }};
}

PatchOperator square_lattice_hamiltonian(MagneticPotential a, double hopping, double onsite)
{
    return [a = std::move(a), hopping, onsite](const PatchField& s) {
        const Box2 out_box = s.box.shrunk(1);
        if (out_box.empty()) throw DomainError("lattice Hamiltonian needs a patch of at least 3x3 sites");
        PatchField out{out_box, std::vector<cplx>(out_box.size())};
        static constexpr Vec2 steps[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (std::size_t i = 0; i < out_box.size(); ++i) {
            const Vec2 x = out_box.site(i);
            cplx acc = onsite * s.at(x);
            for (Vec2 d : steps) {
                const Vec2 y = x + d;
                acc += hopping * std::polar(1.0, -a.edge(x, y)) * s.at(y);
            }
            out.values[i] = acc;
        }
        return out;
    };
}

double check_periodicity(const PatchOperator& hamiltonian, std::span<const Translation> translations,
                         const Box2& patch, std::uint64_t seed, int samples)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (int trial = 0; trial < samples; ++trial) {
        PatchField s{patch, std::vector<cplx>(patch.size())};
        for (auto& v : s.values) v = {normal(rng), normal(rng)};
        const PatchField hs = hamiltonian(s);
        for (const auto& t : translations) {
            const PatchField lhs = t.apply(hs);
            const PatchField rhs = hamiltonian(t.apply(s));
            const Box2 common = intersect(lhs.box, rhs.box);
            if (common.empty())
                throw DomainError("periodicity check: patch too small for translation " + site_str(t.gamma));
            for (std::size_t i = 0; i < common.size(); ++i) {
                const Vec2 x = common.site(i);
                worst = std::max(worst, std::abs(lhs.at(x) - rhs.at(x)));
            }
        }
    }
    return worst;
}

} // namespace bloch
