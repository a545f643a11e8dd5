#pragma once

#include "bloch/lattice_characters.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bloch {

/// Site of Z^2, also used for lattice displacements gamma.
struct Vec2 {
    long x = 0;
    long y = 0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend auto operator<=>(const Vec2&, const Vec2&) = default;
};

/// Signed plaquette count g1 ^ g2.
inline long wedge(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Rectangle [x0, x0+nx) x [y0, y0+ny) of sites.
struct Box2 {
    long x0 = 0, y0 = 0;
    long nx = 0, ny = 0;

    bool empty() const noexcept { return nx <= 0 || ny <= 0; }
    std::size_t size() const noexcept { return empty() ? 0 : static_cast<std::size_t>(nx * ny); }
    bool contains(Vec2 s) const noexcept
    {
        return s.x >= x0 && s.x < x0 + nx && s.y >= y0 && s.y < y0 + ny;
    }
    std::size_t index(Vec2 s) const noexcept { return static_cast<std::size_t>((s.y - y0) * nx + (s.x - x0)); }
    Vec2 site(std::size_t i) const noexcept
    {
        return {x0 + static_cast<long>(i) % nx, y0 + static_cast<long>(i) / nx};
    }
    Box2 shrunk(long margin) const noexcept { return {x0 + margin, y0 + margin, nx - 2 * margin, ny - 2 * margin}; }
    Box2 shifted(Vec2 g) const noexcept { return {x0 + g.x, y0 + g.y, nx, ny}; }

    static Box2 centered(long half_width) { return {-half_width, -half_width, 2 * half_width + 1, 2 * half_width + 1}; }
};

Box2 intersect(const Box2& a, const Box2& b);

/// Complex section values on a rectangular patch.
struct PatchField {
    Box2 box;
    std::vector<cplx> values;

    cplx& at(Vec2 s) { return values[box.index(s)]; }
    cplx at(Vec2 s) const { return values[box.index(s)]; }
};

/// Wraps an angle into (-pi, pi].
double wrap_phase(double angle);

/// Edge phases a(x -> x + e_dir) on one magnetic unit cell of cell_x * cell_y
/// sites, extended periodically to Z^2. Reversed edges carry -a.
class MagneticPotential {
public:
    MagneticPotential(long cell_x, long cell_y, std::vector<double> ax, std::vector<double> ay);

    static MagneticPotential zero(long cell_x = 1, long cell_y = 1);
    /// Landau gauge for uniform flux p/q (in units of 2 pi per plaquette):
    /// a = 0 on x-edges, a = 2 pi (p/q) m on the y-edge in column m; cell q x 1.
    static MagneticPotential landau(Rational flux);
    /// Discrete gradient of a periodic scalar given on the cell (row-major).
    static MagneticPotential gradient(long cell_x, long cell_y, std::span<const double> phi);

    long cell_x() const noexcept { return cx_; }
    long cell_y() const noexcept { return cy_; }

    /// a(s -> s + e_dir) with dir 0 = x, 1 = y.
    double forward(Vec2 s, int dir) const;
    /// a(from -> to) for nearest neighbours.
    double edge(Vec2 from, Vec2 to) const;
    /// Pushed-forward potential (gamma.a)(from -> to) = a(from - gamma -> to - gamma).
    double translated_edge(Vec2 gamma, Vec2 from, Vec2 to) const
    {
        return edge(from - gamma, to - gamma);
    }

    MagneticPotential plus(const MagneticPotential& other) const;

private:
    std::size_t cell_index(Vec2 s) const;

    long cx_, cy_;
    std::vector<double> ax_, ay_;
};

struct FluxData {
    /// Uniform flux per plaquette in units of 2 pi, when it is rational.
    std::optional<Rational> per_plaquette;
    long cell_x = 1, cell_y = 1;
    /// Oriented plaquette sums on the potential cell, reduced into [0, 2 pi).
    std::vector<double> plaquette_flux;
    /// Smallest period of the field (divides the potential cell).
    long period_x = 1, period_y = 1;
    /// Flux through one period cell of the field, in radians.
    double total_flux_per_cell = 0.0;

    static FluxData uniform(Rational flux);
};

FluxData flux_from_potential(const MagneticPotential& a);
bool is_integral_flux(const FluxData& flux);

/// Path sum of (a - gamma.a) from base to target along the canonical
/// x-first path (or y-first for the alternative ordering).
enum class PathOrder { x_first, y_first };
double gauge_path_sum(Vec2 gamma, const MagneticPotential& a, Vec2 base, Vec2 target,
                      PathOrder order = PathOrder::x_first);

struct GaugeFunction {
    Vec2 gamma;
    Box2 patch;
    std::vector<double> values;

    double at(Vec2 s) const { return values[patch.index(s)]; }
};

/// chi_gamma on a patch with d chi_gamma = a - gamma.a and chi_gamma(base) = 0.
/// Throws PreconditionError naming a plaquette where the field is not
/// gamma-periodic.
GaugeFunction gauge_function(Vec2 gamma, const MagneticPotential& a, Vec2 base, const Box2& patch);

/// (T_gamma s)(x) = exp(i chi_gamma(x)) s(x - gamma) on the part of the patch
/// where x - gamma is still inside.
PatchField magnetic_translation_apply(Vec2 gamma, const PatchField& s, const MagneticPotential& a,
                                      Vec2 base = {});

/// Theta(g1, g2) with T_g1 T_g2 = Theta(g1, g2) T_{g1+g2}.
cplx cocycle(Vec2 gamma1, Vec2 gamma2, const MagneticPotential& a, Vec2 base = {});

/// A local operator on patch sections. The result lives on a (possibly
/// smaller) box on which it is exact.
using PatchOperator = std::function<PatchField(const PatchField&)>;

struct Translation {
    Vec2 gamma;
    PatchOperator apply;
};

Translation magnetic_translation(Vec2 gamma, MagneticPotential a, Vec2 base = {});
/// Ungauged shift s -> s(. - gamma).
Translation plain_translation(Vec2 gamma);

/// Nearest-neighbour operator (H s)(x) = onsite s(x) + hopping sum_y exp(-i a(x->y)) s(y)
/// on Z^2, the discrete minimally coupled form of d - i a.
PatchOperator square_lattice_hamiltonian(MagneticPotential a, double hopping, double onsite);

/// max over translations and random test sections of |T H s - H T s|_inf
/// on the common valid interior.
double check_periodicity(const PatchOperator& hamiltonian, std::span<const Translation> translations,
                         const Box2& patch, std::uint64_t seed = 7, int samples = 3);

} // namespace bloch
