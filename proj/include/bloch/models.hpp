#pragma once

#include "bloch/fiber_assembly.hpp"

#include <string>

namespace bloch {

/// Nearest-neighbour chain, hopping -1: E(k) = -2 cos 2 pi k.
LatticeModel free_chain();

/// Z^2 Laplacian: diagonal 4, hoppings -1, E(k) = 4 - 2 cos 2 pi k1 - 2 cos 2 pi k2.
LatticeModel square_laplacian();

/// Harper model, hopping +1 and uniform flux p/q in Landau gauge on the
/// q x 1 magnetic unit cell.
LatticeModel harper(Rational flux);

/// Lieb lattice (corner + two edge-centre sites), hopping -1, zero flux.
LatticeModel lieb();

/// Continuum model on the unit torus. potential_spec: "zero", "const:c",
/// "cos:amp" (amp * sum_d cos 2 pi x_d). magnetic_spec: "zero",
/// "gradient:amp" (pure gauge), "uniform:n" (integral flux n, dim 2 only).
LatticeModel continuum(int dim, int grid_per_dim, const std::string& potential_spec,
                       const std::string& magnetic_spec);

/// Scalar phase field used by the "gradient:amp" gauge: amp * sin 2 pi x1 (+ cos 2 pi x2).
std::vector<double> continuum_gauge_scalar(int dim, int grid_per_dim, double amp);

} // namespace bloch
