#pragma once

#include <span>
#include <vector>

#include "kslab/grid.hpp"

namespace kslab {

// max over cells of r^alpha * u. The quantity the blow-up profile theory
// bounds: it stays finite through blow-up when alpha clears the critical
// exponent, while the plain sup-norm diverges.
double weighted_sup(const RadialGrid& g, std::span<const double> u, double alpha);

// Cell-centered radial gradient: mean of the adjacent face gradients. The
// innermost cell averages against the exact symmetry value 0; the outermost
// cell uses its interior face one-sided, since the r = R face value encodes
// the boundary condition rather than the field.
std::vector<double> cell_gradient(const RadialGrid& g, std::span<const double> field);

// sum over cells of volume * r^{theta*beta} * |grad|^theta, the weighted
// gradient functional of the signal. theta > 1, beta > 0.
double weighted_gradient_norm(const RadialGrid& g, std::span<const double> v, double theta,
                              double beta);

// max over cells of r^beta * |grad v|.
double v_grad_sup(const RadialGrid& g, std::span<const double> v, double beta);

} // namespace kslab
