#pragma once

#include <span>
#include <vector>

namespace kslab {

// Cell-centered radial mesh on (0, R) in dimension n. No cell sits at the
// origin; the r = 0 face is a symmetry face with zero area, the r = R face
// carries the no-flux condition. Volumes are (f_{k+1}^n - f_k^n)/n, i.e. the
// integral of r^{n-1} over the cell with the angular constant dropped, so
// sum(volume * u) is the reduced mass of u.
struct RadialGrid {
    int n = 3;
    double R = 1.0;
    std::vector<double> faces;       // size N+1, faces[0] = 0, faces[N] = R
    std::vector<double> centers;     // size N, arithmetic midpoints
    std::vector<double> volumes;     // size N
    std::vector<double> face_areas;  // size N+1, faces[j]^{n-1}

    int cells() const { return static_cast<int>(centers.size()); }
};

// Geometric grading: cell widths grow outward by the fixed factor `grading`,
// so the finest cell hugs the origin. grading = 1 gives the uniform mesh.
RadialGrid build_graded_grid(int n, double R, int N, double grading);

// Two-point face gradients (phi_{k} - phi_{k-1}) / (r_k - r_{k-1}) on the
// interior faces; both boundary faces report 0.
std::vector<double> face_gradient(const RadialGrid& g, std::span<const double> field);

// Discrete divergence (area*flux differences over cell volume). With
// require_no_flux the boundary entries must be exactly zero.
std::vector<double> divergence_of_flux(const RadialGrid& g, std::span<const double> face_flux,
                                       bool require_no_flux = false);

// divergence_of_flux(face_gradient(field)): the Neumann Laplacian. Symmetric
// in the volume-weighted inner product, annihilates constants.
std::vector<double> radial_laplacian(const RadialGrid& g, std::span<const double> field);

double reduced_mass(const RadialGrid& g, std::span<const double> field);

} // namespace kslab
