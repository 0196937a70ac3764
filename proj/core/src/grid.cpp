#include "kslab/grid.hpp"

#include <cmath>
#include <string>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

void check_cells(const RadialGrid& g, std::span<const double> field, const char* what) {
    if (static_cast<int>(field.size()) != g.cells())
        fail(errc::shape_mismatch, std::string(what) + ": field has " +
                                       std::to_string(field.size()) + " entries, grid has " +
                                       std::to_string(g.cells()) + " cells");
}

} // namespace

RadialGrid build_graded_grid(int n, double R, int N, double grading) {
    if (n < 2) fail(errc::range_violation, "grid dimension must be >= 2");
    if (!(R > 0.0) || !std::isfinite(R)) fail(errc::range_violation, "grid radius must be positive");
    if (N < 4) fail(errc::range_violation, "grid needs at least 4 cells");
    if (!(grading >= 1.0) || !(grading <= 1.2))
        fail(errc::range_violation, "grading ratio must lie in [1, 1.2]");

    RadialGrid g;
    g.n = n;
    g.R = R;
    g.faces.resize(static_cast<size_t>(N) + 1);
    if (grading == 1.0) {
        for (int k = 0; k <= N; ++k) g.faces[k] = R * (static_cast<double>(k) / N);
    } else {
        // widths h0 * grading^k; accumulate then rescale so faces[N] lands on R.
        double w = 1.0, acc = 0.0;
        g.faces[0] = 0.0;
        for (int k = 1; k <= N; ++k) {
            acc += w;
            g.faces[k] = acc;
            w *= grading;
        }
        const double scale = R / acc;
        for (int k = 1; k <= N; ++k) g.faces[k] *= scale;
    }
    g.faces[N] = R;

    g.centers.resize(N);
    g.volumes.resize(N);
    g.face_areas.resize(static_cast<size_t>(N) + 1);
    for (int k = 0; k <= N; ++k) g.face_areas[k] = ipow(g.faces[k], n - 1);
    for (int k = 0; k < N; ++k) {
        g.centers[k] = 0.5 * (g.faces[k] + g.faces[k + 1]);
        g.volumes[k] = (ipow(g.faces[k + 1], n) - ipow(g.faces[k], n)) / n;
    }
    return g;
}

std::vector<double> face_gradient(const RadialGrid& g, std::span<const double> field) {
    check_cells(g, field, "face_gradient");
    const int N = g.cells();
    std::vector<double> grad(static_cast<size_t>(N) + 1, 0.0);
    for (int j = 1; j < N; ++j) {
        grad[j] = (field[j] - field[j - 1]) / (g.centers[j] - g.centers[j - 1]);
    }
    return grad;
}

std::vector<double> divergence_of_flux(const RadialGrid& g, std::span<const double> face_flux,
                                       bool require_no_flux) {
    const int N = g.cells();
    if (static_cast<int>(face_flux.size()) != N + 1)
        fail(errc::shape_mismatch, "divergence_of_flux: flux has " +
                                       std::to_string(face_flux.size()) + " entries, expected " +
                                       std::to_string(N + 1));
    if (require_no_flux && (face_flux[0] != 0.0 || face_flux[N] != 0.0))
        fail(errc::nonzero_boundary_flux, "no-flux divergence got nonzero boundary flux");

    std::vector<double> div(N);
    for (int k = 0; k < N; ++k) {
        div[k] = (g.face_areas[k + 1] * face_flux[k + 1] - g.face_areas[k] * face_flux[k]) /
                 g.volumes[k];
    }
    return div;
}

std::vector<double> radial_laplacian(const RadialGrid& g, std::span<const double> field) {
    return divergence_of_flux(g, face_gradient(g, field), true);
}

double reduced_mass(const RadialGrid& g, std::span<const double> field) {
    check_cells(g, field, "reduced_mass");
    // Compensated sum; mass drift checks compare against 1e-10 relative.
    double sum = 0.0, c = 0.0;
    for (int k = 0; k < g.cells(); ++k) {
        const double y = g.volumes[k] * field[k] - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

} // namespace kslab
