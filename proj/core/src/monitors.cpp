#include "kslab/monitors.hpp"

#include <cmath>

#include "kslab/errors.hpp"

namespace kslab {

double weighted_sup(const RadialGrid& g, std::span<const double> u, double alpha) {
    if (static_cast<int>(u.size()) != g.cells())
        fail(errc::shape_mismatch, "weighted_sup: field size mismatch");
    double best = 0.0;
    for (int k = 0; k < g.cells(); ++k) {
        const double w = std::pow(g.centers[k], alpha) * u[k];
        if (w > best) best = w;
    }
    return best;
}

std::vector<double> cell_gradient(const RadialGrid& g, std::span<const double> field) {
    const auto fg = face_gradient(g, field);
    const int N = g.cells();
    std::vector<double> out(N);
    for (int k = 0; k < N; ++k) {
        if (k == 0) {
            out[k] = 0.5 * fg[1];  // symmetry: gradient vanishes at r = 0
        } else if (k == N - 1) {
            out[k] = fg[N - 1];
        } else {
            out[k] = 0.5 * (fg[k] + fg[k + 1]);
        }
    }
    return out;
}

double weighted_gradient_norm(const RadialGrid& g, std::span<const double> v, double theta,
                              double beta) {
    if (!(theta > 1.0)) fail(errc::range_violation, "weighted_gradient_norm needs theta > 1");
    if (!(beta > 0.0)) fail(errc::range_violation, "weighted_gradient_norm needs beta > 0");
    const auto grad = cell_gradient(g, v);
    double sum = 0.0;
    for (int k = 0; k < g.cells(); ++k) {
        sum += g.volumes[k] * std::pow(g.centers[k], theta * beta) *
               std::pow(std::abs(grad[k]), theta);
    }
    return sum;
}

double v_grad_sup(const RadialGrid& g, std::span<const double> v, double beta) {
    if (!(beta > 0.0)) fail(errc::range_violation, "v_grad_sup needs beta > 0");
    const auto grad = cell_gradient(g, v);
    double best = 0.0;
    for (int k = 0; k < g.cells(); ++k) {
        const double w = std::pow(g.centers[k], beta) * std::abs(grad[k]);
        if (w > best) best = w;
    }
    return best;
}

} // namespace kslab
