#include "popt/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "popt/kernels.hpp"

namespace popt {

double arcosh(double x) {
    if (x < 1.0) x = 1.0;
    return std::log(x + std::sqrt(x * x - 1.0));
}

double poincare_distance(const BallPoint& u, const BallPoint& v) {
    if (u.dim() != v.dim()) {
        throw std::invalid_argument("poincare_distance: dimension mismatch (" +
                                    std::to_string(u.dim()) + " vs " +
                                    std::to_string(v.dim()) + ")");
    }
    double nu = kernels::sumsq(u.coords);
    double nv = kernels::sumsq(v.coords);
    if (nu >= 1.0) throw std::domain_error("poincare_distance: first argument has norm >= 1");
    if (nv >= 1.0) throw std::domain_error("poincare_distance: second argument has norm >= 1");

    double diff2 = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) {
        double d = u.coords[i] - v.coords[i];
        diff2 += d * d;
    }
    return arcosh(1.0 + 2.0 * diff2 / ((1.0 - nu) * (1.0 - nv)));
}

ParamTensor riemannian_rescale(const ParamTensor& theta, const ParamTensor& grad) {
    if (!theta.same_shape(grad)) {
        throw std::invalid_argument("riemannian_rescale: shape mismatch between theta and grad");
    }
    double nsq = kernels::sumsq(theta.view());
    if (nsq >= 1.0) throw std::domain_error("riemannian_rescale: theta has norm >= 1");

    double factor = (1.0 - nsq) * (1.0 - nsq) / 4.0;
    ParamTensor out = grad;
    kernels::scale(out.view(), factor);
    return out;
}

ParamTensor project_to_ball(const ParamTensor& theta, double epsilon) {
    if (epsilon <= 0.0 || epsilon >= 1.0) {
        throw std::invalid_argument("project_to_ball: epsilon must lie in (0, 1)");
    }
    if (!kernels::all_finite(theta.view())) {
        throw std::domain_error("project_to_ball: non-finite input tensor");
    }
    ParamTensor out = theta;
    project_in_place(out.view(), epsilon);
    return out;
}

bool project_in_place(std::span<double> data, double epsilon) {
    double norm = std::sqrt(kernels::sumsq(data));
    if (norm < 1.0) return false;
    kernels::scale(data, (1.0 - epsilon) / norm);
    return true;
}

std::vector<double> poincare_distance_grad_u(const BallPoint& u, const BallPoint& v) {
    if (u.dim() != v.dim()) {
        throw std::invalid_argument("poincare_distance_grad_u: dimension mismatch");
    }
    double nu = kernels::sumsq(u.coords);
    double nv = kernels::sumsq(v.coords);
    if (nu >= 1.0 || nv >= 1.0) {
        throw std::domain_error("poincare_distance_grad_u: argument has norm >= 1");
    }

    std::size_t d = u.dim();
    double diff2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double t = u.coords[i] - v.coords[i];
        diff2 += t * t;
    }
    double den = (1.0 - nu) * (1.0 - nv);
    double a = 1.0 + 2.0 * diff2 / den;

    std::vector<double> grad(d, 0.0);
    double a2m1 = a * a - 1.0;
    if (a2m1 <= 0.0) return grad;  // coincident points: cone tip, gradient 0
    double darc = 1.0 / std::sqrt(a2m1);

    // dA/du = 4 (u - v) / den + 4 |u-v|^2 (1 - |v|^2) u / den^2
    double c1 = 4.0 / den;
    double c2 = 4.0 * diff2 * (1.0 - nv) / (den * den);
    for (std::size_t i = 0; i < d; ++i) {
        grad[i] = darc * (c1 * (u.coords[i] - v.coords[i]) + c2 * u.coords[i]);
    }
    return grad;
}

}  // namespace popt
