#pragma once

#include <span>
#include <vector>

#include "popt/tensor.hpp"

namespace popt {

/// A point of the open unit ball. Membership (Euclidean norm < 1) is
/// checked by the operations, not the constructor, so boundary cases can
/// be exercised deliberately.
struct BallPoint {
    std::vector<double> coords;

    std::size_t dim() const { return coords.size(); }
};

/// Inverse hyperbolic cosine, ln(x + sqrt(x^2 - 1)). Arguments are clamped
/// to >= 1 first, absorbing rounding like 1 - 1e-17 at coincident points.
double arcosh(double x);

/// Geodesic distance between two points of the unit ball:
/// arcosh(1 + 2*|u-v|^2 / ((1-|u|^2)(1-|v|^2))).
/// Throws std::invalid_argument on dimension mismatch and
/// std::domain_error (naming the argument) when a norm reaches 1.
double poincare_distance(const BallPoint& u, const BallPoint& v);

/// Conformal rescaling of a Euclidean gradient: g * (1-|theta|^2)^2 / 4,
/// with |theta| the whole-tensor Euclidean norm. The scale factor lies in
/// (0, 1/4] for any in-ball tensor.
ParamTensor riemannian_rescale(const ParamTensor& theta, const ParamTensor& grad);

inline constexpr double kDefaultProjEps = 1e-5;

/// Retraction into the ball: tensors with norm >= 1 are rescaled to norm
/// 1 - epsilon along their own direction; in-ball tensors pass through
/// unchanged. Idempotent.
ParamTensor project_to_ball(const ParamTensor& theta, double epsilon = kDefaultProjEps);

/// In-place flavor used by the optimizer hot path. Returns true when the
/// projection fired. No finiteness check; callers validate gradients.
bool project_in_place(std::span<double> data, double epsilon);

/// Gradient of poincare_distance with respect to its first argument,
/// evaluated analytically. Zero at coincident points, where the distance
/// has a cone singularity. Used by the tree-embedding task.
std::vector<double> poincare_distance_grad_u(const BallPoint& u, const BallPoint& v);

}  // namespace popt
