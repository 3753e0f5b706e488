#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace popt {

/// A loss value together with its analytic gradient with respect to the
/// prediction (same layout as the prediction array).
struct LossOutput {
    double value = 0.0;
    std::vector<double> grad;
};

enum class LossKind { Mse, Poincare };

LossKind loss_kind_from_string(std::string_view name);
const char* to_string(LossKind kind);

/// Mean squared error over all elements; grad = 2 (pred - target) / N.
LossOutput mse_loss(std::span<const double> pred, std::span<const double> target);

inline constexpr double kDefaultLossDelta = 1e-5;

/// Hyperbolic distance loss evaluated per sample and averaged over the
/// leading batch axis. Per sample of length L:
///
///   value = arcosh(1 + 2 m(p - t) / ((1 - m(p))(1 - m(t)) + delta)),
///
/// where m(x) is the mean square of x. The arcosh argument is clamped to
/// >= 1 (gradient 0 where the clamp binds). Throws std::domain_error when
/// the guarded denominator is not positive, naming the out-of-ball operand.
LossOutput poincare_loss(std::span<const double> pred, std::span<const double> target,
                         std::size_t batch, double delta = kDefaultLossDelta);

/// Dispatch helper used by the training harness.
LossOutput evaluate_loss(LossKind kind, std::span<const double> pred,
                         std::span<const double> target, std::size_t batch,
                         double delta = kDefaultLossDelta);

}  // namespace popt
