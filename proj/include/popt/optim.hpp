#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "popt/geometry.hpp"
#include "popt/tensor.hpp"

namespace popt {

enum class OptimKind { Sgd, HyperSgd, AdamW, HyperAdamW };

OptimKind optim_kind_from_string(std::string_view name);
const char* to_string(OptimKind kind);
bool is_hyperbolic(OptimKind kind);
bool is_adaptive(OptimKind kind);

struct OptimizerConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 0.0;  // decoupled; applies to the Adam kinds only
    double adam_eps = 1e-8;
    double proj_eps = kDefaultProjEps;

    // Test hooks: pin the conformal factor to 1 / skip the retraction, so a
    // hyperbolic optimizer can be reduced to its Euclidean counterpart.
    bool hook_identity_rescale = false;
    bool hook_skip_projection = false;

    void validate() const;
};

struct OptimizerState {
    std::uint64_t step_count = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

/// Uniform step interface over aligned lists of parameter tensors.
///
/// Euclidean kinds update in place; hyperbolic kinds rescale the incoming
/// gradient by the conformal factor (1-|theta|^2)^2/4 and retract the result
/// into the unit ball, so every post-step tensor norm stays < 1. Adam kinds
/// keep decoupled weight decay out of the moment accumulators.
class Optimizer {
  public:
    Optimizer(OptimKind kind, OptimizerConfig config);

    /// Sizes the moment buffers. For hyperbolic kinds each tensor is pulled
    /// into the ball once, by dividing by max(1, |tensor| / (1 - proj_eps)).
    void register_params(std::vector<ParamTensor>& params);

    /// One update over all tensors. Shape mismatches raise
    /// std::invalid_argument; non-finite gradients raise std::runtime_error
    /// naming the tensor index.
    void step(std::vector<ParamTensor>& params, const std::vector<ParamTensor>& grads);

    OptimKind kind() const { return kind_; }
    const OptimizerConfig& config() const { return config_; }
    const OptimizerState& state() const { return state_; }

  private:
    OptimKind kind_;
    OptimizerConfig config_;
    OptimizerState state_;
    bool registered_ = false;
    std::vector<double> scratch_;
};

}  // namespace popt
