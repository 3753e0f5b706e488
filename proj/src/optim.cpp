#include "popt/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "popt/kernels.hpp"

namespace popt {

OptimKind optim_kind_from_string(std::string_view name) {
    if (name == "sgd") return OptimKind::Sgd;
    if (name == "hyper_sgd") return OptimKind::HyperSgd;
    if (name == "adamw") return OptimKind::AdamW;
    if (name == "hyper_adamw") return OptimKind::HyperAdamW;
    throw std::invalid_argument("unknown optimizer kind: " + std::string(name));
}

const char* to_string(OptimKind kind) {
    switch (kind) {
        case OptimKind::Sgd: return "sgd";
        case OptimKind::HyperSgd: return "hyper_sgd";
        case OptimKind::AdamW: return "adamw";
        case OptimKind::HyperAdamW: return "hyper_adamw";
    }
    return "?";
}

bool is_hyperbolic(OptimKind kind) {
    return kind == OptimKind::HyperSgd || kind == OptimKind::HyperAdamW;
}

bool is_adaptive(OptimKind kind) {
    return kind == OptimKind::AdamW || kind == OptimKind::HyperAdamW;
}

void OptimizerConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("OptimizerConfig: lr must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0) throw std::invalid_argument("OptimizerConfig: beta1 must be in [0, 1)");
    if (beta2 < 0.0 || beta2 >= 1.0) throw std::invalid_argument("OptimizerConfig: beta2 must be in [0, 1)");
    if (weight_decay < 0.0) throw std::invalid_argument("OptimizerConfig: weight_decay must be >= 0");
    if (!(adam_eps > 0.0)) throw std::invalid_argument("OptimizerConfig: adam_eps must be > 0");
    if (proj_eps <= 0.0 || proj_eps >= 1.0) throw std::invalid_argument("OptimizerConfig: proj_eps must be in (0, 1)");
}

Optimizer::Optimizer(OptimKind kind, OptimizerConfig config)
    : kind_(kind), config_(config) {
    config_.validate();
}

void Optimizer::register_params(std::vector<ParamTensor>& params) {
    state_.step_count = 0;
    state_.m.clear();
    state_.v.clear();
    if (is_adaptive(kind_)) {
        state_.m.reserve(params.size());
        state_.v.reserve(params.size());
        for (const auto& p : params) {
            state_.m.emplace_back(p.size(), 0.0);
            state_.v.emplace_back(p.size(), 0.0);
        }
    }
    if (is_hyperbolic(kind_)) {
        for (auto& p : params) {
            double norm = std::sqrt(kernels::sumsq(p.view()));
            double scale = std::max(1.0, norm / (1.0 - config_.proj_eps));
            if (scale > 1.0) kernels::scale(p.view(), 1.0 / scale);
        }
    }
    registered_ = true;
}

void Optimizer::step(std::vector<ParamTensor>& params, const std::vector<ParamTensor>& grads) {
    if (!registered_) throw std::logic_error("Optimizer: step before register_params");
    if (params.size() != grads.size()) {
        throw std::invalid_argument("Optimizer: params/grads list size mismatch");
    }
    if (is_adaptive(kind_) && state_.m.size() != params.size()) {
        throw std::invalid_argument("Optimizer: registered tensor count changed");
    }

    state_.step_count += 1;
    const double lr = config_.lr;
    const bool hyper = is_hyperbolic(kind_);
    const bool adam = is_adaptive(kind_);

    double bc1 = 1.0, bc2 = 1.0;
    if (adam) {
        double t = static_cast<double>(state_.step_count);
        bc1 = 1.0 - std::pow(config_.beta1, t);
        bc2 = 1.0 - std::pow(config_.beta2, t);
    }

    for (std::size_t idx = 0; idx < params.size(); ++idx) {
        ParamTensor& theta = params[idx];
        const ParamTensor& grad = grads[idx];
        if (!theta.same_shape(grad)) {
            throw std::invalid_argument("Optimizer: shape mismatch at tensor " + std::to_string(idx));
        }
        if (!kernels::all_finite(grad.view())) {
            throw std::runtime_error("Optimizer: non-finite gradient at tensor " + std::to_string(idx));
        }

        std::size_t n = theta.size();
        const double* g = grad.data.data();
        if (hyper && !config_.hook_identity_rescale) {
            double nsq = kernels::sumsq(theta.view());
            if (nsq >= 1.0) {
                // out-of-ball entry: retract first, as the update rule assumes
                project_in_place(theta.view(), config_.proj_eps);
                nsq = kernels::sumsq(theta.view());
            }
            double factor = (1.0 - nsq) * (1.0 - nsq) / 4.0;
            scratch_.resize(n);
            for (std::size_t i = 0; i < n; ++i) scratch_[i] = factor * g[i];
            g = scratch_.data();
        }

        double* th = theta.data.data();
        if (adam) {
            if (config_.weight_decay != 0.0) {
                double wd = lr * config_.weight_decay;
                for (std::size_t i = 0; i < n; ++i) th[i] -= wd * th[i];
            }
            double* m = state_.m[idx].data();
            double* v = state_.v[idx].data();
            const double b1 = config_.beta1, b2 = config_.beta2;
            for (std::size_t i = 0; i < n; ++i) {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                double mhat = m[i] / bc1;
                double vhat = v[i] / bc2;
                th[i] -= lr * mhat / (std::sqrt(vhat) + config_.adam_eps);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) th[i] -= lr * g[i];
        }

        if (hyper && !config_.hook_skip_projection) {
            project_in_place(theta.view(), config_.proj_eps);
        }
    }
}

}  // namespace popt
