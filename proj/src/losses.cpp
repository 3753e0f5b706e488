#include "popt/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "popt/geometry.hpp"

namespace popt {

LossKind loss_kind_from_string(std::string_view name) {
    if (name == "mse") return LossKind::Mse;
    if (name == "poincare") return LossKind::Poincare;
    throw std::invalid_argument("unknown loss kind: " + std::string(name));
}

const char* to_string(LossKind kind) {
    return kind == LossKind::Mse ? "mse" : "poincare";
}

LossOutput mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) {
        throw std::invalid_argument("mse_loss: shape mismatch");
    }
    std::size_t n = pred.size();
    LossOutput out;
    out.grad.resize(n);
    if (n == 0) return out;

    double acc = 0.0;
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double r = target[i] - pred[i];
        acc += r * r;
        out.grad[i] = 2.0 * (pred[i] - target[i]) * inv_n;
    }
    out.value = acc * inv_n;
    return out;
}

LossOutput poincare_loss(std::span<const double> pred, std::span<const double> target,
                         std::size_t batch, double delta) {
    if (pred.size() != target.size()) {
        throw std::invalid_argument("poincare_loss: shape mismatch");
    }
    if (batch == 0 || pred.size() % batch != 0) {
        throw std::invalid_argument("poincare_loss: array length not divisible by batch");
    }
    std::size_t sample_len = pred.size() / batch;
    double inv_len = 1.0 / static_cast<double>(sample_len);
    double inv_batch = 1.0 / static_cast<double>(batch);

    LossOutput out;
    out.grad.assign(pred.size(), 0.0);

    double total = 0.0;
    for (std::size_t s = 0; s < batch; ++s) {
        const double* p = pred.data() + s * sample_len;
        const double* t = target.data() + s * sample_len;

        double msq_res = 0.0, msq_p = 0.0, msq_t = 0.0;
        for (std::size_t i = 0; i < sample_len; ++i) {
            double r = p[i] - t[i];
            msq_res += r * r;
            msq_p += p[i] * p[i];
            msq_t += t[i] * t[i];
        }
        msq_res *= inv_len;
        msq_p *= inv_len;
        msq_t *= inv_len;

        double den = (1.0 - msq_p) * (1.0 - msq_t) + delta;
        if (den <= 0.0) {
            const char* which = msq_p >= 1.0 ? "prediction" : "target";
            throw std::domain_error(
                "poincare_loss: sample " + std::to_string(s) + " leaves the unit ball (" +
                which + " mean-square " + std::to_string(msq_p >= 1.0 ? msq_p : msq_t) + ")");
        }

        double a = 1.0 + 2.0 * msq_res / den;
        if (a <= 1.0) {
            // clamp binds (coincident sample): value 0, gradient 0
            continue;
        }
        total += arcosh(a);

        double darc = 1.0 / std::sqrt(a * a - 1.0);
        // dA/dp_i = (2/den^2) * [ d(msq_res)/dp_i * den + msq_res (1 - m(t)) d(msq_p)/dp_i ]
        double c_res = 2.0 / den;
        double c_norm = 2.0 * msq_res * (1.0 - msq_t) / (den * den);
        double* g = out.grad.data() + s * sample_len;
        for (std::size_t i = 0; i < sample_len; ++i) {
            double dres = 2.0 * (p[i] - t[i]) * inv_len;
            double dnp = 2.0 * p[i] * inv_len;
            g[i] = darc * (c_res * dres + c_norm * dnp) * inv_batch;
        }
    }
    out.value = total * inv_batch;
    return out;
}

LossOutput evaluate_loss(LossKind kind, std::span<const double> pred,
                         std::span<const double> target, std::size_t batch,
                         double delta) {
    if (kind == LossKind::Mse) return mse_loss(pred, target);
    return poincare_loss(pred, target, batch, delta);
}

}  // namespace popt
