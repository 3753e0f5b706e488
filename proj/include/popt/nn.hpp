#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "popt/tensor.hpp"

namespace popt {

/// Sinusoidal feature configuration: embed_dim/2 sine and embed_dim/2
/// cosine components at frequencies geometrically spaced from 1 down to
/// 1/max_period.
struct TimeEmbeddingConfig {
    std::size_t embed_dim = 32;
    double max_period = 1e4;
};

std::vector<double> time_embedding(double t, const TimeEmbeddingConfig& cfg);
void time_embedding_into(double t, const TimeEmbeddingConfig& cfg, double* out);

/// Feed-forward noise predictor. The input is the sample concatenated with
/// the sinusoidal embedding of its timestep; hidden layers use the exact
/// GELU x*Phi(x) = x/2 * (1 + erf(x/sqrt(2))), whose derivative
/// Phi(x) + x*phi(x) is smooth everywhere; the output layer is linear and
/// matches the sample width.
class Denoiser {
  public:
    Denoiser(std::size_t data_dim, std::vector<std::size_t> hidden_widths,
             TimeEmbeddingConfig embedding);

    /// The 2-128-128-2 configuration used by the toy diffusion harness.
    static Denoiser default_toy();

    /// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    void init_weights(std::uint64_t seed);

    /// Parameters in layer order: W0, b0, W1, b1, ... W[k x n] is stored
    /// row-major with shape {fan_in, fan_out}.
    std::vector<ParamTensor>& params() { return params_; }
    const std::vector<ParamTensor>& params() const { return params_; }

    std::size_t data_dim() const { return data_dim_; }
    std::size_t param_count() const;
    const TimeEmbeddingConfig& embedding() const { return embedding_; }

    /// x: batch x data_dim (flattened), t: one timestep per sample.
    /// Returns batch x data_dim.
    std::vector<double> forward(std::span<const double> x, std::span<const double> t,
                                std::size_t batch) const;

    /// Reverse-mode gradients for every weight and bias, aligned with
    /// params(), summed over the batch. upstream has the output's shape.
    std::vector<ParamTensor> backward(std::span<const double> x, std::span<const double> t,
                                      std::size_t batch,
                                      std::span<const double> upstream) const;

    /// Text checkpoint with a magic header and a shape manifest; numbers
    /// are written with 17 significant digits so reloads are bit-exact.
    void save(const std::filesystem::path& path) const;
    static Denoiser load(const std::filesystem::path& path);

  private:
    struct Workspace;
    void run_forward(std::span<const double> x, std::span<const double> t,
                     std::size_t batch, Workspace& ws) const;

    std::size_t data_dim_;
    std::vector<std::size_t> widths_;  // input, hidden..., output
    TimeEmbeddingConfig embedding_;
    std::vector<ParamTensor> params_;
};

}  // namespace popt
