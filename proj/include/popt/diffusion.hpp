#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "popt/losses.hpp"
#include "popt/nn.hpp"
#include "popt/optim.hpp"
#include "popt/rng.hpp"
#include "popt/schedule.hpp"

namespace popt {

enum class DatasetKind { GaussianMixture, TwoMoons, SwissRoll2d };

DatasetKind dataset_kind_from_string(std::string_view name);
const char* to_string(DatasetKind kind);

/// 2-D point cloud, affinely normalized so each coordinate's mean square
/// is at most 0.5. The bound keeps the hyperbolic loss denominators
/// positive with margin for in-distribution values.
struct ToyDataset {
    DatasetKind kind = DatasetKind::GaussianMixture;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<double> points;  // n x 2, row-major
};

ToyDataset make_dataset(DatasetKind kind, std::size_t n, std::uint64_t seed);

/// One toy training run, fully determined by its fields plus a seed.
struct TrainRunConfig {
    OptimKind optimizer = OptimKind::AdamW;
    SamplerKind t_sampler = SamplerKind::Linear;
    LossKind loss = LossKind::Mse;
    double lr = 1e-3;
    double weight_decay = 0.0;
    std::size_t epochs = 300;
    std::size_t batch_size = 128;
    std::size_t train_timesteps = 200;
    std::size_t inference_steps = 200;
    std::uint64_t seed = 0;
    double loss_delta = kDefaultLossDelta;

    void validate() const;
    OptimizerConfig optimizer_config() const;
};

// Substream ids carved out of one run seed.
namespace seed_stream {
inline constexpr std::uint64_t kDataset = 1;
inline constexpr std::uint64_t kInit = 2;
inline constexpr std::uint64_t kTrain = 3;
inline constexpr std::uint64_t kSample = 4;
inline constexpr std::uint64_t kEval = 5;
}  // namespace seed_stream

/// Forward noising x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) noise, with one
/// (possibly non-integer) timestep per sample.
std::vector<double> add_noise(std::span<const double> x0, std::span<const double> t,
                              const DiffusionSchedule& schedule,
                              std::span<const double> noise);

/// Hyperbolic loss over the samples where it is defined: samples whose
/// prediction or target mean square leaves the unit ball (guarded
/// denominator <= 0) contribute zero value and zero gradient, and the value
/// is averaged over the remaining ones. Standard-normal noise targets land
/// outside the ball with sizable probability at small sample widths, so the
/// training loop must not abort on them.
LossOutput poincare_loss_masked(std::span<const double> pred, std::span<const double> target,
                                std::size_t batch, double delta);

/// One pass over the shuffled dataset: per minibatch draw timesteps
/// uniformly from the sampler's value sequence, noise the batch, predict,
/// evaluate the configured loss, backpropagate and step the optimizer.
/// Returns the mean minibatch loss. Deterministic for a given rng state.
template <class Model>
double train_epoch(Model& model, const ToyDataset& data, const TrainRunConfig& cfg,
                   const DiffusionSchedule& schedule, Optimizer& opt, Rng& rng) {
    if (data.n == 0) throw std::invalid_argument("train_epoch: empty dataset");
    const std::size_t dim = data.points.size() / data.n;

    std::vector<std::size_t> order(data.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::vector<double> x0, tsteps, noise;
    double loss_sum = 0.0;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < data.n; start += cfg.batch_size) {
        std::size_t b = std::min(cfg.batch_size, data.n - start);
        x0.resize(b * dim);
        tsteps.resize(b);
        noise.resize(b * dim);
        for (std::size_t s = 0; s < b; ++s) {
            const double* src = data.points.data() + order[start + s] * dim;
            for (std::size_t i = 0; i < dim; ++i) x0[s * dim + i] = src[i];
        }
        for (std::size_t s = 0; s < b; ++s) {
            std::size_t pick = static_cast<std::size_t>(rng.uniform_int(schedule.timesteps.size()));
            tsteps[s] = schedule.timesteps[pick];
        }
        rng.fill_normal(noise);

        std::vector<double> xt = add_noise(x0, tsteps, schedule, noise);
        std::vector<double> pred = model.forward(xt, tsteps, b);
        LossOutput lo = cfg.loss == LossKind::Mse
                            ? mse_loss(pred, noise)
                            : poincare_loss_masked(pred, noise, b, cfg.loss_delta);
        if (!std::isfinite(lo.value)) {
            throw std::runtime_error("train_epoch: non-finite " + std::string(to_string(cfg.loss)) +
                                     " loss at batch " + std::to_string(batches));
        }
        std::vector<ParamTensor> grads = model.backward(xt, tsteps, b, lo.grad);
        opt.step(model.params(), grads);

        loss_sum += lo.value;
        batches += 1;
    }
    return loss_sum / static_cast<double>(batches);
}

/// Forward-only flavor of the same pass (no shuffling, no updates); used
/// for the pre-training loss row of a run trace.
double evaluate_epoch_loss(const Denoiser& model, const ToyDataset& data,
                           const TrainRunConfig& cfg, const DiffusionSchedule& schedule,
                           Rng& rng);

/// Ancestral reverse diffusion from standard normal noise over a
/// stride-subsampled descending timestep sequence. Returns n samples of the
/// model's data width; deterministic per seed.
std::vector<double> generate_samples(const Denoiser& model, const DiffusionSchedule& schedule,
                                     std::size_t n, std::size_t inference_steps,
                                     std::uint64_t seed);

/// Two-sample energy distance 2 E|x-y| - E|x-x'| - E|y-y'| over all pairs
/// (V-statistic). Nonnegative, zero for identical point sets.
double energy_distance(std::span<const double> a, std::size_t na,
                       std::span<const double> b, std::size_t nb, std::size_t dim = 2);

struct EpochStats {
    std::size_t epoch = 0;  // 0 = before training
    double loss = 0.0;
    std::optional<double> metric;  // energy distance vs the training set
    double max_param_norm = 0.0;
    std::int64_t wall_ms = 0;
};

struct TrainOutcome {
    std::vector<EpochStats> history;
    Denoiser model;
};

/// Full training run: model init, per-epoch training, optional metric
/// cadence (epoch 0, every metric_every epochs, and the final epoch).
TrainOutcome run_training(const TrainRunConfig& cfg, const ToyDataset& data,
                          std::size_t metric_every = 0, std::size_t metric_samples = 256);

}  // namespace popt
