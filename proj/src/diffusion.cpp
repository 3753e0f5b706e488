#include "popt/diffusion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "popt/kernels.hpp"

namespace popt {

DatasetKind dataset_kind_from_string(std::string_view name) {
    if (name == "gaussian_mixture") return DatasetKind::GaussianMixture;
    if (name == "two_moons") return DatasetKind::TwoMoons;
    if (name == "swiss_roll_2d") return DatasetKind::SwissRoll2d;
    throw std::invalid_argument("unknown dataset: " + std::string(name));
}

const char* to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::GaussianMixture: return "gaussian_mixture";
        case DatasetKind::TwoMoons: return "two_moons";
        case DatasetKind::SwissRoll2d: return "swiss_roll_2d";
    }
    return "?";
}

namespace {
constexpr double kPi = 3.14159265358979323846;

void normalize_dataset(std::vector<double>& pts, std::size_t n) {
    if (n == 0) return;
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += pts[2 * i];
        mean_y += pts[2 * i + 1];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double msq_x = 0.0, msq_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        pts[2 * i] -= mean_x;
        pts[2 * i + 1] -= mean_y;
        msq_x += pts[2 * i] * pts[2 * i];
        msq_y += pts[2 * i + 1] * pts[2 * i + 1];
    }
    msq_x /= static_cast<double>(n);
    msq_y /= static_cast<double>(n);

    double worst = std::max(msq_x, msq_y);
    if (worst <= 0.0) return;  // degenerate cloud, nothing to scale
    double s = std::sqrt(0.5 / worst);
    for (auto& v : pts) v *= s;
}
}  // namespace

ToyDataset make_dataset(DatasetKind kind, std::size_t n, std::uint64_t seed) {
    ToyDataset out;
    out.kind = kind;
    out.n = n;
    out.seed = seed;
    out.points.resize(2 * n);

    Rng rng = Rng::stream(seed, seed_stream::kDataset);
    switch (kind) {
        case DatasetKind::GaussianMixture: {
            constexpr std::size_t kModes = 8;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t mode = static_cast<std::size_t>(rng.uniform_int(kModes));
                double angle = 2.0 * kPi * static_cast<double>(mode) / kModes;
                out.points[2 * i] = std::cos(angle) + 0.15 * rng.normal();
                out.points[2 * i + 1] = std::sin(angle) + 0.15 * rng.normal();
            }
            break;
        }
        case DatasetKind::TwoMoons: {
            for (std::size_t i = 0; i < n; ++i) {
                double phi = kPi * rng.uniform();
                double x, y;
                if (i % 2 == 0) {
                    x = std::cos(phi);
                    y = std::sin(phi);
                } else {
                    x = 1.0 - std::cos(phi);
                    y = 0.5 - std::sin(phi);
                }
                out.points[2 * i] = x + 0.05 * rng.normal();
                out.points[2 * i + 1] = y + 0.05 * rng.normal();
            }
            break;
        }
        case DatasetKind::SwissRoll2d: {
            for (std::size_t i = 0; i < n; ++i) {
                double theta = 1.5 * kPi * (1.0 + 2.0 * rng.uniform());
                double r = theta / (4.5 * kPi);
                out.points[2 * i] = r * std::cos(theta) + 0.01 * rng.normal();
                out.points[2 * i + 1] = r * std::sin(theta) + 0.01 * rng.normal();
            }
            break;
        }
    }
    normalize_dataset(out.points, n);
    return out;
}

void TrainRunConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("TrainRunConfig: lr must be > 0");
    if (weight_decay < 0.0) throw std::invalid_argument("TrainRunConfig: weight_decay must be >= 0");
    if (batch_size == 0) throw std::invalid_argument("TrainRunConfig: batch_size must be >= 1");
    if (train_timesteps == 0) throw std::invalid_argument("TrainRunConfig: train_timesteps must be >= 1");
    if (inference_steps == 0 || inference_steps > train_timesteps) {
        throw std::invalid_argument("TrainRunConfig: inference_steps must lie in [1, train_timesteps]");
    }
    if (!(loss_delta > 0.0)) throw std::invalid_argument("TrainRunConfig: loss_delta must be > 0");
}

OptimizerConfig TrainRunConfig::optimizer_config() const {
    OptimizerConfig oc;
    oc.lr = lr;
    oc.weight_decay = weight_decay;
    return oc;
}

std::vector<double> add_noise(std::span<const double> x0, std::span<const double> t,
                              const DiffusionSchedule& schedule,
                              std::span<const double> noise) {
    if (t.empty() || x0.size() % t.size() != 0 || x0.size() != noise.size()) {
        throw std::invalid_argument("add_noise: inconsistent batch shapes");
    }
    std::size_t batch = t.size();
    std::size_t dim = x0.size() / batch;
    std::vector<double> xt(x0.size());
    for (std::size_t s = 0; s < batch; ++s) {
        double abar = alpha_bar_at(schedule, t[s]);
        double c0 = std::sqrt(abar);
        double cn = std::sqrt(1.0 - abar);
        for (std::size_t i = 0; i < dim; ++i) {
            std::size_t k = s * dim + i;
            xt[k] = c0 * x0[k] + cn * noise[k];
        }
    }
    return xt;
}

LossOutput poincare_loss_masked(std::span<const double> pred, std::span<const double> target,
                                std::size_t batch, double delta) {
    if (pred.size() != target.size()) {
        throw std::invalid_argument("poincare_loss_masked: shape mismatch");
    }
    if (batch == 0 || pred.size() % batch != 0) {
        throw std::invalid_argument("poincare_loss_masked: array length not divisible by batch");
    }
    std::size_t len = pred.size() / batch;
    double inv_len = 1.0 / static_cast<double>(len);

    std::vector<std::size_t> valid;
    valid.reserve(batch);
    for (std::size_t s = 0; s < batch; ++s) {
        const double* p = pred.data() + s * len;
        const double* t = target.data() + s * len;
        double msq_p = 0.0, msq_t = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            msq_p += p[i] * p[i];
            msq_t += t[i] * t[i];
        }
        msq_p *= inv_len;
        msq_t *= inv_len;
        if ((1.0 - msq_p) * (1.0 - msq_t) + delta > 0.0) valid.push_back(s);
    }

    LossOutput out;
    out.grad.assign(pred.size(), 0.0);
    if (valid.empty()) return out;

    std::vector<double> cp(valid.size() * len), ct(valid.size() * len);
    for (std::size_t k = 0; k < valid.size(); ++k) {
        std::copy_n(pred.data() + valid[k] * len, len, cp.data() + k * len);
        std::copy_n(target.data() + valid[k] * len, len, ct.data() + k * len);
    }
    LossOutput inner = poincare_loss(cp, ct, valid.size(), delta);
    out.value = inner.value;
    for (std::size_t k = 0; k < valid.size(); ++k) {
        std::copy_n(inner.grad.data() + k * len, len, out.grad.data() + valid[k] * len);
    }
    return out;
}

double evaluate_epoch_loss(const Denoiser& model, const ToyDataset& data,
                           const TrainRunConfig& cfg, const DiffusionSchedule& schedule,
                           Rng& rng) {
    if (data.n == 0) throw std::invalid_argument("evaluate_epoch_loss: empty dataset");
    const std::size_t dim = data.points.size() / data.n;

    std::vector<double> x0, tsteps, noise;
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < data.n; start += cfg.batch_size) {
        std::size_t b = std::min(cfg.batch_size, data.n - start);
        x0.assign(data.points.begin() + start * dim, data.points.begin() + (start + b) * dim);
        tsteps.resize(b);
        noise.resize(b * dim);
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
        loss_sum += lo.value;
        batches += 1;
    }
    return loss_sum / static_cast<double>(batches);
}

std::vector<double> generate_samples(const Denoiser& model, const DiffusionSchedule& schedule,
                                     std::size_t n, std::size_t inference_steps,
                                     std::uint64_t seed) {
    std::size_t total = schedule.total_timesteps;
    if (inference_steps == 0 || inference_steps > total) {
        throw std::invalid_argument("generate_samples: inference_steps must lie in [1, T]");
    }
    std::size_t dim = model.data_dim();
    if (n == 0) return {};

    // uniform stride over the descending sampler sequence, both ends kept
    std::vector<std::size_t> picks(inference_steps);
    for (std::size_t k = 0; k < inference_steps; ++k) {
        picks[k] = inference_steps == 1
                       ? 0
                       : static_cast<std::size_t>(std::llround(
                             static_cast<double>(k) * static_cast<double>(total - 1) /
                             static_cast<double>(inference_steps - 1)));
    }

    Rng rng = Rng::stream(seed, seed_stream::kSample);
    std::vector<double> x(n * dim);
    rng.fill_normal(x);

    std::vector<double> tcol(n), x0_hat(n * dim), z(n * dim);
    for (std::size_t k = 0; k < inference_steps; ++k) {
        double tau = schedule.timesteps[picks[k]];
        std::size_t j = timestep_index(schedule, tau);
        double abar = schedule.alpha_bars[j];

        std::fill(tcol.begin(), tcol.end(), tau);
        std::vector<double> pred = model.forward(x, tcol, n);

        double inv_sqrt_abar = 1.0 / std::sqrt(abar);
        double noise_coef = std::sqrt(1.0 - abar);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x0_hat[i] = (x[i] - noise_coef * pred[i]) * inv_sqrt_abar;
        }

        if (k + 1 == inference_steps) {
            x = x0_hat;
        } else {
            std::size_t j_next = timestep_index(schedule, schedule.timesteps[picks[k + 1]]);
            double abar_next = schedule.alpha_bars[j_next];
            if (j_next == j) continue;  // duplicate rounded index, no transition
            double beta_eff = 1.0 - abar / abar_next;
            double post_var = (1.0 - abar_next) / (1.0 - abar) * beta_eff;
            double coef_x0 = std::sqrt(abar_next) * beta_eff / (1.0 - abar);
            double coef_x = std::sqrt(abar / abar_next) * (1.0 - abar_next) / (1.0 - abar);
            double sigma = std::sqrt(post_var);
            rng.fill_normal(z);
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] = coef_x0 * x0_hat[i] + coef_x * x[i] + sigma * z[i];
            }
        }
        if (!kernels::all_finite(x)) {
            throw std::runtime_error("generate_samples: non-finite value at reverse step " +
                                     std::to_string(k));
        }
    }
    return x;
}

double energy_distance(std::span<const double> a, std::size_t na,
                       std::span<const double> b, std::size_t nb, std::size_t dim) {
    if (na == 0 || nb == 0) throw std::invalid_argument("energy_distance: empty batch");
    if (a.size() != na * dim || b.size() != nb * dim) {
        throw std::invalid_argument("energy_distance: batch sizes do not match dim");
    }
    // the cross sum is accumulated in both orientations; their (commutative)
    // sum makes the statistic exactly symmetric under argument swap
    double s_ab = kernels::pairwise_distance_sum(a.data(), na, b.data(), nb, dim);
    double s_ba = kernels::pairwise_distance_sum(b.data(), nb, a.data(), na, dim);
    double s_aa = kernels::pairwise_distance_sum(a.data(), na, a.data(), na, dim);
    double s_bb = kernels::pairwise_distance_sum(b.data(), nb, b.data(), nb, dim);
    double cross = (s_ab + s_ba) / (static_cast<double>(na) * static_cast<double>(nb));
    double m_aa = s_aa / (static_cast<double>(na) * static_cast<double>(na));
    double m_bb = s_bb / (static_cast<double>(nb) * static_cast<double>(nb));
    return cross - (m_aa + m_bb);
}

TrainOutcome run_training(const TrainRunConfig& cfg, const ToyDataset& data,
                          std::size_t metric_every, std::size_t metric_samples) {
    cfg.validate();
    using clock = std::chrono::steady_clock;
    auto start_time = clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - start_time)
            .count();
    };

    DiffusionSchedule schedule = make_schedule(cfg.train_timesteps, cfg.t_sampler);

    Denoiser model = Denoiser::default_toy();
    model.init_weights(Rng::stream(cfg.seed, seed_stream::kInit).next_u64());

    Optimizer opt(cfg.optimizer, cfg.optimizer_config());
    opt.register_params(model.params());

    auto max_norm = [&] {
        double worst = 0.0;
        for (const auto& p : model.params()) {
            worst = std::max(worst, std::sqrt(kernels::sumsq(p.view())));
        }
        return worst;
    };
    // one fixed generation seed per run keeps the metric comparable across epochs
    std::uint64_t metric_seed = Rng::stream(cfg.seed, seed_stream::kEval).next_u64();
    auto metric_now = [&]() -> double {
        std::vector<double> gen =
            generate_samples(model, schedule, metric_samples, cfg.inference_steps, metric_seed);
        return energy_distance(gen, metric_samples, data.points, data.n);
    };

    std::vector<EpochStats> history;
    Rng eval_rng = Rng::stream(cfg.seed, seed_stream::kEval);
    EpochStats initial;
    initial.epoch = 0;
    initial.loss = evaluate_epoch_loss(model, data, cfg, schedule, eval_rng);
    if (metric_every > 0 && metric_samples > 0) initial.metric = metric_now();
    initial.max_param_norm = max_norm();
    initial.wall_ms = elapsed_ms();
    history.push_back(initial);

    Rng train_rng = Rng::stream(cfg.seed, seed_stream::kTrain);
    for (std::size_t e = 1; e <= cfg.epochs; ++e) {
        EpochStats row;
        row.epoch = e;
        row.loss = train_epoch(model, data, cfg, schedule, opt, train_rng);
        row.max_param_norm = max_norm();
        bool metric_due = metric_every > 0 && metric_samples > 0 &&
                          (e % metric_every == 0 || e == cfg.epochs);
        if (metric_due) row.metric = metric_now();
        row.wall_ms = elapsed_ms();
        history.push_back(row);
    }
    return TrainOutcome{std::move(history), std::move(model)};
}

}  // namespace popt
