#include "popt/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace popt {

SamplerKind sampler_kind_from_string(std::string_view name) {
    if (name == "linear") return SamplerKind::Linear;
    if (name == "unit_hyperbola") return SamplerKind::UnitHyperbola;
    throw std::invalid_argument("unknown timestep sampler: " + std::string(name));
}

const char* to_string(SamplerKind kind) {
    return kind == SamplerKind::Linear ? "linear" : "unit_hyperbola";
}

std::vector<double> linear_timesteps(std::size_t total_timesteps) {
    if (total_timesteps == 0) throw std::invalid_argument("linear_timesteps: T must be >= 1");
    std::vector<double> ts(total_timesteps);
    for (std::size_t i = 0; i < total_timesteps; ++i) {
        ts[i] = static_cast<double>(total_timesteps - 1 - i);
    }
    return ts;
}

std::vector<double> hyperbola_timesteps(std::size_t total_timesteps) {
    if (total_timesteps == 0) throw std::invalid_argument("hyperbola_timesteps: T must be >= 1");
    std::size_t n = total_timesteps;
    double t_max = static_cast<double>(n);
    std::vector<double> ts(n);
    if (n == 1) {
        ts[0] = 0.0;  // single point sits at s = 1
        return ts;
    }
    double s_end = std::sqrt(t_max * t_max + 1.0);
    double step = (s_end - 1.0) / static_cast<double>(n - 1);
    // filled ascending, emitted descending
    for (std::size_t i = 0; i < n; ++i) {
        double s = 1.0 + static_cast<double>(i) * step;
        ts[n - 1 - i] = std::sqrt(s * s - 1.0);
    }
    ts[0] = t_max;  // closed-form endpoints
    ts[n - 1] = 0.0;
    return ts;
}

DiffusionSchedule make_schedule(std::size_t total_timesteps, SamplerKind sampler,
                                double beta_start, double beta_end) {
    if (total_timesteps == 0) throw std::invalid_argument("make_schedule: T must be >= 1");
    if (beta_start <= 0.0 || beta_end >= 1.0 || beta_start > beta_end) {
        throw std::invalid_argument("make_schedule: betas must satisfy 0 < start <= end < 1");
    }

    DiffusionSchedule out;
    out.total_timesteps = total_timesteps;
    out.sampler = sampler;
    out.betas.resize(total_timesteps);
    out.alpha_bars.resize(total_timesteps);

    double span = beta_end - beta_start;
    double acc = 1.0;
    for (std::size_t i = 0; i < total_timesteps; ++i) {
        double frac = total_timesteps == 1
                          ? 0.0
                          : static_cast<double>(i) / static_cast<double>(total_timesteps - 1);
        out.betas[i] = beta_start + span * frac;
        acc *= 1.0 - out.betas[i];
        out.alpha_bars[i] = acc;
    }

    out.timesteps = sampler == SamplerKind::Linear ? linear_timesteps(total_timesteps)
                                                   : hyperbola_timesteps(total_timesteps);
    return out;
}

std::size_t timestep_index(const DiffusionSchedule& schedule, double t) {
    double t_max = static_cast<double>(schedule.total_timesteps);
    if (!(t >= 0.0) || t > t_max) {
        throw std::invalid_argument("timestep lookup out of range: t = " + std::to_string(t));
    }
    long long idx = std::llround(t);
    long long last = static_cast<long long>(schedule.total_timesteps) - 1;
    if (idx > last) idx = last;
    if (idx < 0) idx = 0;
    return static_cast<std::size_t>(idx);
}

double alpha_bar_at(const DiffusionSchedule& schedule, double t) {
    return schedule.alpha_bars[timestep_index(schedule, t)];
}

}  // namespace popt
