#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace popt {

enum class SamplerKind { Linear, UnitHyperbola };

SamplerKind sampler_kind_from_string(std::string_view name);
const char* to_string(SamplerKind kind);

/// Descending integer timesteps [T-1, T-2, ..., 0] as reals.
std::vector<double> linear_timesteps(std::size_t total_timesteps);

/// Timesteps from the non-negative branch of the unit hyperbola:
/// T evenly spaced s in [1, sqrt(T^2+1)] mapped through t = sqrt(s^2 - 1),
/// returned descending. The endpoints are pinned to their closed-form
/// values T and 0, which the sqrt round trip does not always reproduce
/// bit-exactly.
std::vector<double> hyperbola_timesteps(std::size_t total_timesteps);

/// Noise schedule: beta sequence, cumulative alpha-bar table and the
/// sampler's timestep sequence (descending, possibly non-integer).
struct DiffusionSchedule {
    std::size_t total_timesteps = 0;  // T
    SamplerKind sampler = SamplerKind::Linear;
    std::vector<double> betas;       // length T, each in (0, 1)
    std::vector<double> alpha_bars;  // length T, strictly decreasing in (0, 1]
    std::vector<double> timesteps;   // length T, descending
};

inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;

DiffusionSchedule make_schedule(std::size_t total_timesteps, SamplerKind sampler,
                                double beta_start = kDefaultBetaStart,
                                double beta_end = kDefaultBetaEnd);

/// Continuous-timestep lookup into the discrete table: round to nearest,
/// clamped to [0, T-1]. Accepts 0 <= t <= T.
double alpha_bar_at(const DiffusionSchedule& schedule, double t);

/// Index form of the same lookup.
std::size_t timestep_index(const DiffusionSchedule& schedule, double t);

}  // namespace popt
