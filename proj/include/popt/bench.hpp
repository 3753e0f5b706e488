#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "popt/optim.hpp"

namespace popt {

/// Analytic objective with its gradient, known optimum and start point.
struct TestProblem {
    std::string name;
    std::size_t dim = 0;
    std::function<double(std::span<const double>)> objective;
    std::function<std::vector<double>(std::span<const double>)> gradient;
    double optimum_value = 0.0;
    std::vector<double> start;
};

/// Sum_i [100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2], the classic valley.
/// Requires dim >= 2.
TestProblem make_rosenbrock(std::size_t dim);

/// Sum_i x_i^2 with gradient 2x.
TestProblem make_quadratic(std::size_t dim);

TestProblem problem_by_name(std::string_view name, std::size_t dim);

struct ComparisonEntry {
    std::string label;
    OptimKind kind = OptimKind::Sgd;
    OptimizerConfig config;
};

/// Objective value after each step. A non-finite value truncates the
/// trajectory and sets `diverged` instead of aborting, so comparisons
/// between stable and unstable configurations still render.
struct Trajectory {
    std::string label;
    std::vector<double> values;  // values[k] = objective after step k+1
    bool diverged = false;
};

/// Runs every configuration from the problem's start point for `steps`
/// updates. Deterministic; the seed is carried through to record emission.
std::vector<Trajectory> run_comparison(const TestProblem& problem,
                                       const std::vector<ComparisonEntry>& entries,
                                       std::size_t steps, std::uint64_t seed);

/// Rooted balanced tree embedding task on the 2-D ball.
struct TreeTask {
    std::size_t node_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // parent, child
    std::size_t embed_dim = 2;
    std::size_t negatives = 5;
};

TreeTask make_balanced_binary_tree(std::size_t node_count);

struct EmbedOutcome {
    std::vector<ParamTensor> embeddings;  // node_count tensors of shape {embed_dim}
    std::vector<double> loss_per_epoch;   // contrastive loss, one value per epoch
    double mean_distortion = 0.0;
    double fitted_scale = 1.0;  // least-squares scale from embedding to hop distance
};

/// Contrastive embedding of the tree: per edge, the child is scored
/// against `negatives` uniformly sampled non-neighbors by softmax over
/// negated ball distances; one full-batch optimizer step per epoch.
/// Initialization is uniform in the radius-0.001 ball.
EmbedOutcome embed_tree(const TreeTask& task, OptimKind kind, OptimizerConfig config,
                        std::size_t epochs, std::uint64_t seed);

/// Mean relative disagreement between hop distance and scale-fitted
/// embedding distance over all node pairs. 0 for fewer than two nodes.
double tree_distortion(const TreeTask& task, const std::vector<ParamTensor>& embeddings,
                       double* fitted_scale = nullptr);

}  // namespace popt
