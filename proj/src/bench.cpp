#include "popt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "popt/geometry.hpp"
#include "popt/kernels.hpp"
#include "popt/rng.hpp"

namespace popt {

TestProblem make_rosenbrock(std::size_t dim) {
    if (dim < 2) throw std::invalid_argument("rosenbrock: dim must be >= 2");
    TestProblem p;
    p.name = "rosenbrock";
    p.dim = dim;
    p.optimum_value = 0.0;
    p.start.assign(dim, 0.0);  // in-ball start, usable by the hyperbolic kinds too
    p.objective = [](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            double a = x[i + 1] - x[i] * x[i];
            double b = 1.0 - x[i];
            v += 100.0 * a * a + b * b;
        }
        return v;
    };
    p.gradient = [](std::span<const double> x) {
        std::vector<double> g(x.size(), 0.0);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            double a = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * a;
        }
        return g;
    };
    return p;
}

TestProblem make_quadratic(std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("quadratic: dim must be >= 1");
    TestProblem p;
    p.name = "quadratic";
    p.dim = dim;
    p.optimum_value = 0.0;
    p.start.assign(dim, 1.0);
    p.objective = [](std::span<const double> x) {
        double v = 0.0;
        for (double xi : x) v += xi * xi;
        return v;
    };
    p.gradient = [](std::span<const double> x) {
        std::vector<double> g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i];
        return g;
    };
    return p;
}

TestProblem problem_by_name(std::string_view name, std::size_t dim) {
    if (name == "rosenbrock") return make_rosenbrock(dim);
    if (name == "quadratic") return make_quadratic(dim);
    throw std::invalid_argument("unknown problem: " + std::string(name));
}

std::vector<Trajectory> run_comparison(const TestProblem& problem,
                                       const std::vector<ComparisonEntry>& entries,
                                       std::size_t steps, std::uint64_t seed) {
    (void)seed;  // no stochastic element; kept for record emission by callers
    std::vector<Trajectory> out;
    out.reserve(entries.size());

    for (const auto& entry : entries) {
        entry.config.validate();
        Trajectory traj;
        traj.label = entry.label;

        std::vector<ParamTensor> params;
        params.emplace_back(std::vector<double>(problem.start), std::vector<std::size_t>{problem.dim});
        Optimizer opt(entry.kind, entry.config);
        opt.register_params(params);

        for (std::size_t k = 0; k < steps; ++k) {
            std::vector<double> g = problem.gradient(params[0].view());
            if (!kernels::all_finite(g)) {
                traj.diverged = true;
                break;
            }
            std::vector<ParamTensor> grads;
            grads.emplace_back(std::move(g), params[0].shape);
            opt.step(params, grads);

            double v = problem.objective(params[0].view());
            if (!std::isfinite(v)) {
                traj.diverged = true;
                break;
            }
            traj.values.push_back(v);
        }
        out.push_back(std::move(traj));
    }
    return out;
}

TreeTask make_balanced_binary_tree(std::size_t node_count) {
    TreeTask task;
    task.node_count = node_count;
    for (std::size_t i = 0; i < node_count; ++i) {
        std::size_t left = 2 * i + 1, right = 2 * i + 2;
        if (left < node_count) task.edges.emplace_back(i, left);
        if (right < node_count) task.edges.emplace_back(i, right);
    }
    return task;
}

namespace {

std::vector<std::vector<std::size_t>> hop_distances(const TreeTask& task) {
    std::size_t n = task.node_count;
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto [a, b] : task.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<std::vector<std::size_t>> dist(n, std::vector<std::size_t>(n, 0));
    for (std::size_t src = 0; src < n; ++src) {
        std::vector<bool> seen(n, false);
        std::deque<std::size_t> queue{src};
        seen[src] = true;
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v : adj[u]) {
                if (!seen[v]) {
                    seen[v] = true;
                    dist[src][v] = dist[src][u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return dist;
}

BallPoint as_point(const ParamTensor& t) { return BallPoint{t.data}; }

}  // namespace

double tree_distortion(const TreeTask& task, const std::vector<ParamTensor>& embeddings,
                       double* fitted_scale) {
    if (task.node_count < 2) {
        if (fitted_scale != nullptr) *fitted_scale = 1.0;
        return 0.0;
    }
    auto hops = hop_distances(task);

    double num = 0.0, den = 0.0;
    std::vector<double> emb_dist;
    std::vector<double> hop_dist;
    for (std::size_t i = 0; i < task.node_count; ++i) {
        for (std::size_t j = i + 1; j < task.node_count; ++j) {
            double de = poincare_distance(as_point(embeddings[i]), as_point(embeddings[j]));
            double dh = static_cast<double>(hops[i][j]);
            emb_dist.push_back(de);
            hop_dist.push_back(dh);
            num += de * dh;
            den += de * de;
        }
    }
    double scale = den > 0.0 ? num / den : 1.0;
    if (fitted_scale != nullptr) *fitted_scale = scale;

    double total = 0.0;
    for (std::size_t k = 0; k < emb_dist.size(); ++k) {
        total += std::fabs(scale * emb_dist[k] - hop_dist[k]) / hop_dist[k];
    }
    return total / static_cast<double>(emb_dist.size());
}

EmbedOutcome embed_tree(const TreeTask& task, OptimKind kind, OptimizerConfig config,
                        std::size_t epochs, std::uint64_t seed) {
    config.validate();
    std::size_t n = task.node_count;
    if (n == 0) throw std::invalid_argument("embed_tree: empty tree");
    if (!task.edges.empty() && task.edges.size() != n - 1) {
        throw std::invalid_argument("embed_tree: edge list is not a tree");
    }

    Rng rng = Rng::stream(seed, 0xe3b);
    EmbedOutcome out;
    out.embeddings.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // uniform in the radius-0.001 ball
        std::vector<double> coords(task.embed_dim);
        double r2;
        do {
            r2 = 0.0;
            for (auto& c : coords) {
                c = rng.uniform(-1.0, 1.0);
                r2 += c * c;
            }
        } while (r2 > 1.0);
        for (auto& c : coords) c *= 0.001;
        out.embeddings.emplace_back(std::move(coords),
                                    std::vector<std::size_t>{task.embed_dim});
    }

    Optimizer opt(kind, config);
    opt.register_params(out.embeddings);

    std::vector<std::vector<bool>> is_edge(n, std::vector<bool>(n, false));
    for (auto [a, b] : task.edges) {
        is_edge[a][b] = is_edge[b][a] = true;
    }
    std::vector<std::vector<std::size_t>> non_neighbors(n);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t w = 0; w < n; ++w) {
            if (w != u && !is_edge[u][w]) non_neighbors[u].push_back(w);
        }
    }

    for (std::size_t e = 0; e < epochs; ++e) {
        std::vector<ParamTensor> grads;
        grads.reserve(n);
        for (std::size_t i = 0; i < n; ++i) grads.push_back(ParamTensor::zeros({task.embed_dim}));

        double epoch_loss = 0.0;
        for (auto [u, v] : task.edges) {
            // candidate scores: the true child plus sampled non-neighbors
            std::vector<std::size_t> others{v};
            if (!non_neighbors[u].empty()) {
                for (std::size_t k = 0; k < task.negatives; ++k) {
                    std::size_t pick =
                        static_cast<std::size_t>(rng.uniform_int(non_neighbors[u].size()));
                    others.push_back(non_neighbors[u][pick]);
                }
            }

            std::vector<double> d(others.size());
            double shift = 0.0;
            for (std::size_t k = 0; k < others.size(); ++k) {
                d[k] = poincare_distance(as_point(out.embeddings[u]),
                                         as_point(out.embeddings[others[k]]));
                if (k == 0 || -d[k] > shift) shift = -d[k];
            }
            double z = 0.0;
            std::vector<double> p(others.size());
            for (std::size_t k = 0; k < others.size(); ++k) {
                p[k] = std::exp(-d[k] - shift);
                z += p[k];
            }
            for (auto& pk : p) pk /= z;
            epoch_loss += -std::log(std::max(p[0], 1e-300));

            // dL/dd[0] = 1 - p[0] pulls the edge together; dL/dd[k] = -p[k]
            // pushes the sampled non-neighbors apart
            for (std::size_t k = 0; k < others.size(); ++k) {
                double coef = k == 0 ? 1.0 - p[0] : -p[k];
                std::vector<double> gu = poincare_distance_grad_u(
                    as_point(out.embeddings[u]), as_point(out.embeddings[others[k]]));
                std::vector<double> gw = poincare_distance_grad_u(
                    as_point(out.embeddings[others[k]]), as_point(out.embeddings[u]));
                for (std::size_t c = 0; c < task.embed_dim; ++c) {
                    grads[u].data[c] += coef * gu[c];
                    grads[others[k]].data[c] += coef * gw[c];
                }
            }
        }

        if (!std::isfinite(epoch_loss)) {
            throw std::runtime_error("embed_tree: non-finite loss at epoch " + std::to_string(e));
        }
        out.loss_per_epoch.push_back(epoch_loss);
        if (!task.edges.empty()) opt.step(out.embeddings, grads);
    }

    out.mean_distortion = tree_distortion(task, out.embeddings, &out.fitted_scale);
    return out;
}

}  // namespace popt
