#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "popt/bench.hpp"
#include "popt/kernels.hpp"
#include "popt/rng.hpp"
#include "testing_util.hpp"

using namespace popt;
using popt::testing::central_differences;
using popt::testing::max_rel_err;

TEST_CASE("rosenbrock values and gradient") {
    TestProblem p = make_rosenbrock(2);
    std::vector<double> opt{1.0, 1.0};
    CHECK(p.objective(opt) == 0.0);
    auto g_opt = p.gradient(opt);
    CHECK(g_opt[0] == 0.0);
    CHECK(g_opt[1] == 0.0);

    std::vector<double> zero{0.0, 0.0};
    CHECK(p.objective(zero) == doctest::Approx(1.0));
    auto g_zero = p.gradient(zero);
    CHECK(g_zero[0] == doctest::Approx(-2.0));
    CHECK(g_zero[1] == 0.0);

    CHECK_THROWS_AS(make_rosenbrock(1), std::invalid_argument);
}

TEST_CASE("problem gradients match finite differences") {
    Rng rng(606);
    for (std::size_t dim : {std::size_t{2}, std::size_t{5}}) {
        for (const char* name : {"rosenbrock", "quadratic"}) {
            TestProblem p = problem_by_name(name, dim);
            std::vector<double> x(dim);
            for (auto& v : x) v = rng.uniform(-1.5, 1.5);
            auto g = p.gradient(x);
            auto fd = central_differences(
                [&](std::span<const double> q) { return p.objective(q); }, x);
            CHECK(max_rel_err(g, fd, 1e-4) <= 1e-6);
        }
    }
    CHECK_THROWS_AS(problem_by_name("ackley", 2), std::invalid_argument);
}

TEST_CASE("run_comparison: quadratic closed form and determinism") {
    TestProblem quad = make_quadratic(1);
    ComparisonEntry sgd{"SGD", OptimKind::Sgd, {}};
    sgd.config.lr = 0.1;

    auto trajs = run_comparison(quad, {sgd, sgd}, 100, 7);
    REQUIRE(trajs.size() == 2);
    REQUIRE(trajs[0].values.size() == 100);
    CHECK_FALSE(trajs[0].diverged);

    // theta_k = 0.8^k from theta_0 = 1, so the final value is 0.8^200
    CHECK(trajs[0].values.back() ==
          doctest::Approx(std::pow(0.8, 200)).epsilon(1e-10));
    CHECK(trajs[0].values == trajs[1].values);  // identical config, identical trajectory
}

TEST_CASE("run_comparison: monotone decrease for stable sgd on the quadratic") {
    TestProblem quad = make_quadratic(3);
    ComparisonEntry sgd{"SGD", OptimKind::Sgd, {}};
    sgd.config.lr = 0.3;  // below the 2/L = 1 stability bound

    auto trajs = run_comparison(quad, {sgd}, 50, 0);
    double prev = quad.objective(quad.start);
    for (double v : trajs[0].values) {
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("run_comparison: hyperbolic iterates stay inside the ball") {
    TestProblem quad = make_quadratic(2);
    quad.start = {0.5, 0.5};
    ComparisonEntry hyper{"HyperSGD", OptimKind::HyperSgd, {}};
    hyper.config.lr = 0.5;

    auto trajs = run_comparison(quad, {hyper}, 200, 0);
    CHECK_FALSE(trajs[0].diverged);
    for (double v : trajs[0].values) {
        CHECK(v < 1.0);  // objective equals |theta|^2, so the ball bound shows directly
    }
    CHECK(trajs[0].values.back() < trajs[0].values.front());
}

TEST_CASE("run_comparison: divergence truncates instead of throwing") {
    TestProblem quad = make_quadratic(1);
    ComparisonEntry wild{"SGD", OptimKind::Sgd, {}};
    wild.config.lr = 10.0;  // theta multiplies by -19 every step

    auto trajs = run_comparison(quad, {wild}, 1000, 0);
    CHECK(trajs[0].diverged);
    CHECK(trajs[0].values.size() < 1000);
    for (double v : trajs[0].values) CHECK(std::isfinite(v));
}

TEST_CASE("balanced binary tree construction") {
    TreeTask t1 = make_balanced_binary_tree(1);
    CHECK(t1.edges.empty());
    TreeTask t15 = make_balanced_binary_tree(15);
    CHECK(t15.edges.size() == 14);
    // every node except the root appears exactly once as a child
    std::vector<int> child_count(15, 0);
    for (auto [p, c] : t15.edges) {
        CHECK(p < 15);
        child_count[c] += 1;
    }
    CHECK(child_count[0] == 0);
    for (std::size_t i = 1; i < 15; ++i) CHECK(child_count[i] == 1);
}

TEST_CASE("embed_tree: single node is vacuous") {
    TreeTask task = make_balanced_binary_tree(1);
    EmbedOutcome out = embed_tree(task, OptimKind::HyperSgd, {}, 10, 3);
    CHECK(out.mean_distortion == 0.0);
    CHECK(out.embeddings.size() == 1);
}

TEST_CASE("embed_tree: two nodes satisfy the single constraint exactly") {
    TreeTask task = make_balanced_binary_tree(2);
    OptimizerConfig cfg;
    cfg.lr = 0.1;
    EmbedOutcome out = embed_tree(task, OptimKind::HyperSgd, cfg, 100, 3);

    double d = poincare_distance(BallPoint{out.embeddings[0].data},
                                 BallPoint{out.embeddings[1].data});
    CHECK(std::fabs(out.fitted_scale * d - 1.0) <= 0.1);
    CHECK(out.mean_distortion <= 0.1);
}

TEST_CASE("embed_tree: training reduces the contrastive loss on 15 nodes") {
    TreeTask task = make_balanced_binary_tree(15);
    OptimizerConfig cfg;
    cfg.lr = 0.1;
    EmbedOutcome out = embed_tree(task, OptimKind::HyperSgd, cfg, 500, 11);

    REQUIRE(out.loss_per_epoch.size() == 500);
    CHECK(out.loss_per_epoch.back() < out.loss_per_epoch.front());
    for (const auto& e : out.embeddings) {
        CHECK(std::sqrt(kernels::sumsq(e.view())) < 1.0);
    }
    CHECK(out.mean_distortion >= 0.0);
    CHECK(std::isfinite(out.mean_distortion));
}

TEST_CASE("embed_tree rejects a non-tree edge list") {
    TreeTask task = make_balanced_binary_tree(4);
    task.edges.pop_back();
    CHECK_THROWS_AS(embed_tree(task, OptimKind::HyperSgd, {}, 5, 0), std::invalid_argument);
}
