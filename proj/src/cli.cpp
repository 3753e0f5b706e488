#include "popt/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "popt/bench.hpp"
#include "popt/records.hpp"

namespace popt {

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("POINCARE_OPT_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

std::string trim(const std::string& s) {
    std::size_t lo = s.find_first_not_of(" \t\r");
    if (lo == std::string::npos) return "";
    std::size_t hi = s.find_last_not_of(" \t\r");
    return s.substr(lo, hi - lo + 1);
}

/// Flat key=value config file, one pair per line, '#' comments. Returned
/// as option tokens injected ahead of the explicit flags, which therefore
/// override the file.
std::vector<std::string> config_file_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::vector<std::string> tokens;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        " of " + path + " is not key=value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config: empty key on line " + std::to_string(line_no) +
                                        " of " + path);
        }
        tokens.push_back("--" + key);
        tokens.push_back(value);
    }
    return tokens;
}

std::vector<RunRecord> history_records(const std::vector<EpochStats>& history,
                                       const std::string& run_id, const std::string& label,
                                       std::uint64_t seed) {
    std::vector<RunRecord> out;
    out.reserve(history.size());
    for (const auto& row : history) {
        RunRecord r;
        r.run_id = run_id;
        r.config_label = label;
        r.epoch = static_cast<std::int64_t>(row.epoch);
        r.loss = row.loss;
        r.metric = row.metric;
        r.wall_ms = row.wall_ms;
        r.seed = seed;
        out.push_back(std::move(r));
    }
    return out;
}

struct TrainArgs {
    std::string dataset = "gaussian_mixture";
    std::size_t n_points = 1000;
    std::string optimizer = "adamw";
    std::string t_sampler = "linear";
    std::string loss = "mse";
    double lr = 1e-3;
    double weight_decay = 0.0;
    std::size_t epochs = 300;
    std::size_t batch_size = 128;
    std::size_t train_timesteps = 200;
    std::size_t inference_steps = 200;
    std::uint64_t seed = 0;
    std::size_t metric_every = 0;
    std::size_t metric_samples = 256;
    std::string out = "train_records.csv";
    std::string format = "csv";
    std::string label;
    std::string save_model;
};

TrainRunConfig to_config(const TrainArgs& a) {
    TrainRunConfig cfg;
    cfg.optimizer = optim_kind_from_string(a.optimizer);
    cfg.t_sampler = sampler_kind_from_string(a.t_sampler);
    cfg.loss = loss_kind_from_string(a.loss);
    cfg.lr = a.lr;
    cfg.weight_decay = a.weight_decay;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.train_timesteps = a.train_timesteps;
    cfg.inference_steps = a.inference_steps;
    cfg.seed = a.seed;
    cfg.validate();
    return cfg;
}

int cmd_train(const TrainArgs& a) {
    TrainRunConfig cfg = to_config(a);
    ToyDataset data = make_dataset(dataset_kind_from_string(a.dataset), a.n_points, a.seed);

    std::string label = a.label.empty()
                            ? std::string(to_string(cfg.optimizer)) + "+" + to_string(cfg.t_sampler)
                            : a.label;
    TrainOutcome outcome = run_training(cfg, data, a.metric_every, a.metric_samples);

    std::string run_id = label + "-s" + std::to_string(a.seed);
    auto records = history_records(outcome.history, run_id, label, a.seed);
    write_records(records, a.out, record_format_from_string(a.format));

    if (!a.save_model.empty()) outcome.model.save(a.save_model);

    std::printf("train: %s epochs=%zu final_loss=%s -> %s\n", label.c_str(), cfg.epochs,
                format_real(outcome.history.back().loss).c_str(), a.out.c_str());
    return 0;
}

struct SampleArgs {
    std::string model;
    std::size_t n = 500;
    std::string t_sampler = "linear";
    std::size_t train_timesteps = 200;
    std::size_t inference_steps = 50;
    std::uint64_t seed = 0;
    std::string out = "samples.csv";
};

int cmd_sample(const SampleArgs& a) {
    Denoiser model = Denoiser::load(a.model);
    if (model.data_dim() != 2) {
        throw std::runtime_error("sample: checkpoint is not a 2-D model");
    }
    DiffusionSchedule schedule =
        make_schedule(a.train_timesteps, sampler_kind_from_string(a.t_sampler));
    std::vector<double> pts = generate_samples(model, schedule, a.n, a.inference_steps, a.seed);

    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw std::runtime_error("sample: cannot open " + a.out);
    out << "x,y\n";
    for (std::size_t i = 0; i < a.n; ++i) {
        out << format_real(pts[2 * i]) << ',' << format_real(pts[2 * i + 1]) << '\n';
    }
    std::printf("sample: n=%zu -> %s\n", a.n, a.out.c_str());
    return 0;
}

struct BenchArgs {
    std::string problem = "rosenbrock";
    std::size_t dim = 2;
    std::size_t steps = 200;
    double lr = 0.002;
    double adam_lr = 0.0002;
    std::uint64_t seed = 0;
    std::string out = "bench_records.csv";
    std::string format = "csv";
};

int cmd_bench(const BenchArgs& a) {
    TestProblem problem = problem_by_name(a.problem, a.dim);

    auto entry = [&](const char* label, OptimKind kind, double lr) {
        ComparisonEntry e;
        e.label = label;
        e.kind = kind;
        e.config.lr = lr;
        return e;
    };
    std::vector<ComparisonEntry> entries{
        entry("SGD", OptimKind::Sgd, a.lr),
        entry("HyperSGD", OptimKind::HyperSgd, a.lr),
        entry("AdamW", OptimKind::AdamW, a.adam_lr),
        entry("HyperAdamW", OptimKind::HyperAdamW, a.adam_lr),
    };

    auto start = std::chrono::steady_clock::now();
    auto trajectories = run_comparison(problem, entries, a.steps, a.seed);
    auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();

    std::vector<RunRecord> records;
    for (const auto& traj : trajectories) {
        for (std::size_t k = 0; k < traj.values.size(); ++k) {
            RunRecord r;
            r.run_id = traj.label + "-s" + std::to_string(a.seed);
            r.config_label = traj.label;
            r.epoch = static_cast<std::int64_t>(k + 1);
            r.loss = traj.values[k];
            r.wall_ms = wall;
            r.seed = a.seed;
            records.push_back(std::move(r));
        }
    }
    write_records(records, a.out, record_format_from_string(a.format));

    for (const auto& traj : trajectories) {
        std::printf("bench: %s steps=%zu%s final=%s\n", traj.label.c_str(), traj.values.size(),
                    traj.diverged ? " (diverged)" : "",
                    traj.values.empty() ? "-" : format_real(traj.values.back()).c_str());
    }
    std::printf("bench: wrote %zu records -> %s\n", records.size(), a.out.c_str());
    return 0;
}

struct EmbedArgs {
    std::size_t nodes = 15;
    std::size_t epochs = 500;
    std::string optimizer = "hyper_sgd";
    double lr = 0.1;
    std::size_t negatives = 5;
    std::uint64_t seed = 0;
    std::string out = "embed_records.csv";
    std::string format = "csv";
};

int cmd_embed(const EmbedArgs& a) {
    TreeTask task = make_balanced_binary_tree(a.nodes);
    task.negatives = a.negatives;

    OptimizerConfig cfg;
    cfg.lr = a.lr;
    auto start = std::chrono::steady_clock::now();
    EmbedOutcome outcome = embed_tree(task, optim_kind_from_string(a.optimizer), cfg, a.epochs, a.seed);
    auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();

    std::string label = a.optimizer + "+tree" + std::to_string(a.nodes);
    std::vector<RunRecord> records;
    for (std::size_t e = 0; e < outcome.loss_per_epoch.size(); ++e) {
        RunRecord r;
        r.run_id = label + "-s" + std::to_string(a.seed);
        r.config_label = label;
        r.epoch = static_cast<std::int64_t>(e + 1);
        r.loss = outcome.loss_per_epoch[e];
        if (e + 1 == outcome.loss_per_epoch.size()) r.metric = outcome.mean_distortion;
        r.wall_ms = wall;
        r.seed = a.seed;
        records.push_back(std::move(r));
    }
    write_records(records, a.out, record_format_from_string(a.format));

    std::printf("embed: nodes=%zu distortion=%s -> %s\n", a.nodes,
                format_real(outcome.mean_distortion).c_str(), a.out.c_str());
    return 0;
}

struct CompareArgs {
    int group = 1;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;
    std::size_t epochs = 0;  // 0 = group default
    std::string dataset = "gaussian_mixture";
    std::size_t n_points = 1000;
    std::size_t batch_size = 128;
    std::size_t train_timesteps = 200;
    std::size_t inference_steps = 200;
    std::size_t metric_every = 25;
    std::size_t metric_samples = 128;
    std::string out;  // prefix; default derived from group
    std::string format = "csv";
    bool aggregate = false;
};

int cmd_compare(const CompareArgs& a) {
    auto presets = compare_group_presets(a.group);
    if (a.replicates == 0) throw std::invalid_argument("compare: replicates must be >= 1");

    std::string prefix = a.out.empty() ? "compare_g" + std::to_string(a.group) : a.out;
    const char* ext = a.format == "json" ? ".json" : ".csv";

    ToyDataset data = make_dataset(dataset_kind_from_string(a.dataset), a.n_points, a.seed);

    std::vector<std::vector<RunRecord>> per_replicate;
    for (std::size_t rep = 0; rep < a.replicates; ++rep) {
        std::uint64_t run_seed = a.seed + rep;
        std::vector<RunRecord> records;
        for (const auto& preset : presets) {
            TrainRunConfig cfg;
            cfg.optimizer = preset.optimizer;
            cfg.t_sampler = preset.sampler;
            cfg.loss = preset.loss;
            cfg.lr = preset.lr;
            cfg.epochs = a.epochs == 0 ? preset.default_epochs : a.epochs;
            cfg.batch_size = a.batch_size;
            cfg.train_timesteps = a.train_timesteps;
            cfg.inference_steps = a.inference_steps;
            cfg.seed = run_seed;
            cfg.validate();

            TrainOutcome outcome = run_training(cfg, data, a.metric_every, a.metric_samples);
            std::string run_id = preset.label + "-r" + std::to_string(rep);
            auto rows = history_records(outcome.history, run_id, preset.label, run_seed);
            records.insert(records.end(), rows.begin(), rows.end());
        }
        std::string path = prefix + "_rep" + std::to_string(rep) + ext;
        write_records(records, path, record_format_from_string(a.format));
        std::printf("compare: group %d replicate %zu -> %s\n", a.group, rep, path.c_str());
        per_replicate.push_back(std::move(records));
    }

    if (a.aggregate) {
        std::string agg_path = prefix + "_agg.csv";
        write_aggregate(aggregate_records(per_replicate), agg_path);
        std::printf("compare: aggregate over %zu replicates -> %s\n", a.replicates,
                    agg_path.c_str());
    }
    return 0;
}

}  // namespace

std::vector<ComparePreset> compare_group_presets(int group) {
    if (group == 1) {
        return {
            {"SGD+LinearT", OptimKind::Sgd, SamplerKind::Linear, LossKind::Mse, 0.002, 500},
            {"HyperSGD+LinearT", OptimKind::HyperSgd, SamplerKind::Linear, LossKind::Mse, 0.002, 500},
            {"HyperSGD+HyperT", OptimKind::HyperSgd, SamplerKind::UnitHyperbola, LossKind::Mse, 0.002, 500},
        };
    }
    if (group == 2) {
        return {
            {"AdamW+LinearT", OptimKind::AdamW, SamplerKind::Linear, LossKind::Mse, 0.0002, 350},
            {"HyperAdamW+HyperT", OptimKind::HyperAdamW, SamplerKind::UnitHyperbola, LossKind::Mse, 0.0002, 350},
            {"HyperAdamW+HyperT+HyperLoss", OptimKind::HyperAdamW, SamplerKind::UnitHyperbola, LossKind::Poincare, 0.0002, 350},
        };
    }
    throw std::invalid_argument("compare: group must be 1 or 2");
}

int run_command(int argc, const char* const* argv) {
    CLI::App app{"Riemannian optimization on the Poincare ball, with a toy diffusion harness"};
    app.require_subcommand(1);

    std::uint64_t seed_default = default_seed();
    std::string config_path;

    TrainArgs train_args;
    train_args.seed = seed_default;
    CLI::App* train = app.add_subcommand("train", "Train the toy diffusion model");
    train->add_option("--config", config_path, "flat key=value config file");
    train->add_option("--dataset", train_args.dataset, "gaussian_mixture|two_moons|swiss_roll_2d");
    train->add_option("--n_points", train_args.n_points, "dataset size");
    train->add_option("--optimizer", train_args.optimizer, "sgd|hyper_sgd|adamw|hyper_adamw");
    train->add_option("--t_sampler", train_args.t_sampler, "linear|unit_hyperbola");
    train->add_option("--loss", train_args.loss, "mse|poincare");
    train->add_option("--lr", train_args.lr, "learning rate");
    train->add_option("--weight_decay", train_args.weight_decay, "decoupled weight decay");
    train->add_option("--epochs", train_args.epochs, "training epochs");
    train->add_option("--batch_size", train_args.batch_size, "minibatch size");
    train->add_option("--train_timesteps", train_args.train_timesteps, "diffusion steps T");
    train->add_option("--inference_steps", train_args.inference_steps, "reverse steps (<= T)");
    train->add_option("--seed", train_args.seed, "run seed (env POINCARE_OPT_SEED fallback)");
    train->add_option("--metric_every", train_args.metric_every,
                      "energy-distance cadence in epochs (0 = off)");
    train->add_option("--metric_samples", train_args.metric_samples, "samples per metric eval");
    train->add_option("--out", train_args.out, "records file");
    train->add_option("--format", train_args.format, "csv|json");
    train->add_option("--label", train_args.label, "config label override");
    train->add_option("--save_model", train_args.save_model, "checkpoint path");

    SampleArgs sample_args;
    sample_args.seed = seed_default;
    CLI::App* sample = app.add_subcommand("sample", "Generate from a saved checkpoint");
    sample->add_option("--config", config_path, "flat key=value config file");
    sample->add_option("--model", sample_args.model, "checkpoint path")->required();
    sample->add_option("--n", sample_args.n, "number of samples");
    sample->add_option("--t_sampler", sample_args.t_sampler, "linear|unit_hyperbola");
    sample->add_option("--train_timesteps", sample_args.train_timesteps, "diffusion steps T");
    sample->add_option("--inference_steps", sample_args.inference_steps, "reverse steps (<= T)");
    sample->add_option("--seed", sample_args.seed, "run seed");
    sample->add_option("--out", sample_args.out, "samples file");

    BenchArgs bench_args;
    bench_args.seed = seed_default;
    CLI::App* bench = app.add_subcommand("bench", "Optimizer comparison on analytic problems");
    bench->add_option("--config", config_path, "flat key=value config file");
    bench->add_option("--problem", bench_args.problem, "rosenbrock|quadratic");
    bench->add_option("--dim", bench_args.dim, "problem dimension");
    bench->add_option("--steps", bench_args.steps, "optimizer steps");
    bench->add_option("--lr", bench_args.lr, "learning rate for the SGD pair");
    bench->add_option("--adam_lr", bench_args.adam_lr, "learning rate for the AdamW pair");
    bench->add_option("--seed", bench_args.seed, "run seed");
    bench->add_option("--out", bench_args.out, "records file");
    bench->add_option("--format", bench_args.format, "csv|json");

    EmbedArgs embed_args;
    embed_args.seed = seed_default;
    CLI::App* embed = app.add_subcommand("embed", "Balanced-tree embedding on the 2-D ball");
    embed->add_option("--config", config_path, "flat key=value config file");
    embed->add_option("--nodes", embed_args.nodes, "tree size");
    embed->add_option("--epochs", embed_args.epochs, "training epochs");
    embed->add_option("--optimizer", embed_args.optimizer, "sgd|hyper_sgd|adamw|hyper_adamw");
    embed->add_option("--lr", embed_args.lr, "learning rate");
    embed->add_option("--negatives", embed_args.negatives, "negative samples per edge");
    embed->add_option("--seed", embed_args.seed, "run seed");
    embed->add_option("--out", embed_args.out, "records file");
    embed->add_option("--format", embed_args.format, "csv|json");

    CompareArgs compare_args;
    compare_args.seed = seed_default;
    CLI::App* compare = app.add_subcommand("compare", "Preset optimizer-group sweeps");
    compare->add_option("--config", config_path, "flat key=value config file");
    compare->add_option("--group", compare_args.group, "1 (SGD family) or 2 (AdamW family)");
    compare->add_option("--replicates", compare_args.replicates, "independent runs");
    compare->add_option("--seed", compare_args.seed, "base seed; replicate r uses seed+r");
    compare->add_option("--epochs", compare_args.epochs, "override group default epochs");
    compare->add_option("--dataset", compare_args.dataset, "toy dataset name");
    compare->add_option("--n_points", compare_args.n_points, "dataset size");
    compare->add_option("--batch_size", compare_args.batch_size, "minibatch size");
    compare->add_option("--train_timesteps", compare_args.train_timesteps, "diffusion steps T");
    compare->add_option("--inference_steps", compare_args.inference_steps, "reverse steps (<= T)");
    compare->add_option("--metric_every", compare_args.metric_every, "energy-distance cadence");
    compare->add_option("--metric_samples", compare_args.metric_samples, "samples per metric eval");
    compare->add_option("--out", compare_args.out, "output file prefix");
    compare->add_option("--format", compare_args.format, "csv|json");
    compare->add_flag("--aggregate", compare_args.aggregate, "write mean/variance across replicates");

    // explicit flags must win over config-file values
    for (CLI::App* sub : {train, sample, bench, embed, compare}) {
        for (CLI::Option* opt : sub->get_options()) {
            opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        }
    }

    std::vector<std::string> tokens;
    tokens.reserve(static_cast<std::size_t>(argc));
    for (int i = 1; i < argc; ++i) tokens.emplace_back(argv[i]);

    try {
        // resolve --config up front and splice its pairs in right after the
        // subcommand name, ahead of the explicit flags
        std::string file;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (tokens[i] == "--config" && i + 1 < tokens.size()) file = tokens[i + 1];
            else if (tokens[i].rfind("--config=", 0) == 0) file = tokens[i].substr(9);
        }
        if (!file.empty() && !tokens.empty() && tokens.front().front() != '-') {
            auto injected = config_file_tokens(file);
            tokens.insert(tokens.begin() + 1, injected.begin(), injected.end());
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    }

    std::vector<const char*> parse_argv{argv[0]};
    for (const auto& t : tokens) parse_argv.push_back(t.c_str());

    try {
        app.parse(static_cast<int>(parse_argv.size()), parse_argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: usage: %s (run with --help)\n", e.what());
        return 2;
    }

    try {
        if (train->parsed()) return cmd_train(train_args);
        if (sample->parsed()) return cmd_sample(sample_args);
        if (bench->parsed()) return cmd_bench(bench_args);
        if (embed->parsed()) return cmd_embed(embed_args);
        if (compare->parsed()) return cmd_compare(compare_args);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: runtime: %s\n", e.what());
        return 1;
    }
    return 2;
}

}  // namespace popt
