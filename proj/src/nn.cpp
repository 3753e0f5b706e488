#include "popt/nn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "popt/kernels.hpp"
#include "popt/rng.hpp"

namespace popt {

std::vector<double> time_embedding(double t, const TimeEmbeddingConfig& cfg) {
    std::vector<double> out(cfg.embed_dim);
    time_embedding_into(t, cfg, out.data());
    return out;
}

void time_embedding_into(double t, const TimeEmbeddingConfig& cfg, double* out) {
    if (cfg.embed_dim == 0 || cfg.embed_dim % 2 != 0) {
        throw std::invalid_argument("time_embedding: embed_dim must be even and positive");
    }
    if (!(t >= 0.0)) {
        throw std::invalid_argument("time_embedding: t must be >= 0");
    }
    std::size_t half = cfg.embed_dim / 2;
    double log_period = std::log(cfg.max_period);
    for (std::size_t k = 0; k < half; ++k) {
        // frequencies run geometrically from 1 down to 1/max_period
        double frac = half == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(half - 1);
        double omega = std::exp(-log_period * frac);
        out[k] = std::sin(t * omega);
        out[half + k] = std::cos(t * omega);
    }
}

Denoiser::Denoiser(std::size_t data_dim, std::vector<std::size_t> hidden_widths,
                   TimeEmbeddingConfig embedding)
    : data_dim_(data_dim), embedding_(embedding) {
    if (data_dim == 0) throw std::invalid_argument("Denoiser: data_dim must be positive");
    if (embedding_.embed_dim % 2 != 0) {
        throw std::invalid_argument("Denoiser: embed_dim must be even");
    }
    widths_.push_back(data_dim_ + embedding_.embed_dim);
    for (std::size_t w : hidden_widths) {
        if (w == 0) throw std::invalid_argument("Denoiser: zero-width hidden layer");
        widths_.push_back(w);
    }
    widths_.push_back(data_dim_);

    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        params_.push_back(ParamTensor::zeros({widths_[l], widths_[l + 1]}));
        params_.push_back(ParamTensor::zeros({widths_[l + 1]}));
    }
}

Denoiser Denoiser::default_toy() {
    return Denoiser(2, {128, 128}, TimeEmbeddingConfig{32, 1e4});
}

void Denoiser::init_weights(std::uint64_t seed) {
    Rng rng = Rng::stream(seed, 0x1717);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
        ParamTensor& w = params_[2 * l];
        ParamTensor& b = params_[2 * l + 1];
        for (auto& v : w.data) v = rng.uniform(-bound, bound);
        for (auto& v : b.data) v = rng.uniform(-bound, bound);
    }
}

std::size_t Denoiser::param_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
}

struct Denoiser::Workspace {
    std::vector<std::vector<double>> pre;   // pre-activations per layer
    std::vector<std::vector<double>> act;   // act[0] = assembled input
};

void Denoiser::run_forward(std::span<const double> x, std::span<const double> t,
                           std::size_t batch, Workspace& ws) const {
    if (x.size() != batch * data_dim_) {
        throw std::invalid_argument("Denoiser: x size does not match batch x data_dim");
    }
    if (t.size() != batch) {
        throw std::invalid_argument("Denoiser: one timestep per sample required");
    }

    std::size_t in_dim = widths_.front();
    std::size_t layers = widths_.size() - 1;
    ws.act.assign(layers + 1, {});
    ws.pre.assign(layers, {});

    auto& input = ws.act[0];
    input.resize(batch * in_dim);
    for (std::size_t s = 0; s < batch; ++s) {
        double* row = input.data() + s * in_dim;
        const double* xrow = x.data() + s * data_dim_;
        for (std::size_t i = 0; i < data_dim_; ++i) row[i] = xrow[i];
        time_embedding_into(t[s], embedding_, row + data_dim_);
    }

    for (std::size_t l = 0; l < layers; ++l) {
        std::size_t fan_in = widths_[l], fan_out = widths_[l + 1];
        auto& z = ws.pre[l];
        z.resize(batch * fan_out);
        kernels::linear_forward(ws.act[l].data(), params_[2 * l].data.data(),
                                params_[2 * l + 1].data.data(), z.data(), batch, fan_in,
                                fan_out);
        auto& a = ws.act[l + 1];
        if (l + 1 < layers) {
            a.resize(z.size());
            kernels::gelu_forward(z, a);
        } else {
            a = z;  // linear output layer
        }
    }
}

std::vector<double> Denoiser::forward(std::span<const double> x, std::span<const double> t,
                                      std::size_t batch) const {
    Workspace ws;
    run_forward(x, t, batch, ws);
    return std::move(ws.act.back());
}

std::vector<ParamTensor> Denoiser::backward(std::span<const double> x,
                                            std::span<const double> t, std::size_t batch,
                                            std::span<const double> upstream) const {
    if (upstream.size() != batch * data_dim_) {
        throw std::invalid_argument("Denoiser: upstream size does not match output shape");
    }
    Workspace ws;
    run_forward(x, t, batch, ws);

    std::size_t layers = widths_.size() - 1;
    std::vector<ParamTensor> grads;
    grads.reserve(params_.size());
    for (const auto& p : params_) grads.push_back(ParamTensor::zeros(p.shape));

    std::vector<double> dz(upstream.begin(), upstream.end());
    std::vector<double> da;
    for (std::size_t l = layers; l-- > 0;) {
        std::size_t fan_in = widths_[l], fan_out = widths_[l + 1];
        kernels::linear_backward_params(ws.act[l].data(), dz.data(),
                                        grads[2 * l].data.data(), grads[2 * l + 1].data.data(),
                                        batch, fan_in, fan_out);
        if (l == 0) break;
        da.resize(batch * fan_in);
        kernels::linear_backward_input(dz.data(), params_[2 * l].data.data(), da.data(),
                                       batch, fan_in, fan_out);
        dz.resize(da.size());
        kernels::gelu_backward(ws.pre[l - 1], da, dz);
    }
    return grads;
}

namespace {
constexpr char kMagic[] = "poincare-opt denoiser v1";

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void Denoiser::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("Denoiser::save: cannot open " + path.string());

    out << kMagic << "\n";
    out << "data_dim " << data_dim_ << "\n";
    out << "embed_dim " << embedding_.embed_dim << "\n";
    out << "max_period " << format_full(embedding_.max_period) << "\n";
    out << "hidden";
    for (std::size_t l = 1; l + 1 < widths_.size(); ++l) out << " " << widths_[l];
    out << "\n";
    out << "tensors " << params_.size() << "\n";
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const ParamTensor& p = params_[i];
        out << "tensor " << i << " " << p.shape.size();
        for (std::size_t d : p.shape) out << " " << d;
        out << "\n";
        for (std::size_t j = 0; j < p.size(); ++j) {
            out << format_full(p.data[j]) << ((j + 1) % 8 == 0 ? "\n" : " ");
        }
        if (p.size() % 8 != 0) out << "\n";
    }
    if (!out) throw std::runtime_error("Denoiser::save: write failed for " + path.string());
}

Denoiser Denoiser::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("Denoiser::load: cannot open " + path.string());

    std::string magic;
    std::getline(in, magic);
    if (magic != kMagic) {
        throw std::runtime_error("Denoiser::load: bad magic header in " + path.string());
    }

    auto expect_key = [&](const char* key) {
        std::string word;
        in >> word;
        if (word != key) throw std::runtime_error(std::string("Denoiser::load: expected '") + key + "', got '" + word + "'");
    };

    std::size_t data_dim = 0;
    TimeEmbeddingConfig emb;
    expect_key("data_dim");
    in >> data_dim;
    expect_key("embed_dim");
    in >> emb.embed_dim;
    expect_key("max_period");
    in >> emb.max_period;

    expect_key("hidden");
    std::vector<std::size_t> hidden;
    std::string rest;
    std::getline(in, rest);
    std::istringstream hs(rest);
    std::size_t w;
    while (hs >> w) hidden.push_back(w);

    std::size_t n_tensors = 0;
    expect_key("tensors");
    in >> n_tensors;

    Denoiser model(data_dim, hidden, emb);
    if (model.params_.size() != n_tensors) {
        throw std::runtime_error("Denoiser::load: tensor count does not match layout");
    }
    for (std::size_t i = 0; i < n_tensors; ++i) {
        expect_key("tensor");
        std::size_t idx = 0, rank = 0;
        in >> idx >> rank;
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) in >> d;
        if (idx != i || shape != model.params_[i].shape) {
            throw std::runtime_error("Denoiser::load: shape manifest mismatch at tensor " + std::to_string(i));
        }
        for (auto& v : model.params_[i].data) {
            if (!(in >> v)) throw std::runtime_error("Denoiser::load: truncated data");
        }
    }
    return model;
}

}  // namespace popt
