#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace popt {

/// Flat numeric array plus a shape. The unit of optimizer state and
/// ball projection: norms taken by the hyperbolic machinery are always
/// whole-tensor Euclidean norms over `data`.
struct ParamTensor {
    std::vector<double> data;
    std::vector<std::size_t> shape;

    ParamTensor() = default;

    ParamTensor(std::vector<double> d, std::vector<std::size_t> s)
        : data(std::move(d)), shape(std::move(s)) {
        if (numel(shape) != data.size()) {
            throw std::invalid_argument("ParamTensor: shape does not match data length");
        }
    }

    static ParamTensor zeros(std::vector<std::size_t> s) {
        std::size_t n = numel(s);
        return ParamTensor(std::vector<double>(n, 0.0), std::move(s));
    }

    static ParamTensor scalar(double v) { return ParamTensor({v}, {1}); }

    static std::size_t numel(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1},
                               [](std::size_t a, std::size_t b) { return a * b; });
    }

    std::size_t size() const { return data.size(); }

    std::span<double> view() { return {data.data(), data.size()}; }
    std::span<const double> view() const { return {data.data(), data.size()}; }

    bool same_shape(const ParamTensor& other) const { return shape == other.shape; }
};

}  // namespace popt
