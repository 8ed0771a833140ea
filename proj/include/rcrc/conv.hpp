#pragma once

// Fixed random-weight convolutional feature extractor. Weights are derived
// from (spec, seed) alone and never serialized; checkpoints regenerate them.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rcrc/image.hpp"
#include "rcrc/rng.hpp"

namespace rcrc {

struct ConvLayerSpec {
    int filter_size = 0;
    int out_channels = 0;
    int stride = 0;
};

struct ConvSpec {
    std::vector<ConvLayerSpec> layers;
    int dense_out = 0;            // D_conv
    double conv_weight_stddev = 0.06;

    static ConvSpec defaults() {
        ConvSpec s;
        s.layers = {{31, 32, 2}, {14, 64, 2}, {6, 128, 2}};
        s.dense_out = 512;
        s.conv_weight_stddev = 0.06;
        return s;
    }

    /// Small spec for fast desk-scale training runs.
    static ConvSpec reduced(int dense_out) {
        ConvSpec s;
        s.layers = {{7, 8, 4}, {5, 8, 4}};
        s.dense_out = dense_out;
        s.conv_weight_stddev = 0.06;
        return s;
    }

    void validate() const {
        if (layers.empty()) throw std::invalid_argument("ConvSpec: no conv layers");
        for (const auto& l : layers)
            if (l.filter_size < 1 || l.out_channels < 1 || l.stride < 1)
                throw std::invalid_argument("ConvSpec: layer values must be positive");
        if (dense_out < 1) throw std::invalid_argument("ConvSpec: dense_out must be positive");
        if (conv_weight_stddev <= 0.0)
            throw std::invalid_argument("ConvSpec: conv_weight_stddev must be positive");
    }
};

/// Channel-major activation tensor: value(c, y, x) = data[(c*height + y)*width + x].
struct Tensor3 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    static Tensor3 zeros(int channels, int height, int width) {
        Tensor3 t;
        t.channels = channels;
        t.height = height;
        t.width = width;
        t.data.assign(static_cast<std::size_t>(channels) * height * width, 0.0);
        return t;
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
};

/// Kernel bank for one layer: weight(o, i, ky, kx) in row-major storage order.
struct ConvKernel {
    int out_channels = 0;
    int in_channels = 0;
    int size = 0;
    std::vector<double> weights;

    double at(int o, int i, int ky, int kx) const {
        return weights[((static_cast<std::size_t>(o) * in_channels + i) * size + ky) * size + kx];
    }
};

inline int conv_out_dim(int in_dim, int stride) {
    return (in_dim + stride - 1) / stride;  // ceil(in/stride), "same" padding
}

/// Strided 2-D cross-correlation with "same" zero padding.
/// pad_total = max((out-1)*stride + k - in, 0), floor half leading.
inline Tensor3 conv2d(const Tensor3& input, const ConvKernel& kernel, int stride) {
    if (kernel.in_channels != input.channels)
        throw std::invalid_argument("conv2d: channel mismatch");
    if (stride < 1 || kernel.size < 1)
        throw std::invalid_argument("conv2d: stride and kernel size must be positive");

    const int out_h = conv_out_dim(input.height, stride);
    const int out_w = conv_out_dim(input.width, stride);
    const int pad_h = std::max((out_h - 1) * stride + kernel.size - input.height, 0);
    const int pad_w = std::max((out_w - 1) * stride + kernel.size - input.width, 0);
    const int pad_top = pad_h / 2;
    const int pad_left = pad_w / 2;

    Tensor3 out = Tensor3::zeros(kernel.out_channels, out_h, out_w);
    for (int o = 0; o < kernel.out_channels; ++o) {
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                double acc = 0.0;
                for (int i = 0; i < input.channels; ++i) {
                    for (int ky = 0; ky < kernel.size; ++ky) {
                        const int y = oy * stride + ky - pad_top;
                        if (y < 0 || y >= input.height) continue;
                        for (int kx = 0; kx < kernel.size; ++kx) {
                            const int x = ox * stride + kx - pad_left;
                            if (x < 0 || x >= input.width) continue;
                            acc += input.at(i, y, x) * kernel.at(o, i, ky, kx);
                        }
                    }
                }
                out.at(o, oy, ox) = acc;
            }
        }
    }
    return out;
}

class FeatureExtractor {
public:
    FeatureExtractor(ConvSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
        spec_.validate();
        Rng rng(seed_);

        int channels = kFrameChannels;
        int dim = kFrameSize;
        for (const auto& layer : spec_.layers) {
            ConvKernel k;
            k.out_channels = layer.out_channels;
            k.in_channels = channels;
            k.size = layer.filter_size;
            k.weights.resize(static_cast<std::size_t>(k.out_channels) * k.in_channels *
                             k.size * k.size);
            for (double& w : k.weights) w = rng.gaussian(0.0, spec_.conv_weight_stddev);
            kernels_.push_back(std::move(k));
            channels = layer.out_channels;
            dim = conv_out_dim(dim, layer.stride);
        }
        flattened_dim_ = channels * dim * dim;

        // Sampled in row-major order: row = flattened conv index, col = output unit.
        dense_weight_.resize(flattened_dim_, spec_.dense_out);
        for (int r = 0; r < flattened_dim_; ++r)
            for (int c = 0; c < spec_.dense_out; ++c)
                dense_weight_(r, c) = rng.gaussian(0.0, spec_.conv_weight_stddev);
    }

    const ConvSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }
    int flattened_dim() const { return flattened_dim_; }
    int feature_dim() const { return spec_.dense_out; }
    const Eigen::MatrixXd& dense_weight() const { return dense_weight_; }
    const std::vector<ConvKernel>& kernels() const { return kernels_; }

    /// Per-layer post-tanh activations, for the dump-features debug path.
    std::vector<Tensor3> layer_activations(const Frame& frame) const {
        std::vector<Tensor3> acts;
        Tensor3 current = frame_to_tensor(frame);
        for (std::size_t l = 0; l < kernels_.size(); ++l) {
            current = conv2d(current, kernels_[l], spec_.layers[l].stride);
            for (double& v : current.data) v = std::tanh(v);
            acts.push_back(current);
        }
        return acts;
    }

    /// X_conv: conv stack with tanh, channel-major flatten, dense layer, tanh.
    Eigen::VectorXd extract(const Frame& frame) const {
        Tensor3 current = frame_to_tensor(frame);
        for (std::size_t l = 0; l < kernels_.size(); ++l) {
            current = conv2d(current, kernels_[l], spec_.layers[l].stride);
            for (double& v : current.data) v = std::tanh(v);
        }
        Eigen::Map<const Eigen::VectorXd> flat(current.data.data(),
                                               static_cast<Eigen::Index>(current.data.size()));
        if (flat.size() != flattened_dim_)
            throw std::logic_error("FeatureExtractor: flatten dimension mismatch");
        // tanh of a finite value lies strictly inside (-1, 1), but for
        // |x| > ~19 double rounding lands exactly on +-1; clamp back to the
        // largest magnitude that keeps the open-interval feature contract.
        const double limit = std::nextafter(1.0, 0.0);
        return (dense_weight_.transpose() * flat)
            .array()
            .tanh()
            .min(limit)
            .max(-limit)
            .matrix();
    }

    static Tensor3 frame_to_tensor(const Frame& frame) {
        if (frame.values.size() != kFrameSize * kFrameSize * kFrameChannels)
            throw std::invalid_argument("FeatureExtractor: frame is not 64x64x3");
        Tensor3 t = Tensor3::zeros(kFrameChannels, kFrameSize, kFrameSize);
        for (int y = 0; y < kFrameSize; ++y)
            for (int x = 0; x < kFrameSize; ++x)
                for (int c = 0; c < kFrameChannels; ++c) t.at(c, y, x) = frame.at(y, x, c);
        return t;
    }

private:
    ConvSpec spec_;
    std::uint64_t seed_;
    std::vector<ConvKernel> kernels_;
    Eigen::MatrixXd dense_weight_;
    int flattened_dim_ = 0;
};

}  // namespace rcrc
