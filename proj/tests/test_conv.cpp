#include <catch2/catch_amalgamated.hpp>

#include "rcrc/conv.hpp"
#include "rcrc/rng.hpp"

using namespace rcrc;

namespace {

// Independent nearest-neighbor resize: for output (y, x) pick source
// (floor(y*H/64), floor(x*W/64)).
Frame resize_oracle(const RawImage& raw) {
    Frame f = Frame::zeros();
    for (int y = 0; y < kFrameSize; ++y)
        for (int x = 0; x < kFrameSize; ++x)
            for (int c = 0; c < kFrameChannels; ++c)
                f.values[(y * kFrameSize + x) * kFrameChannels + c] =
                    raw.at(y * raw.height / kFrameSize, x * raw.width / kFrameSize, c) / 255.0;
    return f;
}

// Brute-force sliding-window cross-correlation over an explicitly padded
// buffer. Kept independent of the conv2d implementation.
Tensor3 conv_oracle(const Tensor3& input, const ConvKernel& kernel, int stride) {
    const int out_h = (input.height + stride - 1) / stride;
    const int out_w = (input.width + stride - 1) / stride;
    const int pad_h = std::max((out_h - 1) * stride + kernel.size - input.height, 0);
    const int pad_w = std::max((out_w - 1) * stride + kernel.size - input.width, 0);
    const int top = pad_h / 2, left = pad_w / 2;

    Tensor3 padded = Tensor3::zeros(input.channels, input.height + pad_h, input.width + pad_w);
    for (int c = 0; c < input.channels; ++c)
        for (int y = 0; y < input.height; ++y)
            for (int x = 0; x < input.width; ++x)
                padded.at(c, y + top, x + left) = input.at(c, y, x);

    Tensor3 out = Tensor3::zeros(kernel.out_channels, out_h, out_w);
    for (int o = 0; o < kernel.out_channels; ++o)
        for (int oy = 0; oy < out_h; ++oy)
            for (int ox = 0; ox < out_w; ++ox) {
                double acc = 0.0;
                for (int c = 0; c < input.channels; ++c)
                    for (int ky = 0; ky < kernel.size; ++ky)
                        for (int kx = 0; kx < kernel.size; ++kx)
                            acc += padded.at(c, oy * stride + ky, ox * stride + kx) *
                                   kernel.at(o, c, ky, kx);
                out.at(o, oy, ox) = acc;
            }
    return out;
}

const FeatureExtractor& default_extractor() {
    static FeatureExtractor fe(ConvSpec::defaults(), 0);
    return fe;
}

}  // namespace

TEST_CASE("preprocess maps byte extremes to 0 and 1") {
    const Frame ones = preprocess(RawImage::filled(64, 64, 255));
    for (double v : ones.values) REQUIRE(v == 1.0);
    const Frame zeros = preprocess(RawImage::filled(64, 64, 0));
    for (double v : zeros.values) REQUIRE(v == 0.0);
}

TEST_CASE("preprocess 128->64 picks even source pixels") {
    RawImage raw = RawImage::filled(128, 128, 0);
    for (int y = 0; y < 128; y += 2)
        for (int x = 0; x < 128; x += 2)
            for (int c = 0; c < 3; ++c) raw.at(y, x, c) = 51;
    const Frame f = preprocess(raw);
    for (double v : f.values) REQUIRE(v == Catch::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("preprocess agrees with the resize oracle on odd sizes") {
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const int h = 33 + static_cast<int>(rng.below(160));
        const int w = 33 + static_cast<int>(rng.below(160));
        RawImage raw = RawImage::filled(h, w, 0);
        for (auto& p : raw.pixels) p = static_cast<std::uint8_t>(rng.below(256));
        const Frame got = preprocess(raw);
        const Frame want = resize_oracle(raw);
        REQUIRE(got.values == want.values);
    }
}

TEST_CASE("preprocess rejects malformed buffers") {
    RawImage bad;
    bad.height = 4;
    bad.width = 4;
    bad.pixels.assign(4 * 4 * 2, 0);  // not 3 channels worth of bytes
    REQUIRE_THROWS_AS(preprocess(bad), std::invalid_argument);
    REQUIRE_THROWS_AS(preprocess(RawImage{}), std::invalid_argument);
}

TEST_CASE("conv2d 1x1 kernel scales the input") {
    Tensor3 in = Tensor3::zeros(1, 2, 2);
    in.at(0, 0, 0) = 1;
    in.at(0, 0, 1) = 2;
    in.at(0, 1, 0) = 3;
    in.at(0, 1, 1) = 4;
    ConvKernel k{1, 1, 1, {2.0}};
    const Tensor3 out = conv2d(in, k, 1);
    REQUIRE(out.at(0, 0, 0) == 2.0);
    REQUIRE(out.at(0, 0, 1) == 4.0);
    REQUIRE(out.at(0, 1, 0) == 6.0);
    REQUIRE(out.at(0, 1, 1) == 8.0);
}

TEST_CASE("conv2d of zero input is zero") {
    const Tensor3 in = Tensor3::zeros(3, 7, 7);
    ConvKernel k{4, 3, 3, std::vector<double>(4 * 3 * 3 * 3, 1.5)};
    const Tensor3 out = conv2d(in, k, 2);
    for (double v : out.data) REQUIRE(v == 0.0);
}

TEST_CASE("conv2d ones 3x3, same padding: center 9, corners 4") {
    Tensor3 in = Tensor3::zeros(1, 3, 3);
    for (double& v : in.data) v = 1.0;
    ConvKernel k{1, 1, 3, std::vector<double>(9, 1.0)};
    const Tensor3 out = conv2d(in, k, 1);
    REQUIRE(out.at(0, 1, 1) == 9.0);
    REQUIRE(out.at(0, 0, 0) == 4.0);
    REQUIRE(out.at(0, 0, 2) == 4.0);
    REQUIRE(out.at(0, 2, 0) == 4.0);
    REQUIRE(out.at(0, 2, 2) == 4.0);
    REQUIRE(out.at(0, 0, 1) == 6.0);
}

TEST_CASE("conv2d matches the brute-force oracle on random instances") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int cin = 1 + static_cast<int>(rng.below(3));
        const int cout = 1 + static_cast<int>(rng.below(3));
        const int size = 1 + static_cast<int>(rng.below(5));
        const int stride = 1 + static_cast<int>(rng.below(3));
        Tensor3 in = Tensor3::zeros(cin, 8, 8);
        for (double& v : in.data) v = rng.gaussian();
        ConvKernel k{cout, cin, size, {}};
        k.weights.resize(static_cast<std::size_t>(cout) * cin * size * size);
        for (double& w : k.weights) w = rng.gaussian();

        const Tensor3 got = conv2d(in, k, stride);
        const Tensor3 want = conv_oracle(in, k, stride);
        REQUIRE(got.data.size() == want.data.size());
        for (std::size_t i = 0; i < got.data.size(); ++i)
            REQUIRE(got.data[i] == Catch::Approx(want.data[i]).margin(1e-12));
    }
}

TEST_CASE("conv2d is linear in the input") {
    Rng rng(13);
    Tensor3 in = Tensor3::zeros(2, 8, 8);
    for (double& v : in.data) v = rng.gaussian();
    ConvKernel k{3, 2, 3, {}};
    k.weights.resize(3 * 2 * 3 * 3);
    for (double& w : k.weights) w = rng.gaussian();

    const double a = -1.7;
    Tensor3 scaled = in;
    for (double& v : scaled.data) v *= a;
    const Tensor3 lhs = conv2d(scaled, k, 2);
    const Tensor3 rhs = conv2d(in, k, 2);
    for (std::size_t i = 0; i < lhs.data.size(); ++i)
        REQUIRE(lhs.data[i] == Catch::Approx(a * rhs.data[i]).margin(1e-12));
}

TEST_CASE("build_extractor is deterministic and bitwise reproducible") {
    const ConvSpec spec = ConvSpec::reduced(16);
    const FeatureExtractor a(spec, 77), b(spec, 77);
    REQUIRE(a.dense_weight() == b.dense_weight());
    for (std::size_t l = 0; l < a.kernels().size(); ++l)
        REQUIRE(a.kernels()[l].weights == b.kernels()[l].weights);
    const FeatureExtractor c(spec, 78);
    REQUIRE(a.dense_weight() != c.dense_weight());
}

TEST_CASE("default spec shape chain: 64->32->16->8, dense 8192x512") {
    const FeatureExtractor& fe = default_extractor();
    REQUIRE(fe.flattened_dim() == 8 * 8 * 128);
    REQUIRE(fe.dense_weight().rows() == 8192);
    REQUIRE(fe.dense_weight().cols() == 512);
}

TEST_CASE("kernel weights match the sampling distribution") {
    const FeatureExtractor& fe = default_extractor();
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    for (const auto& k : fe.kernels()) {
        for (double w : k.weights) {
            sum += w;
            sumsq += w * w;
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    const double stddev = std::sqrt(sumsq / static_cast<double>(n) - mean * mean);
    const double stderr_mean = 0.06 / std::sqrt(static_cast<double>(n));
    REQUIRE(std::abs(mean) < 4.0 * stderr_mean);
    REQUIRE(stddev == Catch::Approx(0.06).epsilon(0.05));
}

TEST_CASE("extract: zero frame maps to the zero feature vector") {
    const Eigen::VectorXd features = default_extractor().extract(Frame::zeros());
    REQUIRE(features.size() == 512);
    for (Eigen::Index i = 0; i < features.size(); ++i) REQUIRE(features(i) == 0.0);
}

TEST_CASE("extract: 512 values strictly inside (-1,1), pure in the frame") {
    Rng rng(21);
    RawImage raw = RawImage::filled(64, 64, 0);
    for (auto& p : raw.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    const Frame frame = preprocess(raw);
    const Eigen::VectorXd a = default_extractor().extract(frame);
    const Eigen::VectorXd b = default_extractor().extract(frame);
    REQUIRE(a.size() == 512);
    REQUIRE(a == b);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        REQUIRE(a(i) > -1.0);
        REQUIRE(a(i) < 1.0);
    }
}

TEST_CASE("ConvSpec validation rejects non-positive values") {
    ConvSpec spec = ConvSpec::defaults();
    spec.layers[0].stride = 0;
    REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = ConvSpec::defaults();
    spec.dense_out = 0;
    REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
}
