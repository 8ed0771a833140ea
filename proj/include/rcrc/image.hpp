#pragma once

// Raw byte images, frame preprocessing, and PPM output.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcrc {

inline constexpr int kFrameSize = 64;
inline constexpr int kFrameChannels = 3;

/// Interleaved RGB byte image, row-major (y, x, c).
struct RawImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;  // height * width * 3

    std::uint8_t at(int y, int x, int c) const {
        return pixels[static_cast<std::size_t>((y * width + x) * kFrameChannels + c)];
    }
    std::uint8_t& at(int y, int x, int c) {
        return pixels[static_cast<std::size_t>((y * width + x) * kFrameChannels + c)];
    }

    static RawImage filled(int height, int width, std::uint8_t value) {
        RawImage img;
        img.height = height;
        img.width = width;
        img.pixels.assign(static_cast<std::size_t>(height) * width * kFrameChannels, value);
        return img;
    }
};

/// Preprocessed observation: 64x64x3 doubles in [0,1], row-major (y, x, c).
struct Frame {
    std::vector<double> values;  // 64 * 64 * 3

    double at(int y, int x, int c) const {
        return values[static_cast<std::size_t>((y * kFrameSize + x) * kFrameChannels + c)];
    }

    static Frame zeros() {
        Frame f;
        f.values.assign(kFrameSize * kFrameSize * kFrameChannels, 0.0);
        return f;
    }
};

/// Nearest-neighbor resize to 64x64 followed by division by 255.
/// Source index for output i is floor(i * src_dim / 64).
inline Frame preprocess(const RawImage& raw) {
    if (raw.height < 1 || raw.width < 1)
        throw std::invalid_argument("preprocess: empty image");
    if (raw.pixels.size() !=
        static_cast<std::size_t>(raw.height) * raw.width * kFrameChannels)
        throw std::invalid_argument("preprocess: pixel buffer is not HxWx3");

    Frame frame = Frame::zeros();
    for (int y = 0; y < kFrameSize; ++y) {
        const int sy = static_cast<int>(static_cast<std::int64_t>(y) * raw.height / kFrameSize);
        for (int x = 0; x < kFrameSize; ++x) {
            const int sx = static_cast<int>(static_cast<std::int64_t>(x) * raw.width / kFrameSize);
            for (int c = 0; c < kFrameChannels; ++c) {
                frame.values[static_cast<std::size_t>((y * kFrameSize + x) * kFrameChannels + c)] =
                    raw.at(sy, sx, c) / 255.0;
            }
        }
    }
    return frame;
}

inline void write_ppm(const RawImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open " + path);
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw std::runtime_error("write_ppm: write failed for " + path);
}

inline RawImage read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ppm: cannot open " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P6" || w < 1 || h < 1 || maxval != 255)
        throw std::runtime_error("read_ppm: unsupported header in " + path);
    in.get();  // single whitespace after maxval
    RawImage img = RawImage::filled(h, w, 0);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw std::runtime_error("read_ppm: truncated pixel data in " + path);
    return img;
}

}  // namespace rcrc
