#pragma once

// Versioned little-endian checkpoint format. Feature-extractor and
// reservoir weight material is never stored; only (spec, seed, PRNG id),
// from which the matrices regenerate bit-exactly. The controller matrix
// and optional optimizer state are stored in full as float64.
//
// Layout: magic "RCRCCKPT", u32 format version, then length-prefixed
// sections (u32 tag, u64 payload length).

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rcrc/binio.hpp"
#include "rcrc/config.hpp"
#include "rcrc/controller.hpp"
#include "rcrc/conv.hpp"
#include "rcrc/reservoir.hpp"
#include "rcrc/rng.hpp"

namespace rcrc {

struct Checkpoint {
    static constexpr std::uint32_t kFormatVersion = 1;

    std::string rng_algorithm = kRngAlgorithmId;

    ConvSpec conv_spec = ConvSpec::defaults();
    std::uint64_t extractor_seed = 0;

    ReservoirSpec reservoir_spec;
    std::uint64_t reservoir_seed = 0;

    ActionMode action_mode = ActionMode::kDiscrete2;
    Eigen::MatrixXd w_out;  // N_act x (D_conv + D_esn + 1), row-major on disk

    std::string optimizer_blob;  // empty when absent

    std::uint32_t generation = 0;
    std::uint64_t config_hash = 0;
    std::string config_text;  // canonical config the run was launched with

    std::string encode() const {
        binio::Writer out;
        out.raw("RCRCCKPT");
        out.u32(kFormatVersion);

        binio::Writer extractor;
        extractor.str(rng_algorithm);
        extractor.u32(static_cast<std::uint32_t>(conv_spec.layers.size()));
        for (const auto& l : conv_spec.layers) {
            extractor.u32(static_cast<std::uint32_t>(l.filter_size));
            extractor.u32(static_cast<std::uint32_t>(l.out_channels));
            extractor.u32(static_cast<std::uint32_t>(l.stride));
        }
        extractor.u32(static_cast<std::uint32_t>(conv_spec.dense_out));
        extractor.f64(conv_spec.conv_weight_stddev);
        extractor.u64(extractor_seed);
        write_section(out, kTagExtractor, extractor.data());

        binio::Writer reservoir;
        reservoir.u32(static_cast<std::uint32_t>(reservoir_spec.input_dim));
        reservoir.u32(static_cast<std::uint32_t>(reservoir_spec.state_dim));
        reservoir.f64(reservoir_spec.leak_rate);
        reservoir.f64(reservoir_spec.sparsity);
        reservoir.f64(reservoir_spec.spectral_radius);
        reservoir.f64(reservoir_spec.weight_stddev);
        reservoir.u8(reservoir_spec.bias_input ? 1 : 0);
        reservoir.u64(reservoir_seed);
        write_section(out, kTagReservoir, reservoir.data());

        binio::Writer controller;
        controller.u8(action_mode == ActionMode::kContinuous3 ? 1 : 0);
        controller.mat(w_out);
        write_section(out, kTagController, controller.data());

        if (!optimizer_blob.empty()) write_section(out, kTagOptimizer, optimizer_blob);

        binio::Writer meta;
        meta.u32(generation);
        meta.u64(config_hash);
        meta.str(config_text);
        write_section(out, kTagMeta, meta.data());

        return out.data();
    }

    static Checkpoint decode(const std::string& bytes) {
        binio::Reader in(bytes);
        if (in.raw(8) != "RCRCCKPT")
            throw std::runtime_error("checkpoint: bad magic, not a checkpoint file");
        const std::uint32_t version = in.u32();
        if (version != kFormatVersion)
            throw std::runtime_error("checkpoint: unknown format_version " +
                                     std::to_string(version));

        Checkpoint ckpt;
        bool have_extractor = false, have_reservoir = false, have_controller = false;
        while (!in.done()) {
            const std::uint32_t tag = in.u32();
            const std::uint64_t length = in.u64();
            if (length > in.remaining())
                throw std::runtime_error(
                    "checkpoint: truncated section (expected " + std::to_string(length) +
                    " bytes, have " + std::to_string(in.remaining()) + ")");
            binio::Reader section(in.raw(static_cast<std::size_t>(length)));
            switch (tag) {
                case kTagExtractor: {
                    ckpt.rng_algorithm = section.str();
                    if (ckpt.rng_algorithm != kRngAlgorithmId)
                        throw std::runtime_error("checkpoint: unsupported PRNG algorithm " +
                                                 ckpt.rng_algorithm);
                    const std::uint32_t n_layers = section.u32();
                    ckpt.conv_spec.layers.clear();
                    for (std::uint32_t i = 0; i < n_layers; ++i) {
                        ConvLayerSpec l;
                        l.filter_size = static_cast<int>(section.u32());
                        l.out_channels = static_cast<int>(section.u32());
                        l.stride = static_cast<int>(section.u32());
                        ckpt.conv_spec.layers.push_back(l);
                    }
                    ckpt.conv_spec.dense_out = static_cast<int>(section.u32());
                    ckpt.conv_spec.conv_weight_stddev = section.f64();
                    ckpt.extractor_seed = section.u64();
                    have_extractor = true;
                    break;
                }
                case kTagReservoir: {
                    ckpt.reservoir_spec.input_dim = static_cast<int>(section.u32());
                    ckpt.reservoir_spec.state_dim = static_cast<int>(section.u32());
                    ckpt.reservoir_spec.leak_rate = section.f64();
                    ckpt.reservoir_spec.sparsity = section.f64();
                    ckpt.reservoir_spec.spectral_radius = section.f64();
                    ckpt.reservoir_spec.weight_stddev = section.f64();
                    ckpt.reservoir_spec.bias_input = section.u8() != 0;
                    ckpt.reservoir_seed = section.u64();
                    have_reservoir = true;
                    break;
                }
                case kTagController: {
                    ckpt.action_mode =
                        section.u8() != 0 ? ActionMode::kContinuous3 : ActionMode::kDiscrete2;
                    ckpt.w_out = section.mat();
                    have_controller = true;
                    break;
                }
                case kTagOptimizer:
                    ckpt.optimizer_blob = section.raw(section.remaining());
                    break;
                case kTagMeta: {
                    ckpt.generation = section.u32();
                    ckpt.config_hash = section.u64();
                    ckpt.config_text = section.str();
                    if (!ckpt.config_text.empty() &&
                        Config::parse_text(ckpt.config_text).hash() != ckpt.config_hash)
                        throw std::runtime_error(
                            "checkpoint: config hash mismatch, config and checkpoint "
                            "do not belong together");
                    break;
                }
                default:
                    throw std::runtime_error("checkpoint: unknown section tag " +
                                             std::to_string(tag));
            }
        }
        if (!have_extractor || !have_reservoir || !have_controller)
            throw std::runtime_error("checkpoint: missing required section");
        return ckpt;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
        const std::string bytes = encode();
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
    }

    static Checkpoint load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return decode(ss.str());
    }

    ControllerWeights controller() const {
        ControllerWeights weights(action_mode, static_cast<int>(w_out.cols()) - 1);
        Eigen::VectorXd flat(w_out.size());
        for (Eigen::Index r = 0; r < w_out.rows(); ++r)
            for (Eigen::Index c = 0; c < w_out.cols(); ++c)
                flat(r * w_out.cols() + c) = w_out(r, c);
        weights.set_params(flat);
        return weights;
    }

private:
    static constexpr std::uint32_t kTagExtractor = 0x43455854u;   // "TXEC"
    static constexpr std::uint32_t kTagReservoir = 0x56534552u;   // "RESV"
    static constexpr std::uint32_t kTagController = 0x4c525443u;  // "CTRL"
    static constexpr std::uint32_t kTagOptimizer = 0x5354504fu;   // "OPTS"
    static constexpr std::uint32_t kTagMeta = 0x4154454du;        // "META"

    static void write_section(binio::Writer& out, std::uint32_t tag,
                              const std::string& payload) {
        out.u32(tag);
        out.u64(payload.size());
        out.raw(payload);
    }
};

}  // namespace rcrc
