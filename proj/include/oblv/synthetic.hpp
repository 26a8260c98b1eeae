#pragma once

#include "oblv/dataset.hpp"

namespace oblv {

// Desk-scale stand-in for language-model embeddings with known leakage
// ground truth: binary y and s drive separate coordinate blocks, a Gaussian
// block carries no signal, and the whole vector goes through `depth` rounds
// of rotate-then-tanh mixing plus one final rotation.
struct SynthSpec {
    Index n = 6000;
    Index d = 64;
    double noise = 0.3;       // per-coordinate Gaussian noise on signal blocks
    int depth = 1;            // number of tanh mixing rounds
    double rho = 0.0;         // correlation between y and s in [-1, 1]
    double signal_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        require(n >= 100, ErrorCode::ConfigError, "synthetic datasets need n >= 100");
        require(d >= 8, ErrorCode::ConfigError, "synthetic datasets need d >= 8");
        require(depth >= 0 && depth <= 8, ErrorCode::ConfigError, "depth must be in [0, 8]");
        require(rho >= -1.0 && rho <= 1.0, ErrorCode::ConfigError, "rho must be in [-1, 1]");
        require(noise >= 0.0, ErrorCode::ConfigError, "noise must be >= 0");
    }
};

EmbeddingDataset generate_synthetic(const SynthSpec& spec);

}  // namespace oblv
