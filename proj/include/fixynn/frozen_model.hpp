//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "fixynn/activation.hpp"
#include "fixynn/model_io.hpp"
#include "fixynn/quantize.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace fixynn
{

/// One layer of a compressed model: everything the integer datapath needs.
struct FrozenLayer
{
    QuantizedTensor weights;    // empty for pooling
    int input_exp  = 0;
    int output_exp = 0;

    /// Per-channel requantizer. Holds the BN encoding on BN layers, the plain
    /// rescale elsewhere. Unused by the FC layer.
    BnRegisters affine;

    /// Real BN parameters kept so the registers can be re-derived or reprogrammed.
    std::vector<float> bn_scale;
    std::vector<float> bn_bias;

    /// FC only: real bias and its int32 encoding at 2^(input_exp + weight exponent).
    std::vector<float> fc_bias_real;
    std::vector<std::int32_t> fc_bias;
};

struct FrozenModel
{
    Graph graph;
    int input_exp          = -7;
    int bits               = 8;
    double target_sparsity = 0.0;
    std::vector<FrozenLayer> layers;

    /// Copy with layer `layer`'s BN replaced; the register shift is kept since it is
    /// hard-wired in the datapath. Throws ConfigError when the new values do not encode.
    FrozenModel with_bn(int layer, std::span<const float> scale, std::span<const float> bias) const;
};

struct CompressOptions
{
    double sparsity = 0.5;
    int bits        = 8;
    int input_exp   = -7;
    /// Forces every activation exponent instead of calibrating.
    std::optional<int> activation_exp;
    /// Calibration images; when empty, `calibration_images` seeded random images are drawn.
    std::vector<Activation> calibration;
    int calibration_images      = 4;
    std::uint64_t calibration_seed = 1;
    int max_shift               = 24;
};

/// Prune, quantize and calibrate a real-valued model into its integer form.
FrozenModel compress(const ModelBundle& bundle, const CompressOptions& options);

/// Recompute the integer registers (affine, FC bias) from the real parameters and exponents.
/// Shifts already stored in `layer.affine.shift` are kept.
void derive_registers(const LayerSpec& spec, FrozenLayer& layer);

void save_frozen(const FrozenModel& model, const std::filesystem::path& manifest);
FrozenModel load_frozen(const std::filesystem::path& manifest);

}    // namespace fixynn
