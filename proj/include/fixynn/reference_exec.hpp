//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Golden integer executor. Every generated datapath is judged against the
// semantics implemented here:
//
//   conv   acc  = sum over the SAME-padded window of int8 * int8    (checked int32)
//          y    = clamp(rne((acc * m[c] + b[c]) / 2^shift), -128, 127)
//          relu y = max(y, 0)
//   pool   acc  = window sum, then the same affine with b = 0
//   fc     logit = acc + bias                                      (checked int32)
//
// Windows are centred on input pixel (stride*i, stride*j) with (k-1)/2 zero
// pixels of padding before the first row/column.
//

#pragma once

#include "fixynn/activation.hpp"
#include "fixynn/frozen_model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fixynn
{

/// clamp(rne(acc * mul / 2^shift)). OverflowError if acc * mul leaves int64.
std::int8_t requantize(std::int64_t acc, std::int64_t mul, int shift);

/// Raw conv/pool accumulators for every output element, HWC order.
std::vector<std::int32_t> layer_accumulators(const LayerSpec& spec, const QuantizedTensor& weights,
                                             const Activation& input);

/// Affine + clamp + optional ReLU over a block of accumulators.
std::vector<std::int8_t> apply_affine(std::span<const std::int32_t> acc, int channels, const BnRegisters& affine,
                                      bool relu);

/// One conv or pooling layer.
Activation run_layer(const LayerSpec& spec, const FrozenLayer& layer, const Activation& input);

/// The FC layer: int32 logits at scale 2^(input_exp + weight exponent).
std::vector<std::int32_t> run_fully_connected(const LayerSpec& spec, const FrozenLayer& layer,
                                              const Activation& input);

/// Runs layers in order and returns every intermediate output.
std::vector<Activation> run_layers(std::span<const LayerSpec> specs, std::span<const FrozenLayer> layers,
                                   const Activation& input);

struct InferenceTrace
{
    std::vector<Activation> layer_outputs;    // every layer before the FC
    std::vector<std::int32_t> logits;
    int logit_exp = 0;
};

InferenceTrace infer(const FrozenModel& model, const Activation& input);

/// Output of the first `n_layers` layers (the input itself for 0).
Activation infer_prefix(const FrozenModel& model, const Activation& input, int n_layers);

/// Activations at prefix-unit boundary k of an FFE holding n_fixed units (1 <= k <= n_fixed).
Activation tap(const FrozenModel& model, const Activation& input, int k, int n_fixed);

}    // namespace fixynn
