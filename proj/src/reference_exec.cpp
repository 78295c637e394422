//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/reference_exec.hpp"

#include "fixynn/errors.hpp"

#include <limits>
#include <random>
#include <string>

namespace fixynn
{

namespace
{

std::int32_t checked_int32(std::int64_t acc)
{
    if (acc < std::numeric_limits<std::int32_t>::min() || acc > std::numeric_limits<std::int32_t>::max())
    {
        throw OverflowError("accumulator value " + std::to_string(acc) + " exceeds 32 bits");
    }
    return static_cast<std::int32_t>(acc);
}

std::int64_t affine_value(std::int64_t acc, std::int64_t mul, std::int64_t bias)
{
    std::int64_t product = 0;
    std::int64_t sum     = 0;
    if (__builtin_mul_overflow(acc, mul, &product) || __builtin_add_overflow(product, bias, &sum))
    {
        throw OverflowError("requantizer intermediate exceeds 64 bits");
    }
    return sum;
}

void check_input(const Shape3& expected, const Activation& input, const char* what)
{
    if (!(input.shape == expected))
    {
        throw ConfigError(std::string(what) + ": input shape " + std::to_string(input.shape.height) + "x" +
                          std::to_string(input.shape.width) + "x" + std::to_string(input.shape.channels) +
                          " does not match expected " + std::to_string(expected.height) + "x" +
                          std::to_string(expected.width) + "x" + std::to_string(expected.channels));
    }
    if (input.values.size() != static_cast<std::size_t>(input.shape.elements()))
    {
        throw ConfigError(std::string(what) + ": activation payload does not match its shape");
    }
}

}    // namespace

Activation random_activation(const Shape3& shape, int scale_exponent, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Activation a{ shape, scale_exponent, {} };
    a.values.resize(static_cast<std::size_t>(shape.elements()));
    for (auto& v : a.values)
    {
        v = static_cast<std::int8_t>(static_cast<std::uint8_t>(rng() >> 56));
    }
    return a;
}

std::int8_t requantize(std::int64_t acc, std::int64_t mul, int shift)
{
    if (shift < 0)
    {
        throw ConfigError("requantize shift must be >= 0");
    }
    return saturate_int8(round_shift_half_even(affine_value(acc, mul, 0), shift));
}

std::vector<std::int32_t> layer_accumulators(const LayerSpec& spec, const QuantizedTensor& weights,
                                             const Activation& input)
{
    const Shape3 out = layer_output_shape(spec, input.shape);
    std::vector<std::int32_t> acc(static_cast<std::size_t>(out.elements()));
    const int k    = spec.kernel;
    const int cin  = input.shape.channels;
    const int cout = out.channels;

    if (spec.kind == LayerKind::AvgPool)
    {
        for (int i = 0; i < out.height; ++i)
        {
            for (int j = 0; j < out.width; ++j)
            {
                for (int c = 0; c < cout; ++c)
                {
                    std::int64_t sum = 0;
                    for (int dy = 0; dy < k; ++dy)
                    {
                        for (int dx = 0; dx < k; ++dx)
                        {
                            sum += input.at(spec.stride * i + dy, spec.stride * j + dx, c);
                        }
                    }
                    acc[(static_cast<std::size_t>(i) * out.width + j) * cout + c] = checked_int32(sum);
                }
            }
        }
        return acc;
    }

    if (!is_conv(spec.kind))
    {
        throw ConfigError("layer_accumulators handles conv and pooling layers only");
    }
    if (weights.values.size() != static_cast<std::size_t>(spec.weight_count()))
    {
        throw ConfigError("weight tensor size does not match the layer");
    }

    const int pad         = (k - 1) / 2;
    const bool depthwise  = spec.kind == LayerKind::DepthwiseConv;
    const auto* w         = weights.values.data();
    for (int i = 0; i < out.height; ++i)
    {
        for (int j = 0; j < out.width; ++j)
        {
            for (int co = 0; co < cout; ++co)
            {
                std::int64_t sum = 0;
                for (int dy = 0; dy < k; ++dy)
                {
                    const int y = spec.stride * i + dy - pad;
                    if (y < 0 || y >= input.shape.height)
                    {
                        continue;
                    }
                    for (int dx = 0; dx < k; ++dx)
                    {
                        const int x = spec.stride * j + dx - pad;
                        if (x < 0 || x >= input.shape.width)
                        {
                            continue;
                        }
                        if (depthwise)
                        {
                            sum += std::int64_t{ input.at(y, x, co) } * w[(co * k + dy) * k + dx];
                        }
                        else
                        {
                            const std::int8_t* px = &input.values[input.index(y, x, 0)];
                            const std::int8_t* wk = &w[((static_cast<std::size_t>(co) * k + dy) * k + dx) * cin];
                            for (int ci = 0; ci < cin; ++ci)
                            {
                                sum += std::int64_t{ px[ci] } * wk[ci];
                            }
                        }
                    }
                }
                acc[(static_cast<std::size_t>(i) * out.width + j) * cout + co] = checked_int32(sum);
            }
        }
    }
    return acc;
}

std::vector<std::int8_t> apply_affine(std::span<const std::int32_t> acc, int channels, const BnRegisters& affine,
                                      bool relu)
{
    if (affine.multiplier.size() != static_cast<std::size_t>(channels) ||
        affine.bias.size() != static_cast<std::size_t>(channels))
    {
        throw ConfigError("requantizer register file does not match the channel count");
    }
    std::vector<std::int8_t> out(acc.size());
    for (std::size_t n = 0; n < acc.size(); ++n)
    {
        const std::size_t c = n % static_cast<std::size_t>(channels);
        const std::int64_t v = affine_value(acc[n], affine.multiplier[c], affine.bias[c]);
        std::int8_t q        = saturate_int8(round_shift_half_even(v, affine.shift));
        if (relu && q < 0)
        {
            q = 0;
        }
        out[n] = q;
    }
    return out;
}

Activation run_layer(const LayerSpec& spec, const FrozenLayer& layer, const Activation& input)
{
    const Shape3 out_shape = layer_output_shape(spec, input.shape);
    const auto acc         = layer_accumulators(spec, layer.weights, input);
    return { out_shape, layer.output_exp, apply_affine(acc, out_shape.channels, layer.affine, spec.has_relu) };
}

std::vector<std::int32_t> run_fully_connected(const LayerSpec& spec, const FrozenLayer& layer, const Activation& input)
{
    if (static_cast<std::int64_t>(input.values.size()) != spec.in_channels)
    {
        throw ConfigError("FC input size does not match the layer");
    }
    if (layer.fc_bias.size() != static_cast<std::size_t>(spec.out_channels))
    {
        throw ConfigError("FC bias does not match the layer");
    }
    std::vector<std::int32_t> logits;
    logits.reserve(static_cast<std::size_t>(spec.out_channels));
    for (int o = 0; o < spec.out_channels; ++o)
    {
        std::int64_t sum        = 0;
        const std::int8_t* row  = &layer.weights.values[static_cast<std::size_t>(o) * spec.in_channels];
        for (int i = 0; i < spec.in_channels; ++i)
        {
            sum += std::int64_t{ input.values[static_cast<std::size_t>(i)] } * row[i];
        }
        logits.push_back(checked_int32(std::int64_t{ checked_int32(sum) } + layer.fc_bias[static_cast<std::size_t>(o)]));
    }
    return logits;
}

std::vector<Activation> run_layers(std::span<const LayerSpec> specs, std::span<const FrozenLayer> layers,
                                   const Activation& input)
{
    std::vector<Activation> outputs;
    outputs.reserve(specs.size());
    const Activation* current = &input;
    for (std::size_t i = 0; i < specs.size(); ++i)
    {
        outputs.push_back(run_layer(specs[i], layers[i], *current));
        current = &outputs.back();
    }
    return outputs;
}

InferenceTrace infer(const FrozenModel& model, const Activation& input)
{
    check_input(model.graph.input_shape(), input, "infer");
    const int fc_index = model.graph.size() - 1;
    std::span<const LayerSpec> specs(model.graph.layers().data(), static_cast<std::size_t>(fc_index));
    std::span<const FrozenLayer> layers(model.layers.data(), static_cast<std::size_t>(fc_index));

    InferenceTrace trace;
    trace.layer_outputs = run_layers(specs, layers, input);
    const Activation& last = trace.layer_outputs.empty() ? input : trace.layer_outputs.back();
    const FrozenLayer& fc  = model.layers[static_cast<std::size_t>(fc_index)];
    trace.logits           = run_fully_connected(model.graph.layer(fc_index), fc, last);
    trace.logit_exp        = fc.input_exp + fc.weights.scale_exponent;
    return trace;
}

Activation infer_prefix(const FrozenModel& model, const Activation& input, int n_layers)
{
    check_input(model.graph.input_shape(), input, "infer_prefix");
    if (n_layers < 0 || n_layers >= model.graph.size())
    {
        throw ConfigError("prefix length " + std::to_string(n_layers) + " out of range");
    }
    Activation current = input;
    for (int i = 0; i < n_layers; ++i)
    {
        current = run_layer(model.graph.layer(i), model.layers[static_cast<std::size_t>(i)], current);
    }
    return current;
}

Activation tap(const FrozenModel& model, const Activation& input, int k, int n_fixed)
{
    if (n_fixed < 1 || n_fixed > model.graph.fixable_units())
    {
        throw ConfigError("n_fixed " + std::to_string(n_fixed) + " outside 1.." +
                          std::to_string(model.graph.fixable_units()));
    }
    if (k < 1 || k > n_fixed)
    {
        throw ConfigError("tap " + std::to_string(k) + " outside 1.." + std::to_string(n_fixed));
    }
    return infer_prefix(model, input, model.graph.prefix_layer_count(k));
}

}    // namespace fixynn
