//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/frozen_model.hpp"

#include "fixynn/errors.hpp"
#include "fixynn/reference_exec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fixynn
{

namespace
{

struct AffineSource
{
    std::vector<float> gamma;
    std::vector<float> beta;
    LayerScales scales;
};

AffineSource affine_source(const LayerSpec& spec, const FrozenLayer& layer)
{
    AffineSource src;
    const auto channels = static_cast<std::size_t>(spec.out_channels);
    if (spec.kind == LayerKind::AvgPool)
    {
        src.gamma.assign(channels, 1.0f / static_cast<float>(spec.kernel * spec.kernel));
        src.beta.assign(channels, 0.0f);
        src.scales = { layer.input_exp, 0, layer.output_exp };
        return src;
    }
    if (spec.has_bn)
    {
        src.gamma = layer.bn_scale;
        src.beta  = layer.bn_bias;
    }
    else
    {
        src.gamma.assign(channels, 1.0f);
        src.beta.assign(channels, 0.0f);
    }
    src.scales = { layer.input_exp, layer.weights.scale_exponent, layer.output_exp };
    return src;
}

std::vector<std::int32_t> encode_fc_bias(const FrozenLayer& layer)
{
    const int exp = layer.input_exp + layer.weights.scale_exponent;
    std::vector<std::int32_t> out;
    for (float b : layer.fc_bias_real)
    {
        const double q = round_half_even(std::ldexp(static_cast<double>(b), -exp));
        if (q < std::numeric_limits<std::int32_t>::min() || q > std::numeric_limits<std::int32_t>::max())
        {
            throw ConfigError("FC bias " + std::to_string(b) + " does not fit 32 bits");
        }
        out.push_back(static_cast<std::int32_t>(q));
    }
    return out;
}

}    // namespace

void derive_registers(const LayerSpec& spec, FrozenLayer& layer)
{
    if (spec.kind == LayerKind::FullyConnected)
    {
        layer.fc_bias = encode_fc_bias(layer);
        return;
    }
    const AffineSource src = affine_source(spec, layer);
    layer.affine           = prepare_bn(src.gamma, src.beta, src.scales, layer.affine.shift);
}

FrozenModel FrozenModel::with_bn(int layer, std::span<const float> scale, std::span<const float> bias) const
{
    const LayerSpec& spec = graph.layer(layer);
    if (!spec.has_bn)
    {
        throw ConfigError("layer " + std::to_string(layer) + " has no BN");
    }
    if (scale.size() != static_cast<std::size_t>(spec.out_channels) || bias.size() != scale.size())
    {
        throw ConfigError("BN channel count mismatch on layer " + std::to_string(layer));
    }
    FrozenModel copy = *this;
    FrozenLayer& target = copy.layers[static_cast<std::size_t>(layer)];
    target.bn_scale.assign(scale.begin(), scale.end());
    target.bn_bias.assign(bias.begin(), bias.end());
    derive_registers(spec, target);
    return copy;
}

FrozenModel compress(const ModelBundle& bundle, const CompressOptions& options)
{
    bundle.validate();
    const Graph& graph = bundle.graph;
    if (!(options.sparsity >= 0.0 && options.sparsity <= 1.0))
    {
        throw ConfigError("sparsity must lie in [0, 1]");
    }

    std::vector<Activation> acts = options.calibration;
    if (acts.empty())
    {
        for (int n = 0; n < options.calibration_images; ++n)
        {
            acts.push_back(random_activation(graph.input_shape(), options.input_exp,
                                             options.calibration_seed + static_cast<std::uint64_t>(n)));
        }
    }
    for (const Activation& a : acts)
    {
        if (!(a.shape == graph.input_shape()))
        {
            throw ConfigError("calibration image shape does not match the model input");
        }
    }

    FrozenModel model{ graph, options.input_exp, options.bits, options.sparsity, {} };
    int current_exp = options.input_exp;
    for (int i = 0; i < graph.size(); ++i)
    {
        const LayerSpec& spec = graph.layer(i);
        FrozenLayer layer;
        layer.input_exp = current_exp;

        if (spec.kind != LayerKind::AvgPool)
        {
            const RealTensor& w = bundle.weights.at(i);
            const PruneResult pruned = prune_magnitude(w.values, { options.sparsity });
            layer.weights            = quantize_tensor(pruned.values, w.dims, options.bits);
        }

        if (spec.kind == LayerKind::FullyConnected)
        {
            layer.output_exp   = layer.input_exp + layer.weights.scale_exponent;
            layer.fc_bias_real = bundle.fc_bias.at(i).values;
            derive_registers(spec, layer);
            model.layers.push_back(std::move(layer));
            break;
        }

        if (spec.has_bn)
        {
            layer.bn_scale = bundle.bn.at(i).scale;
            layer.bn_bias  = bundle.bn.at(i).bias;
        }

        // Calibrate the output exponent on what the datapath will actually see.
        std::vector<std::vector<std::int32_t>> accs;
        accs.reserve(acts.size());
        for (const Activation& a : acts)
        {
            accs.push_back(layer_accumulators(spec, layer.weights, a));
        }
        if (spec.kind == LayerKind::AvgPool)
        {
            layer.output_exp = layer.input_exp;
        }
        else if (options.activation_exp)
        {
            layer.output_exp = *options.activation_exp;
        }
        else
        {
            layer.output_exp      = layer.input_exp;    // provisional, only the source gammas are read below
            const AffineSource src = affine_source(spec, layer);
            const int acc_exp      = layer.input_exp + layer.weights.scale_exponent;
            double max_abs         = 0.0;
            for (const auto& block : accs)
            {
                for (std::size_t n = 0; n < block.size(); ++n)
                {
                    const std::size_t c = n % static_cast<std::size_t>(spec.out_channels);
                    double real = src.gamma[c] * std::ldexp(static_cast<double>(block[n]), acc_exp) + src.beta[c];
                    if (spec.has_relu)
                    {
                        real = std::max(real, 0.0);
                    }
                    max_abs = std::max(max_abs, std::abs(real));
                }
            }
            layer.output_exp = max_abs > 0.0 ? scale_exponent_for(max_abs, options.bits) : layer.input_exp;
        }

        const AffineSource src = affine_source(spec, layer);
        layer.affine.shift     = choose_bn_shift(src.gamma, src.beta, src.scales, options.max_shift);
        derive_registers(spec, layer);

        const Shape3 out_shape = layer_output_shape(spec, acts.empty() ? graph.input_of(i) : acts.front().shape);
        for (std::size_t n = 0; n < acts.size(); ++n)
        {
            acts[n] = { out_shape, layer.output_exp,
                        apply_affine(accs[n], out_shape.channels, layer.affine, spec.has_relu) };
        }
        current_exp = layer.output_exp;
        model.layers.push_back(std::move(layer));
    }
    return model;
}

void save_frozen(const FrozenModel& model, const std::filesystem::path& manifest)
{
    std::vector<BlobRecord> records;
    nlohmann::json qlayers = nlohmann::json::array();
    for (int i = 0; i < model.graph.size(); ++i)
    {
        const LayerSpec& spec     = model.graph.layer(i);
        const FrozenLayer& layer  = model.layers.at(static_cast<std::size_t>(i));
        const auto index          = static_cast<std::uint16_t>(i);
        nlohmann::json q{ { "input_exp", layer.input_exp }, { "output_exp", layer.output_exp } };
        if (spec.kind != LayerKind::AvgPool)
        {
            q["weight_exp"] = layer.weights.scale_exponent;
            records.push_back({ index, TensorRole::Weight, layer.weights.dims, DType::I8, {}, layer.weights.values });
        }
        if (spec.kind != LayerKind::FullyConnected)
        {
            q["shift"] = layer.affine.shift;
        }
        if (spec.has_bn)
        {
            const std::vector<std::uint32_t> dims{ static_cast<std::uint32_t>(layer.bn_scale.size()) };
            records.push_back({ index, TensorRole::BnScale, dims, DType::F32, layer.bn_scale, {} });
            records.push_back({ index, TensorRole::BnBias, dims, DType::F32, layer.bn_bias, {} });
        }
        if (spec.kind == LayerKind::FullyConnected)
        {
            const std::vector<std::uint32_t> dims{ static_cast<std::uint32_t>(layer.fc_bias_real.size()) };
            records.push_back({ index, TensorRole::FcBias, dims, DType::F32, layer.fc_bias_real, {} });
        }
        qlayers.push_back(q);
    }

    auto blob = manifest;
    blob.replace_extension(".bin");
    nlohmann::json json   = graph_to_json(model.graph);
    json["format"]        = "fixynn-frozen-model";
    json["version"]       = 1;
    json["weights"]       = blob.filename().string();
    json["quantization"]  = {
        { "input_exp", model.input_exp },
        { "bits", model.bits },
        { "sparsity", model.target_sparsity },
        { "layers", qlayers },
    };
    write_text_file(manifest, json.dump(2) + "\n");
    write_file_bytes(blob, encode_blob(records));
}

FrozenModel load_frozen(const std::filesystem::path& manifest)
{
    const nlohmann::json json = read_json_file(manifest);
    if (json.value("format", "") != "fixynn-frozen-model")
    {
        throw FormatError(manifest.string() + " is not a frozen model (run `fixynn compress` first)");
    }
    Graph graph = graph_from_json(json);
    FrozenModel model{ graph, 0, 8, 0.0, {} };
    try
    {
        const auto& q         = json.at("quantization");
        model.input_exp       = q.at("input_exp").get<int>();
        model.bits            = q.at("bits").get<int>();
        model.target_sparsity = q.at("sparsity").get<double>();
        const auto& qlayers   = q.at("layers");
        if (qlayers.size() != static_cast<std::size_t>(graph.size()))
        {
            throw FormatError("quantization table does not cover every layer");
        }
        for (const auto& ql : qlayers)
        {
            FrozenLayer layer;
            layer.input_exp               = ql.at("input_exp").get<int>();
            layer.output_exp              = ql.at("output_exp").get<int>();
            layer.weights.scale_exponent  = ql.value("weight_exp", 0);
            layer.affine.shift            = ql.value("shift", 0);
            model.layers.push_back(std::move(layer));
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw FormatError(std::string("malformed quantization table: ") + e.what());
    }

    const std::string blob_name = json.value("weights", std::string{});
    for (BlobRecord& r : decode_blob(read_file_bytes(manifest.parent_path() / blob_name)))
    {
        if (r.layer >= model.layers.size())
        {
            throw FormatError("blob record for unknown layer " + std::to_string(r.layer));
        }
        FrozenLayer& layer = model.layers[r.layer];
        switch (r.role)
        {
            case TensorRole::Weight:
                if (r.dtype != DType::I8)
                {
                    throw FormatError("frozen weights must be int8");
                }
                layer.weights.dims   = r.dims;
                layer.weights.values = r.i8;
                break;
            case TensorRole::BnScale:
                layer.bn_scale = r.f32;
                break;
            case TensorRole::BnBias:
                layer.bn_bias = r.f32;
                break;
            case TensorRole::FcBias:
                layer.fc_bias_real = r.f32;
                break;
        }
    }

    for (int i = 0; i < graph.size(); ++i)
    {
        const LayerSpec& spec = graph.layer(i);
        FrozenLayer& layer    = model.layers[static_cast<std::size_t>(i)];
        if (spec.kind != LayerKind::AvgPool && layer.weights.dims != spec.weight_dims())
        {
            throw FormatError("layer " + std::to_string(i) + ": weight tensor missing or mis-shaped");
        }
        if (spec.has_bn && (layer.bn_scale.size() != static_cast<std::size_t>(spec.out_channels) ||
                            layer.bn_bias.size() != static_cast<std::size_t>(spec.out_channels)))
        {
            throw FormatError("layer " + std::to_string(i) + ": BN parameters missing");
        }
        derive_registers(spec, layer);
    }
    return model;
}

}    // namespace fixynn
