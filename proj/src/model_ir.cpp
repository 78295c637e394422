//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/model_ir.hpp"

#include "fixynn/errors.hpp"

#include <array>
#include <cmath>
#include <numeric>

namespace fixynn
{

namespace
{

struct KindName
{
    LayerKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 5> kKindNames{ {
    { LayerKind::FullConv, "full_conv" },
    { LayerKind::DepthwiseConv, "depthwise_conv" },
    { LayerKind::PointwiseConv, "pointwise_conv" },
    { LayerKind::AvgPool, "avg_pool" },
    { LayerKind::FullyConnected, "fully_connected" },
} };

std::string describe(int index, const LayerSpec& layer)
{
    return "layer " + std::to_string(index) + " (" + std::string(to_string(layer.kind)) + ")";
}

}    // namespace

std::string_view to_string(LayerKind kind)
{
    for (const auto& entry : kKindNames)
    {
        if (entry.kind == kind)
        {
            return entry.name;
        }
    }
    return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name)
{
    for (const auto& entry : kKindNames)
    {
        if (entry.name == name)
        {
            return entry.kind;
        }
    }
    throw FormatError("unknown layer kind '" + std::string(name) + "'");
}

bool is_conv(LayerKind kind)
{
    return kind == LayerKind::FullConv || kind == LayerKind::DepthwiseConv || kind == LayerKind::PointwiseConv;
}

std::int64_t LayerSpec::fan_in() const
{
    switch (kind)
    {
        case LayerKind::FullConv:
        case LayerKind::PointwiseConv:
            return std::int64_t{ kernel } * kernel * in_channels;
        case LayerKind::DepthwiseConv:
            return std::int64_t{ kernel } * kernel;
        case LayerKind::FullyConnected:
            return in_channels;
        case LayerKind::AvgPool:
            return std::int64_t{ kernel } * kernel;
    }
    return 0;
}

std::int64_t LayerSpec::weight_count() const
{
    if (kind == LayerKind::AvgPool)
    {
        return 0;
    }
    return fan_in() * out_channels;
}

std::vector<std::uint32_t> LayerSpec::weight_dims() const
{
    const auto k    = static_cast<std::uint32_t>(kernel);
    const auto cin  = static_cast<std::uint32_t>(in_channels);
    const auto cout = static_cast<std::uint32_t>(out_channels);
    switch (kind)
    {
        case LayerKind::FullConv:
        case LayerKind::PointwiseConv:
            return { cout, k, k, cin };
        case LayerKind::DepthwiseConv:
            return { cout, k, k };
        case LayerKind::FullyConnected:
            return { cout, cin };
        case LayerKind::AvgPool:
            return {};
    }
    return {};
}

Shape3 layer_output_shape(const LayerSpec& layer, const Shape3& input)
{
    switch (layer.kind)
    {
        case LayerKind::FullConv:
        case LayerKind::DepthwiseConv:
        case LayerKind::PointwiseConv:
            // SAME padding: ceil(H / s)
            return { (input.height + layer.stride - 1) / layer.stride, (input.width + layer.stride - 1) / layer.stride,
                     layer.out_channels };
        case LayerKind::AvgPool:
            // VALID window
            return { (input.height - layer.kernel) / layer.stride + 1, (input.width - layer.kernel) / layer.stride + 1,
                     input.channels };
        case LayerKind::FullyConnected:
            return { 1, 1, layer.out_channels };
    }
    return {};
}

Graph::Graph(Shape3 input_shape, std::vector<LayerSpec> layers)
    : input_shape_(input_shape)
    , layers_(std::move(layers))
{
    if (input_shape_.height < 1 || input_shape_.width < 1 || input_shape_.channels < 1)
    {
        throw ConfigError("graph input shape must be positive in every dimension");
    }
    if (layers_.empty())
    {
        throw ConfigError("graph has no layers");
    }

    shapes_.push_back(input_shape_);
    Shape3 current = input_shape_;
    for (int i = 0; i < size(); ++i)
    {
        const LayerSpec& layer = layers_[static_cast<std::size_t>(i)];
        if (layer.kernel < 1)
        {
            throw ConfigError(describe(i, layer) + ": kernel must be >= 1");
        }
        if (layer.stride != 1 && layer.stride != 2)
        {
            throw ConfigError(describe(i, layer) + ": stride must be 1 or 2");
        }
        if (layer.in_channels < 1 || layer.out_channels < 1)
        {
            throw ConfigError(describe(i, layer) + ": channel counts must be >= 1");
        }
        if (layer.kind == LayerKind::DepthwiseConv && layer.in_channels != layer.out_channels)
        {
            throw ConfigError(describe(i, layer) + ": depthwise conv needs in_channels == out_channels");
        }
        if (layer.kind == LayerKind::PointwiseConv && layer.kernel != 1)
        {
            throw ConfigError(describe(i, layer) + ": pointwise conv needs kernel 1");
        }
        if (layer.kind == LayerKind::FullyConnected)
        {
            if (i != size() - 1)
            {
                throw ConfigError(describe(i, layer) + ": fully connected layer must be last");
            }
            if (layer.in_channels != current.elements())
            {
                throw ConfigError(describe(i, layer) + ": in_channels " + std::to_string(layer.in_channels) +
                                  " does not match flattened input " + std::to_string(current.elements()));
            }
        }
        else
        {
            if (layer.in_channels != current.channels)
            {
                throw ConfigError(describe(i, layer) + ": in_channels " + std::to_string(layer.in_channels) +
                                  " does not match incoming " + std::to_string(current.channels));
            }
        }
        if (layer.kind == LayerKind::AvgPool)
        {
            if (layer.in_channels != layer.out_channels)
            {
                throw ConfigError(describe(i, layer) + ": pooling keeps the channel count");
            }
            if (current.height < layer.kernel || current.width < layer.kernel)
            {
                throw ConfigError(describe(i, layer) + ": pooling window larger than input");
            }
        }
        current = layer_output_shape(layer, current);
        if (current.height < 1 || current.width < 1)
        {
            throw ConfigError(describe(i, layer) + ": spatial size collapsed below 1");
        }
        shapes_.push_back(current);
    }
    if (layers_.back().kind != LayerKind::FullyConnected)
    {
        throw ConfigError("graph must end with exactly one fully connected layer");
    }

    // Fixable prefix: convs only, a depthwise followed by a pointwise counts once.
    int i = 0;
    while (i < size() && is_conv(layers_[static_cast<std::size_t>(i)].kind))
    {
        const bool paired = layers_[static_cast<std::size_t>(i)].kind == LayerKind::DepthwiseConv && i + 1 < size() &&
                            layers_[static_cast<std::size_t>(i) + 1].kind == LayerKind::PointwiseConv;
        const int width = paired ? 2 : 1;
        units_.push_back({ i, i + width });
        i += width;
    }
}

int Graph::prefix_layer_count(int n_units) const
{
    if (n_units < 0 || n_units > fixable_units())
    {
        throw ConfigError("split depth " + std::to_string(n_units) + " outside 0.." + std::to_string(fixable_units()));
    }
    return n_units == 0 ? 0 : units_[static_cast<std::size_t>(n_units) - 1].last;
}

Graph build_mobilenet(double width_multiplier, int input_resolution, int num_classes)
{
    constexpr std::array<double, 4> kMultipliers{ 0.25, 0.5, 0.75, 1.0 };
    bool supported = false;
    for (double m : kMultipliers)
    {
        supported = supported || std::abs(m - width_multiplier) < 1e-9;
    }
    if (!supported)
    {
        throw ConfigError("unsupported width multiplier " + std::to_string(width_multiplier) +
                          " (expected 0.25, 0.5, 0.75 or 1.0)");
    }
    if (input_resolution < 32 || input_resolution % 32 != 0)
    {
        throw ConfigError("input resolution " + std::to_string(input_resolution) + " must be a positive multiple of 32");
    }
    if (num_classes < 1)
    {
        throw ConfigError("num_classes must be >= 1");
    }

    constexpr std::array<int, 14> kChannels{ 32, 64, 128, 128, 256, 256, 512, 512, 512, 512, 512, 512, 1024, 1024 };
    constexpr std::array<int, 14> kStrides{ 2, 1, 2, 1, 2, 1, 2, 1, 1, 1, 1, 1, 2, 1 };

    auto scaled = [&](int channels) {
        // round half up, floor at 1
        return std::max(1, static_cast<int>(std::floor(channels * width_multiplier + 0.5)));
    };

    std::vector<LayerSpec> layers;
    int channels = scaled(kChannels[0]);
    layers.push_back({ LayerKind::FullConv, 3, channels, 3, kStrides[0], true, true });
    for (std::size_t unit = 1; unit < kChannels.size(); ++unit)
    {
        const int out = scaled(kChannels[unit]);
        layers.push_back({ LayerKind::DepthwiseConv, channels, channels, 3, kStrides[unit], true, true });
        layers.push_back({ LayerKind::PointwiseConv, channels, out, 1, 1, true, true });
        channels = out;
    }
    const int final_spatial = input_resolution / 32;
    layers.push_back({ LayerKind::AvgPool, channels, channels, final_spatial, 1, false, false });
    layers.push_back({ LayerKind::FullyConnected, channels, num_classes, 1, 1, false, false });
    return Graph({ input_resolution, input_resolution, 3 }, std::move(layers));
}

MacCount count_macs(const Graph& graph)
{
    MacCount result;
    for (int i = 0; i < graph.size(); ++i)
    {
        const LayerSpec& layer = graph.layer(i);
        std::int64_t macs = 0;
        if (is_conv(layer.kind))
        {
            macs = graph.output_of(i).pixels() * layer.weight_count();
        }
        else if (layer.kind == LayerKind::FullyConnected)
        {
            macs = std::int64_t{ layer.in_channels } * layer.out_channels;
        }
        result.per_layer.push_back(macs);
        result.total += macs;
    }
    return result;
}

ParamCount count_params(const Graph& graph)
{
    ParamCount result;
    for (const LayerSpec& layer : graph.layers())
    {
        std::int64_t params = layer.weight_count();
        if (layer.kind == LayerKind::FullyConnected)
        {
            params += layer.out_channels;
        }
        const std::int64_t bn = layer.has_bn ? 2 * std::int64_t{ layer.out_channels } : 0;
        result.per_layer.push_back(params);
        result.bn_per_layer.push_back(bn);
        result.total += params;
        result.bn_total += bn;
    }
    return result;
}

double fixed_ops_fraction(const Graph& graph, int n_fixed)
{
    const int prefix = graph.prefix_layer_count(n_fixed);
    const MacCount macs = count_macs(graph);
    if (macs.total == 0)
    {
        return 0.0;
    }
    const std::int64_t fixed = std::accumulate(macs.per_layer.begin(), macs.per_layer.begin() + prefix, std::int64_t{ 0 });
    return static_cast<double>(fixed) / static_cast<double>(macs.total);
}

}    // namespace fixynn
