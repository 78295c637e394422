//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fixynn
{

enum class LayerKind
{
    FullConv,
    DepthwiseConv,
    PointwiseConv,
    AvgPool,
    FullyConnected,
};

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

bool is_conv(LayerKind kind);

struct Shape3
{
    int height = 0;
    int width  = 0;
    int channels = 0;

    std::int64_t pixels() const { return std::int64_t{height} * width; }
    std::int64_t elements() const { return pixels() * channels; }

    bool operator==(const Shape3&) const = default;
};

struct LayerSpec
{
    LayerKind kind   = LayerKind::FullConv;
    int in_channels  = 1;
    int out_channels = 1;
    int kernel       = 1;
    int stride       = 1;
    bool has_bn      = false;
    bool has_relu    = false;

    /// Dense weight count implied by the layer shape (0 for pooling).
    std::int64_t weight_count() const;
    /// Inputs feeding one output element of a conv (k*k*C_in per group).
    std::int64_t fan_in() const;
    /// Rank/dims of the weight tensor: conv [Cout,k,k,Cin], depthwise [C,k,k], FC [out,in].
    std::vector<std::uint32_t> weight_dims() const;

    bool operator==(const LayerSpec&) const = default;
};

/// Half-open layer range [first, last) forming one fixable "layer" for split counting:
/// the initial full conv, or a depthwise+pointwise pair.
struct PrefixUnit
{
    int first = 0;
    int last  = 0;
};

/// Ordered CNN description. Validated on construction and immutable afterwards.
class Graph
{
public:
    Graph(Shape3 input_shape, std::vector<LayerSpec> layers);

    const Shape3& input_shape() const { return input_shape_; }
    const std::vector<LayerSpec>& layers() const { return layers_; }
    const LayerSpec& layer(int index) const { return layers_.at(static_cast<std::size_t>(index)); }
    int size() const { return static_cast<int>(layers_.size()); }

    Shape3 input_of(int index) const { return shapes_.at(static_cast<std::size_t>(index)); }
    Shape3 output_of(int index) const { return shapes_.at(static_cast<std::size_t>(index) + 1); }

    const std::vector<PrefixUnit>& prefix_units() const { return units_; }
    int fixable_units() const { return static_cast<int>(units_.size()); }
    /// Number of leading layers covered by the first n units.
    int prefix_layer_count(int n_units) const;

private:
    Shape3 input_shape_;
    std::vector<LayerSpec> layers_;
    std::vector<Shape3> shapes_;    // shapes_[i] feeds layer i; back() is the graph output
    std::vector<PrefixUnit> units_;
};

/// Output shape of one layer, or ConfigError if the layer cannot accept the input.
Shape3 layer_output_shape(const LayerSpec& layer, const Shape3& input);

/// Standard 14-unit MobileNetV1 with channels scaled by the width multiplier.
Graph build_mobilenet(double width_multiplier, int input_resolution, int num_classes);

struct MacCount
{
    std::vector<std::int64_t> per_layer;
    std::int64_t total = 0;
};

struct ParamCount
{
    std::vector<std::int64_t> per_layer;    // weights, plus bias for FC
    std::vector<std::int64_t> bn_per_layer; // scale + bias per BN site
    std::int64_t total    = 0;
    std::int64_t bn_total = 0;
};

MacCount count_macs(const Graph& graph);
ParamCount count_params(const Graph& graph);

/// Share of total MACs (FC included) spent in the first n_fixed prefix units.
double fixed_ops_fraction(const Graph& graph, int n_fixed);

}    // namespace fixynn
