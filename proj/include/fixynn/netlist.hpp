//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "fixynn/frozen_model.hpp"
#include "fixynn/model_ir.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace fixynn
{

/// A constant-coefficient multiplier: weight * window[tap_row][tap_col][in_channel] -> out_channel.
struct Multiplier
{
    int weight      = 0;
    int tap_row     = 0;
    int tap_col     = 0;
    int in_channel  = 0;
    int out_channel = 0;

    bool operator==(const Multiplier&) const = default;
};

/// One fully-unrolled layer: a line-buffered window feeding per-channel adder trees,
/// then the BN register file, requantizer and ReLU. Emits one output pixel per cycle.
struct Stage
{
    int layer_index = 0;
    LayerKind kind  = LayerKind::FullConv;
    int kernel      = 1;
    int stride      = 1;
    Shape3 input;
    Shape3 output;
    std::int64_t dense_weights = 0;    // before pruning; sets the ops this stage delivers

    std::vector<Multiplier> multipliers;    // ordered by out_channel, then tap, then in_channel

    BnRegisters bn;    // reset values of the register file
    bool relu      = false;
    int output_exp = 0;

    int pad() const { return (kernel - 1) / 2; }
    int line_buffer_rows() const { return kernel - 1; }
    /// Nonzero taps feeding each output channel.
    std::vector<int> fan_in_per_channel() const;
    int max_fan_in() const;
    /// Cycles from the first input pixel to the first output pixel leaving the stage.
    int latency() const;

    bool operator==(const Stage&) const = default;
};

struct FreezeSpec
{
    int n_fixed = 0;
    std::vector<int> taps;         // prefix-unit boundaries exposed as ports, each in 1..n_fixed
    bool bn_programmable = true;
};

struct TapPort
{
    int boundary = 0;    // prefix unit k
    int stage    = 0;    // stage whose output drives the port

    bool operator==(const TapPort&) const = default;
};

inline constexpr int kNetlistVersion = 1;

struct Netlist
{
    int version          = kNetlistVersion;
    int n_fixed          = 0;
    bool bn_programmable = true;
    double clock_hz      = 810e6;
    Shape3 input;
    Shape3 output;
    int input_exp  = 0;
    int output_exp = 0;
    std::vector<Stage> stages;
    std::vector<TapPort> taps;
    std::vector<int> unit_last_stage;    // stage index ending each prefix unit

    bool operator==(const Netlist&) const = default;
};

/// Per-stage latency contributions beyond the window fill: adder tree + BN, requant, ReLU registers.
inline constexpr int kPostTreeLatency = 3;

/// Lower the first n_fixed prefix units into a fixed-weight pipelined datapath.
Netlist freeze(const FrozenModel& model, const FreezeSpec& spec);

/// Throws StructureError when the netlist breaks its own invariants.
void validate(const Netlist& netlist);

struct PipelineStats
{
    std::int64_t multipliers       = 0;
    std::int64_t adders            = 0;
    std::int64_t register_bits     = 0;
    std::int64_t line_buffer_bits  = 0;
    std::int64_t pipeline_depth    = 0;
    std::int64_t max_stage_output_pixels = 0;
    std::int64_t dense_macs_per_frame    = 0;

    bool operator==(const PipelineStats&) const = default;
};

PipelineStats pipeline_stats(const Netlist& netlist);

nlohmann::json netlist_to_json(const Netlist& netlist);
Netlist netlist_from_json(const nlohmann::json& json);

void save_netlist(const Netlist& netlist, const std::filesystem::path& path);
Netlist load_netlist(const std::filesystem::path& path);

/// The layer list the netlist implements, rebuilt from its stages. Lets the golden
/// executor run on a netlist without the source model.
struct PrefixModel
{
    std::vector<LayerSpec> specs;
    std::vector<FrozenLayer> layers;
};

PrefixModel prefix_model(const Netlist& netlist);

}    // namespace fixynn
