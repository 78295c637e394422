//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/netlist.hpp"

#include "fixynn/errors.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <tuple>

namespace fixynn
{

namespace
{

int ceil_log2(int n)
{
    return n <= 1 ? 0 : std::bit_width(static_cast<unsigned>(n - 1));
}

nlohmann::json shape_json(const Shape3& s)
{
    return { s.height, s.width, s.channels };
}

Shape3 shape_from(const nlohmann::json& j)
{
    if (!j.is_array() || j.size() != 3)
    {
        throw FormatError("shape must be [height, width, channels]");
    }
    return { j[0].get<int>(), j[1].get<int>(), j[2].get<int>() };
}

std::size_t weight_offset(const Stage& stage, const Multiplier& m)
{
    const auto k = static_cast<std::size_t>(stage.kernel);
    if (stage.kind == LayerKind::DepthwiseConv)
    {
        return (static_cast<std::size_t>(m.out_channel) * k + static_cast<std::size_t>(m.tap_row)) * k +
               static_cast<std::size_t>(m.tap_col);
    }
    const auto cin = static_cast<std::size_t>(stage.input.channels);
    return ((static_cast<std::size_t>(m.out_channel) * k + static_cast<std::size_t>(m.tap_row)) * k +
            static_cast<std::size_t>(m.tap_col)) *
               cin +
           static_cast<std::size_t>(m.in_channel);
}

LayerSpec stage_spec(const Stage& stage)
{
    return { stage.kind, stage.input.channels, stage.output.channels, stage.kernel, stage.stride, false, stage.relu };
}

}    // namespace

std::vector<int> Stage::fan_in_per_channel() const
{
    std::vector<int> fan(static_cast<std::size_t>(output.channels), 0);
    for (const Multiplier& m : multipliers)
    {
        ++fan.at(static_cast<std::size_t>(m.out_channel));
    }
    return fan;
}

int Stage::max_fan_in() const
{
    const auto fan = fan_in_per_channel();
    return fan.empty() ? 0 : *std::max_element(fan.begin(), fan.end());
}

int Stage::latency() const
{
    // window fill: the first output needs pad rows plus pad pixels of input, plus the capture register
    const int fill = pad() * input.width + pad() + 1;
    return fill + ceil_log2(max_fan_in()) + kPostTreeLatency;
}

Netlist freeze(const FrozenModel& model, const FreezeSpec& spec)
{
    const Graph& graph = model.graph;
    if (spec.n_fixed < 0 || spec.n_fixed > graph.fixable_units())
    {
        throw ConfigError("split depth " + std::to_string(spec.n_fixed) + " outside 0.." +
                          std::to_string(graph.fixable_units()));
    }
    std::set<int> taps(spec.taps.begin(), spec.taps.end());
    for (int t : taps)
    {
        if (t < 1 || t > spec.n_fixed)
        {
            throw ConfigError("tap " + std::to_string(t) + " outside 1.." + std::to_string(spec.n_fixed));
        }
    }

    Netlist net;
    net.n_fixed         = spec.n_fixed;
    net.bn_programmable = spec.bn_programmable;
    net.input           = graph.input_shape();
    net.output          = graph.input_shape();
    net.input_exp       = model.input_exp;
    net.output_exp      = model.input_exp;

    const int n_layers = graph.prefix_layer_count(spec.n_fixed);
    for (int i = 0; i < n_layers; ++i)
    {
        const LayerSpec& layer   = graph.layer(i);
        const FrozenLayer& fl    = model.layers.at(static_cast<std::size_t>(i));
        if (fl.weights.values.size() != static_cast<std::size_t>(layer.weight_count()))
        {
            throw ConfigError("layer " + std::to_string(i) + " has no quantized weights");
        }

        Stage stage;
        stage.layer_index   = i;
        stage.kind          = layer.kind;
        stage.kernel        = layer.kernel;
        stage.stride        = layer.stride;
        stage.input         = graph.input_of(i);
        stage.output        = graph.output_of(i);
        stage.dense_weights = layer.weight_count();
        stage.bn            = fl.affine;
        stage.relu          = layer.has_relu;
        stage.output_exp    = fl.output_exp;

        const int k   = layer.kernel;
        const int cin = layer.kind == LayerKind::DepthwiseConv ? 1 : layer.in_channels;
        for (int co = 0; co < layer.out_channels; ++co)
        {
            for (int dy = 0; dy < k; ++dy)
            {
                for (int dx = 0; dx < k; ++dx)
                {
                    for (int ci = 0; ci < cin; ++ci)
                    {
                        const auto offset = ((static_cast<std::size_t>(co) * k + dy) * k + dx) * cin + ci;
                        const int w       = fl.weights.values[offset];
                        if (w == 0)
                        {
                            continue;
                        }
                        const int source = layer.kind == LayerKind::DepthwiseConv ? co : ci;
                        stage.multipliers.push_back({ w, dy, dx, source, co });
                    }
                }
            }
        }
        net.output     = stage.output;
        net.output_exp = stage.output_exp;
        net.stages.push_back(std::move(stage));
    }

    for (int u = 0; u < spec.n_fixed; ++u)
    {
        net.unit_last_stage.push_back(graph.prefix_units()[static_cast<std::size_t>(u)].last - 1);
    }
    for (int t : taps)
    {
        net.taps.push_back({ t, net.unit_last_stage[static_cast<std::size_t>(t) - 1] });
    }
    validate(net);
    return net;
}

void validate(const Netlist& net)
{
    auto fail = [](const std::string& msg) { throw StructureError("netlist: " + msg); };
    if (net.version != kNetlistVersion)
    {
        fail("unsupported version " + std::to_string(net.version));
    }
    Shape3 current = net.input;
    for (std::size_t s = 0; s < net.stages.size(); ++s)
    {
        const Stage& st   = net.stages[s];
        const std::string where = "stage " + std::to_string(s) + ": ";
        if (!is_conv(st.kind))
        {
            fail(where + "only conv layers can be frozen");
        }
        if (!(st.input == current))
        {
            fail(where + "input shape does not chain from the previous stage");
        }
        const LayerSpec spec = stage_spec(st);
        if (st.kernel < 1 || (st.stride != 1 && st.stride != 2) ||
            (st.kind == LayerKind::DepthwiseConv && st.input.channels != st.output.channels) ||
            (st.kind == LayerKind::PointwiseConv && st.kernel != 1))
        {
            fail(where + "invalid layer geometry");
        }
        if (!(layer_output_shape(spec, st.input) == st.output))
        {
            fail(where + "output shape inconsistent with stride arithmetic");
        }
        if (st.dense_weights != spec.weight_count())
        {
            fail(where + "dense weight count inconsistent with geometry");
        }
        std::set<std::tuple<int, int, int, int>> seen;
        for (const Multiplier& m : st.multipliers)
        {
            if (m.weight == 0 || m.weight < -128 || m.weight > 127)
            {
                fail(where + "multiplier weight " + std::to_string(m.weight) + " is zero or not int8");
            }
            if (m.out_channel < 0 || m.out_channel >= st.output.channels || m.in_channel < 0 ||
                m.in_channel >= st.input.channels || m.tap_row < 0 || m.tap_row >= st.kernel || m.tap_col < 0 ||
                m.tap_col >= st.kernel)
            {
                fail(where + "multiplier tap out of range");
            }
            if (st.kind == LayerKind::DepthwiseConv && m.in_channel != m.out_channel)
            {
                fail(where + "depthwise multiplier crosses channels");
            }
            if (!seen.insert({ m.out_channel, m.tap_row, m.tap_col, m.in_channel }).second)
            {
                fail(where + "duplicate multiplier position");
            }
        }
        if (st.bn.multiplier.size() != static_cast<std::size_t>(st.output.channels) ||
            st.bn.bias.size() != st.bn.multiplier.size())
        {
            fail(where + "BN register file does not match the channel count");
        }
        for (auto m : st.bn.multiplier)
        {
            if (m < -(1 << 15) || m >= (1 << 15))
            {
                fail(where + "BN multiplier exceeds 16 bits");
            }
        }
        if (st.bn.shift < 0 || st.bn.shift > kMaxBnShift)
        {
            fail(where + "BN shift out of range");
        }
        current = st.output;
    }
    if (!(current == net.output))
    {
        fail("declared output shape does not match the last stage");
    }
    if (net.unit_last_stage.size() != static_cast<std::size_t>(net.n_fixed))
    {
        fail("unit boundary table does not match n_fixed");
    }
    int previous = -1;
    for (int last : net.unit_last_stage)
    {
        if (last <= previous || last >= static_cast<int>(net.stages.size()))
        {
            fail("unit boundaries must be increasing stage indices");
        }
        previous = last;
    }
    if (net.n_fixed > 0 && previous != static_cast<int>(net.stages.size()) - 1)
    {
        fail("last unit must end at the last stage");
    }
    for (const TapPort& t : net.taps)
    {
        if (t.boundary < 1 || t.boundary > net.n_fixed ||
            t.stage != net.unit_last_stage[static_cast<std::size_t>(t.boundary) - 1])
        {
            fail("tap port " + std::to_string(t.boundary) + " does not sit on a declared prefix boundary");
        }
    }
}

PipelineStats pipeline_stats(const Netlist& net)
{
    PipelineStats stats;
    for (const Stage& st : net.stages)
    {
        stats.multipliers += static_cast<std::int64_t>(st.multipliers.size());
        for (int fan : st.fan_in_per_channel())
        {
            stats.adders += std::max(fan - 1, 0);
        }
        stats.register_bits += std::int64_t{ st.kernel } * st.kernel * st.input.channels * 8;    // window
        stats.register_bits += std::int64_t{ st.output.channels } * 8;                         // output pixel
        if (net.bn_programmable)
        {
            stats.register_bits += std::int64_t{ st.output.channels } * (16 + 32);    // BN multiplier + bias
        }
        stats.line_buffer_bits += std::int64_t{ st.line_buffer_rows() } * st.input.width * st.input.channels * 8;
        stats.pipeline_depth += st.latency();
        stats.max_stage_output_pixels = std::max(stats.max_stage_output_pixels, st.output.pixels());
        stats.dense_macs_per_frame += st.output.pixels() * st.dense_weights;
    }
    return stats;
}

nlohmann::json netlist_to_json(const Netlist& net)
{
    nlohmann::json stages = nlohmann::json::array();
    for (const Stage& st : net.stages)
    {
        nlohmann::json mults = nlohmann::json::array();
        for (const Multiplier& m : st.multipliers)
        {
            mults.push_back({ m.weight, m.tap_row, m.tap_col, m.in_channel, m.out_channel });
        }
        stages.push_back({
            { "layer", st.layer_index },
            { "kind", std::string(to_string(st.kind)) },
            { "kernel", st.kernel },
            { "stride", st.stride },
            { "input", shape_json(st.input) },
            { "output", shape_json(st.output) },
            { "dense_weights", st.dense_weights },
            { "relu", st.relu },
            { "output_exp", st.output_exp },
            { "bn", { { "shift", st.bn.shift }, { "multiplier", st.bn.multiplier }, { "bias", st.bn.bias } } },
            { "multipliers", mults },
        });
    }
    nlohmann::json taps = nlohmann::json::array();
    for (const TapPort& t : net.taps)
    {
        taps.push_back({ { "boundary", t.boundary }, { "stage", t.stage } });
    }
    return {
        { "format", "fixynn-netlist" },
        { "version", net.version },
        { "n_fixed", net.n_fixed },
        { "bn_programmable", net.bn_programmable },
        { "clock_hz", net.clock_hz },
        { "input", shape_json(net.input) },
        { "output", shape_json(net.output) },
        { "input_exp", net.input_exp },
        { "output_exp", net.output_exp },
        { "unit_last_stage", net.unit_last_stage },
        { "taps", taps },
        { "stages", stages },
    };
}

Netlist netlist_from_json(const nlohmann::json& j)
{
    Netlist net;
    try
    {
        if (j.value("format", "") != "fixynn-netlist")
        {
            throw FormatError("not a netlist file");
        }
        net.version         = j.at("version").get<int>();
        net.n_fixed         = j.at("n_fixed").get<int>();
        net.bn_programmable = j.at("bn_programmable").get<bool>();
        net.clock_hz        = j.at("clock_hz").get<double>();
        net.input           = shape_from(j.at("input"));
        net.output          = shape_from(j.at("output"));
        net.input_exp       = j.at("input_exp").get<int>();
        net.output_exp      = j.at("output_exp").get<int>();
        net.unit_last_stage = j.at("unit_last_stage").get<std::vector<int>>();
        for (const auto& t : j.at("taps"))
        {
            net.taps.push_back({ t.at("boundary").get<int>(), t.at("stage").get<int>() });
        }
        for (const auto& s : j.at("stages"))
        {
            Stage st;
            st.layer_index    = s.at("layer").get<int>();
            st.kind           = layer_kind_from_string(s.at("kind").get<std::string>());
            st.kernel         = s.at("kernel").get<int>();
            st.stride         = s.at("stride").get<int>();
            st.input          = shape_from(s.at("input"));
            st.output         = shape_from(s.at("output"));
            st.dense_weights  = s.at("dense_weights").get<std::int64_t>();
            st.relu           = s.at("relu").get<bool>();
            st.output_exp     = s.at("output_exp").get<int>();
            const auto& bn    = s.at("bn");
            st.bn.shift       = bn.at("shift").get<int>();
            st.bn.multiplier  = bn.at("multiplier").get<std::vector<std::int32_t>>();
            st.bn.bias        = bn.at("bias").get<std::vector<std::int32_t>>();
            for (const auto& m : s.at("multipliers"))
            {
                if (!m.is_array() || m.size() != 5)
                {
                    throw FormatError("multiplier record must be [weight, row, col, in, out]");
                }
                st.multipliers.push_back(
                    { m[0].get<int>(), m[1].get<int>(), m[2].get<int>(), m[3].get<int>(), m[4].get<int>() });
            }
            net.stages.push_back(std::move(st));
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw FormatError(std::string("malformed netlist: ") + e.what());
    }
    validate(net);
    return net;
}

void save_netlist(const Netlist& netlist, const std::filesystem::path& path)
{
    write_text_file(path, netlist_to_json(netlist).dump() + "\n");
}

Netlist load_netlist(const std::filesystem::path& path)
{
    return netlist_from_json(read_json_file(path));
}

PrefixModel prefix_model(const Netlist& netlist)
{
    PrefixModel model;
    int input_exp = netlist.input_exp;
    for (const Stage& st : netlist.stages)
    {
        const LayerSpec spec = stage_spec(st);
        FrozenLayer layer;
        layer.weights.dims = spec.weight_dims();
        layer.weights.values.assign(static_cast<std::size_t>(spec.weight_count()), 0);
        for (const Multiplier& m : st.multipliers)
        {
            layer.weights.values[weight_offset(st, m)] = static_cast<std::int8_t>(m.weight);
        }
        layer.input_exp  = input_exp;
        layer.output_exp = st.output_exp;
        layer.affine     = st.bn;
        input_exp        = st.output_exp;
        model.specs.push_back(spec);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

}    // namespace fixynn
