//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/errors.hpp"
#include "fixynn/netlist.hpp"
#include "support/mobilenet_fixture.hpp"
#include "support/random_net.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

using namespace fixynn;

namespace
{

std::int64_t prefix_nonzeros(const FrozenModel& m, int n_units)
{
    std::int64_t nz = 0;
    for (int i = 0; i < m.graph.prefix_layer_count(n_units); ++i)
    {
        nz += static_cast<std::int64_t>(m.layers[static_cast<std::size_t>(i)].weights.nonzero_count());
    }
    return nz;
}

}    // namespace

TEST_CASE("MobileNet-0.25 split statistics")
{
    const FrozenModel& m = testing::mobilenet025();
    struct Row
    {
        int n;
        PipelineStats stats;
    };
    // adders = sum over output channels of (fan - 1); pooling-free prefixes; BN registers programmable.
    const std::vector<Row> rows{
        { 4, { 1192, 1049, 12760, 82432, 562, 12544, 11389952 } },
        { 7, { 9080, 8522, 48856, 168448, 0, 12544, 18602752 } },
        { 11, { 44152, 42570, 147160, 283136, 0, 12544, 32350976 } },
    };
    for (const Row& r : rows)
    {
        const Netlist net        = freeze(m, { r.n, {}, true });
        const PipelineStats s    = pipeline_stats(net);
        CHECK(s.multipliers == r.stats.multipliers);
        CHECK(s.adders == r.stats.adders);
        CHECK(s.register_bits == r.stats.register_bits);
        CHECK(s.line_buffer_bits == r.stats.line_buffer_bits);
        CHECK(s.max_stage_output_pixels == r.stats.max_stage_output_pixels);
        CHECK(s.dense_macs_per_frame == r.stats.dense_macs_per_frame);
        if (r.stats.pipeline_depth != 0)
        {
            CHECK(s.pipeline_depth == r.stats.pipeline_depth);
        }
        CHECK(s.multipliers == prefix_nonzeros(m, r.n));
    }
    // 216+72+128+144+512+288+1024 dense taps at N=4, half of them survive
    CHECK(2 * pipeline_stats(freeze(m, { 4, {}, true })).multipliers == 216 + 72 + 128 + 144 + 512 + 288 + 1024);
}

TEST_CASE("constant BN drops the register-file bits only")
{
    const FrozenModel& m = testing::mobilenet025();
    const PipelineStats p = pipeline_stats(freeze(m, { 4, {}, true }));
    const PipelineStats c = pipeline_stats(freeze(m, { 4, {}, false }));
    CHECK(p.multipliers == c.multipliers);
    CHECK(p.register_bits - c.register_bits == (8 + 8 + 16 + 16 + 32 + 32 + 32) * 48);
}

TEST_CASE("multiplier count equals nonzero weights on random pruned nets")
{
    for (std::uint64_t seed = 1; seed <= 60; ++seed)
    {
        const testing::RandomNet net = testing::random_net(seed);
        const PipelineStats s = pipeline_stats(net.netlist);
        CHECK(s.multipliers == prefix_nonzeros(net.model, net.netlist.n_fixed));
        for (const Stage& st : net.netlist.stages)
        {
            for (const Multiplier& mul : st.multipliers)
            {
                CHECK(mul.weight != 0);
            }
            // ordered by out_channel, then tap, then in_channel
            CHECK(std::is_sorted(st.multipliers.begin(), st.multipliers.end(), [](const Multiplier& a, const Multiplier& b) {
                return std::tie(a.out_channel, a.tap_row, a.tap_col, a.in_channel) <
                       std::tie(b.out_channel, b.tap_row, b.tap_col, b.in_channel);
            }));
        }
    }
}

TEST_CASE("netlist JSON round trip and validation")
{
    testing::TempDir dir;
    const testing::RandomNet net = testing::random_net(42);
    save_netlist(net.netlist, dir / "n.json");
    const Netlist back = load_netlist(dir / "n.json");
    CHECK(back == net.netlist);
    CHECK(netlist_from_json(netlist_to_json(net.netlist)) == net.netlist);

    nlohmann::json j = netlist_to_json(net.netlist);
    j["version"]     = 99;
    CHECK_THROWS_AS(netlist_from_json(j), StructureError);

    Netlist broken = net.netlist;
    if (!broken.stages.empty())
    {
        broken.stages[0].output.channels += 1;
        CHECK_THROWS(validate(broken));
    }
}

TEST_CASE("freeze rejects bad split depths and taps")
{
    const FrozenModel& m = testing::mobilenet025();
    CHECK_THROWS_AS(freeze(m, { 15, {}, true }), ConfigError);
    CHECK_THROWS_AS(freeze(m, { 4, { 5 }, true }), ConfigError);
    CHECK_THROWS_AS(freeze(m, { 4, { 0 }, true }), ConfigError);
    const Netlist n = freeze(m, { 4, { 2, 2, 1 }, true });
    REQUIRE(n.taps.size() == 2);
    CHECK(n.taps[0] == TapPort{ 1, 0 });
    CHECK(n.taps[1] == TapPort{ 2, 2 });
    CHECK(n.unit_last_stage == std::vector<int>{ 0, 2, 4, 6 });
}

TEST_CASE("N=0 freezes an empty pipeline")
{
    const Netlist n = freeze(testing::mobilenet025(), { 0, {}, true });
    CHECK(n.stages.empty());
    CHECK(pipeline_stats(n) == PipelineStats{});
    CHECK(n.output == n.input);
}

TEST_CASE("prefix_model reproduces the frozen layers")
{
    const testing::RandomNet net = testing::random_net(7);
    const PrefixModel p = prefix_model(net.netlist);
    REQUIRE(p.specs.size() == net.netlist.stages.size());
    for (std::size_t i = 0; i < p.specs.size(); ++i)
    {
        // BN is folded into the requantizer registers, so the recovered LayerSpec carries no BN flag
        LayerSpec expected = net.model.graph.layer(static_cast<int>(i));
        expected.has_bn    = false;
        CHECK(p.specs[i] == expected);
        CHECK(p.layers[i].weights.values == net.model.layers[i].weights.values);
        CHECK(p.layers[i].affine == net.model.layers[i].affine);
    }
}
