//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/errors.hpp"
#include "fixynn/model_ir.hpp"

#include <doctest.h>

#include <array>
#include <numeric>

using namespace fixynn;

namespace
{

// Independent shape arithmetic for MobileNet v1: per unit (dw stride, pw out channels) at alpha 1.
struct UnitShape
{
    int stride;
    int out;
};
constexpr std::array<UnitShape, 13> kUnits{ { { 1, 64 }, { 2, 128 }, { 1, 128 }, { 2, 256 }, { 1, 256 }, { 2, 512 },
                                              { 1, 512 }, { 1, 512 }, { 1, 512 }, { 1, 512 }, { 1, 512 },
                                              { 2, 1024 }, { 1, 1024 } } };

std::int64_t oracle_mobilenet_macs(double alpha, int res, int classes, int n_units)
{
    auto sc       = [&](int c) { return static_cast<std::int64_t>(c * alpha + 0.5); };
    std::int64_t hw = res / 2;
    std::int64_t c  = sc(32);
    std::int64_t macs = hw * hw * 27 * c;
    for (int u = 1; u <= 13 && u < n_units; ++u)
    {
        const auto [stride, out] = kUnits[static_cast<std::size_t>(u - 1)];
        hw = (hw + stride - 1) / stride;
        macs += hw * hw * 9 * c;
        macs += hw * hw * c * sc(out);
        c = sc(out);
    }
    if (n_units > 14)
    {
        macs += c * classes;
    }
    return macs;
}

}    // namespace

TEST_CASE("MobileNet-0.25 at 224 matches the shape-arithmetic oracle")
{
    const Graph g = build_mobilenet(0.25, 224, 1000);
    CHECK(g.size() == 29);
    CHECK(g.fixable_units() == 14);
    CHECK(count_macs(g).total == 41030272);
    CHECK(count_macs(g).total == oracle_mobilenet_macs(0.25, 224, 1000, 15));
    const ParamCount p = count_params(g);
    CHECK(p.total == 464600);
    CHECK(p.bn_total == 5472);
}

TEST_CASE("MobileNet-1.0 at 224")
{
    const Graph g = build_mobilenet(1.0, 224, 1000);
    CHECK(count_macs(g).total == 568740352);
    CHECK(count_macs(g).total == oracle_mobilenet_macs(1.0, 224, 1000, 15));
    CHECK(count_params(g).total == 4210088);
}

TEST_CASE("cumulative prefix MACs per unit")
{
    const Graph g = build_mobilenet(0.25, 224, 1000);
    constexpr std::array<std::int64_t, 14> kCumulative{ 2709504,  5218304,  7275520,  11389952, 13221376,
                                                        16884224, 18602752, 22039808, 25476864, 28913920,
                                                        32350976, 35788032, 37450112, 40774272 };
    const MacCount m = count_macs(g);
    for (int n = 1; n <= 14; ++n)
    {
        const int layers = g.prefix_layer_count(n);
        const std::int64_t prefix =
            std::accumulate(m.per_layer.begin(), m.per_layer.begin() + layers, std::int64_t{ 0 });
        CHECK(prefix == kCumulative[static_cast<std::size_t>(n - 1)]);
        CHECK(prefix == oracle_mobilenet_macs(0.25, 224, 1000, n));
        CHECK(fixed_ops_fraction(g, n) == doctest::Approx(static_cast<double>(prefix) / 41030272.0));
    }
    CHECK(fixed_ops_fraction(g, 0) == 0.0);
    CHECK(fixed_ops_fraction(g, 4) == doctest::Approx(0.27760).epsilon(1e-4));
    CHECK(fixed_ops_fraction(g, 7) == doctest::Approx(0.45339).epsilon(1e-4));
    CHECK(fixed_ops_fraction(g, 11) == doctest::Approx(0.78847).epsilon(1e-4));
}

TEST_CASE("fixed-ops fraction is monotone and bounded")
{
    for (double alpha : { 0.25, 0.5, 0.75, 1.0 })
    {
        const Graph g = build_mobilenet(alpha, 128, 10);
        double prev   = 0.0;
        for (int n = 1; n <= g.fixable_units(); ++n)
        {
            const double f = fixed_ops_fraction(g, n);
            CHECK(f > prev);
            CHECK(f < 1.0);
            prev = f;
        }
    }
}

TEST_CASE("prefix units pair a depthwise with its pointwise")
{
    const Graph g = build_mobilenet(0.25, 224, 1000);
    CHECK(g.prefix_layer_count(0) == 0);
    CHECK(g.prefix_layer_count(1) == 1);
    CHECK(g.prefix_layer_count(2) == 3);
    CHECK(g.prefix_layer_count(14) == 27);
    CHECK_THROWS_AS(g.prefix_layer_count(15), ConfigError);
    CHECK_THROWS_AS(fixed_ops_fraction(g, -1), ConfigError);
}

TEST_CASE("output shapes use ceil for SAME convs and VALID for pooling")
{
    const LayerSpec conv{ LayerKind::FullConv, 3, 4, 3, 2, true, true };
    CHECK(layer_output_shape(conv, { 7, 9, 3 }) == Shape3{ 4, 5, 4 });
    const LayerSpec pool{ LayerKind::AvgPool, 4, 4, 2, 1, false, false };
    CHECK(layer_output_shape(pool, { 4, 5, 4 }) == Shape3{ 3, 4, 4 });
}

TEST_CASE("graph validation")
{
    const LayerSpec fc{ LayerKind::FullyConnected, 12, 2, 1, 1, false, false };
    CHECK_THROWS_AS(Graph({ 2, 2, 3 }, {}), ConfigError);
    CHECK_THROWS_AS(Graph({ 2, 2, 3 }, { { LayerKind::FullConv, 3, 4, 3, 1, true, true } }), ConfigError);
    CHECK_THROWS_AS(Graph({ 2, 2, 3 }, { { LayerKind::FullConv, 2, 4, 3, 1, true, true }, fc }), ConfigError);
    CHECK_THROWS_AS(Graph({ 2, 2, 3 }, { { LayerKind::DepthwiseConv, 3, 4, 3, 1, true, true }, fc }), ConfigError);
    CHECK_THROWS_AS(Graph({ 2, 2, 3 }, { { LayerKind::PointwiseConv, 3, 3, 3, 1, true, true }, fc }), ConfigError);
    CHECK_THROWS_AS(Graph({ 2, 2, 3 }, { { LayerKind::FullConv, 3, 3, 3, 3, true, true }, fc }), ConfigError);
    CHECK_NOTHROW(Graph({ 2, 2, 3 }, { fc }));
    CHECK_THROWS_AS(build_mobilenet(0.3, 224, 1000), ConfigError);
    CHECK_THROWS_AS(build_mobilenet(0.25, 100, 1000), ConfigError);
    CHECK_THROWS_AS(layer_kind_from_string("conv5d"), FormatError);
    CHECK(layer_kind_from_string(to_string(LayerKind::DepthwiseConv)) == LayerKind::DepthwiseConv);
}
