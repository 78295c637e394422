//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/errors.hpp"
#include "fixynn/model_io.hpp"
#include "fixynn/rtl_emit.hpp"
#include "support/random_net.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

using namespace fixynn;

namespace
{

const std::filesystem::path kGoldenDir = FIXYNN_GOLDEN_DIR;
constexpr int kGoldenVectors           = 2;
constexpr std::uint64_t kGoldenSeed    = 42;

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

RtlFiles emit_all(const Netlist& net)
{
    RtlFiles files = emit_verilog(net);
    files.merge(emit_testbench(net, kGoldenVectors, kGoldenSeed));
    return files;
}

}    // namespace

TEST_CASE("golden RTL for the reference netlists")
{
    // FIXYNN_UPDATE_GOLDEN=1 rewrites the expected files from the current emitter.
    const bool update = std::getenv("FIXYNN_UPDATE_GOLDEN") != nullptr;
    for (const char* name : { "tiny_fullconv", "odd_programmable", "odd_constant_bn" })
    {
        CAPTURE(name);
        const std::filesystem::path dir = kGoldenDir / name;
        const Netlist net               = load_netlist(dir / "netlist.json");
        const RtlFiles files            = emit_all(net);
        if (update)
        {
            write_rtl_files(files, dir);
        }
        for (const auto& [rel, text] : files)
        {
            CAPTURE(rel);
            REQUIRE(std::filesystem::exists(dir / rel));
            CHECK(slurp(dir / rel) == text);
        }
    }
}

TEST_CASE("emission is byte-reproducible")
{
    const testing::RandomNet net = testing::random_net(77);
    CHECK(emit_verilog(net.netlist) == emit_verilog(net.netlist));
    CHECK(emit_testbench(net.netlist, 3, 9) == emit_testbench(net.netlist, 3, 9));
    CHECK(emit_testbench(net.netlist, 3, 9) != emit_testbench(net.netlist, 3, 10));

    testing::TempDir a;
    testing::TempDir b;
    write_rtl_files(emit_all(net.netlist), a.path());
    write_rtl_files(emit_all(net.netlist), b.path());
    for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path()))
    {
        if (entry.is_regular_file())
        {
            const auto rel = std::filesystem::relative(entry.path(), a.path());
            CHECK(slurp(entry.path()) == slurp(b.path() / rel));
        }
    }
}

TEST_CASE("one module per stage plus the top; weights only as literals")
{
    const testing::RandomNet net = testing::random_net(31);
    const RtlFiles files = emit_verilog(net.netlist);
    CHECK(files.size() == net.netlist.stages.size() + 1);
    const std::string& top = files.at("rtl/ffe_top.v");
    CHECK(top.find("module ffe_top") != std::string::npos);
    for (const TapPort& t : net.netlist.taps)
    {
        CHECK(top.find("tap" + std::to_string(t.boundary) + "_valid") != std::string::npos);
    }
    const std::regex product(R"(\$signed\([^)]*\) \* \(?-?9'sd\d+\)?)");
    for (std::size_t i = 0; i < net.netlist.stages.size(); ++i)
    {
        const std::string& text = files.at("rtl/ffe_stage_" + std::to_string(i) + ".v");
        const auto products     = std::distance(std::sregex_iterator(text.begin(), text.end(), product), std::sregex_iterator());
        CHECK(static_cast<std::size_t>(products) == net.netlist.stages[i].multipliers.size());
    }
}

TEST_CASE("testbench vectors line up with the pipeline shapes")
{
    const testing::RandomNet net = testing::random_net(12);
    const int frames = 3;
    const RtlFiles tb = emit_testbench(net.netlist, frames, 5);
    CHECK(count_lines(tb.at("tb/stimulus.hex")) == static_cast<std::size_t>(frames * net.netlist.input.pixels()));
    CHECK(count_lines(tb.at("tb/expected.hex")) == static_cast<std::size_t>(frames * net.netlist.output.pixels()));
    for (const TapPort& t : net.netlist.taps)
    {
        const Stage& st = net.netlist.stages[static_cast<std::size_t>(t.stage)];
        CHECK(count_lines(tb.at("tb/expected_tap_" + std::to_string(t.boundary) + ".hex")) ==
              static_cast<std::size_t>(frames * st.output.pixels()));
    }
    // one hex digit pair per channel, channel 0 in the low byte
    const std::string first = tb.at("tb/stimulus.hex").substr(0, tb.at("tb/stimulus.hex").find('\n'));
    CHECK(first.size() == static_cast<std::size_t>(2 * net.netlist.input.channels));

    const RtlFiles empty = emit_testbench(net.netlist, 0, 5);
    CHECK(empty.at("tb/ffe_tb.v").find("PASS: 0 vectors") != std::string::npos);
    CHECK_THROWS_AS(emit_testbench(net.netlist, -1, 5), ConfigError);
}

TEST_CASE("constant BN bakes the requantizer into literals")
{
    const testing::RandomNet prog  = testing::random_net(40, true);
    const testing::RandomNet fixed = testing::random_net(40, false);
    const std::string p = emit_verilog(prog.netlist).at("rtl/ffe_top.v");
    const std::string f = emit_verilog(fixed.netlist).at("rtl/ffe_top.v");
    CHECK(p.find("bn_we") != std::string::npos);
    CHECK(f.find("bn_we") == std::string::npos);
}
