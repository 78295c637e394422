//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "fixynn/netlist.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace fixynn
{

/// Relative path -> file contents. Ordered, so iteration and writing are deterministic.
using RtlFiles = std::map<std::string, std::string>;

/// Verilog-2001: rtl/ffe_top.v plus rtl/ffe_stage_<i>.v per stage. Single clock, synchronous
/// active-low reset. Weights appear only as 9-bit signed literals in `* <w>` products.
///
/// Top-level protocol: a pixel is accepted on a cycle with in_valid && in_ready; in_ready
/// drops once a frame's pixels are in and rises again after the frame's last output.
RtlFiles emit_verilog(const Netlist& netlist);

/// tb/ffe_tb.v, tb/stimulus.hex, tb/expected.hex and tb/expected_tap_<k>.hex per tap.
/// One pixel per line in hex, channel 0 in the low byte. `vectors` counts frames. Expected
/// values come from the golden executor run over the netlist's own layer list.
RtlFiles emit_testbench(const Netlist& netlist, int vectors, std::uint64_t seed);

void write_rtl_files(const RtlFiles& files, const std::filesystem::path& dir);

}    // namespace fixynn
