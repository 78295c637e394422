//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/rtl_emit.hpp"

#include "fixynn/errors.hpp"
#include "fixynn/model_io.hpp"
#include "fixynn/reference_exec.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <set>
#include <sstream>

namespace fixynn
{

namespace
{

constexpr const char* kHeader = "// Generated by fixynn. Do not edit.\n";

int clog2(std::int64_t n)
{
    return n <= 1 ? 0 : std::bit_width(static_cast<std::uint64_t>(n - 1));
}

// Signed decimal literal wide enough to hold |v| as a positive number.
std::string slit(int bits, std::int64_t v)
{
    if (v < 0)
    {
        return "(-" + std::to_string(bits) + "'sd" + std::to_string(-v) + ")";
    }
    return std::to_string(bits) + "'sd" + std::to_string(v);
}

// Two's-complement bit pattern as a sized hex literal.
std::string hexlit(int bits, std::int64_t v)
{
    const std::uint64_t mask = bits >= 64 ? ~0ull : ((1ull << bits) - 1);
    char buf[32];
    std::snprintf(buf, sizeof buf, "'h%llx", static_cast<unsigned long long>(static_cast<std::uint64_t>(v) & mask));
    return std::to_string(bits) + buf;
}

std::string range(int bits)
{
    return "[" + std::to_string(bits - 1) + ":0]";
}

std::string byte_of(const std::string& bus, int channel)
{
    return bus + "[" + std::to_string(channel * 8 + 7) + ":" + std::to_string(channel * 8) + "]";
}

std::string stage_name(std::size_t i)
{
    return "ffe_stage_" + std::to_string(i);
}

int bn_addr_bits(const Stage& st)
{
    return std::max(1, clog2(st.output.channels));
}

std::string emit_stage(const Netlist& net, std::size_t index)
{
    const Stage& st   = net.stages[index];
    const int in_bits = st.input.channels * 8;
    const int out_bits = st.output.channels * 8;
    const int pad     = st.pad();
    const int rows    = static_cast<int>(std::bit_ceil(static_cast<unsigned>(st.kernel + 1)));
    const int rb      = clog2(rows);
    const int aw      = std::max(1, clog2(std::int64_t{ rows } * st.input.width));
    const int levels  = clog2(st.max_fan_in());
    const bool prog   = net.bn_programmable;

    std::ostringstream v;
    v << kHeader;
    v << "// layer " << st.layer_index << ": " << to_string(st.kind) << " " << st.kernel << "x" << st.kernel
      << " stride " << st.stride << ", " << st.input.height << "x" << st.input.width << "x" << st.input.channels
      << " -> " << st.output.height << "x" << st.output.width << "x" << st.output.channels << ", "
      << st.multipliers.size() << " multipliers\n";
    v << "module " << stage_name(index) << " (\n";
    v << "    input  wire clk,\n";
    v << "    input  wire rst_n,\n";
    v << "    input  wire in_valid,\n";
    v << "    input  wire " << range(in_bits) << " in_data,\n";
    if (prog)
    {
        v << "    input  wire bn_we,\n";
        v << "    input  wire " << range(bn_addr_bits(st)) << " bn_addr,\n";
        v << "    input  wire signed [15:0] bn_m_in,\n";
        v << "    input  wire signed [31:0] bn_b_in,\n";
    }
    v << "    output reg  out_valid,\n";
    v << "    output reg  " << range(out_bits) << " out_data\n";
    v << ");\n";
    v << "    localparam IN_H = " << st.input.height << ";\n";
    v << "    localparam IN_W = " << st.input.width << ";\n";
    v << "    localparam OUT_H = " << st.output.height << ";\n";
    v << "    localparam OUT_W = " << st.output.width << ";\n";
    v << "    localparam PAD = " << pad << ";\n";
    v << "    localparam STRIDE = " << st.stride << ";\n\n";

    // Line buffer: a power-of-two ring of at least kernel+1 rows, so the writer may run one
    // row ahead of the oldest row the reader still needs.
    v << "    reg " << range(in_bits) << " lb [0:" << rows * st.input.width - 1 << "];\n";
    v << "    reg [15:0] wr_row;\n    reg [15:0] wr_col;\n    reg [15:0] rd_i;\n    reg [15:0] rd_j;\n";
    v << "    wire rd_busy = rd_i < OUT_H;\n";
    v << "    wire [31:0] want_r = STRIDE * rd_i + PAD;\n";
    v << "    wire [31:0] want_c = STRIDE * rd_j + PAD;\n";
    v << "    wire [31:0] trig_r = want_r > IN_H - 1 ? IN_H - 1 : want_r;\n";
    v << "    wire [31:0] trig_c = want_c > IN_W - 1 ? IN_W - 1 : want_c;\n";
    v << "    wire ready = rd_busy && (wr_row > trig_r || (wr_row == trig_r && wr_col > trig_c));\n";
    v << "    wire frame_done = !rd_busy;\n";
    v << "    wire " << range(aw) << " wr_addr = wr_row[" << rb - 1 << ":0] * IN_W + wr_col;\n\n";

    v << "    always @(posedge clk) begin\n";
    v << "        if (in_valid) lb[wr_addr] <= in_data;\n";
    v << "        if (!rst_n || frame_done) begin\n";
    v << "            wr_row <= 16'd0;\n            wr_col <= 16'd0;\n";
    v << "        end else if (in_valid) begin\n";
    v << "            if (wr_col == IN_W - 1) begin\n";
    v << "                wr_col <= 16'd0;\n                wr_row <= wr_row + 16'd1;\n";
    v << "            end else begin\n";
    v << "                wr_col <= wr_col + 16'd1;\n";
    v << "            end\n";
    v << "        end\n";
    v << "        if (!rst_n || frame_done) begin\n";
    v << "            rd_i <= 16'd0;\n            rd_j <= 16'd0;\n";
    v << "        end else if (ready) begin\n";
    v << "            if (rd_j == OUT_W - 1) begin\n";
    v << "                rd_j <= 16'd0;\n                rd_i <= rd_i + 16'd1;\n";
    v << "            end else begin\n";
    v << "                rd_j <= rd_j + 16'd1;\n";
    v << "            end\n";
    v << "        end\n";
    v << "    end\n\n";

    // Window capture, only for taps some multiplier reads.
    std::set<std::pair<int, int>> taps;
    for (const Multiplier& m : st.multipliers)
    {
        taps.insert({ m.tap_row, m.tap_col });
    }
    const std::string by = st.stride == 2 ? "{rd_i[14:0], 1'b0}" : "rd_i";
    const std::string bx = st.stride == 2 ? "{rd_j[14:0], 1'b0}" : "rd_j";
    v << "    wire signed [16:0] base_y = {1'b0, " << by << "};\n";
    v << "    wire signed [16:0] base_x = {1'b0, " << bx << "};\n";
    std::set<int> dys, dxs;
    for (const auto& [dy, dx] : taps)
    {
        dys.insert(dy);
        dxs.insert(dx);
    }
    for (int dy : dys)
    {
        v << "    wire signed [16:0] y" << dy << " = base_y + " << slit(17, dy - pad) << ";\n";
        v << "    wire in_y" << dy << " = !y" << dy << "[16] && y" << dy << " < 17'sd" << st.input.height << ";\n";
    }
    for (int dx : dxs)
    {
        v << "    wire signed [16:0] x" << dx << " = base_x + " << slit(17, dx - pad) << ";\n";
        v << "    wire in_x" << dx << " = !x" << dx << "[16] && x" << dx << " < 17'sd" << st.input.width << ";\n";
    }
    for (const auto& [dy, dx] : taps)
    {
        const std::string t = std::to_string(dy) + "_" + std::to_string(dx);
        // Border taps read address 0 so every read stays inside the buffer; the value is masked below.
        v << "    wire " << range(aw) << " a" << t << " = (in_y" << dy << " && in_x" << dx << ") ? y" << dy << "["
          << rb - 1 << ":0] * IN_W + x" << dx << "[" << aw - 1 << ":0] : " << aw << "'d0;\n";
        v << "    reg " << range(in_bits) << " w" << t << ";\n";
    }
    v << "    reg v0;\n";
    v << "    always @(posedge clk) begin\n";
    v << "        v0 <= rst_n && ready;\n";
    for (const auto& [dy, dx] : taps)
    {
        const std::string t = std::to_string(dy) + "_" + std::to_string(dx);
        v << "        w" << t << " <= (in_y" << dy << " && in_x" << dx << ") ? lb[a" << t << "] : " << in_bits
          << "'d0;\n";
    }
    v << "    end\n\n";

    // Constant multipliers.
    std::vector<std::vector<std::string>> items(static_cast<std::size_t>(st.output.channels));
    for (std::size_t n = 0; n < st.multipliers.size(); ++n)
    {
        const Multiplier& m = st.multipliers[n];
        const std::string name = "p" + std::to_string(n);
        v << "    wire signed [16:0] " << name << " = $signed("
          << byte_of("w" + std::to_string(m.tap_row) + "_" + std::to_string(m.tap_col), m.in_channel) << ") * "
          << slit(9, m.weight) << ";\n";
        items[static_cast<std::size_t>(m.out_channel)].push_back(name);
    }
    v << "\n";

    // Adder trees, every channel padded to the same depth so the lanes stay aligned.
    for (int level = 1; level <= levels; ++level)
    {
        v << "    reg v" << level << ";\n";
        std::ostringstream body;
        for (std::size_t c = 0; c < items.size(); ++c)
        {
            std::vector<std::string> next;
            auto& cur = items[c];
            if (cur.empty())
            {
                cur.push_back("32'sd0");
            }
            for (std::size_t n = 0; n < cur.size(); n += 2)
            {
                const std::string name = "t" + std::to_string(c) + "_" + std::to_string(level) + "_" +
                                         std::to_string(n / 2);
                v << "    reg signed [31:0] " << name << ";\n";
                body << "        " << name << " <= " << cur[n];
                if (n + 1 < cur.size())
                {
                    body << " + " << cur[n + 1];
                }
                body << ";\n";
                next.push_back(name);
            }
            cur.swap(next);
        }
        v << "    always @(posedge clk) begin\n";
        v << "        v" << level << " <= rst_n && v" << level - 1 << ";\n";
        v << body.str();
        v << "    end\n";
    }
    for (std::size_t c = 0; c < items.size(); ++c)
    {
        const std::string src = items[c].empty() ? "32'sd0" : items[c].front();
        v << "    wire signed [31:0] acc" << c << " = " << src << ";\n";
    }
    v << "\n";

    // BN register file.
    const auto channels = static_cast<std::size_t>(st.output.channels);
    if (prog)
    {
        v << "    reg signed [15:0] bn_m [0:" << channels - 1 << "];\n";
        v << "    reg signed [31:0] bn_b [0:" << channels - 1 << "];\n";
        v << "    always @(posedge clk) begin\n";
        v << "        if (!rst_n) begin\n";
        for (std::size_t c = 0; c < channels; ++c)
        {
            v << "            bn_m[" << c << "] <= " << hexlit(16, st.bn.multiplier[c]) << ";\n";
            v << "            bn_b[" << c << "] <= " << hexlit(32, st.bn.bias[c]) << ";\n";
        }
        v << "        end else if (bn_we) begin\n";
        v << "            bn_m[bn_addr] <= bn_m_in;\n";
        v << "            bn_b[bn_addr] <= bn_b_in;\n";
        v << "        end\n";
        v << "    end\n\n";
    }

    // acc * m + b, then round half to even by the stage shift, then saturate and ReLU.
    const int shift = st.bn.shift;
    v << "    reg vb;\n    reg vr;\n";
    for (std::size_t c = 0; c < channels; ++c)
    {
        v << "    reg signed [63:0] bn" << c << ";\n";
        v << "    reg signed [63:0] rq" << c << ";\n";
        if (shift > 0)
        {
            v << "    wire signed [63:0] fl" << c << " = bn" << c << " >>> " << shift << ";\n";
            v << "    wire [" << shift - 1 << ":0] rem" << c << " = bn" << c << "[" << shift - 1 << ":0];\n";
        }
    }
    v << "    always @(posedge clk) begin\n";
    v << "        vb <= rst_n && v" << levels << ";\n";
    v << "        vr <= rst_n && vb;\n";
    v << "        out_valid <= rst_n && vr;\n";
    const std::string half = shift > 0 ? std::to_string(shift) + "'d" + std::to_string(1ull << (shift - 1)) : "";
    const std::string lo   = st.relu ? "64'sd0" : "(-64'sd128)";
    const std::string lo8  = st.relu ? "8'h00" : "8'h80";
    for (std::size_t c = 0; c < channels; ++c)
    {
        if (prog)
        {
            v << "        bn" << c << " <= acc" << c << " * bn_m[" << c << "] + bn_b[" << c << "];\n";
        }
        else
        {
            v << "        bn" << c << " <= acc" << c << " * " << slit(17, st.bn.multiplier[c]) << " + "
              << slit(33, st.bn.bias[c]) << ";\n";
        }
        if (shift > 0)
        {
            v << "        rq" << c << " <= fl" << c << " + ((rem" << c << " > " << half << " || (rem" << c
              << " == " << half << " && fl" << c << "[0])) ? 64'sd1 : 64'sd0);\n";
        }
        else
        {
            v << "        rq" << c << " <= bn" << c << ";\n";
        }
        v << "        " << byte_of("out_data", static_cast<int>(c)) << " <= rq" << c << " > 64'sd127 ? 8'h7f : rq" << c
          << " < " << lo << " ? " << lo8 << " : rq" << c << "[7:0];\n";
    }
    v << "    end\n";
    v << "endmodule\n";
    return v.str();
}

std::string emit_top(const Netlist& net)
{
    const int in_bits  = net.input.channels * 8;
    const int out_bits = net.output.channels * 8;
    const std::size_t n = net.stages.size();
    const bool prog     = net.bn_programmable && n > 0;
    int max_addr        = 1;
    for (const Stage& st : net.stages)
    {
        max_addr = std::max(max_addr, bn_addr_bits(st));
    }
    const int stage_bits = std::max(1, clog2(static_cast<std::int64_t>(n)));

    std::ostringstream v;
    v << kHeader;
    v << "// " << net.n_fixed << " fixed units, " << n << " stages, " << net.input.height << "x" << net.input.width
      << "x" << net.input.channels << " -> " << net.output.height << "x" << net.output.width << "x"
      << net.output.channels << "\n";
    v << "module ffe_top (\n";
    v << "    input  wire clk,\n";
    v << "    input  wire rst_n,\n";
    v << "    input  wire in_valid,\n";
    v << "    output wire in_ready,\n";
    v << "    input  wire " << range(in_bits) << " in_data,\n";
    if (prog)
    {
        v << "    input  wire bn_we,\n";
        v << "    input  wire " << range(stage_bits) << " bn_stage,\n";
        v << "    input  wire " << range(max_addr) << " bn_addr,\n";
        v << "    input  wire signed [15:0] bn_m_in,\n";
        v << "    input  wire signed [31:0] bn_b_in,\n";
    }
    for (const TapPort& t : net.taps)
    {
        const int bits = net.stages[static_cast<std::size_t>(t.stage)].output.channels * 8;
        v << "    output wire tap" << t.boundary << "_valid,\n";
        v << "    output wire " << range(bits) << " tap" << t.boundary << "_data,\n";
    }
    v << "    output wire out_valid,\n";
    v << "    output wire " << range(out_bits) << " out_data\n";
    v << ");\n";

    if (n == 0)
    {
        v << "    assign in_ready = 1'b1;\n";
        v << "    assign out_valid = in_valid;\n";
        v << "    assign out_data = in_data;\n";
        v << "endmodule\n";
        return v.str();
    }

    // One frame in flight: stop accepting once a frame is in, reopen after its last output.
    v << "    localparam IN_PIXELS = " << net.input.pixels() << ";\n";
    v << "    localparam OUT_PIXELS = " << net.output.pixels() << ";\n";
    v << "    reg [31:0] in_count;\n";
    v << "    reg [31:0] out_count;\n";
    v << "    assign in_ready = in_count < IN_PIXELS;\n";
    v << "    wire accept = in_valid && in_ready;\n";
    v << "    always @(posedge clk) begin\n";
    v << "        if (!rst_n) begin\n";
    v << "            in_count <= 32'd0;\n            out_count <= 32'd0;\n";
    v << "        end else if (out_valid && out_count == OUT_PIXELS - 1) begin\n";
    v << "            in_count <= 32'd0;\n            out_count <= 32'd0;\n";
    v << "        end else begin\n";
    v << "            if (accept) in_count <= in_count + 32'd1;\n";
    v << "            if (out_valid) out_count <= out_count + 32'd1;\n";
    v << "        end\n";
    v << "    end\n\n";

    for (std::size_t i = 0; i < n; ++i)
    {
        const Stage& st = net.stages[i];
        v << "    wire s" << i << "_valid;\n";
        v << "    wire " << range(st.output.channels * 8) << " s" << i << "_data;\n";
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        const Stage& st = net.stages[i];
        v << "    " << stage_name(i) << " u_stage_" << i << " (\n";
        v << "        .clk(clk),\n        .rst_n(rst_n),\n";
        if (i == 0)
        {
            v << "        .in_valid(accept),\n        .in_data(in_data),\n";
        }
        else
        {
            v << "        .in_valid(s" << i - 1 << "_valid),\n        .in_data(s" << i - 1 << "_data),\n";
        }
        if (prog)
        {
            v << "        .bn_we(bn_we && bn_stage == " << stage_bits << "'d" << i << "),\n";
            v << "        .bn_addr(bn_addr[" << bn_addr_bits(st) - 1 << ":0]),\n";
            v << "        .bn_m_in(bn_m_in),\n        .bn_b_in(bn_b_in),\n";
        }
        v << "        .out_valid(s" << i << "_valid),\n";
        v << "        .out_data(s" << i << "_data)\n";
        v << "    );\n";
    }
    for (const TapPort& t : net.taps)
    {
        v << "    assign tap" << t.boundary << "_valid = s" << t.stage << "_valid;\n";
        v << "    assign tap" << t.boundary << "_data = s" << t.stage << "_data;\n";
    }
    v << "    assign out_valid = s" << n - 1 << "_valid;\n";
    v << "    assign out_data = s" << n - 1 << "_data;\n";
    v << "endmodule\n";
    return v.str();
}

void append_hex(std::string& out, const Activation& a)
{
    static const char* digits = "0123456789abcdef";
    const auto c = static_cast<std::size_t>(a.shape.channels);
    for (std::size_t p = 0; p < a.values.size() / c; ++p)
    {
        for (std::size_t ch = c; ch-- > 0;)
        {
            const auto b = static_cast<std::uint8_t>(a.values[p * c + ch]);
            out += digits[b >> 4];
            out += digits[b & 15];
        }
        out += '\n';
    }
}

struct PortCheck
{
    std::string prefix;    // "out" or "tap<k>"
    std::string file;
    std::int64_t pixels_per_frame = 0;
    int bits                      = 0;
};

std::string emit_tb(const Netlist& net, int vectors, const std::vector<PortCheck>& ports)
{
    const int in_bits   = net.input.channels * 8;
    const bool prog     = net.bn_programmable && !net.stages.empty();
    const auto stats    = pipeline_stats(net);
    const std::int64_t total_in = std::int64_t{ vectors } * net.input.pixels();
    // Generous bound: every frame fully serialized through the pipeline, twice over.
    const std::int64_t timeout = 2 * std::int64_t{ vectors } *
                                     (net.input.pixels() + stats.pipeline_depth + 2 * stats.max_stage_output_pixels) +
                                 1000;

    std::ostringstream v;
    v << kHeader;
    v << "`timescale 1ns/1ps\n";
    v << "module ffe_tb;\n";
    v << "    localparam VECTORS = " << vectors << ";\n";
    v << "    localparam TOTAL_IN = " << total_in << ";\n";
    v << "    localparam TIMEOUT = " << timeout << ";\n";
    v << "    reg clk = 1'b0;\n";
    v << "    reg rst_n = 1'b0;\n";
    v << "    always #5 clk = ~clk;\n\n";
    v << "    reg [31:0] in_idx;\n";
    v << "    reg [63:0] cycles;\n";
    v << "    integer errors;\n";
    v << "    wire in_ready;\n";
    v << "    wire in_valid = rst_n && in_idx < TOTAL_IN;\n";
    v << "    wire " << range(in_bits) << " in_data;\n";
    for (const PortCheck& p : ports)
    {
        v << "    wire " << p.prefix << "_valid;\n";
        v << "    wire " << range(p.bits) << " " << p.prefix << "_data;\n";
    }
    if (vectors > 0)
    {
        v << "    reg " << range(in_bits) << " stim [0:TOTAL_IN-1];\n";
        v << "    assign in_data = in_idx < TOTAL_IN ? stim[in_idx] : " << in_bits << "'d0;\n";
        for (const PortCheck& p : ports)
        {
            v << "    reg " << range(p.bits) << " " << p.prefix << "_exp [0:" << std::int64_t{ vectors } * p.pixels_per_frame - 1
              << "];\n";
            v << "    reg [31:0] " << p.prefix << "_idx;\n";
        }
    }
    else
    {
        v << "    assign in_data = " << in_bits << "'d0;\n";
    }
    v << "\n    ffe_top dut (\n";
    v << "        .clk(clk),\n        .rst_n(rst_n),\n        .in_valid(in_valid),\n        .in_ready(in_ready),\n";
    v << "        .in_data(in_data),\n";
    if (prog)
    {
        v << "        .bn_we(1'b0),\n        .bn_stage({" << 32 << "{1'b0}}),\n        .bn_addr({32{1'b0}}),\n";
        v << "        .bn_m_in(16'd0),\n        .bn_b_in(32'd0),\n";
    }
    for (std::size_t i = 0; i < ports.size(); ++i)
    {
        v << "        ." << ports[i].prefix << "_valid(" << ports[i].prefix << "_valid),\n";
        v << "        ." << ports[i].prefix << "_data(" << ports[i].prefix << "_data)" << (i + 1 < ports.size() ? "," : "")
          << "\n";
    }
    v << "    );\n\n";

    if (vectors == 0)
    {
        v << "    initial begin\n";
        v << "        errors = 0;\n        in_idx = 32'd0;\n        cycles = 64'd0;\n";
        v << "        $display(\"PASS: 0 vectors\");\n";
        v << "        $finish;\n";
        v << "    end\n";
        v << "endmodule\n";
        return v.str();
    }

    v << "    initial begin\n";
    v << "        errors = 0;\n";
    v << "        $readmemh(\"stimulus.hex\", stim);\n";
    for (const PortCheck& p : ports)
    {
        v << "        $readmemh(\"" << p.file << "\", " << p.prefix << "_exp);\n";
    }
    v << "        repeat (4) @(posedge clk);\n";
    v << "        rst_n <= 1'b1;\n";
    v << "    end\n\n";

    v << "    always @(posedge clk) begin\n";
    v << "        if (!rst_n) begin\n";
    v << "            in_idx <= 32'd0;\n            cycles <= 64'd0;\n";
    for (const PortCheck& p : ports)
    {
        v << "            " << p.prefix << "_idx <= 32'd0;\n";
    }
    v << "        end else begin\n";
    v << "            cycles <= cycles + 64'd1;\n";
    v << "            if (in_valid && in_ready) in_idx <= in_idx + 32'd1;\n";
    for (const PortCheck& p : ports)
    {
        v << "            if (" << p.prefix << "_valid) begin\n";
        v << "                if (" << p.prefix << "_data !== " << p.prefix << "_exp[" << p.prefix << "_idx]) begin\n";
        v << "                    errors = errors + 1;\n";
        v << "                    if (errors <= 10) $display(\"MISMATCH " << p.prefix << " pixel %0d: got %h expected %h\", "
          << p.prefix << "_idx, " << p.prefix << "_data, " << p.prefix << "_exp[" << p.prefix << "_idx]);\n";
        v << "                end\n";
        v << "                " << p.prefix << "_idx <= " << p.prefix << "_idx + 32'd1;\n";
        v << "            end\n";
    }
    const PortCheck& out = ports.back();
    v << "            if (out_valid && out_idx == " << std::int64_t{ vectors } * out.pixels_per_frame - 1 << ") begin\n";
    v << "                if (errors == 0) $display(\"PASS: %0d vectors\", VECTORS);\n";
    v << "                else $display(\"FAIL: %0d mismatches\", errors);\n";
    v << "                $finish;\n";
    v << "            end\n";
    v << "            if (cycles > TIMEOUT) begin\n";
    v << "                $display(\"FAIL: timeout after %0d cycles\", cycles);\n";
    v << "                $finish;\n";
    v << "            end\n";
    v << "        end\n";
    v << "    end\n";
    v << "endmodule\n";
    return v.str();
}

}    // namespace

RtlFiles emit_verilog(const Netlist& netlist)
{
    validate(netlist);
    RtlFiles files;
    files["rtl/ffe_top.v"] = emit_top(netlist);
    for (std::size_t i = 0; i < netlist.stages.size(); ++i)
    {
        files["rtl/" + stage_name(i) + ".v"] = emit_stage(netlist, i);
    }
    return files;
}

RtlFiles emit_testbench(const Netlist& netlist, int vectors, std::uint64_t seed)
{
    validate(netlist);
    if (vectors < 0)
    {
        throw ConfigError("testbench vector count must be >= 0");
    }
    std::vector<PortCheck> ports;
    for (const TapPort& t : netlist.taps)
    {
        const Shape3& s = netlist.stages[static_cast<std::size_t>(t.stage)].output;
        ports.push_back({ "tap" + std::to_string(t.boundary), "expected_tap_" + std::to_string(t.boundary) + ".hex",
                          s.pixels(), s.channels * 8 });
    }
    ports.push_back({ "out", "expected.hex", netlist.output.pixels(), netlist.output.channels * 8 });

    const PrefixModel model = prefix_model(netlist);
    std::string stimulus;
    std::vector<std::string> expected(ports.size());
    for (int n = 0; n < vectors; ++n)
    {
        const Activation image = random_activation(netlist.input, netlist.input_exp, seed + static_cast<std::uint64_t>(n));
        append_hex(stimulus, image);
        const auto outputs = run_layers(model.specs, model.layers, image);
        for (std::size_t p = 0; p < netlist.taps.size(); ++p)
        {
            append_hex(expected[p], outputs[static_cast<std::size_t>(netlist.taps[p].stage)]);
        }
        append_hex(expected.back(), outputs.empty() ? image : outputs.back());
    }

    RtlFiles files;
    files["tb/ffe_tb.v"]      = emit_tb(netlist, vectors, ports);
    files["tb/stimulus.hex"]  = stimulus;
    for (std::size_t p = 0; p < ports.size(); ++p)
    {
        files["tb/" + ports[p].file] = expected[p];
    }
    return files;
}

void write_rtl_files(const RtlFiles& files, const std::filesystem::path& dir)
{
    for (const auto& [rel, text] : files)
    {
        const auto path = dir / rel;
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec)
        {
            throw ConfigError("cannot create " + path.parent_path().string() + ": " + ec.message());
        }
        write_text_file(path, text);
    }
}

}    // namespace fixynn
