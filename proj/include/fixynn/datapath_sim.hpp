//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "fixynn/activation.hpp"
#include "fixynn/frozen_model.hpp"
#include "fixynn/netlist.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fixynn
{

struct SimResult
{
    Activation output;
    std::map<int, Activation> taps;                  // keyed by prefix boundary
    std::vector<std::int64_t> stage_output_pixels;   // counted while streaming
    std::int64_t frame_interval = 0;                 // steady-state cycles per frame
    std::int64_t cycles         = 0;                 // pipeline fill + frame interval
};

/// Stage-accurate functional model of a netlist. Pixels stream in raster order
/// through each stage's line buffer; every output pixel is produced by the
/// stage's multiplier list, per-channel adder trees (32-bit, wrapping), BN
/// register file, requantizer and ReLU.
class DatapathSimulator
{
public:
    explicit DatapathSimulator(Netlist netlist);

    const Netlist& netlist() const { return net_; }

    /// The register-file load port. Only legal on netlists built with programmable BN.
    void load_bn_register(int stage, int channel, std::int32_t multiplier, std::int32_t bias);
    const BnRegisters& bn_registers(int stage) const;
    /// Restore every register file to its reset (frozen) values.
    void reset();

    SimResult run(const Activation& input) const;

private:
    Netlist net_;
    std::vector<BnRegisters> bn_file_;
};

SimResult simulate(const Netlist& netlist, const Activation& input);

struct Mismatch
{
    int trial    = 0;
    int boundary = 0;    // 0 = final output, otherwise the tap's prefix boundary
    int y = 0, x = 0, c = 0;
    int expected = 0;
    int actual   = 0;
    std::string note;
};

struct EquivalenceReport
{
    bool pass  = true;
    int trials = 0;
    std::optional<Mismatch> first_mismatch;
    std::string warning;

    std::string describe() const;
};

/// Random images through both the simulator and the golden executor; exact compare at
/// the final output and every tap.
EquivalenceReport check_equivalence(const Netlist& netlist, const FrozenModel& model, int trials, std::uint64_t seed);

/// Same check with the simulator's register files as they currently stand.
EquivalenceReport check_equivalence(const DatapathSimulator& sim, const FrozenModel& model, int trials,
                                    std::uint64_t seed);

}    // namespace fixynn
