//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "fixynn/netlist.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace fixynn
{

/// Technology constants for the analytical FFE model. Defaults are fitted to the
/// MobileNet-0.25 anchors (see fit_area_constants) at 50% sparsity.
struct CostConfig
{
    double f_clk  = 810e6;          // Hz
    double a_mult = 1.5954e-6;      // mm^2 per constant multiplier
    double a_add  = 1.5954e-6;      // mm^2 per adder
    double a_reg  = 3.5267e-6;      // mm^2 per register bit
    double a_sram = 3.5267e-6;      // mm^2 per line-buffer bit
    double e_mult = 1.8e-16;        // J per multiply
    double e_add  = 1.8e-16;        // J per add
    double e_reg  = 1.8e-16;        // J per register-bit toggle
    double p_leak = 1.0e-3;         // W per mm^2
    std::string preset = "mobilenet025-16nm";

    /// Throws ConfigError unless every constant is finite and positive.
    void validate() const;
};

/// Every multiplier, adder and register bit toggles with this probability per cycle.
inline constexpr double kActivityFactor = 0.5;

CostConfig cost_config_from_json(const nlohmann::json& json);
nlohmann::json cost_config_to_json(const CostConfig& cost);
CostConfig load_cost_config(const std::filesystem::path& path);

struct PpaReport
{
    double area_mm2       = 0.0;
    double power_w        = 0.0;
    double tops           = 0.0;
    double tops_per_w     = 0.0;    // tops / power_w, 0 when power is 0
    double fps            = 0.0;
    std::int64_t latency_cycles = 0;
};

nlohmann::json ppa_to_json(const PpaReport& report);

PpaReport ffe_ppa(const Netlist& netlist, const PipelineStats& stats, const CostConfig& cost);

struct NvdlaRow
{
    std::string name;
    int macs         = 0;
    int buffer_kb    = 0;
    double area_mm2  = 0.0;
    double tops      = 0.0;
    double tops_per_w = 0.0;
};

struct NvdlaTable
{
    std::vector<NvdlaRow> rows;    // area and TOPS strictly increasing

    static NvdlaTable published();
    static NvdlaTable from_json(const nlohmann::json& json);
    void validate() const;
};

NvdlaTable load_nvdla_table(const std::filesystem::path& path);

struct NvdlaPoint
{
    bool feasible     = false;    // false below the smallest configuration
    bool clamped      = false;    // area above the largest configuration was cut back to it
    double area_mm2   = 0.0;      // area actually occupied
    double tops       = 0.0;
    double tops_per_w = 0.0;
};

NvdlaPoint nvdla_point(double area_mm2, const NvdlaTable& table = NvdlaTable::published());

/// Smallest area whose interpolated throughput reaches `tops`; throws ConfigError outside the table.
double nvdla_area_for_tops(double tops, const NvdlaTable& table = NvdlaTable::published());

/// FFE running a fraction f of the ops ahead of the backend. Idle FFE cycles are fully clock gated.
PpaReport system_ppa(const PpaReport& ffe, double f, const NvdlaPoint& backend);

struct AreaAnchor
{
    double fixed_fraction = 0.0;
    double system_tops    = 0.0;
    double backend_tops   = 0.0;
    double backend_area   = 0.0;
    double ffe_area       = 0.0;
};

/// Back out the FFE area a published system throughput implies at a total area budget:
/// backend TOPS = system TOPS * (1 - f), backend area by inverse interpolation, FFE gets the rest.
AreaAnchor area_anchor(double fixed_fraction, double system_tops, double budget_mm2,
                       const NvdlaTable& table = NvdlaTable::published());

/// Least-squares fit of the two area constants (logic per unit, storage per bit) against anchors.
/// Logic = multipliers + adders; storage = register bits + line-buffer bits. Non-negative.
struct AreaFit
{
    double logic_mm2   = 0.0;
    double storage_mm2 = 0.0;
    double residual    = 0.0;    // root-mean-square, mm^2
};

AreaFit fit_area_constants(const std::vector<PipelineStats>& stats, const std::vector<double>& anchor_areas);

}    // namespace fixynn
