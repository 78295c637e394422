//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "fixynn/frozen_model.hpp"
#include "fixynn/ppa.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fixynn
{

struct DsePoint
{
    int n_fixed             = 0;
    double budget_mm2       = 0.0;
    double fixed_fraction   = 0.0;
    double ffe_area_mm2     = 0.0;
    double backend_area_mm2 = 0.0;
    NvdlaPoint backend;
    PpaReport system;    // zeroed when infeasible
    bool feasible = false;
};

struct SweepOptions
{
    CostConfig cost;
    NvdlaTable table     = NvdlaTable::published();
    bool bn_programmable = true;
    int threads          = 0;    // 0 picks the hardware concurrency
};

/// Every (split, budget) pair, sorted by split then budget. Infeasible points are kept and flagged.
std::vector<DsePoint> sweep(const FrozenModel& model, const std::vector<double>& budgets,
                            const std::vector<int>& splits, const SweepOptions& options = {});

/// Feasible points not dominated in (TOPS, TOPS/W) by any feasible point at no larger budget.
/// Ordered by budget, then split.
std::vector<DsePoint> pareto(const std::vector<DsePoint>& points);

struct DsePreset
{
    std::vector<double> budgets;
    std::vector<int> splits;
};

/// Named presets; throws ConfigError for an unknown name.
DsePreset dse_preset(const std::string& name);

/// Budgets from "lo:hi:step" (inclusive) or a comma list.
std::vector<double> parse_budgets(const std::string& text);
std::vector<int> parse_splits(const std::string& text);

std::string csv_report(const std::vector<DsePoint>& points);
void write_csv(const std::vector<DsePoint>& points, const std::filesystem::path& path);

/// Throughput and efficiency relative to the split-0 point at the same budget (0 when absent).
struct RelativeRow
{
    const DsePoint* point = nullptr;
    double relative_tops       = 0.0;
    double relative_tops_per_w = 0.0;
};

std::vector<RelativeRow> relative_rows(const std::vector<DsePoint>& points);
std::string table_report(const std::vector<DsePoint>& points);

enum class SvgMetric
{
    Throughput,
    Efficiency,
};

std::string svg_scatter(const std::vector<DsePoint>& points, SvgMetric metric);
/// Writes tops_vs_area.svg and tops_per_w_vs_area.svg into `dir`.
void write_svgs(const std::vector<DsePoint>& points, const std::filesystem::path& dir);

}    // namespace fixynn
