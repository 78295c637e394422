//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/ppa.hpp"

#include "fixynn/errors.hpp"
#include "fixynn/model_io.hpp"

#include <algorithm>
#include <cmath>

namespace fixynn
{

namespace
{

void require_positive(double v, const char* name)
{
    if (!std::isfinite(v) || v <= 0.0)
    {
        throw ConfigError(std::string("cost constant ") + name + " must be finite and positive");
    }
}

double lerp(double x0, double x1, double y0, double y1, double x)
{
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}    // namespace

void CostConfig::validate() const
{
    require_positive(f_clk, "f_clk");
    require_positive(a_mult, "a_mult");
    require_positive(a_add, "a_add");
    require_positive(a_reg, "a_reg");
    require_positive(a_sram, "a_sram");
    require_positive(e_mult, "e_mult");
    require_positive(e_add, "e_add");
    require_positive(e_reg, "e_reg");
    require_positive(p_leak, "p_leak");
}

CostConfig cost_config_from_json(const nlohmann::json& json)
{
    if (!json.is_object())
    {
        throw ConfigError("cost config must be a JSON object");
    }
    CostConfig cost;
    const std::pair<const char*, double*> fields[] = {
        { "f_clk", &cost.f_clk },   { "a_mult", &cost.a_mult }, { "a_add", &cost.a_add },
        { "a_reg", &cost.a_reg },   { "a_sram", &cost.a_sram }, { "e_mult", &cost.e_mult },
        { "e_add", &cost.e_add },   { "e_reg", &cost.e_reg },   { "p_leak", &cost.p_leak },
    };
    for (const auto& [key, value] : json.items())
    {
        if (key == "preset")
        {
            if (!value.is_string())
            {
                throw ConfigError("cost config: preset must be a string");
            }
            cost.preset = value.get<std::string>();
            continue;
        }
        auto it = std::find_if(std::begin(fields), std::end(fields), [&](const auto& f) { return key == f.first; });
        if (it == std::end(fields))
        {
            throw ConfigError("cost config: unknown key '" + key + "'");
        }
        if (!value.is_number())
        {
            throw ConfigError("cost config: " + key + " must be a number");
        }
        *it->second = value.get<double>();
    }
    cost.validate();
    return cost;
}

nlohmann::json cost_config_to_json(const CostConfig& cost)
{
    return {
        { "preset", cost.preset }, { "f_clk", cost.f_clk },   { "a_mult", cost.a_mult },
        { "a_add", cost.a_add },   { "a_reg", cost.a_reg },   { "a_sram", cost.a_sram },
        { "e_mult", cost.e_mult }, { "e_add", cost.e_add },   { "e_reg", cost.e_reg },
        { "p_leak", cost.p_leak },
    };
}

CostConfig load_cost_config(const std::filesystem::path& path)
{
    return cost_config_from_json(read_json_file(path));
}

nlohmann::json ppa_to_json(const PpaReport& r)
{
    return {
        { "area_mm2", r.area_mm2 }, { "power_w", r.power_w }, { "tops", r.tops },
        { "tops_per_w", r.tops_per_w }, { "fps", r.fps },     { "latency_cycles", r.latency_cycles },
    };
}

PpaReport ffe_ppa(const Netlist& netlist, const PipelineStats& stats, const CostConfig& cost)
{
    cost.validate();
    PpaReport r;
    if (netlist.stages.empty())
    {
        return r;
    }
    r.area_mm2 = cost.a_mult * static_cast<double>(stats.multipliers) + cost.a_add * static_cast<double>(stats.adders) +
                 cost.a_reg * static_cast<double>(stats.register_bits) +
                 cost.a_sram * static_cast<double>(stats.line_buffer_bits);
    const double energy_per_cycle = cost.e_mult * static_cast<double>(stats.multipliers) +
                                    cost.e_add * static_cast<double>(stats.adders) +
                                    cost.e_reg * static_cast<double>(stats.register_bits);
    r.power_w        = cost.f_clk * energy_per_cycle * kActivityFactor + cost.p_leak * r.area_mm2;
    r.fps            = cost.f_clk / static_cast<double>(stats.max_stage_output_pixels);
    r.tops           = 2.0 * static_cast<double>(stats.dense_macs_per_frame) * r.fps / 1e12;
    r.tops_per_w     = r.power_w > 0.0 ? r.tops / r.power_w : 0.0;
    r.latency_cycles = stats.pipeline_depth + stats.max_stage_output_pixels;
    return r;
}

NvdlaTable NvdlaTable::published()
{
    return { {
        { "A", 64, 128, 0.55, 0.056, 2.0 },
        { "B", 128, 256, 0.84, 0.156, 3.8 },
        { "C", 256, 256, 1.00, 0.358, 5.6 },
        { "D", 512, 256, 1.40, 0.728, 6.8 },
        { "E", 1024, 256, 1.80, 1.166, 6.3 },
        { "F", 2048, 512, 3.30, 2.095, 5.4 },
    } };
}

void NvdlaTable::validate() const
{
    if (rows.size() < 2)
    {
        throw ConfigError("NVDLA table needs at least two rows");
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        const NvdlaRow& r = rows[i];
        if (!(r.area_mm2 > 0.0 && r.tops > 0.0 && r.tops_per_w > 0.0))
        {
            throw ConfigError("NVDLA row " + r.name + ": area, TOPS and TOPS/W must be positive");
        }
        if (i > 0 && !(r.area_mm2 > rows[i - 1].area_mm2 && r.tops > rows[i - 1].tops))
        {
            throw ConfigError("NVDLA rows must have strictly increasing area and TOPS");
        }
    }
}

NvdlaTable NvdlaTable::from_json(const nlohmann::json& json)
{
    NvdlaTable table;
    try
    {
        for (const auto& r : json.at("rows"))
        {
            table.rows.push_back({ r.at("name").get<std::string>(), r.value("macs", 0), r.value("buffer_kb", 0),
                                   r.at("area_mm2").get<double>(), r.at("tops").get<double>(),
                                   r.at("tops_per_w").get<double>() });
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError(std::string("malformed NVDLA table: ") + e.what());
    }
    table.validate();
    return table;
}

NvdlaTable load_nvdla_table(const std::filesystem::path& path)
{
    return NvdlaTable::from_json(read_json_file(path));
}

NvdlaPoint nvdla_point(double area_mm2, const NvdlaTable& table)
{
    table.validate();
    const auto& rows = table.rows;
    NvdlaPoint p;
    if (!(area_mm2 >= rows.front().area_mm2))
    {
        return p;
    }
    p.feasible = true;
    if (area_mm2 >= rows.back().area_mm2)
    {
        p.clamped    = area_mm2 > rows.back().area_mm2;
        p.area_mm2   = rows.back().area_mm2;
        p.tops       = rows.back().tops;
        p.tops_per_w = rows.back().tops_per_w;
        return p;
    }
    p.area_mm2 = area_mm2;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    {
        const NvdlaRow& lo = rows[i];
        const NvdlaRow& hi = rows[i + 1];
        if (area_mm2 == lo.area_mm2)
        {
            p.tops       = lo.tops;
            p.tops_per_w = lo.tops_per_w;
            return p;
        }
        if (area_mm2 < hi.area_mm2)
        {
            p.tops       = lerp(lo.area_mm2, hi.area_mm2, lo.tops, hi.tops, area_mm2);
            p.tops_per_w = lerp(lo.area_mm2, hi.area_mm2, lo.tops_per_w, hi.tops_per_w, area_mm2);
            return p;
        }
    }
    return p;    // unreachable: the last row was handled above
}

double nvdla_area_for_tops(double tops, const NvdlaTable& table)
{
    table.validate();
    const auto& rows = table.rows;
    if (!(tops >= rows.front().tops && tops <= rows.back().tops))
    {
        throw ConfigError("throughput " + std::to_string(tops) + " TOPS lies outside the NVDLA table");
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    {
        if (tops <= rows[i + 1].tops)
        {
            return lerp(rows[i].tops, rows[i + 1].tops, rows[i].area_mm2, rows[i + 1].area_mm2, tops);
        }
    }
    return rows.back().area_mm2;
}

PpaReport system_ppa(const PpaReport& ffe, double f, const NvdlaPoint& backend)
{
    if (!(f >= 0.0 && f < 1.0))
    {
        throw ConfigError("fixed-ops fraction must lie in [0, 1)");
    }
    if (!backend.feasible)
    {
        throw ConfigError("backend point is infeasible");
    }
    PpaReport r;
    const double backend_power = backend.tops / backend.tops_per_w;
    if (f == 0.0)
    {
        r.tops       = backend.tops;
        r.power_w    = backend_power;
        r.tops_per_w = backend.tops_per_w;
        r.area_mm2   = backend.area_mm2 + ffe.area_mm2;
        return r;
    }
    if (!(ffe.tops > 0.0))
    {
        throw ConfigError("a nonzero fixed fraction needs an FFE with nonzero throughput");
    }
    r.tops             = std::min(backend.tops / (1.0 - f), ffe.tops / f);
    const double duty  = f * r.tops / ffe.tops;    // FFE busy time over frame time
    r.power_w          = backend_power + ffe.power_w * duty;
    r.tops_per_w       = r.power_w > 0.0 ? r.tops / r.power_w : 0.0;
    r.area_mm2         = backend.area_mm2 + ffe.area_mm2;
    r.fps              = ffe.fps * duty;
    r.latency_cycles   = ffe.latency_cycles;
    return r;
}

AreaAnchor area_anchor(double fixed_fraction, double system_tops, double budget_mm2, const NvdlaTable& table)
{
    AreaAnchor a;
    a.fixed_fraction = fixed_fraction;
    a.system_tops    = system_tops;
    a.backend_tops   = system_tops * (1.0 - fixed_fraction);
    a.backend_area   = nvdla_area_for_tops(a.backend_tops, table);
    a.ffe_area       = budget_mm2 - a.backend_area;
    return a;
}

AreaFit fit_area_constants(const std::vector<PipelineStats>& stats, const std::vector<double>& anchor_areas)
{
    if (stats.size() != anchor_areas.size() || stats.empty())
    {
        throw ConfigError("area fit needs one anchor area per netlist");
    }
    // Normal equations of min sum (a*x + b*y - t)^2 in two unknowns.
    double sxx = 0, sxy = 0, syy = 0, sxt = 0, syt = 0;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < stats.size(); ++i)
    {
        const double x = static_cast<double>(stats[i].multipliers + stats[i].adders);
        const double y = static_cast<double>(stats[i].register_bits + stats[i].line_buffer_bits);
        const double t = anchor_areas[i];
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sxt += x * t;
        syt += y * t;
        xs.push_back(x);
        ys.push_back(y);
    }
    AreaFit fit;
    const double det = sxx * syy - sxy * sxy;
    if (det > 0.0)
    {
        fit.logic_mm2   = (sxt * syy - syt * sxy) / det;
        fit.storage_mm2 = (syt * sxx - sxt * sxy) / det;
    }
    if (!(det > 0.0) || fit.logic_mm2 < 0.0 || fit.storage_mm2 < 0.0)
    {
        // Best single-term fit on the active constraint.
        const double only_x = sxx > 0.0 ? std::max(sxt / sxx, 0.0) : 0.0;
        const double only_y = syy > 0.0 ? std::max(syt / syy, 0.0) : 0.0;
        auto sse = [&](double a, double b) {
            double s = 0;
            for (std::size_t i = 0; i < xs.size(); ++i)
            {
                const double e = a * xs[i] + b * ys[i] - anchor_areas[i];
                s += e * e;
            }
            return s;
        };
        if (sse(only_x, 0.0) <= sse(0.0, only_y))
        {
            fit.logic_mm2   = only_x;
            fit.storage_mm2 = 0.0;
        }
        else
        {
            fit.logic_mm2   = 0.0;
            fit.storage_mm2 = only_y;
        }
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        const double e = fit.logic_mm2 * xs[i] + fit.storage_mm2 * ys[i] - anchor_areas[i];
        sse += e * e;
    }
    fit.residual = std::sqrt(sse / static_cast<double>(xs.size()));
    return fit;
}

}    // namespace fixynn
