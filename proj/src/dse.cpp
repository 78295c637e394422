//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/dse.hpp"

#include "fixynn/errors.hpp"
#include "fixynn/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace fixynn
{

namespace
{

std::string fmt(double v, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

struct SplitModel
{
    double fraction = 0.0;
    PpaReport ffe;
};

SplitModel measure_split(const FrozenModel& model, int n, const SweepOptions& options)
{
    SplitModel s;
    s.fraction = fixed_ops_fraction(model.graph, n);
    if (n > 0)
    {
        const Netlist net = freeze(model, { n, {}, options.bn_programmable });
        s.ffe             = ffe_ppa(net, pipeline_stats(net), options.cost);
    }
    return s;
}

DsePoint evaluate(int n, double budget, const SplitModel& split, const SweepOptions& options)
{
    DsePoint p;
    p.n_fixed        = n;
    p.budget_mm2     = budget;
    p.fixed_fraction = split.fraction;
    p.ffe_area_mm2   = split.ffe.area_mm2;
    const auto& rows = options.table.rows;
    const double remaining = budget - split.ffe.area_mm2;
    p.backend_area_mm2     = std::max(0.0, std::min(remaining, rows.back().area_mm2));
    p.feasible = split.ffe.area_mm2 <= budget && p.backend_area_mm2 >= rows.front().area_mm2;
    if (!p.feasible)
    {
        return p;
    }
    p.backend  = nvdla_point(p.backend_area_mm2, options.table);
    p.system   = system_ppa(split.ffe, split.fraction, p.backend);
    return p;
}

}    // namespace

std::vector<DsePoint> sweep(const FrozenModel& model, const std::vector<double>& budgets,
                            const std::vector<int>& splits, const SweepOptions& options)
{
    if (budgets.empty() || splits.empty())
    {
        throw ConfigError("sweep needs at least one budget and one split");
    }
    options.cost.validate();
    options.table.validate();
    const std::set<int> unique_splits(splits.begin(), splits.end());
    for (int n : unique_splits)
    {
        if (n < 0 || n > model.graph.fixable_units())
        {
            throw ConfigError("split " + std::to_string(n) + " outside 0.." +
                              std::to_string(model.graph.fixable_units()));
        }
    }

    // Splits are independent; each worker owns its netlist.
    std::map<int, SplitModel> measured;
    const unsigned hw      = std::max(1u, std::thread::hardware_concurrency());
    const auto max_workers = static_cast<std::size_t>(options.threads > 0 ? static_cast<unsigned>(options.threads) : hw);
    std::vector<int> pending(unique_splits.begin(), unique_splits.end());
    for (std::size_t begin = 0; begin < pending.size(); begin += max_workers)
    {
        std::vector<std::pair<int, std::future<SplitModel>>> jobs;
        for (std::size_t i = begin; i < std::min(pending.size(), begin + max_workers); ++i)
        {
            const int n = pending[i];
            jobs.emplace_back(n, std::async(std::launch::async, measure_split, std::cref(model), n, std::cref(options)));
        }
        for (auto& [n, job] : jobs)
        {
            measured[n] = job.get();
        }
    }

    std::vector<DsePoint> points;
    for (int n : splits)
    {
        for (double b : budgets)
        {
            points.push_back(evaluate(n, b, measured.at(n), options));
        }
    }
    std::stable_sort(points.begin(), points.end(), [](const DsePoint& a, const DsePoint& b) {
        return a.n_fixed != b.n_fixed ? a.n_fixed < b.n_fixed : a.budget_mm2 < b.budget_mm2;
    });
    return points;
}

std::vector<DsePoint> pareto(const std::vector<DsePoint>& points)
{
    auto dominates = [](const DsePoint& q, const DsePoint& p) {
        const bool no_worse = q.budget_mm2 <= p.budget_mm2 && q.system.tops >= p.system.tops &&
                              q.system.tops_per_w >= p.system.tops_per_w;
        const bool better = q.budget_mm2 < p.budget_mm2 || q.system.tops > p.system.tops ||
                            q.system.tops_per_w > p.system.tops_per_w;
        return no_worse && better;
    };
    std::vector<DsePoint> front;
    for (const DsePoint& p : points)
    {
        if (!p.feasible)
        {
            continue;
        }
        const bool dominated = std::any_of(points.begin(), points.end(),
                                           [&](const DsePoint& q) { return q.feasible && dominates(q, p); });
        if (!dominated)
        {
            front.push_back(p);
        }
    }
    std::stable_sort(front.begin(), front.end(), [](const DsePoint& a, const DsePoint& b) {
        return a.budget_mm2 != b.budget_mm2 ? a.budget_mm2 < b.budget_mm2 : a.n_fixed < b.n_fixed;
    });
    return front;
}

DsePreset dse_preset(const std::string& name)
{
    if (name == "table2")
    {
        return { { 3.0 }, { 0, 4, 7, 11 } };
    }
    throw ConfigError("unknown DSE preset '" + name + "' (known: table2)");
}

std::vector<double> parse_budgets(const std::string& text)
{
    auto number = [&](const std::string& s) {
        try
        {
            std::size_t used = 0;
            const double v   = std::stod(s, &used);
            if (used != s.size() || !std::isfinite(v) || v <= 0.0)
            {
                throw ConfigError("");
            }
            return v;
        }
        catch (const std::exception&)
        {
            throw ConfigError("bad budget '" + s + "' in '" + text + "'");
        }
    };
    std::vector<double> out;
    if (std::count(text.begin(), text.end(), ':') == 2)
    {
        const auto c1   = text.find(':');
        const auto c2   = text.find(':', c1 + 1);
        const double lo = number(text.substr(0, c1));
        const double hi = number(text.substr(c1 + 1, c2 - c1 - 1));
        const double st = number(text.substr(c2 + 1));
        if (hi < lo)
        {
            throw ConfigError("budget range '" + text + "' is empty");
        }
        const auto steps = static_cast<long>(std::floor((hi - lo) / st + 1e-9));
        for (long i = 0; i <= steps; ++i)
        {
            // Snap to the step grid so 1.0:5.0:0.25 gives exact decimals.
            out.push_back(std::round((lo + static_cast<double>(i) * st) * 1e9) / 1e9);
        }
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        out.push_back(number(item));
    }
    if (out.empty())
    {
        throw ConfigError("no budgets given");
    }
    return out;
}

std::vector<int> parse_splits(const std::string& text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        try
        {
            std::size_t used = 0;
            const int v      = std::stoi(item, &used);
            if (used != item.size() || v < 0)
            {
                throw ConfigError("");
            }
            out.push_back(v);
        }
        catch (const std::exception&)
        {
            throw ConfigError("bad split '" + item + "' in '" + text + "'");
        }
    }
    if (out.empty())
    {
        throw ConfigError("no splits given");
    }
    return out;
}

std::string csv_report(const std::vector<DsePoint>& points)
{
    std::string out =
        "n_fixed,budget_mm2,ffe_area_mm2,backend_area_mm2,backend_tops,system_tops,system_tops_per_w,feasible\n";
    for (const DsePoint& p : points)
    {
        out += std::to_string(p.n_fixed) + "," + fmt(p.budget_mm2) + "," + fmt(p.ffe_area_mm2) + "," +
               fmt(p.backend_area_mm2) + "," + fmt(p.backend.tops) + "," + fmt(p.system.tops) + "," +
               fmt(p.system.tops_per_w) + "," + (p.feasible ? "true" : "false") + "\n";
    }
    return out;
}

void write_csv(const std::vector<DsePoint>& points, const std::filesystem::path& path)
{
    write_text_file(path, csv_report(points));
}

std::vector<RelativeRow> relative_rows(const std::vector<DsePoint>& points)
{
    std::map<double, const DsePoint*> baseline;
    for (const DsePoint& p : points)
    {
        if (p.n_fixed == 0 && p.feasible)
        {
            baseline[p.budget_mm2] = &p;
        }
    }
    std::vector<RelativeRow> rows;
    for (const DsePoint& p : points)
    {
        RelativeRow r{ &p, 0.0, 0.0 };
        auto it = baseline.find(p.budget_mm2);
        if (p.feasible && it != baseline.end())
        {
            r.relative_tops       = p.system.tops / it->second->system.tops;
            r.relative_tops_per_w = p.system.tops_per_w / it->second->system.tops_per_w;
        }
        rows.push_back(r);
    }
    return rows;
}

std::string table_report(const std::vector<DsePoint>& points)
{
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%3s %8s %8s %8s %9s %8s %8s %8s %8s  %s\n", "N", "budget", "fixed%", "ffe_mm2",
                  "nvdla_mm2", "TOPS", "rel", "TOPS/W", "rel", "feasible");
    os << line;
    for (const RelativeRow& r : relative_rows(points))
    {
        const DsePoint& p = *r.point;
        std::snprintf(line, sizeof line, "%3d %8.3f %8.2f %8.4f %9.4f %8.3f %7.2fx %8.2f %7.2fx  %s\n", p.n_fixed,
                      p.budget_mm2, 100.0 * p.fixed_fraction, p.ffe_area_mm2, p.backend_area_mm2, p.system.tops,
                      r.relative_tops, p.system.tops_per_w, r.relative_tops_per_w, p.feasible ? "yes" : "no");
        os << line;
    }
    return os.str();
}

std::string svg_scatter(const std::vector<DsePoint>& points, SvgMetric metric)
{
    constexpr double width = 640, height = 420, left = 70, right = 120, top = 30, bottom = 50;
    const bool throughput = metric == SvgMetric::Throughput;
    auto value            = [&](const DsePoint& p) { return throughput ? p.system.tops : p.system.tops_per_w; };

    double x_max = 1.0, y_max = 1.0;
    std::set<int> splits;
    for (const DsePoint& p : points)
    {
        if (p.feasible)
        {
            x_max = std::max(x_max, p.budget_mm2);
            y_max = std::max(y_max, value(p));
            splits.insert(p.n_fixed);
        }
    }
    x_max = std::ceil(x_max);
    y_max = std::ceil(y_max * 1.1);
    auto sx = [&](double x) { return left + x / x_max * (width - left - right); };
    auto sy = [&](double y) { return height - bottom - y / y_max * (height - top - bottom); };

    static const char* palette[] = { "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf" };
    std::map<int, const char*> color;
    std::size_t idx = 0;
    for (int n : splits)
    {
        color[n] = palette[idx++ % std::size(palette)];
    }

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(x_max) << "\" y2=\"" << sy(0)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << sy(0) << "\" x2=\"" << left << "\" y2=\"" << sy(y_max)
       << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t)
    {
        const double xv = x_max * t / 4.0, yv = y_max * t / 4.0;
        os << "<text x=\"" << fmt(sx(xv), 1) << "\" y=\"" << height - bottom + 18
           << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(xv, 2) << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << fmt(sy(yv) + 4, 1) << "\" font-size=\"11\" text-anchor=\"end\">"
           << fmt(yv, 2) << "</text>\n";
    }
    os << "<text x=\"" << fmt(sx(x_max / 2), 1) << "\" y=\"" << height - 10
       << "\" font-size=\"13\" text-anchor=\"middle\">Area budget (mm2)</text>\n";
    os << "<text x=\"16\" y=\"" << fmt(sy(y_max / 2), 1) << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << fmt(sy(y_max / 2), 1) << ")\">" << (throughput ? "Throughput (TOPS)" : "Energy efficiency (TOPS/W)")
       << "</text>\n";
    for (const DsePoint& p : points)
    {
        if (p.feasible)
        {
            os << "<circle cx=\"" << fmt(sx(p.budget_mm2), 2) << "\" cy=\"" << fmt(sy(value(p)), 2)
               << "\" r=\"4\" fill=\"" << color[p.n_fixed] << "\"/>\n";
        }
    }
    double ly = top + 10;
    for (int n : splits)
    {
        os << "<circle cx=\"" << width - right + 20 << "\" cy=\"" << ly << "\" r=\"4\" fill=\"" << color[n] << "\"/>\n";
        os << "<text x=\"" << width - right + 30 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">N=" << n << "</text>\n";
        ly += 18;
    }
    os << "</svg>\n";
    return os.str();
}

void write_svgs(const std::vector<DsePoint>& points, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
    {
        throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
    }
    write_text_file(dir / "tops_vs_area.svg", svg_scatter(points, SvgMetric::Throughput));
    write_text_file(dir / "tops_per_w_vs_area.svg", svg_scatter(points, SvgMetric::Efficiency));
}

}    // namespace fixynn
