//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/cli.hpp"

#include "fixynn/datapath_sim.hpp"
#include "fixynn/dse.hpp"
#include "fixynn/errors.hpp"
#include "fixynn/model_io.hpp"
#include "fixynn/ppa.hpp"
#include "fixynn/reference_exec.hpp"
#include "fixynn/rtl_emit.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <sstream>

namespace fixynn
{

namespace
{

using nlohmann::json;

struct Context
{
    std::ostream& out;
    std::ostream& err;
    bool as_json = false;

    void emit(const json& j, const std::string& text) const
    {
        if (as_json)
        {
            out << j.dump(2) << "\n";
        }
        else
        {
            out << text;
        }
    }
};

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Activation load_activation(const std::string& path)
{
    const TensorFile t = decode_tensor_file(read_file_bytes(path));
    if (t.dims.size() != 3)
    {
        throw FormatError(path + ": expected a rank-3 [height, width, channels] tensor");
    }
    return { { static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]) },
             t.scale_exponent, t.values };
}

json activation_summary(const Activation& a)
{
    const auto sum = std::accumulate(a.values.begin(), a.values.end(), std::int64_t{ 0 });
    return { { "shape", { a.shape.height, a.shape.width, a.shape.channels } },
             { "scale_exponent", a.scale_exponent },
             { "sum", sum } };
}

CostConfig resolve_cost(const std::string& flag)
{
    if (!flag.empty())
    {
        return load_cost_config(flag);
    }
    if (const char* env = std::getenv("FIXYNN_COST_CONFIG"); env != nullptr && *env != '\0')
    {
        return load_cost_config(env);
    }
    return CostConfig{};
}

NvdlaTable resolve_table(const std::string& flag)
{
    return flag.empty() ? NvdlaTable::published() : load_nvdla_table(flag);
}

json stats_json(const PipelineStats& s)
{
    return {
        { "multipliers", s.multipliers },
        { "adders", s.adders },
        { "register_bits", s.register_bits },
        { "line_buffer_bits", s.line_buffer_bits },
        { "pipeline_depth", s.pipeline_depth },
        { "max_stage_output_pixels", s.max_stage_output_pixels },
        { "dense_macs_per_frame", s.dense_macs_per_frame },
    };
}

std::string stats_text(const PipelineStats& s)
{
    std::ostringstream os;
    os << "multipliers        " << s.multipliers << "\n"
       << "adders             " << s.adders << "\n"
       << "register bits      " << s.register_bits << "\n"
       << "line-buffer bits   " << s.line_buffer_bits << "\n"
       << "pipeline depth     " << s.pipeline_depth << " cycles\n"
       << "frame interval     " << s.max_stage_output_pixels << " cycles\n"
       << "dense MACs/frame   " << s.dense_macs_per_frame << "\n";
    return os.str();
}

// ---- model ---------------------------------------------------------------

struct ModelInfoArgs
{
    std::string path;
    double alpha    = 0.25;
    int resolution  = 224;
    int classes     = 1000;
};

void cmd_model_info(const Context& ctx, const ModelInfoArgs& a)
{
    const Graph graph = a.path.empty() ? build_mobilenet(a.alpha, a.resolution, a.classes)
                                       : graph_from_json(read_json_file(a.path));
    const MacCount macs     = count_macs(graph);
    const ParamCount params = count_params(graph);

    json layers = json::array();
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%3s  %-16s %6s %6s %2s %2s  %-14s %12s %10s\n", "#", "kind", "in", "out", "k",
                  "s", "output", "MACs", "params");
    os << line;
    for (int i = 0; i < graph.size(); ++i)
    {
        const LayerSpec& l = graph.layer(i);
        const Shape3 o     = graph.output_of(i);
        const std::string shape = std::to_string(o.height) + "x" + std::to_string(o.width) + "x" + std::to_string(o.channels);
        std::snprintf(line, sizeof line, "%3d  %-16s %6d %6d %2d %2d  %-14s %12lld %10lld\n", i,
                      std::string(to_string(l.kind)).c_str(), l.in_channels, l.out_channels, l.kernel, l.stride,
                      shape.c_str(), static_cast<long long>(macs.per_layer[static_cast<std::size_t>(i)]),
                      static_cast<long long>(params.per_layer[static_cast<std::size_t>(i)]));
        os << line;
        layers.push_back({ { "index", i },
                           { "kind", std::string(to_string(l.kind)) },
                           { "in_channels", l.in_channels },
                           { "out_channels", l.out_channels },
                           { "kernel", l.kernel },
                           { "stride", l.stride },
                           { "output", { o.height, o.width, o.channels } },
                           { "macs", macs.per_layer[static_cast<std::size_t>(i)] },
                           { "params", params.per_layer[static_cast<std::size_t>(i)] } });
    }
    json fractions = json::array();
    os << "\ntotal MACs   " << macs.total << " (" << fixed(static_cast<double>(macs.total) / 1e6, 2) << "M)\n";
    os << "total params " << params.total << " (" << fixed(static_cast<double>(params.total) / 1e6, 3)
       << "M), BN parameters " << params.bn_total << "\n\n";
    os << "fixed units  fixed ops\n";
    for (int n = 0; n <= graph.fixable_units(); ++n)
    {
        const double f = fixed_ops_fraction(graph, n);
        fractions.push_back({ { "n_fixed", n }, { "fraction", f } });
        std::snprintf(line, sizeof line, "%11d  %8.2f%%\n", n, 100.0 * f);
        os << line;
    }
    ctx.emit({ { "layers", layers },
               { "total_macs", macs.total },
               { "total_params", params.total },
               { "bn_params", params.bn_total },
               { "fixed_ops_fraction", fractions } },
             os.str());
}

struct ModelInitArgs
{
    double alpha   = 0.25;
    int resolution = 224;
    int classes    = 1000;
    std::uint64_t seed = 1;
    std::string graph;
    std::string output;
};

void cmd_model_init(const Context& ctx, const ModelInitArgs& a)
{
    const Graph graph = a.graph.empty() ? build_mobilenet(a.alpha, a.resolution, a.classes)
                                        : graph_from_json(read_json_file(a.graph));
    const ModelBundle bundle = random_bundle(graph, a.seed);
    save_bundle(bundle, a.output);
    ctx.emit({ { "manifest", a.output }, { "layers", bundle.graph.size() } },
             "wrote " + a.output + " (" + std::to_string(bundle.graph.size()) + " layers)\n");
}

// ---- compress / run ------------------------------------------------------

struct CompressArgs
{
    std::string model;
    std::string output;
    double sparsity = 0.5;
    int bits        = 8;
    int input_exp   = -7;
    std::optional<int> act_exp;
    std::vector<std::string> calibration;
    int calib_images = 4;
    std::uint64_t calib_seed = 1;
};

void cmd_compress(const Context& ctx, const CompressArgs& a)
{
    const ModelBundle bundle = load_bundle(a.model);
    CompressOptions opt;
    opt.sparsity           = a.sparsity;
    opt.bits               = a.bits;
    opt.input_exp          = a.input_exp;
    opt.activation_exp     = a.act_exp;
    opt.calibration_images = a.calib_images;
    opt.calibration_seed   = a.calib_seed;
    for (const std::string& path : a.calibration)
    {
        opt.calibration.push_back(load_activation(path));
    }
    const FrozenModel model = compress(bundle, opt);
    save_frozen(model, a.output);

    json layers = json::array();
    std::ostringstream os;
    os << "layer  nonzero/total   sparsity  w_exp  out_exp  shift\n";
    for (int i = 0; i < model.graph.size(); ++i)
    {
        const FrozenLayer& l = model.layers[static_cast<std::size_t>(i)];
        const auto total     = static_cast<std::int64_t>(l.weights.values.size());
        const auto nz        = l.weights.nonzero_count();
        char line[128];
        std::snprintf(line, sizeof line, "%5d  %7lld/%-7lld %8.4f  %5d  %7d  %5d\n", i, static_cast<long long>(nz),
                      static_cast<long long>(total), total > 0 ? 1.0 - static_cast<double>(nz) / static_cast<double>(total) : 0.0,
                      l.weights.scale_exponent, l.output_exp, l.affine.shift);
        os << line;
        layers.push_back({ { "index", i },
                           { "nonzero", nz },
                           { "total", total },
                           { "weight_exp", l.weights.scale_exponent },
                           { "output_exp", l.output_exp },
                           { "shift", l.affine.shift } });
    }
    os << "wrote " << a.output << "\n";
    ctx.emit({ { "output", a.output }, { "layers", layers } }, os.str());
}

struct RunArgs
{
    std::string model;
    std::string input;
    std::uint64_t seed = 0;
    int top            = 5;
};

void cmd_run(const Context& ctx, const RunArgs& a)
{
    const FrozenModel model = load_frozen(a.model);
    const Activation input  = a.input.empty() ? random_activation(model.graph.input_shape(), model.input_exp, a.seed)
                                              : load_activation(a.input);
    const InferenceTrace trace = infer(model, input);
    std::vector<int> order(trace.logits.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return trace.logits[static_cast<std::size_t>(x)] > trace.logits[static_cast<std::size_t>(y)]; });
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(a.top, 0)), order.size());
    json top = json::array();
    std::ostringstream os;
    os << "class   logit (x 2^" << trace.logit_exp << ")\n";
    for (std::size_t i = 0; i < k; ++i)
    {
        const int c = order[i];
        top.push_back({ { "class", c }, { "logit", trace.logits[static_cast<std::size_t>(c)] } });
        os << c << "\t" << trace.logits[static_cast<std::size_t>(c)] << "\n";
    }
    ctx.emit({ { "logit_exp", trace.logit_exp }, { "logits", trace.logits }, { "top", top } }, os.str());
}

// ---- freeze / sim --------------------------------------------------------

struct FreezeArgs
{
    std::string model;
    std::string output;
    int n_fixed = 0;
    std::vector<int> taps;
    bool bn_constant = false;
};

void cmd_freeze(const Context& ctx, const FreezeArgs& a)
{
    const FrozenModel model = load_frozen(a.model);
    const Netlist net       = freeze(model, { a.n_fixed, a.taps, !a.bn_constant });
    save_netlist(net, a.output);
    const PipelineStats stats = pipeline_stats(net);
    ctx.emit({ { "output", a.output }, { "n_fixed", net.n_fixed }, { "stages", net.stages.size() }, { "stats", stats_json(stats) } },
             "froze " + std::to_string(net.n_fixed) + " units into " + std::to_string(net.stages.size()) +
                 " stages -> " + a.output + "\n" + stats_text(stats));
}

struct SimArgs
{
    std::string netlist;
    std::string input;
    std::string check_against;
    int trials         = 100;
    std::uint64_t seed = 7;
};

int cmd_sim(const Context& ctx, const SimArgs& a)
{
    const Netlist net = load_netlist(a.netlist);
    const Activation input =
        a.input.empty() ? random_activation(net.input, net.input_exp, a.seed) : load_activation(a.input);
    const SimResult r = simulate(net, input);
    json j{ { "output", activation_summary(r.output) },
            { "cycles", r.cycles },
            { "frame_interval", r.frame_interval },
            { "stage_output_pixels", r.stage_output_pixels } };
    json taps = json::object();
    for (const auto& [k, t] : r.taps)
    {
        taps[std::to_string(k)] = activation_summary(t);
    }
    j["taps"] = taps;
    std::ostringstream os;
    os << "output " << r.output.shape.height << "x" << r.output.shape.width << "x" << r.output.shape.channels
       << " (exp " << r.output.scale_exponent << ")\n";
    os << "cycles/frame " << r.cycles << " (frame interval " << r.frame_interval << ")\n";
    for (const auto& [k, t] : r.taps)
    {
        os << "tap " << k << " " << t.shape.height << "x" << t.shape.width << "x" << t.shape.channels << "\n";
    }
    int code = kExitOk;
    if (!a.check_against.empty())
    {
        const FrozenModel model       = load_frozen(a.check_against);
        const EquivalenceReport report = check_equivalence(net, model, a.trials, a.seed);
        j["equivalence"] = { { "pass", report.pass }, { "trials", report.trials }, { "summary", report.describe() } };
        os << "equivalence " << report.describe() << "\n";
        code = report.pass ? kExitOk : kExitUserError;
    }
    ctx.emit(j, os.str());
    return code;
}

// ---- emit-rtl / ppa / dse ------------------------------------------------

struct EmitArgs
{
    std::string netlist;
    std::string output;
    int vectors        = 100;
    std::uint64_t seed = 42;
};

void cmd_emit(const Context& ctx, const EmitArgs& a)
{
    const Netlist net = load_netlist(a.netlist);
    RtlFiles files    = emit_verilog(net);
    files.merge(emit_testbench(net, a.vectors, a.seed));
    write_rtl_files(files, a.output);
    json names = json::array();
    std::string text;
    for (const auto& [rel, body] : files)
    {
        names.push_back(rel);
        text += a.output + "/" + rel + " (" + std::to_string(body.size()) + " bytes)\n";
    }
    ctx.emit({ { "files", names } }, text);
}

struct PpaArgs
{
    std::string netlist;
    std::string cost;
    std::string table;
    std::string model;
    double budget = 3.0;
};

std::string ppa_text(const PpaReport& r)
{
    std::ostringstream os;
    os << "area         " << fixed(r.area_mm2, 4) << " mm2\n"
       << "power        " << fixed(r.power_w, 5) << " W\n"
       << "throughput   " << fixed(r.tops, 4) << " TOPS\n"
       << "efficiency   " << fixed(r.tops_per_w, 2) << " TOPS/W\n"
       << "frame rate   " << fixed(r.fps, 1) << " fps\n"
       << "latency      " << r.latency_cycles << " cycles\n";
    return os.str();
}

void cmd_ppa(const Context& ctx, const PpaArgs& a)
{
    const Netlist net         = load_netlist(a.netlist);
    const CostConfig cost     = resolve_cost(a.cost);
    const PipelineStats stats = pipeline_stats(net);
    const PpaReport ffe       = ffe_ppa(net, stats, cost);
    json j{ { "stats", stats_json(stats) }, { "ffe", ppa_to_json(ffe) }, { "cost", cost_config_to_json(cost) } };
    std::string text = stats_text(stats) + "\nFFE\n" + ppa_text(ffe);
    if (!a.model.empty())
    {
        const FrozenModel model = load_frozen(a.model);
        const double f          = fixed_ops_fraction(model.graph, net.n_fixed);
        const NvdlaTable table  = resolve_table(a.table);
        const double backend_area = std::min(a.budget - ffe.area_mm2, table.rows.back().area_mm2);
        const NvdlaPoint backend  = nvdla_point(backend_area, table);
        if (!backend.feasible)
        {
            throw ConfigError("budget " + fixed(a.budget, 3) + " mm2 leaves no room for the smallest backend");
        }
        const PpaReport sys = system_ppa(ffe, f, backend);
        j["system"]         = ppa_to_json(sys);
        j["fixed_fraction"] = f;
        j["backend"]        = { { "area_mm2", backend.area_mm2 }, { "tops", backend.tops }, { "tops_per_w", backend.tops_per_w }, { "clamped", backend.clamped } };
        text += "\nsystem at " + fixed(a.budget, 3) + " mm2 (fixed ops " + fixed(100.0 * f, 2) + "%)\n" + ppa_text(sys);
        if (backend.clamped)
        {
            ctx.err << "warning: backend area clamped to the largest NVDLA configuration\n";
        }
    }
    ctx.emit(j, text);
}

struct DseArgs
{
    std::string model;
    std::string budgets;
    std::string splits;
    std::string preset;
    std::string cost;
    std::string table;
    std::string csv;
    std::string svg;
    bool bn_constant = false;
    int threads      = 0;
    bool pareto_only = false;
};

void cmd_dse(const Context& ctx, const DseArgs& a)
{
    std::vector<double> budgets;
    std::vector<int> splits;
    if (!a.preset.empty())
    {
        const DsePreset p = dse_preset(a.preset);
        budgets           = p.budgets;
        splits            = p.splits;
    }
    if (!a.budgets.empty())
    {
        budgets = parse_budgets(a.budgets);
    }
    if (!a.splits.empty())
    {
        splits = parse_splits(a.splits);
    }
    if (budgets.empty() || splits.empty())
    {
        throw ConfigError("dse needs --budgets and --splits, or --preset");
    }
    const FrozenModel model = load_frozen(a.model);
    SweepOptions opt;
    opt.cost            = resolve_cost(a.cost);
    opt.table           = resolve_table(a.table);
    opt.bn_programmable = !a.bn_constant;
    opt.threads         = a.threads;
    std::vector<DsePoint> points = sweep(model, budgets, splits, opt);
    if (a.pareto_only)
    {
        points = pareto(points);
    }
    if (!a.csv.empty())
    {
        write_csv(points, a.csv);
    }
    if (!a.svg.empty())
    {
        write_svgs(points, a.svg);
    }
    json rows = json::array();
    for (const RelativeRow& r : relative_rows(points))
    {
        const DsePoint& p = *r.point;
        rows.push_back({ { "n_fixed", p.n_fixed },
                         { "budget_mm2", p.budget_mm2 },
                         { "fixed_fraction", p.fixed_fraction },
                         { "ffe_area_mm2", p.ffe_area_mm2 },
                         { "backend_area_mm2", p.backend_area_mm2 },
                         { "backend_tops", p.backend.tops },
                         { "system_tops", p.system.tops },
                         { "system_tops_per_w", p.system.tops_per_w },
                         { "relative_tops", r.relative_tops },
                         { "relative_tops_per_w", r.relative_tops_per_w },
                         { "feasible", p.feasible } });
    }
    ctx.emit({ { "points", rows } }, table_report(points));
}

}    // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{ "fixynn: fixed-weight feature extractor toolchain" };
    app.name(args.empty() ? "fixynn" : args.front());
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "Machine-readable output");

    auto* model      = app.add_subcommand("model", "Inspect or create models");
    model->require_subcommand(1);
    ModelInfoArgs info;
    auto* info_cmd = model->add_subcommand("info", "Per-layer MACs and parameters");
    info_cmd->add_option("manifest", info.path, "Model or frozen-model manifest (omit for a built-in MobileNet)");
    info_cmd->add_option("--alpha", info.alpha, "Built-in MobileNet width multiplier");
    info_cmd->add_option("--resolution", info.resolution, "Built-in MobileNet input resolution");
    info_cmd->add_option("--classes", info.classes, "Built-in MobileNet class count");
    ModelInitArgs init;
    auto* init_cmd = model->add_subcommand("init", "Write a seeded random model bundle");
    init_cmd->add_option("--alpha", init.alpha, "Width multiplier");
    init_cmd->add_option("--resolution", init.resolution, "Input resolution");
    init_cmd->add_option("--classes", init.classes, "Class count");
    init_cmd->add_option("--seed", init.seed, "Weight seed");
    init_cmd->add_option("--graph", init.graph, "Graph JSON to use instead of the built-in MobileNet");
    init_cmd->add_option("-o,--output", init.output, "Manifest path")->required();

    CompressArgs comp;
    auto* comp_cmd = app.add_subcommand("compress", "Prune, quantize and calibrate a model");
    comp_cmd->add_option("model", comp.model, "Model manifest")->required();
    comp_cmd->add_option("-o,--output", comp.output, "Frozen-model manifest")->required();
    comp_cmd->add_option("--sparsity", comp.sparsity, "Fraction of weights zeroed per layer");
    comp_cmd->add_option("--bits", comp.bits, "Weight bits");
    comp_cmd->add_option("--input-exp", comp.input_exp, "Input power-of-two exponent");
    comp_cmd->add_option("--act-exp", comp.act_exp, "Force every activation exponent");
    comp_cmd->add_option("--calibration", comp.calibration, "Calibration tensors");
    comp_cmd->add_option("--calib-images", comp.calib_images, "Random calibration images when none are given");
    comp_cmd->add_option("--calib-seed", comp.calib_seed, "Seed for random calibration images");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Golden integer inference");
    run_cmd->add_option("model", run.model, "Frozen-model manifest")->required();
    run_cmd->add_option("--input", run.input, "Input tensor (default: seeded random image)");
    run_cmd->add_option("--seed", run.seed, "Seed for the random image");
    run_cmd->add_option("--top", run.top, "Classes to list");

    FreezeArgs frz;
    auto* frz_cmd = app.add_subcommand("freeze", "Lower the first N units into a netlist");
    frz_cmd->add_option("model", frz.model, "Frozen-model manifest")->required();
    frz_cmd->add_option("-n,--n-fixed", frz.n_fixed, "Prefix units to fix")->required();
    frz_cmd->add_option("--taps", frz.taps, "Unit boundaries exposed as tap ports")->delimiter(',');
    frz_cmd->add_flag("--bn-constant", frz.bn_constant, "Bake BN into constants instead of registers");
    frz_cmd->add_option("-o,--output", frz.output, "Netlist path")->required();

    SimArgs sim;
    auto* sim_cmd = app.add_subcommand("sim", "Simulate a netlist");
    sim_cmd->add_option("netlist", sim.netlist, "Netlist")->required();
    sim_cmd->add_option("--input", sim.input, "Input tensor (default: seeded random image)");
    sim_cmd->add_option("--check-against", sim.check_against, "Frozen model to prove equivalence against");
    sim_cmd->add_option("--trials", sim.trials, "Equivalence trials");
    sim_cmd->add_option("--seed", sim.seed, "Seed for random images");

    EmitArgs emit;
    auto* emit_cmd = app.add_subcommand("emit-rtl", "Write Verilog and a self-checking testbench");
    emit_cmd->add_option("netlist", emit.netlist, "Netlist")->required();
    emit_cmd->add_option("-o,--output", emit.output, "Output directory")->required();
    emit_cmd->add_option("--tb-vectors", emit.vectors, "Testbench frames");
    emit_cmd->add_option("--seed", emit.seed, "Stimulus seed");

    PpaArgs ppa;
    auto* ppa_cmd = app.add_subcommand("ppa", "Area, power and throughput of a netlist");
    ppa_cmd->add_option("netlist", ppa.netlist, "Netlist")->required();
    ppa_cmd->add_option("--cost", ppa.cost, "Cost config JSON (default: $FIXYNN_COST_CONFIG or built-in)");
    ppa_cmd->add_option("--nvdla-table", ppa.table, "NVDLA table JSON override");
    ppa_cmd->add_option("--model", ppa.model, "Frozen model, to compose the system point");
    ppa_cmd->add_option("--budget", ppa.budget, "Total area budget in mm2 for the system point");

    DseArgs dse;
    auto* dse_cmd = app.add_subcommand("dse", "Sweep split depth and area budget");
    dse_cmd->add_option("model", dse.model, "Frozen-model manifest")->required();
    dse_cmd->add_option("--budgets", dse.budgets, "lo:hi:step or a comma list, mm2");
    dse_cmd->add_option("--splits", dse.splits, "Comma list of split depths");
    dse_cmd->add_option("--preset", dse.preset, "Named sweep (table2)");
    dse_cmd->add_option("--cost", dse.cost, "Cost config JSON (default: $FIXYNN_COST_CONFIG or built-in)");
    dse_cmd->add_option("--nvdla-table", dse.table, "NVDLA table JSON override");
    dse_cmd->add_option("--csv", dse.csv, "CSV output path");
    dse_cmd->add_option("--svg", dse.svg, "Directory for SVG scatter plots");
    dse_cmd->add_flag("--bn-constant", dse.bn_constant, "Model BN as constants");
    dse_cmd->add_flag("--pareto", dse.pareto_only, "Report only the Pareto frontier");
    dse_cmd->add_option("--threads", dse.threads, "Worker threads (0 = all cores)");

    std::vector<const char*> argv;
    for (const std::string& a : args)
    {
        argv.push_back(a.c_str());
    }
    try
    {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUserError;
    }

    const Context ctx{ out, err, as_json };
    try
    {
        if (*info_cmd)
        {
            cmd_model_info(ctx, info);
        }
        else if (*init_cmd)
        {
            cmd_model_init(ctx, init);
        }
        else if (*comp_cmd)
        {
            cmd_compress(ctx, comp);
        }
        else if (*run_cmd)
        {
            cmd_run(ctx, run);
        }
        else if (*frz_cmd)
        {
            cmd_freeze(ctx, frz);
        }
        else if (*sim_cmd)
        {
            return cmd_sim(ctx, sim);
        }
        else if (*emit_cmd)
        {
            cmd_emit(ctx, emit);
        }
        else if (*ppa_cmd)
        {
            cmd_ppa(ctx, ppa);
        }
        else if (*dse_cmd)
        {
            cmd_dse(ctx, dse);
        }
        return kExitOk;
    }
    catch (const Error& e)
    {
        err << "error: " << e.what() << "\n";
        return kExitUserError;
    }
    catch (const std::exception& e)
    {
        err << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    }
}

}    // namespace fixynn
