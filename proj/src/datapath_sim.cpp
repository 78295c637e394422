//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/datapath_sim.hpp"

#include "fixynn/errors.hpp"
#include "fixynn/reference_exec.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <sstream>

namespace fixynn
{

namespace
{

// Streams one stage: a k-row ring line buffer fed in raster order, and an eager reader that
// fires output (i, j) as soon as the last input pixel its window touches has arrived.
class StageEngine
{
public:
    using Sink = std::function<void(std::span<const std::int8_t>)>;

    StageEngine(const Stage& stage, const BnRegisters& bn, Sink sink)
        : stage_(stage)
        , bn_(bn)
        , sink_(std::move(sink))
        , ring_(static_cast<std::size_t>(stage.kernel) * stage.input.width * stage.input.channels, 0)
        , pixel_(static_cast<std::size_t>(stage.output.channels), 0)
        , by_channel_(static_cast<std::size_t>(stage.output.channels))
    {
        for (const Multiplier& m : stage.multipliers)
        {
            by_channel_[static_cast<std::size_t>(m.out_channel)].push_back(&m);
        }
    }

    void push(std::span<const std::int8_t> px)
    {
        const Shape3& in = stage_.input;
        if (wr_row_ >= in.height)
        {
            throw StructureError("stage " + std::to_string(stage_.layer_index) + " received more pixels than a frame");
        }
        std::copy(px.begin(), px.end(), ring_.begin() + static_cast<std::ptrdiff_t>(slot(wr_row_, wr_col_, 0)));
        if (++wr_col_ == in.width)
        {
            wr_col_ = 0;
            ++wr_row_;
        }
        while (rd_i_ < stage_.output.height && ready(rd_i_, rd_j_))
        {
            emit(rd_i_, rd_j_);
            ++emitted_;
            if (++rd_j_ == stage_.output.width)
            {
                rd_j_ = 0;
                ++rd_i_;
            }
        }
    }

    std::int64_t emitted() const { return emitted_; }

private:
    std::size_t slot(int y, int x, int c) const
    {
        const auto row = static_cast<std::size_t>(y % stage_.kernel);
        return (row * stage_.input.width + static_cast<std::size_t>(x)) * stage_.input.channels +
               static_cast<std::size_t>(c);
    }

    bool ready(int i, int j) const
    {
        const int r = std::min(stage_.stride * i + stage_.pad(), stage_.input.height - 1);
        const int c = std::min(stage_.stride * j + stage_.pad(), stage_.input.width - 1);
        return wr_row_ > r || (wr_row_ == r && wr_col_ > c);
    }

    void emit(int i, int j)
    {
        const int pad = stage_.pad();
        std::vector<std::uint32_t> products;
        for (std::size_t co = 0; co < by_channel_.size(); ++co)
        {
            products.clear();
            for (const Multiplier* m : by_channel_[co])
            {
                const int y = stage_.stride * i + m->tap_row - pad;
                const int x = stage_.stride * j + m->tap_col - pad;
                const bool inside = y >= 0 && y < stage_.input.height && x >= 0 && x < stage_.input.width;
                const int value   = inside ? ring_[slot(y, x, m->in_channel)] : 0;
                products.push_back(static_cast<std::uint32_t>(m->weight * value));
            }
            // Pairwise tree; 32-bit adders wrap.
            while (products.size() > 1)
            {
                std::vector<std::uint32_t> next;
                for (std::size_t n = 0; n + 1 < products.size(); n += 2)
                {
                    next.push_back(products[n] + products[n + 1]);
                }
                if (products.size() % 2 == 1)
                {
                    next.push_back(products.back());
                }
                products.swap(next);
            }
            const auto acc = static_cast<std::int32_t>(products.empty() ? 0u : products.front());
            const std::int64_t v = std::int64_t{ acc } * bn_.multiplier[co] + bn_.bias[co];
            std::int8_t q        = saturate_int8(round_shift_half_even(v, bn_.shift));
            if (stage_.relu && q < 0)
            {
                q = 0;
            }
            pixel_[co] = q;
        }
        sink_(pixel_);
    }

    const Stage& stage_;
    const BnRegisters& bn_;
    Sink sink_;
    std::vector<std::int8_t> ring_;
    std::vector<std::int8_t> pixel_;
    std::vector<std::vector<const Multiplier*>> by_channel_;
    int wr_row_ = 0, wr_col_ = 0;
    int rd_i_ = 0, rd_j_ = 0;
    std::int64_t emitted_ = 0;
};

void record(Activation& a, std::int64_t pixel, std::span<const std::int8_t> px)
{
    std::copy(px.begin(), px.end(), a.values.begin() + static_cast<std::ptrdiff_t>(pixel * a.shape.channels));
}

}    // namespace

DatapathSimulator::DatapathSimulator(Netlist netlist)
    : net_(std::move(netlist))
{
    validate(net_);
    reset();
}

void DatapathSimulator::reset()
{
    bn_file_.clear();
    for (const Stage& st : net_.stages)
    {
        bn_file_.push_back(st.bn);
    }
}

void DatapathSimulator::load_bn_register(int stage, int channel, std::int32_t multiplier, std::int32_t bias)
{
    if (!net_.bn_programmable)
    {
        throw ConfigError("netlist was frozen with constant BN; its registers have no load port");
    }
    if (stage < 0 || stage >= static_cast<int>(bn_file_.size()))
    {
        throw ConfigError("no stage " + std::to_string(stage));
    }
    BnRegisters& regs = bn_file_[static_cast<std::size_t>(stage)];
    if (channel < 0 || channel >= static_cast<int>(regs.multiplier.size()))
    {
        throw ConfigError("stage " + std::to_string(stage) + " has no channel " + std::to_string(channel));
    }
    if (multiplier < -(1 << (kBnMultiplierBits - 1)) || multiplier >= (1 << (kBnMultiplierBits - 1)))
    {
        throw ConfigError("BN multiplier " + std::to_string(multiplier) + " exceeds the register width");
    }
    regs.multiplier[static_cast<std::size_t>(channel)] = multiplier;
    regs.bias[static_cast<std::size_t>(channel)]       = bias;
}

const BnRegisters& DatapathSimulator::bn_registers(int stage) const
{
    return bn_file_.at(static_cast<std::size_t>(stage));
}

SimResult DatapathSimulator::run(const Activation& input) const
{
    if (!(input.shape == net_.input) || input.values.size() != static_cast<std::size_t>(net_.input.elements()))
    {
        throw ConfigError("simulator input does not match the netlist's input shape");
    }

    SimResult result;
    result.output = { net_.output, net_.output_exp, std::vector<std::int8_t>(static_cast<std::size_t>(net_.output.elements())) };
    std::map<int, int> tap_of_stage;
    for (const TapPort& t : net_.taps)
    {
        const Stage& st = net_.stages[static_cast<std::size_t>(t.stage)];
        result.taps[t.boundary] = { st.output, st.output_exp,
                                    std::vector<std::int8_t>(static_cast<std::size_t>(st.output.elements())) };
        tap_of_stage[t.stage]   = t.boundary;
    }

    const std::size_t n = net_.stages.size();
    std::vector<std::unique_ptr<StageEngine>> engines(n);
    std::int64_t out_pixel = 0;
    for (std::size_t s = n; s-- > 0;)
    {
        Activation* tap_target = nullptr;
        if (auto it = tap_of_stage.find(static_cast<int>(s)); it != tap_of_stage.end())
        {
            tap_target = &result.taps[it->second];
        }
        StageEngine* next = s + 1 < n ? engines[s + 1].get() : nullptr;
        auto tap_pixel    = std::make_shared<std::int64_t>(0);
        engines[s]        = std::make_unique<StageEngine>(
            net_.stages[s], bn_file_[s], [&, next, tap_target, tap_pixel](std::span<const std::int8_t> px) {
                if (tap_target != nullptr)
                {
                    record(*tap_target, (*tap_pixel)++, px);
                }
                if (next != nullptr)
                {
                    next->push(px);
                }
                else
                {
                    record(result.output, out_pixel++, px);
                }
            });
    }

    const auto channels = static_cast<std::size_t>(net_.input.channels);
    for (std::int64_t p = 0; p < net_.input.pixels(); ++p)
    {
        std::span<const std::int8_t> px(input.values.data() + static_cast<std::size_t>(p) * channels, channels);
        if (n == 0)
        {
            record(result.output, out_pixel++, px);
        }
        else
        {
            engines.front()->push(px);
        }
    }

    std::int64_t depth = 0;
    result.frame_interval = n == 0 ? net_.input.pixels() : 0;
    for (std::size_t s = 0; s < n; ++s)
    {
        const std::int64_t produced = engines[s]->emitted();
        if (produced != net_.stages[s].output.pixels())
        {
            throw StructureError("stage " + std::to_string(s) + " emitted " + std::to_string(produced) +
                                 " pixels, expected " + std::to_string(net_.stages[s].output.pixels()));
        }
        result.stage_output_pixels.push_back(produced);
        result.frame_interval = std::max(result.frame_interval, produced);
        depth += net_.stages[s].latency();
    }
    result.cycles = depth + result.frame_interval;
    return result;
}

SimResult simulate(const Netlist& netlist, const Activation& input)
{
    return DatapathSimulator(netlist).run(input);
}

std::string EquivalenceReport::describe() const
{
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << " (" << trials << " trials)";
    if (first_mismatch)
    {
        const Mismatch& m = *first_mismatch;
        os << ": trial " << m.trial << ", " << (m.boundary == 0 ? std::string("output") : "tap " + std::to_string(m.boundary));
        if (!m.note.empty())
        {
            os << ": " << m.note;
        }
        else
        {
            os << " at (" << m.y << ", " << m.x << ", " << m.c << ") expected " << m.expected << " got " << m.actual;
        }
    }
    if (!warning.empty())
    {
        os << " [warning: " << warning << "]";
    }
    return os.str();
}

namespace
{

std::optional<Mismatch> compare(const Activation& expected, const Activation& actual, int trial, int boundary)
{
    if (!(expected.shape == actual.shape))
    {
        return Mismatch{ trial, boundary, 0, 0, 0, 0, 0, "shape mismatch" };
    }
    for (int y = 0; y < expected.shape.height; ++y)
    {
        for (int x = 0; x < expected.shape.width; ++x)
        {
            for (int c = 0; c < expected.shape.channels; ++c)
            {
                if (expected.at(y, x, c) != actual.at(y, x, c))
                {
                    return Mismatch{ trial, boundary, y, x, c, expected.at(y, x, c), actual.at(y, x, c), {} };
                }
            }
        }
    }
    return std::nullopt;
}

}    // namespace

EquivalenceReport check_equivalence(const DatapathSimulator& sim, const FrozenModel& model, int trials,
                                    std::uint64_t seed)
{
    const Netlist& net = sim.netlist();
    EquivalenceReport report;
    report.trials = std::max(trials, 0);
    if (!(net.input == model.graph.input_shape()) || net.n_fixed > model.graph.fixable_units())
    {
        report.pass           = false;
        report.first_mismatch = Mismatch{ 0, 0, 0, 0, 0, 0, 0, "netlist was not built from this model" };
        return report;
    }
    if (report.trials == 0)
    {
        report.warning = "0 trials: vacuous pass";
        return report;
    }
    const int n_layers = model.graph.prefix_layer_count(net.n_fixed);
    for (int t = 0; t < report.trials; ++t)
    {
        const Activation image = random_activation(net.input, net.input_exp, seed + static_cast<std::uint64_t>(t));
        const SimResult got    = sim.run(image);
        std::optional<Mismatch> bad;
        try
        {
            bad = compare(infer_prefix(model, image, n_layers), got.output, t, 0);
            for (const TapPort& port : net.taps)
            {
                if (bad)
                {
                    break;
                }
                bad = compare(tap(model, image, port.boundary, net.n_fixed), got.taps.at(port.boundary), t,
                              port.boundary);
            }
        }
        catch (const OverflowError& e)
        {
            bad = Mismatch{ t, 0, 0, 0, 0, 0, 0, std::string("golden executor overflow: ") + e.what() };
        }
        if (bad)
        {
            report.pass           = false;
            report.first_mismatch = bad;
            return report;
        }
    }
    return report;
}

EquivalenceReport check_equivalence(const Netlist& netlist, const FrozenModel& model, int trials, std::uint64_t seed)
{
    return check_equivalence(DatapathSimulator(netlist), model, trials, seed);
}

}    // namespace fixynn
