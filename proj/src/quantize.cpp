//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/quantize.hpp"

#include "fixynn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fixynn
{

double QuantizedTensor::dequantize(std::size_t index) const
{
    return std::ldexp(static_cast<double>(values.at(index)), scale_exponent);
}

std::size_t QuantizedTensor::nonzero_count() const
{
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](std::int8_t v) { return v != 0; }));
}

PruneResult prune_magnitude(std::span<const float> values, const PruneSpec& spec)
{
    if (!(spec.target_sparsity >= 0.0 && spec.target_sparsity <= 1.0))
    {
        throw ConfigError("target sparsity " + std::to_string(spec.target_sparsity) + " outside [0, 1]");
    }
    if (values.empty())
    {
        throw ConfigError("cannot prune an empty tensor");
    }

    const std::size_t n = values.size();
    // the epsilon keeps n*s from landing a hair under an integer (e.g. 3 * (1/3))
    auto count = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.target_sparsity + 1e-9));
    count = std::min(count, n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{ 0 });
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(values[a]) < std::abs(values[b]); });

    PruneResult result;
    result.values.assign(values.begin(), values.end());
    for (std::size_t i = 0; i < count; ++i)
    {
        result.values[order[i]] = 0.0f;
    }
    result.zeroed = count;
    const auto zeros = std::count(result.values.begin(), result.values.end(), 0.0f);
    result.achieved_sparsity = static_cast<double>(zeros) / static_cast<double>(n);
    return result;
}

int scale_exponent_for(double max_abs, int bits)
{
    if (max_abs == 0.0)
    {
        return 0;
    }
    const double qmax = std::ldexp(1.0, bits - 1) - 1.0;
    int e = static_cast<int>(std::ceil(std::log2(max_abs / qmax)));
    while (std::ldexp(max_abs, -e) > qmax)
    {
        ++e;
    }
    while (std::ldexp(max_abs, -(e - 1)) <= qmax)
    {
        --e;
    }
    return e;
}

double round_half_even(double value)
{
    // default floating-point environment rounds to nearest, ties to even
    return std::nearbyint(value);
}

std::int64_t round_shift_half_even(std::int64_t value, int shift)
{
    if (shift < 0 || shift > 62)
    {
        throw ConfigError("shift " + std::to_string(shift) + " outside [0, 62]");
    }
    if (shift == 0)
    {
        return value;
    }
    const std::int64_t floor_q = value >> shift;
    const std::int64_t rem     = value & ((std::int64_t{ 1 } << shift) - 1);
    const std::int64_t half    = std::int64_t{ 1 } << (shift - 1);
    if (rem > half || (rem == half && (floor_q & 1) != 0))
    {
        return floor_q + 1;
    }
    return floor_q;
}

std::int8_t saturate_int8(std::int64_t value)
{
    return static_cast<std::int8_t>(std::clamp<std::int64_t>(value, -128, 127));
}

QuantizedTensor quantize_tensor(std::span<const float> values, std::vector<std::uint32_t> dims, int bits)
{
    if (bits < 2 || bits > 8)
    {
        throw ConfigError("quantizer supports 2..8 bits, got " + std::to_string(bits));
    }
    double max_abs = 0.0;
    for (float v : values)
    {
        if (!std::isfinite(v))
        {
            throw ConfigError("cannot quantize a non-finite value");
        }
        max_abs = std::max(max_abs, static_cast<double>(std::abs(v)));
    }

    QuantizedTensor q;
    q.dims           = std::move(dims);
    q.scale_exponent = scale_exponent_for(max_abs, bits);
    const double lo  = -std::ldexp(1.0, bits - 1);
    const double hi  = std::ldexp(1.0, bits - 1) - 1.0;
    q.values.reserve(values.size());
    for (float v : values)
    {
        const double scaled = round_half_even(std::ldexp(static_cast<double>(v), -q.scale_exponent));
        q.values.push_back(static_cast<std::int8_t>(std::clamp(scaled, lo, hi)));
    }
    return q;
}

namespace
{

constexpr std::int64_t kMultiplierMin = -(std::int64_t{ 1 } << (kBnMultiplierBits - 1));
constexpr std::int64_t kMultiplierMax = (std::int64_t{ 1 } << (kBnMultiplierBits - 1)) - 1;

bool fits_int32(double v)
{
    return v >= static_cast<double>(std::numeric_limits<std::int32_t>::min()) &&
           v <= static_cast<double>(std::numeric_limits<std::int32_t>::max());
}

bool encodable(std::span<const float> gamma, std::span<const float> beta, const LayerScales& s, int shift)
{
    for (std::size_t c = 0; c < gamma.size(); ++c)
    {
        const double m = round_half_even(std::ldexp(gamma[c], s.input_exp + s.weight_exp - s.output_exp + shift));
        if (m < static_cast<double>(kMultiplierMin) || m > static_cast<double>(kMultiplierMax))
        {
            return false;
        }
        if (!fits_int32(round_half_even(std::ldexp(beta[c], shift - s.output_exp))))
        {
            return false;
        }
    }
    return true;
}

}    // namespace

BnRegisters prepare_bn(std::span<const float> gamma, std::span<const float> beta, const LayerScales& scales, int shift)
{
    if (gamma.size() != beta.size())
    {
        throw ConfigError("BN scale and bias channel counts differ");
    }
    if (shift < 0 || shift > kMaxBnShift)
    {
        throw ConfigError("BN shift " + std::to_string(shift) + " outside [0, " + std::to_string(kMaxBnShift) + "]");
    }
    BnRegisters regs;
    regs.shift = shift;
    for (std::size_t c = 0; c < gamma.size(); ++c)
    {
        if (!std::isfinite(gamma[c]) || !std::isfinite(beta[c]))
        {
            throw ConfigError("non-finite BN parameter on channel " + std::to_string(c));
        }
        const double m =
            round_half_even(std::ldexp(gamma[c], scales.input_exp + scales.weight_exp - scales.output_exp + shift));
        if (m < static_cast<double>(kMultiplierMin) || m > static_cast<double>(kMultiplierMax))
        {
            throw ConfigError("BN scale " + std::to_string(gamma[c]) + " on channel " + std::to_string(c) +
                              " does not fit a 16-bit multiplier at shift " + std::to_string(shift));
        }
        const double b = round_half_even(std::ldexp(beta[c], shift - scales.output_exp));
        if (!fits_int32(b))
        {
            throw ConfigError("BN bias " + std::to_string(beta[c]) + " on channel " + std::to_string(c) +
                              " does not fit 32 bits at shift " + std::to_string(shift));
        }
        regs.multiplier.push_back(static_cast<std::int32_t>(m));
        regs.bias.push_back(static_cast<std::int32_t>(b));
    }
    return regs;
}

int choose_bn_shift(std::span<const float> gamma, std::span<const float> beta, const LayerScales& scales, int max_shift)
{
    for (int shift = std::min(max_shift, kMaxBnShift); shift >= 0; --shift)
    {
        if (encodable(gamma, beta, scales, shift))
        {
            return shift;
        }
    }
    throw ConfigError("BN parameters cannot be encoded at any shift in [0, " + std::to_string(max_shift) + "]");
}

}    // namespace fixynn
