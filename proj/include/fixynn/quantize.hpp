//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fixynn
{

struct RealTensor
{
    std::vector<std::uint32_t> dims;
    std::vector<float> values;
};

/// int8 payload with a power-of-two scale: real ~= value * 2^scale_exponent.
struct QuantizedTensor
{
    std::vector<std::uint32_t> dims;
    std::vector<std::int8_t> values;
    int scale_exponent = 0;

    double dequantize(std::size_t index) const;
    std::size_t nonzero_count() const;
};

struct PruneSpec
{
    double target_sparsity = 0.0;
};

struct PruneResult
{
    std::vector<float> values;
    std::size_t zeroed = 0;           // entries this call forced to zero
    double achieved_sparsity = 0.0;   // all zeros, pre-existing included
};

/// Zero the floor(n*s) smallest-magnitude entries; ties go to the lower flat index.
PruneResult prune_magnitude(std::span<const float> values, const PruneSpec& spec);

/// Symmetric power-of-two quantizer, round-half-to-even.
QuantizedTensor quantize_tensor(std::span<const float> values, std::vector<std::uint32_t> dims, int bits = 8);

/// Smallest exponent e with max_abs / 2^e <= 2^(bits-1) - 1 (0 when max_abs is 0).
int scale_exponent_for(double max_abs, int bits = 8);

/// value / 2^shift rounded to nearest, ties to even. Exact over the full int64 range.
std::int64_t round_shift_half_even(std::int64_t value, int shift);

/// Nearest integer, ties to even.
double round_half_even(double value);

std::int8_t saturate_int8(std::int64_t value);

/// Per-channel integer affine that replaces BN + requantization in the datapath:
/// y = clamp(rne((acc * multiplier + bias) / 2^shift)).
struct BnRegisters
{
    int shift = 0;
    std::vector<std::int32_t> multiplier;    // each in [-2^15, 2^15)
    std::vector<std::int32_t> bias;

    bool operator==(const BnRegisters&) const = default;
};

/// Exponents of the tensors around one conv: acc carries 2^(input_exp + weight_exp).
struct LayerScales
{
    int input_exp  = 0;
    int weight_exp = 0;
    int output_exp = 0;
};

inline constexpr int kBnMultiplierBits = 16;
inline constexpr int kMaxBnShift       = 30;

/// Encode real per-channel BN (y = gamma * x + beta) at a fixed shift.
/// Throws ConfigError if some gamma does not fit the 16-bit multiplier at this shift.
BnRegisters prepare_bn(std::span<const float> gamma, std::span<const float> beta, const LayerScales& scales, int shift);

/// Largest shift <= max_shift at which every multiplier and bias still fits.
int choose_bn_shift(std::span<const float> gamma, std::span<const float> beta, const LayerScales& scales,
                    int max_shift = kMaxBnShift);

}    // namespace fixynn
