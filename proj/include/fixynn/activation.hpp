//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "fixynn/model_ir.hpp"

#include <cstdint>
#include <vector>

namespace fixynn
{

/// int8 feature map, HWC order, real ~= value * 2^scale_exponent.
struct Activation
{
    Shape3 shape;
    int scale_exponent = 0;
    std::vector<std::int8_t> values;

    std::size_t index(int y, int x, int c) const
    {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(shape.width) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(shape.channels) +
               static_cast<std::size_t>(c);
    }
    std::int8_t at(int y, int x, int c) const { return values[index(y, x, c)]; }

    bool operator==(const Activation&) const = default;
};

/// Uniform int8 image over the full [-128, 127] range, drawn from std::mt19937_64(seed).
Activation random_activation(const Shape3& shape, int scale_exponent, std::uint64_t seed);

}    // namespace fixynn
