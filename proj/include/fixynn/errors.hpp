//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>

namespace fixynn
{

/// Base of every error the toolchain raises on purpose.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: unsupported configuration, out-of-range argument.
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// Malformed or unreadable file.
class FormatError : public Error
{
public:
    using Error::Error;
};

/// An integer datapath value left its declared width.
class OverflowError : public Error
{
public:
    using Error::Error;
};

/// A netlist that violates its own structural invariants.
class StructureError : public Error
{
public:
    using Error::Error;
};

}    // namespace fixynn
