//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fixynn
{

inline constexpr int kExitOk            = 0;
inline constexpr int kExitUserError     = 1;
inline constexpr int kExitInternalError = 2;

/// The `fixynn` command line. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}    // namespace fixynn
