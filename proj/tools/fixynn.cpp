//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return fixynn::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
