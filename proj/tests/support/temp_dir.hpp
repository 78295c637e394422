//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace fixynn::testing
{

/// A fresh directory removed on destruction.
class TempDir
{
public:
    TempDir()
    {
        static std::atomic<int> counter{ 0 };
        path_ = std::filesystem::temp_directory_path() /
                ("fixynn-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&)            = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}    // namespace fixynn::testing
