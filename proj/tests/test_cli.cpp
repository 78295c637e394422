//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/cli.hpp"
#include "fixynn/model_io.hpp"
#include "fixynn/netlist.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace fixynn;

namespace
{

struct Outcome
{
    int code = 0;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "fixynn");
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return { code, out.str(), err.str() };
}

std::string p(const std::filesystem::path& path)
{
    return path.string();
}

}    // namespace

TEST_CASE("model info on the built-in MobileNet")
{
    const Outcome r = cli({ "model", "info" });
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("41030272") != std::string::npos);

    const Outcome j = cli({ "--json", "model", "info", "--alpha", "1.0" });
    REQUIRE(j.code == kExitOk);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc.at("total_macs") == 568740352);
}

TEST_CASE("usage errors exit 1")
{
    CHECK(cli({}).code == kExitUserError);
    CHECK(cli({ "frobnicate" }).code == kExitUserError);
    CHECK(cli({ "model", "info", "--no-such-flag" }).code == kExitUserError);
    CHECK(cli({ "compress" }).code == kExitUserError);
    CHECK(cli({ "--help" }).code == kExitOk);
}

TEST_CASE("library errors surface as exit 1 with a message")
{
    testing::TempDir dir;
    const Outcome r = cli({ "compress", p(dir / "absent.json"), "-o", p(dir / "f.json") });
    CHECK(r.code == kExitUserError);
    CHECK(!r.err.empty());
    CHECK(cli({ "model", "info", "--alpha", "0.3" }).code == kExitUserError);
}

TEST_CASE("end-to-end pipeline through the command surface")
{
    testing::TempDir dir;
    REQUIRE(cli({ "model", "init", "--resolution", "32", "--classes", "10", "--seed", "3", "-o", p(dir / "m.json") }).code == 0);
    REQUIRE(cli({ "compress", p(dir / "m.json"), "-o", p(dir / "f.json"), "--sparsity", "0.5" }).code == 0);
    REQUIRE(cli({ "run", p(dir / "f.json"), "--seed", "1", "--top", "3" }).code == 0);
    REQUIRE(cli({ "freeze", p(dir / "f.json"), "-n", "3", "--taps", "1,2", "-o", p(dir / "n.json") }).code == 0);
    CHECK(load_netlist(dir / "n.json").taps.size() == 2);

    const Outcome sim = cli({ "sim", p(dir / "n.json"), "--check-against", p(dir / "f.json"), "--trials", "5" });
    CHECK(sim.code == 0);
    CHECK(sim.out.find("PASS") != std::string::npos);

    REQUIRE(cli({ "emit-rtl", p(dir / "n.json"), "-o", p(dir / "rtl"), "--tb-vectors", "2" }).code == 0);
    CHECK(std::filesystem::exists(dir / "rtl" / "rtl" / "ffe_top.v"));
    CHECK(std::filesystem::exists(dir / "rtl" / "tb" / "ffe_tb.v"));

    const Outcome ppa = cli({ "--json", "ppa", p(dir / "n.json"), "--model", p(dir / "f.json") });
    REQUIRE(ppa.code == 0);
    CHECK(nlohmann::json::parse(ppa.out).contains("ffe"));

    const Outcome dse = cli({ "dse", p(dir / "f.json"), "--budgets", "2.0:3.0:0.5", "--splits", "0,2", "--csv",
                              p(dir / "d.csv"), "--svg", p(dir / "svg") });
    CHECK(dse.code == 0);
    CHECK(std::filesystem::exists(dir / "d.csv"));
    CHECK(std::filesystem::exists(dir / "svg" / "tops_vs_area.svg"));
}

TEST_CASE("subcommands are idempotent")
{
    testing::TempDir dir;
    REQUIRE(cli({ "model", "init", "--resolution", "32", "--classes", "4", "-o", p(dir / "m.json") }).code == 0);
    REQUIRE(cli({ "compress", p(dir / "m.json"), "-o", p(dir / "a.json") }).code == 0);
    REQUIRE(cli({ "compress", p(dir / "m.json"), "-o", p(dir / "b.json") }).code == 0);
    CHECK(read_file_bytes(dir / "a.bin") == read_file_bytes(dir / "b.bin"));
    const Outcome r1 = cli({ "--json", "run", p(dir / "a.json"), "--seed", "9" });
    const Outcome r2 = cli({ "--json", "run", p(dir / "a.json"), "--seed", "9" });
    CHECK(r1.out == r2.out);
    REQUIRE(cli({ "freeze", p(dir / "a.json"), "-n", "2", "-o", p(dir / "n.json") }).code == 0);
    const Outcome s1 = cli({ "--json", "dse", p(dir / "a.json"), "--budgets", "3.0", "--splits", "0,1,2" });
    const Outcome s2 = cli({ "--json", "dse", p(dir / "a.json"), "--budgets", "3.0", "--splits", "2,1,0" });
    CHECK(s1.out == s2.out);
}

TEST_CASE("cost config comes from the environment when no flag is given")
{
    testing::TempDir dir;
    REQUIRE(cli({ "model", "init", "--resolution", "32", "--classes", "4", "-o", p(dir / "m.json") }).code == 0);
    REQUIRE(cli({ "compress", p(dir / "m.json"), "-o", p(dir / "f.json") }).code == 0);
    REQUIRE(cli({ "freeze", p(dir / "f.json"), "-n", "2", "-o", p(dir / "n.json") }).code == 0);
    std::ofstream(dir / "c.json") << R"({ "a_mult": 1.0 })";

    const auto area = [&](const Outcome& o) { return nlohmann::json::parse(o.out).at("ffe").at("area_mm2").get<double>(); };
    const double base = area(cli({ "--json", "ppa", p(dir / "n.json") }));
    ::setenv("FIXYNN_COST_CONFIG", p(dir / "c.json").c_str(), 1);
    const double env = area(cli({ "--json", "ppa", p(dir / "n.json") }));
    ::setenv("FIXYNN_COST_CONFIG", p(dir / "missing.json").c_str(), 1);
    const int bad = cli({ "ppa", p(dir / "n.json") }).code;
    ::unsetenv("FIXYNN_COST_CONFIG");
    CHECK(env > base + 1.0);
    CHECK(bad == kExitUserError);
}
