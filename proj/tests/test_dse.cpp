//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/dse.hpp"
#include "fixynn/errors.hpp"
#include "support/mobilenet_fixture.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

using namespace fixynn;

namespace
{

bool same(const DsePoint& a, const DsePoint& b)
{
    return a.n_fixed == b.n_fixed && a.budget_mm2 == b.budget_mm2 && a.feasible == b.feasible &&
           a.system.tops == b.system.tops && a.system.tops_per_w == b.system.tops_per_w &&
           a.ffe_area_mm2 == b.ffe_area_mm2;
}

}    // namespace

TEST_CASE("sweep is order-independent and deterministic across thread counts")
{
    const FrozenModel& m = testing::mobilenet025();
    std::vector<double> budgets{ 1.0, 2.0, 3.0, 4.5 };
    std::vector<int> splits{ 0, 2, 4, 7 };
    SweepOptions one;
    one.threads = 1;
    const auto a = sweep(m, budgets, splits, one);
    std::mt19937 rng(3);
    std::shuffle(budgets.begin(), budgets.end(), rng);
    std::shuffle(splits.begin(), splits.end(), rng);
    const auto b = sweep(m, budgets, splits);
    REQUIRE(a.size() == 16);
    REQUIRE(b.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(same(a[i], b[i]));
    }
    CHECK(std::is_sorted(a.begin(), a.end(), [](const DsePoint& x, const DsePoint& y) {
        return std::tie(x.n_fixed, x.budget_mm2) < std::tie(y.n_fixed, y.budget_mm2);
    }));
}

TEST_CASE("N=0 equals the backend alone")
{
    const auto pts = sweep(testing::mobilenet025(), { 0.5, 0.84, 1.7, 3.0, 4.0 }, { 0 });
    for (const DsePoint& p : pts)
    {
        const NvdlaPoint direct = nvdla_point(p.budget_mm2);
        CHECK(p.feasible == direct.feasible);
        CHECK(p.ffe_area_mm2 == 0.0);
        if (p.feasible)
        {
            CHECK(p.system.tops == direct.tops);
            CHECK(p.system.tops_per_w == direct.tops_per_w);
        }
    }
}

TEST_CASE("an FFE that does not leave room for the smallest backend is infeasible")
{
    const auto pts = sweep(testing::mobilenet025(), { 0.6, 3.0 }, { 11 });
    REQUIRE(pts.size() == 2);
    CHECK(!pts[0].feasible);
    CHECK(pts[0].system.tops == 0.0);
    CHECK(pts[1].feasible);
    CHECK(pts[1].backend_area_mm2 == doctest::Approx(3.0 - pts[1].ffe_area_mm2));
}

TEST_CASE("pareto front is dominance-free and feasible")
{
    const auto pts   = sweep(testing::mobilenet025(), parse_budgets("0.6:4.0:0.2"), { 0, 2, 4, 6, 8, 11, 14 });
    const auto front = pareto(pts);
    REQUIRE(!front.empty());
    for (const DsePoint& p : front)
    {
        CHECK(p.feasible);
        for (const DsePoint& q : pts)
        {
            if (!q.feasible)
            {
                continue;
            }
            const bool no_worse = q.budget_mm2 <= p.budget_mm2 && q.system.tops >= p.system.tops &&
                                  q.system.tops_per_w >= p.system.tops_per_w;
            const bool better = q.budget_mm2 < p.budget_mm2 || q.system.tops > p.system.tops ||
                                q.system.tops_per_w > p.system.tops_per_w;
            CHECK(!(no_worse && better));
        }
    }
}

TEST_CASE("table2 preset and reporting")
{
    const DsePreset p = dse_preset("table2");
    CHECK(p.budgets == std::vector<double>{ 3.0 });
    CHECK(p.splits == std::vector<int>{ 0, 4, 7, 11 });
    CHECK_THROWS_AS(dse_preset("nope"), ConfigError);

    const auto pts = sweep(testing::mobilenet025(), p.budgets, p.splits);
    const std::string csv = csv_report(pts);
    CHECK(csv.substr(0, csv.find('\n')) ==
          "n_fixed,budget_mm2,ffe_area_mm2,backend_area_mm2,backend_tops,system_tops,system_tops_per_w,feasible");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

    const auto rel = relative_rows(pts);
    REQUIRE(rel.size() == 4);
    CHECK(rel[0].relative_tops == 1.0);
    CHECK(rel[1].relative_tops == doctest::Approx(1.232).epsilon(0.005));
    CHECK(rel[2].relative_tops == doctest::Approx(1.358).epsilon(0.005));
    CHECK(rel[3].relative_tops == doctest::Approx(1.675).epsilon(0.005));
    CHECK(table_report(pts).find("1.00x") != std::string::npos);

    testing::TempDir dir;
    write_csv(pts, dir / "t.csv");
    std::ifstream in(dir / "t.csv");
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(all == csv);
    write_svgs(pts, dir.path());
    CHECK(std::filesystem::exists(dir / "tops_vs_area.svg"));
    CHECK(std::filesystem::exists(dir / "tops_per_w_vs_area.svg"));
    CHECK(svg_scatter(pts, SvgMetric::Efficiency).rfind("<svg", 0) == 0);
}

TEST_CASE("budget and split parsing")
{
    CHECK(parse_budgets("1.0:2.0:0.5") == std::vector<double>{ 1.0, 1.5, 2.0 });
    CHECK(parse_budgets("3.0") == std::vector<double>{ 3.0 });
    CHECK(parse_budgets("2,1") == std::vector<double>{ 2.0, 1.0 });
    CHECK(parse_budgets("1.0:5.0:0.25").size() == 17);
    CHECK_THROWS_AS(parse_budgets("1:2:0"), ConfigError);
    CHECK_THROWS_AS(parse_budgets("x"), ConfigError);
    CHECK_THROWS_AS(parse_budgets("-1"), ConfigError);
    CHECK(parse_splits("0,4,7") == std::vector<int>{ 0, 4, 7 });
    CHECK_THROWS_AS(parse_splits("a"), ConfigError);
    CHECK_THROWS_AS(sweep(testing::mobilenet025(), { 3.0 }, { 15 }), ConfigError);
}
