#include <gtest/gtest.h>

#include <cmath>

#include "cartan/scan.hpp"

using namespace cartan;

namespace {

ScanConfig hyperbolic_config(int n, EngineChoice engine = EngineChoice::Graph) {
  ScanConfig cfg;
  cfg.model = "hyperbolic-tube";
  cfg.params = {{"epsilon", 0.5}};
  cfg.chart = "v-graph";
  cfg.ranges = {{"x", "0.5", "3", n}, {"y", "-epsilon*x + 0.01", "epsilon*x - 0.01", n}};
  cfg.engine = engine;
  return cfg;
}

}  // namespace

TEST(ParseRange, Accepts) {
  const auto r = parse_range("y=-0.9*epsilon*x:0.9*epsilon*x:25");
  EXPECT_EQ(r.var, "y");
  EXPECT_EQ(r.lo, "-0.9*epsilon*x");
  EXPECT_EQ(r.hi, "0.9*epsilon*x");
  EXPECT_EQ(r.n, 25);
}

TEST(ParseRange, Rejects) {
  EXPECT_THROW(parse_range("x0:1:5"), ParseError);
  EXPECT_THROW(parse_range("x=0:1"), ParseError);
  EXPECT_THROW(parse_range("x=0:1:five"), ParseError);
  EXPECT_THROW(parse_range("x=0:1:5.5"), ParseError);
}

TEST(Scan, HyperbolicTubeHasNoCandidates) {
  const auto res = scan_grid(hyperbolic_config(50));
  ASSERT_EQ(res.summaries.size(), 1u);
  const auto& s = res.summaries.front();
  EXPECT_EQ(s.n_ok, 2500);
  EXPECT_TRUE(s.candidates.empty());
  EXPECT_GT(s.min_abs, 0.0);
  EXPECT_TRUE(std::isfinite(s.min_abs));
}

TEST(Scan, HyperbolicTubeBothEngines) {
  const auto res = scan_grid(hyperbolic_config(20, EngineChoice::Both));
  ASSERT_EQ(res.summaries.size(), 2u);
  for (const auto& s : res.summaries) {
    EXPECT_EQ(s.n_ok, 400);
    EXPECT_TRUE(s.candidates.empty());
  }
  EXPECT_EQ(res.summaries[1].engine, Engine::Implicit);
  // Records alternate engines within each grid point.
  EXPECT_EQ(res.records[0].engine, Engine::Graph);
  EXPECT_EQ(res.records[1].engine, Engine::Implicit);
  EXPECT_EQ(res.records[0].coords, res.records[1].coords);
}

TEST(Scan, HeisenbergIsEverywhereUmbilical) {
  ScanConfig cfg;
  cfg.model = "heisenberg";
  cfg.chart = "graph";
  cfg.ranges = {{"x", "-2", "2", 7}, {"y", "-2", "2", 7}, {"u", "-1", "1", 3}};
  cfg.refine = true;
  const auto res = scan_grid(cfg);
  const auto& s = res.summaries.front();
  EXPECT_EQ(s.n_ok, 147);
  EXPECT_EQ(static_cast<int>(s.candidates.size()), 147);
  for (const auto& r : res.records) EXPECT_LT(r.abs, 1e-9);
}

TEST(Scan, DeterministicAcrossThreadCounts) {
  auto cfg = hyperbolic_config(15, EngineChoice::Both);
  const auto a = scan_grid(cfg);
  cfg.threads = 4;
  const auto b = scan_grid(cfg);
  cfg.threads = 7;
  const auto c = scan_grid(cfg);
  const auto ca = to_csv(a, cfg.model, cfg.chart);
  EXPECT_EQ(ca, to_csv(b, cfg.model, cfg.chart));
  EXPECT_EQ(ca, to_csv(c, cfg.model, cfg.chart));
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Scan, DomainSafety) {
  // A box far larger than the chart: skipped points are flagged, and ok points lie inside.
  ScanConfig cfg;
  cfg.model = "hyperbolic-tube";
  cfg.chart = "v-graph";
  cfg.ranges = {{"x", "-1", "3", 21}, {"y", "-2", "2", 21}};
  cfg.fixed = {{"u", 0.25}};
  const auto model = make_model(cfg.model);
  const auto res = scan_grid(model, cfg);
  const auto& chart = model.graph("v-graph");
  int ok = 0, skipped = 0;
  for (const auto& r : res.records) {
    EXPECT_EQ(r.coords[2], 0.25);
    const bool inside = chart.admissible({r.coords[0], r.coords[1], r.coords[2]});
    if (r.status == Status::Ok) {
      ++ok;
      EXPECT_TRUE(inside);
      EXPECT_TRUE(std::isfinite(r.abs) && std::isfinite(r.normalized) && std::isfinite(r.levi_or_fw));
    }
    if (r.status == Status::DomainSkipped) {
      ++skipped;
      EXPECT_FALSE(inside);
    }
  }
  EXPECT_GT(ok, 0);
  EXPECT_GT(skipped, 0);
  EXPECT_EQ(res.summaries.front().n_ok, ok);
  EXPECT_EQ(res.summaries.front().n_skipped, skipped);
}

TEST(Scan, RefinementNeverIncreases) {
  auto cfg = hyperbolic_config(6);
  cfg.zero_threshold = 1e30;  // every grid point becomes a candidate
  cfg.refine = true;
  const auto s = scan_grid(cfg).summaries.front();
  ASSERT_EQ(s.candidates.size(), 36u);
  int improved = 0;
  for (const auto& c : s.candidates) {
    EXPECT_LE(c.refined_abs, c.grid_abs);
    if (c.refined_abs < c.grid_abs) ++improved;
  }
  EXPECT_GT(improved, 0);
}

TEST(Scan, ImplicitChartCoordinates) {
  ScanConfig cfg;
  cfg.model = "torus-case3";
  cfg.params = {{"eps", 0.5}};
  cfg.chart = "implicit";
  cfg.engine = EngineChoice::Implicit;
  cfg.ranges = {{"x", "-0.45", "0.45", 9}, {"y", "-1", "1", 5}, {"v", "-1", "1", 5}};
  const auto res = scan_grid(cfg);
  EXPECT_EQ(res.coord_names[2], "v");
  const auto& s = res.summaries.front();
  EXPECT_EQ(s.n_ok, 225);
  EXPECT_TRUE(s.candidates.empty());
  EXPECT_GT(s.min_normalized, 1e-6);
}

TEST(Scan, CsvHeader) {
  const auto res = scan_grid(hyperbolic_config(3));
  const auto csv = to_csv(res, "hyperbolic-tube", "v-graph");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,chart,engine,x,y,u,inv_re,inv_im,inv_abs,levi_or_fw_abs,status");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  EXPECT_NE(csv.find("hyperbolic-tube,v-graph,graph,0.5,"), std::string::npos);
}

TEST(Scan, CsvSkippedRowsHaveEmptyValues) {
  ScanConfig cfg;
  cfg.model = "heisenberg";
  cfg.chart = "graph";
  cfg.ranges = {{"x", "0", "1", 2}};
  auto res = scan_grid(cfg);
  res.records.front().status = Status::DomainSkipped;
  const auto csv = to_csv(res, "heisenberg", "graph");
  EXPECT_NE(csv.find("heisenberg,graph,graph,0,0,0,,,,,domain-skipped\n"), std::string::npos);
}

TEST(Scan, JsonSummary) {
  const auto one = to_json(scan_grid(hyperbolic_config(4)));
  ASSERT_TRUE(one.is_object());
  for (const char* key : {"model", "engine", "n_ok", "n_skipped", "min_abs", "argmin", "candidates"})
    EXPECT_TRUE(one.contains(key)) << key;
  EXPECT_EQ(one["model"], "hyperbolic-tube");
  EXPECT_EQ(one["n_ok"], 16);
  EXPECT_TRUE(one["argmin"].contains("x"));
  const auto both = to_json(scan_grid(hyperbolic_config(4, EngineChoice::Both)));
  ASSERT_TRUE(both.is_array());
  EXPECT_EQ(both.size(), 2u);
  EXPECT_EQ(both[1]["engine"], "implicit");
}

TEST(Scan, Errors) {
  ScanConfig cfg;
  cfg.model = "hyperbolic-tube";
  cfg.chart = "v-graph";
  cfg.ranges = {{"x", "-3", "-1", 5}, {"y", "0", "1", 5}};
  EXPECT_THROW(scan_grid(cfg), DomainError);  // nothing admissible
  cfg.ranges = {{"x", "0.5", "1", 1}};
  EXPECT_THROW(scan_grid(cfg), DomainError);
  cfg.ranges = {{"q", "0.5", "1", 3}};
  EXPECT_THROW(scan_grid(cfg), LookupError);
  cfg.ranges = {{"x", "0.5", "1", 3}, {"x", "1", "2", 3}};
  EXPECT_THROW(scan_grid(cfg), DomainError);
  cfg.ranges = {};
  EXPECT_THROW(scan_grid(cfg), DomainError);
  cfg.ranges = {{"x", "0.5", "1", 3}};
  cfg.chart = "w-graph";
  EXPECT_THROW(scan_grid(cfg), LookupError);
  cfg.model = "torus-atlas";
  EXPECT_THROW(scan_grid(cfg), LookupError);
  cfg.model = "heisenberg";
  cfg.chart = "graph";
  cfg.engine = EngineChoice::Implicit;
  EXPECT_THROW(scan_grid(cfg), LookupError);
  EXPECT_THROW(engine_from_name("fast"), LookupError);
}

TEST(CrossCheck, HyperbolicTubeAllNonzero) {
  for (double e : {0.2, 0.5, 0.8}) {
    const auto rep = cross_check(make_model("hyperbolic-tube", {{"epsilon", e}}), 100, 0);
    EXPECT_EQ(rep.n_samples, 100);
    EXPECT_EQ(rep.n_agree, 100);
    EXPECT_EQ(rep.n_both_nonzero, 100);
    EXPECT_DOUBLE_EQ(rep.agreement_rate(), 1.0);
  }
}

TEST(CrossCheck, UnitSphereAllZero) {
  const auto rep = cross_check(make_model("unit-sphere"), 60, 1);
  EXPECT_EQ(rep.n_samples, 60);
  EXPECT_EQ(rep.n_both_zero, 60);
}

TEST(CrossCheck, SphereTubeAgreement) {
  const auto rep = cross_check(make_model("sphere-tube"), 50, 2);
  EXPECT_EQ(rep.n_samples, 50);
  EXPECT_EQ(rep.n_agree, 50);
  EXPECT_TRUE(rep.disagreements.empty());
}

TEST(CrossCheck, FlagsSyntheticDisagreement) {
  // Engines that disagree on the sign of x: one sees a zero where the other does not.
  std::vector<std::array<double, 3>> pts{{-1, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  auto g = [](const std::array<double, 3>& p) -> std::optional<std::pair<double, double>> {
    return std::pair{std::abs(p[0] - 1), std::abs(p[0] - 1)};
  };
  auto i = [](const std::array<double, 3>& p) -> std::optional<std::pair<double, double>> {
    if (p[0] > 2.5) return std::nullopt;
    return std::pair{1.0, 1.0};
  };
  const auto rep = cross_check(pts, g, i, 1e-7);
  EXPECT_EQ(rep.n_samples, 3);
  EXPECT_EQ(rep.n_failed, 1);
  EXPECT_EQ(rep.n_agree, 2);
  ASSERT_EQ(rep.disagreements.size(), 1u);
  EXPECT_EQ(rep.disagreements[0].point[0], 1.0);
  EXPECT_TRUE(rep.disagreements[0].graph_zero);
  EXPECT_FALSE(rep.disagreements[0].implicit_zero);
}

TEST(CrossCheck, RequiresBothCharts) {
  EXPECT_THROW(cross_check(make_model("heisenberg"), 10, 0), LookupError);
  EXPECT_THROW(cross_check(make_model("torus-case3"), 10, 0), LookupError);
}
