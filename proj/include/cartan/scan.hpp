#pragma once

// Grid scanner for umbilical points and the cross-engine zero-locus check.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cartan/errors.hpp"
#include "cartan/tube_models.hpp"

namespace cartan {

enum class Engine { Graph, Implicit };
enum class EngineChoice { Graph, Implicit, Both };

inline const char* engine_name(Engine e) { return e == Engine::Graph ? "graph" : "implicit"; }

inline EngineChoice engine_from_name(std::string_view s) {
  if (s == "graph") return EngineChoice::Graph;
  if (s == "implicit") return EngineChoice::Implicit;
  if (s == "both") return EngineChoice::Both;
  throw LookupError("unknown engine '" + std::string(s) + "'");
}

enum class Status { Ok, DomainSkipped, LeviDegenerate, Error };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::DomainSkipped: return "domain-skipped";
    case Status::LeviDegenerate: return "levi-degenerate";
    case Status::Error: return "error";
  }
  return "?";
}

/// Grid axis var = lo..hi with n points.  The bounds are expressions over the chart
/// coordinates and model parameters, so "-0.9*epsilon*x" may follow a range on x.
struct Range {
  std::string var;
  std::string lo;
  std::string hi;
  int n = 2;
};

/// Parses "var=lo:hi:n".
inline Range parse_range(std::string_view text) {
  const auto eq = text.find('=');
  const auto c1 = text.find(':', eq == std::string_view::npos ? 0 : eq);
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (eq == std::string_view::npos || c1 == std::string_view::npos || c2 == std::string_view::npos)
    throw ParseError("range must look like var=lo:hi:n", 0);
  Range r{std::string(text.substr(0, eq)), std::string(text.substr(eq + 1, c1 - eq - 1)),
          std::string(text.substr(c1 + 1, c2 - c1 - 1)), 0};
  const std::string n(text.substr(c2 + 1));
  std::size_t used = 0;
  try {
    r.n = std::stoi(n, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != n.size()) throw ParseError("grid count must be an integer", c2 + 1);
  return r;
}

struct ScanConfig {
  std::string model;
  Params params;
  std::string chart;
  std::vector<Range> ranges;
  /// Values for chart coordinates that have no range (default 0).
  std::map<std::string, double> fixed;
  EngineChoice engine = EngineChoice::Graph;
  double zero_threshold = 1e-7;
  bool refine = false;
  int threads = 1;
};

/// One evaluation.  `normalized` is |invariant| divided by the local scale and is
/// what zero classification uses.
struct ScanRecord {
  std::array<double, 3> coords{};
  Engine engine = Engine::Graph;
  Complex value;
  double abs = 0.0;
  double normalized = 0.0;
  double levi_or_fw = 0.0;
  Status status = Status::Error;
  std::string message;
};

struct Candidate {
  std::array<double, 3> grid_point{};
  double grid_abs = 0.0;
  double grid_normalized = 0.0;
  std::array<double, 3> refined_point{};
  double refined_abs = 0.0;
  double refined_normalized = 0.0;
};

struct ScanSummary {
  std::string model;
  std::string chart;
  Engine engine = Engine::Graph;
  std::array<std::string, 3> coord_names;
  int n_ok = 0;
  int n_skipped = 0;
  int n_levi = 0;
  int n_error = 0;
  double min_abs = std::numeric_limits<double>::infinity();
  double min_normalized = std::numeric_limits<double>::infinity();
  std::array<double, 3> argmin{};
  std::vector<Candidate> candidates;
};

struct ScanResult {
  std::array<std::string, 3> coord_names;
  std::vector<ScanRecord> records;
  std::vector<ScanSummary> summaries;
};

/// Evaluates one engine at chart coordinates of a model.
class PointEvaluator {
 public:
  PointEvaluator(const ModelEntry& model, std::string chart) : model_(&model) {
    if (model.has_graph(chart)) {
      graph_ = &model.graph(chart);
      coords_ = {"x", "y", "u"};
      if (model.kind == ModelKind::Both && !model.implicits.empty()) implicit_ = &model.implicits.front();
    } else if (model.has_implicit(chart)) {
      implicit_ = &model.implicit(chart);
      implicit_direct_ = true;
      coords_ = implicit_->coords;
    } else {
      throw LookupError("model '" + model.id + "' has no chart '" + chart + "'");
    }
  }

  const std::array<std::string, 3>& coord_names() const noexcept { return coords_; }

  bool supports(Engine e) const {
    if (e == Engine::Graph) return graph_ != nullptr;
    return implicit_ != nullptr && (implicit_direct_ || static_cast<bool>(model_->graph_to_implicit));
  }

  ScanRecord evaluate(Engine e, const std::array<double, 3>& c) const {
    ScanRecord r;
    r.coords = c;
    r.engine = e;
    try {
      if (e == Engine::Graph) {
        const GraphPoint p{c[0], c[1], c[2]};
        if (!graph_->admissible(p)) {
          r.status = Status::DomainSkipped;
          return r;
        }
        const auto g = graph_->invariant(p);
        r.value = g.j_star;
        r.abs = std::abs(g.j_star);
        r.normalized = g.normalized();
        r.levi_or_fw = std::abs(g.levi_factor);
      } else {
        std::optional<ImplicitPoint> p;
        if (implicit_direct_) {
          p = implicit_->sampler(c);
        } else {
          const GraphPoint g{c[0], c[1], c[2]};
          if (graph_->admissible(g)) p = model_->graph_to_implicit(g, graph_->value(g));
        }
        if (!p) {
          r.status = Status::DomainSkipped;
          return r;
        }
        const auto res = cartan_locus_iw(implicit_->surface, *p);
        r.value = res.i_w;
        r.abs = std::abs(res.i_w);
        r.normalized = res.normalized();
        r.levi_or_fw = std::abs(res.f_w);
      }
      r.status = std::isfinite(r.abs) ? Status::Ok : Status::Error;
    } catch (const LeviDegenerateError& ex) {
      r.status = Status::LeviDegenerate;
      r.message = ex.what();
    } catch (const Error& ex) {
      r.status = Status::Error;
      r.message = ex.what();
    }
    return r;
  }

 private:
  const ModelEntry* model_;
  const GraphChart* graph_ = nullptr;
  const ImplicitChart* implicit_ = nullptr;
  bool implicit_direct_ = false;
  std::array<std::string, 3> coords_;
};

namespace scan_detail {

struct Axis {
  int coord = 0;
  Expr lo;
  Expr hi;
  int n = 2;

  std::pair<double, double> bounds(const std::array<double, 3>& c, const Params& params) const {
    return {eval_scalar<double>(lo, std::span<const double>(c), params),
            eval_scalar<double>(hi, std::span<const double>(c), params)};
  }
  double at(int k, const std::array<double, 3>& c, const Params& params) const {
    const auto [a, b] = bounds(c, params);
    return a + (b - a) * k / (n - 1);
  }
  double step(const std::array<double, 3>& c, const Params& params) const {
    const auto [a, b] = bounds(c, params);
    return (b - a) / (n - 1);
  }
};

inline std::vector<Axis> axes(const ScanConfig& cfg, const std::array<std::string, 3>& names, const Params& params,
                              std::array<double, 3>& base) {
  base = {0.0, 0.0, 0.0};
  auto index_of = [&](const std::string& v) {
    for (int i = 0; i < 3; ++i)
      if (names[static_cast<std::size_t>(i)] == v) return i;
    throw LookupError("chart has no coordinate '" + v + "' (coordinates: " + names[0] + ", " + names[1] + ", " +
                      names[2] + ")");
  };
  for (const auto& [k, v] : cfg.fixed) base[static_cast<std::size_t>(index_of(k))] = v;
  std::set<std::string> pnames;
  for (const auto& [k, v] : params) pnames.insert(k);
  const std::vector<std::string> vars(names.begin(), names.end());
  std::vector<Axis> out;
  for (const auto& r : cfg.ranges) {
    if (r.n < 2) throw DomainError("grid count for '" + r.var + "' must be at least 2");
    const int c = index_of(r.var);
    for (const auto& a : out)
      if (a.coord == c) throw DomainError("coordinate '" + r.var + "' has two ranges");
    out.push_back({c, Expr::parse(r.lo, vars, pnames), Expr::parse(r.hi, vars, pnames), r.n});
  }
  if (out.empty()) throw DomainError("scan needs at least one range");
  return out;
}

/// Coordinate descent on |invariant| with steps halving every sweep; only improvements
/// are accepted, so the result never exceeds the starting value.
inline std::pair<std::array<double, 3>, ScanRecord> refine(const PointEvaluator& ev, Engine e,
                                                           const std::vector<Axis>& axes, const Params& params,
                                                           const ScanRecord& start) {
  ScanRecord best = start;
  std::array<double, 3> steps{};
  for (const auto& a : axes) steps[static_cast<std::size_t>(a.coord)] = std::abs(a.step(start.coords, params)) / 2.0;
  for (int it = 0; it < 20; ++it) {
    for (const auto& a : axes) {
      const auto k = static_cast<std::size_t>(a.coord);
      for (double dir : {-1.0, 1.0}) {
        auto c = best.coords;
        c[k] += dir * steps[k];
        const ScanRecord r = ev.evaluate(e, c);
        if (r.status == Status::Ok && r.abs < best.abs) best = r;
      }
      steps[k] *= 0.5;
    }
  }
  return {best.coords, best};
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace scan_detail

/// Evaluates the selected engine(s) over the grid.  Work is split over `threads`
/// workers but records are stored in grid order, so output is deterministic.
inline ScanResult scan_grid(const ModelEntry& model, const ScanConfig& cfg) {
  const PointEvaluator ev(model, cfg.chart);
  std::vector<Engine> engines;
  if (cfg.engine != EngineChoice::Implicit) engines.push_back(Engine::Graph);
  if (cfg.engine != EngineChoice::Graph) engines.push_back(Engine::Implicit);
  for (Engine e : engines)
    if (!ev.supports(e))
      throw LookupError(std::string("chart '") + cfg.chart + "' of model '" + model.id + "' has no " + engine_name(e) +
                        " engine");

  std::array<double, 3> base{};
  const auto ax = scan_detail::axes(cfg, ev.coord_names(), model.values, base);
  std::size_t total = 1;
  for (const auto& a : ax) total *= static_cast<std::size_t>(a.n);

  // First range varies slowest; later bounds see the earlier coordinates.
  std::vector<std::array<double, 3>> points(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<int> idx(ax.size());
    std::size_t rest = flat;
    for (std::size_t k = ax.size(); k-- > 0;) {
      const auto n = static_cast<std::size_t>(ax[k].n);
      idx[k] = static_cast<int>(rest % n);
      rest /= n;
    }
    auto c = base;
    for (std::size_t k = 0; k < ax.size(); ++k)
      c[static_cast<std::size_t>(ax[k].coord)] = ax[k].at(idx[k], c, model.values);
    points[flat] = c;
  }

  ScanResult out;
  out.coord_names = ev.coord_names();
  out.records.resize(total * engines.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < total;)
      for (std::size_t k = 0; k < engines.size(); ++k)
        out.records[i * engines.size() + k] = ev.evaluate(engines[k], points[i]);
  };
  const int nt = std::max(1, cfg.threads);
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  bool any_ok = false;
  for (std::size_t k = 0; k < engines.size(); ++k) {
    ScanSummary s;
    s.model = model.id;
    s.chart = cfg.chart;
    s.engine = engines[k];
    s.coord_names = out.coord_names;
    for (std::size_t i = 0; i < total; ++i) {
      const auto& r = out.records[i * engines.size() + k];
      switch (r.status) {
        case Status::Ok: ++s.n_ok; break;
        case Status::DomainSkipped: ++s.n_skipped; continue;
        case Status::LeviDegenerate: ++s.n_levi; continue;
        case Status::Error: ++s.n_error; continue;
      }
      if (r.abs < s.min_abs) {
        s.min_abs = r.abs;
        s.argmin = r.coords;
      }
      s.min_normalized = std::min(s.min_normalized, r.normalized);
      if (r.normalized < cfg.zero_threshold) {
        Candidate c{r.coords, r.abs, r.normalized, r.coords, r.abs, r.normalized};
        if (cfg.refine) {
          auto [pt, best] = scan_detail::refine(ev, engines[k], ax, model.values, r);
          c.refined_point = pt;
          c.refined_abs = best.abs;
          c.refined_normalized = best.normalized;
        }
        s.candidates.push_back(c);
      }
    }
    any_ok = any_ok || s.n_ok > 0;
    out.summaries.push_back(std::move(s));
  }
  if (!any_ok) throw DomainError("no admissible grid points");
  return out;
}

inline ScanResult scan_grid(const ScanConfig& cfg) { return scan_grid(make_model(cfg.model, cfg.params), cfg); }

/// CSV with header model,chart,engine,<coords>,inv_re,inv_im,inv_abs,levi_or_fw_abs,status.
inline std::string to_csv(const ScanResult& r, const std::string& model, const std::string& chart) {
  using scan_detail::fmt;
  std::string s = "model,chart,engine," + r.coord_names[0] + "," + r.coord_names[1] + "," + r.coord_names[2] +
                  ",inv_re,inv_im,inv_abs,levi_or_fw_abs,status\n";
  for (const auto& rec : r.records) {
    s += model + "," + chart + "," + engine_name(rec.engine);
    for (double c : rec.coords) s += "," + fmt(c);
    if (rec.status == Status::Ok)
      s += "," + fmt(rec.value.real()) + "," + fmt(rec.value.imag()) + "," + fmt(rec.abs) + "," + fmt(rec.levi_or_fw);
    else
      s += ",,,,";
    s += std::string(",") + status_name(rec.status) + "\n";
  }
  return s;
}

inline nlohmann::json to_json(const ScanSummary& s) {
  auto point = [&](const std::array<double, 3>& p) {
    nlohmann::json j;
    for (std::size_t i = 0; i < 3; ++i) j[s.coord_names[i]] = p[i];
    return j;
  };
  nlohmann::json j;
  j["model"] = s.model;
  j["chart"] = s.chart;
  j["engine"] = engine_name(s.engine);
  j["n_ok"] = s.n_ok;
  j["n_skipped"] = s.n_skipped;
  j["n_levi_degenerate"] = s.n_levi;
  j["n_error"] = s.n_error;
  j["min_abs"] = s.n_ok ? nlohmann::json(s.min_abs) : nlohmann::json(nullptr);
  j["min_normalized"] = s.n_ok ? nlohmann::json(s.min_normalized) : nlohmann::json(nullptr);
  j["argmin"] = s.n_ok ? point(s.argmin) : nlohmann::json(nullptr);
  j["candidates"] = nlohmann::json::array();
  for (const auto& c : s.candidates)
    j["candidates"].push_back({{"point", point(c.grid_point)},
                               {"abs", c.grid_abs},
                               {"normalized", c.grid_normalized},
                               {"refined_point", point(c.refined_point)},
                               {"refined_abs", c.refined_abs},
                               {"refined_normalized", c.refined_normalized}});
  return j;
}

/// One object for a single engine, an array of per-engine objects otherwise.
inline nlohmann::json to_json(const ScanResult& r) {
  if (r.summaries.size() == 1) return to_json(r.summaries.front());
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : r.summaries) j.push_back(to_json(s));
  return j;
}

// ---------------------------------------------------------------------------
// Cross-check

struct CrossSample {
  std::array<double, 3> point{};
  double graph_normalized = 0.0;
  double implicit_normalized = 0.0;
  double graph_abs = 0.0;
  double implicit_abs = 0.0;
  bool graph_zero = false;
  bool implicit_zero = false;
};

struct CrossReport {
  std::string model;
  int n_samples = 0;
  int n_agree = 0;
  int n_both_zero = 0;
  int n_both_nonzero = 0;
  int n_failed = 0;
  std::vector<CrossSample> samples;
  std::vector<CrossSample> disagreements;
  double agreement_rate() const { return n_samples ? static_cast<double>(n_agree) / n_samples : 0.0; }
};

/// Classifies each sample under both engines and counts agreements.  The engines are
/// passed as callables returning {abs, normalized} or nullopt when a sample fails.
template <class GraphFn, class ImplicitFn>
CrossReport cross_check(const std::vector<std::array<double, 3>>& samples, GraphFn&& graph, ImplicitFn&& implicit,
                        double threshold) {
  CrossReport rep;
  for (const auto& p : samples) {
    const std::optional<std::pair<double, double>> g = graph(p);
    const std::optional<std::pair<double, double>> i = implicit(p);
    if (!g || !i) {
      ++rep.n_failed;
      continue;
    }
    CrossSample s{p, g->second, i->second, g->first, i->first, g->second < threshold, i->second < threshold};
    ++rep.n_samples;
    if (s.graph_zero == s.implicit_zero) {
      ++rep.n_agree;
      ++(s.graph_zero ? rep.n_both_zero : rep.n_both_nonzero);
    } else {
      rep.disagreements.push_back(s);
    }
    rep.samples.push_back(s);
  }
  return rep;
}

/// Random admissible samples of a `both` model (graph chart 0 against implicit chart 0).
inline CrossReport cross_check(const ModelEntry& model, int n, std::uint64_t seed, double threshold = 1e-7) {
  if (model.kind != ModelKind::Both || model.graphs.empty() || model.implicits.empty() || !model.sample)
    throw LookupError("model '" + model.id + "' does not provide both a graph and an implicit chart");
  const GraphChart& gc = model.graphs.front();
  const ImplicitChart& ic = model.implicits.front();
  std::mt19937_64 rng(seed);
  std::vector<std::array<double, 3>> pts;
  for (int tries = 0; static_cast<int>(pts.size()) < n && tries < 1000 * std::max(n, 1); ++tries) {
    const auto p = model.sample(rng);
    if (gc.admissible({p[0], p[1], p[2]})) pts.push_back(p);
  }
  if (pts.empty()) throw DomainError("no common coverage between the charts");
  auto graph = [&](const std::array<double, 3>& p) -> std::optional<std::pair<double, double>> {
    try {
      const auto r = gc.invariant({p[0], p[1], p[2]});
      return std::pair{std::abs(r.j_star), r.normalized()};
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  auto implicit = [&](const std::array<double, 3>& p) -> std::optional<std::pair<double, double>> {
    try {
      const GraphPoint g{p[0], p[1], p[2]};
      const auto r = cartan_locus_iw(ic.surface, model.graph_to_implicit(g, gc.value(g)));
      return std::pair{std::abs(r.i_w), r.normalized()};
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  CrossReport rep = cross_check(pts, graph, implicit, threshold);
  rep.model = model.id;
  return rep;
}

}  // namespace cartan
