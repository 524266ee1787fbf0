// cartan: Cartan curvature of Levi-nondegenerate hypersurfaces in C^2.
//
// Exit codes: 0 success, 1 usage error, 2 domain or math error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cartan/scan.hpp"

namespace {

using namespace cartan;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw UsageError("invalid number '" + s + "' in " + what);
  return v;
}

Params parse_params(const std::vector<std::string>& items) {
  Params p;
  for (const auto& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("parameter must look like name=value: '" + it + "'");
    p[it.substr(0, eq)] = parse_number(it.substr(eq + 1), "--param");
  }
  return p;
}

std::vector<double> parse_point(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_number(item, "--point"));
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_graph(const CartanGraphResult& r) {
  std::cout << "engine graph\n"
            << "inv_re " << num(r.j_star.real()) << "\n"
            << "inv_im " << num(r.j_star.imag()) << "\n"
            << "inv_abs " << num(std::abs(r.j_star)) << "\n"
            << "normalized " << num(r.normalized()) << "\n"
            << "levi_factor " << num(r.levi_factor) << "\n";
}

void print_implicit(const ImplicitResult& r) {
  std::cout << "engine implicit\n"
            << "z " << num(r.point.z.real()) << " " << num(r.point.z.imag()) << "\n"
            << "w " << num(r.point.w.real()) << " " << num(r.point.w.imag()) << "\n"
            << "inv_re " << num(r.i_w.real()) << "\n"
            << "inv_im " << num(r.i_w.imag()) << "\n"
            << "inv_abs " << num(std::abs(r.i_w)) << "\n"
            << "normalized " << num(r.normalized()) << "\n"
            << "fw_abs " << num(std::abs(r.f_w)) << "\n";
}

ImplicitPoint implicit_point(const std::vector<double>& p) {
  if (p.size() != 4) throw UsageError("implicit points take four numbers: Re z, Im z, Re w, Im w");
  return {Complex(p[0], p[1]), Complex(p[2], p[3])};
}

std::array<double, 3> three(const std::vector<double>& p) {
  if (p.size() != 3) throw UsageError("chart points take three coordinates");
  return {p[0], p[1], p[2]};
}

int run_eval(const std::string& model_id, const std::vector<std::string>& params, std::string chart,
             const std::string& point, const std::string& engine) {
  const ModelEntry m = make_model(model_id, parse_params(params));
  if (chart.empty()) chart = m.graphs.empty() ? m.implicits.front().name : m.graphs.front().name();
  const auto p = parse_point(point);
  if (m.has_graph(chart)) {
    const GraphChart& g = m.graph(chart);
    const auto c = three(p);
    if (engine == "implicit") {
      if (!m.graph_to_implicit || m.implicits.empty()) throw UsageError("model has no implicit chart");
      const GraphPoint gp{c[0], c[1], c[2]};
      if (!g.admissible(gp)) throw ChartError("point outside the graph chart's domain");
      print_implicit(cartan_locus_iw(m.implicits.front().surface, m.graph_to_implicit(gp, g.value(gp))));
    } else {
      print_graph(g.invariant({c[0], c[1], c[2]}));
    }
    return 0;
  }
  const ImplicitChart& ic = m.implicit(chart);
  if (engine == "graph") throw UsageError("chart '" + chart + "' is implicit; use --engine implicit");
  if (p.size() == 4) {
    print_implicit(cartan_locus_iw(ic.surface, implicit_point(p)));
  } else {
    const auto q = ic.sampler(three(p));
    if (!q) throw ChartError("no surface point over these coordinates in chart '" + chart + "'");
    print_implicit(cartan_locus_iw(ic.surface, *q));
  }
  return 0;
}

int run_eval_expr(const std::string& graph, const std::string& implicit, const std::vector<std::string>& params,
                  const std::string& point) {
  if (graph.empty() == implicit.empty()) throw UsageError("give exactly one of --graph or --implicit");
  const Params prm = parse_params(params);
  const auto p = parse_point(point);
  if (!graph.empty()) {
    const auto h = GraphHypersurface::from_text(graph, prm);
    const auto c = three(p);
    print_graph(cartan_invariant_graph(h, {c[0], c[1], c[2]}));
  } else {
    const auto h = ImplicitHypersurface::from_text(implicit, prm);
    print_implicit(cartan_locus_iw(h, implicit_point(p)));
  }
  return 0;
}

int run_scan(ScanConfig cfg, const std::vector<std::string>& params, const std::vector<std::string>& ranges,
             const std::vector<std::string>& fixed, const std::string& engine, const std::string& out,
             const std::string& summary) {
  cfg.params = parse_params(params);
  for (const auto& r : ranges) cfg.ranges.push_back(parse_range(r));
  for (const auto& [k, v] : parse_params(fixed)) cfg.fixed[k] = v;
  const ModelEntry m = make_model(cfg.model, cfg.params);
  if (cfg.chart.empty()) cfg.chart = m.graphs.empty() ? m.implicits.front().name : m.graphs.front().name();
  cfg.engine = engine.empty() ? (m.has_graph(cfg.chart) ? EngineChoice::Graph : EngineChoice::Implicit)
                              : engine_from_name(engine);
  const ScanResult r = scan_grid(m, cfg);
  const std::string csv = to_csv(r, m.id, cfg.chart);
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(out);
    if (!(f << csv)) throw UsageError("cannot write " + out);
  }
  const std::string js = to_json(r).dump(2) + "\n";
  if (summary.empty()) {
    (out.empty() ? std::cerr : std::cout) << js;
  } else {
    std::ofstream f(summary);
    if (!(f << js)) throw UsageError("cannot write " + summary);
  }
  return 0;
}

int run_check(const std::string& model_id, const std::vector<std::string>& params, int samples, std::uint64_t seed,
              double threshold) {
  if (samples < 1) throw UsageError("--samples must be positive");
  const CrossReport rep = cross_check(make_model(model_id, parse_params(params)), samples, seed, threshold);
  std::cout << "model " << rep.model << "\n"
            << "samples " << rep.n_samples << "\n"
            << "failed " << rep.n_failed << "\n"
            << "agree " << rep.n_agree << "\n"
            << "both_zero " << rep.n_both_zero << "\n"
            << "both_nonzero " << rep.n_both_nonzero << "\n"
            << "agreement_rate " << num(rep.agreement_rate()) << "\n";
  for (const auto& d : rep.disagreements)
    std::cout << "disagreement " << num(d.point[0]) << "," << num(d.point[1]) << "," << num(d.point[2])
              << " graph " << num(d.graph_normalized) << " implicit " << num(d.implicit_normalized) << "\n";
  return 0;
}

int run_models() {
  for (const auto& id : model_ids()) {
    const ModelEntry m = make_model(id);
    std::cout << id << " [" << model_kind_name(m.kind) << ", " << level_name(m.level) << "]\n";
    for (const auto& p : m.parameters)
      std::cout << "  param " << p.name << " = " << num(p.default_value) << "  " << p.range << "\n";
    for (const auto& g : m.graphs) {
      std::cout << "  chart " << g.name() << ": " << g.formula() << "\n";
      if (const auto& h = g.hypersurface())
        for (const auto& d : h->domain()) std::cout << "    where " << d.source() << " > " << num(h->margin()) << "\n";
      if (!g.note().empty()) std::cout << "    " << g.note() << "\n";
    }
    for (const auto& c : m.implicits) {
      std::cout << "  chart " << c.name << ": 0 = " << c.surface.defining_function().source() << "\n"
                << "    coordinates " << c.coords[0] << ", " << c.coords[1] << ", " << c.coords[2] << "\n";
      if (!c.note.empty()) std::cout << "    " << c.note << "\n";
    }
    std::cout << "  " << m.notes << "\n";
  }
  return 0;
}

int run_psh(const std::string& expr, const std::vector<std::string>& params, const std::string& point) {
  const Params prm = parse_params(params);
  std::set<std::string> names;
  for (const auto& [k, v] : prm) names.insert(k);
  const auto p = parse_point(point);
  if (p.size() != 4) throw UsageError("psh points take four numbers: x, y, u, v");
  Expr e = [&] {
    try {
      return Expr::parse(expr, {"x", "y", "u", "v"}, names);
    } catch (const ParseError&) {
      return Expr::parse(expr, {"z", "w", "zb", "wb"}, names);
    }
  }();
  const PshResult r = psh_check(e, {p[0], p[1], p[2], p[3]}, prm);
  for (const auto& row : r.levi_matrix) {
    std::cout << "row";
    for (const auto& v : row) std::cout << " " << num(v.real()) << (v.imag() < 0 ? "-" : "+") << num(std::abs(v.imag())) << "i";
    std::cout << "\n";
  }
  std::cout << "min_eigenvalue " << num(r.min_eigenvalue) << "\n"
            << "max_eigenvalue " << num(r.max_eigenvalue) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cartan curvature of Levi-nondegenerate hypersurfaces in C^2"};
  app.require_subcommand(1);

  std::string model, chart, point, engine, graph_expr, implicit_expr, out, summary, psh_expr;
  std::vector<std::string> params, ranges, fixed;
  int samples = 100;
  std::uint64_t seed = 0;
  double threshold = 1e-7;
  ScanConfig cfg;

  auto* eval = app.add_subcommand("eval", "invariant of a gallery model at one point");
  eval->add_option("--model", model, "model id")->required();
  eval->add_option("--param", params, "parameter name=value");
  eval->add_option("--chart", chart, "chart name");
  eval->add_option("--point", point, "comma-separated chart coordinates")->required();
  eval->add_option("--engine", engine, "graph or implicit (default: the chart's own)")->check(CLI::IsMember({"graph", "implicit"}));

  auto* eval_expr = app.add_subcommand("eval-expr", "invariant of a user-supplied hypersurface");
  eval_expr->add_option("--graph", graph_expr, "v = phi(x, y, u)");
  eval_expr->add_option("--implicit", implicit_expr, "0 = F(z, w, zb, wb)");
  eval_expr->add_option("--param", params, "parameter name=value");
  eval_expr->add_option("--point", point, "x,y,u for graphs; Re z,Im z,Re w,Im w for implicit")->required();

  auto* scan = app.add_subcommand("scan", "grid scan for umbilical points");
  scan->add_option("--model", cfg.model, "model id")->required();
  scan->add_option("--param", params, "parameter name=value");
  scan->add_option("--chart", cfg.chart, "chart name");
  scan->add_option("--range", ranges, "var=lo:hi:n (bounds may use earlier coordinates)")->required();
  scan->add_option("--fix", fixed, "var=value for coordinates without a range");
  scan->add_option("--engine", engine, "graph, implicit or both")->check(CLI::IsMember({"graph", "implicit", "both"}));
  scan->add_option("--threshold", cfg.zero_threshold, "zero threshold on the normalized invariant");
  scan->add_flag("--refine", cfg.refine, "polish candidates by coordinate descent");
  scan->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  scan->add_option("--out", out, "CSV output file (default stdout)");
  scan->add_option("--summary", summary, "JSON summary file");

  auto* check = app.add_subcommand("check", "cross-engine zero-locus agreement");
  check->add_option("--model", model, "model id")->required();
  check->add_option("--param", params, "parameter name=value");
  check->add_option("--samples", samples, "number of samples");
  check->add_option("--seed", seed, "random seed");
  check->add_option("--threshold", threshold, "zero threshold on the normalized invariant");

  auto* models = app.add_subcommand("models", "list the model catalog");

  auto* psh = app.add_subcommand("psh", "complex Hessian and its smallest eigenvalue");
  psh->add_option("--expr", psh_expr, "r(x, y, u, v) or r(z, w, zb, wb)")->required();
  psh->add_option("--param", params, "parameter name=value");
  psh->add_option("--point", point, "x,y,u,v")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*eval) return run_eval(model, params, chart, point, engine);
    if (*eval_expr) return run_eval_expr(graph_expr, implicit_expr, params, point);
    if (*scan) return run_scan(cfg, params, ranges, fixed, engine, out, summary);
    if (*check) return run_check(model, params, samples, seed, threshold);
    if (*models) return run_models();
    if (*psh) return run_psh(psh_expr, params, point);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const LookupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
