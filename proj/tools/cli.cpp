#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "qfratio/builders.hpp"
#include "qfratio/errors.hpp"
#include "qfratio/oracle.hpp"
#include "qfratio/parallel.hpp"
#include "qfratio/problem_io.hpp"
#include "qfratio/saddlepoint.hpp"
#include "qfratio/support.hpp"
#include "qfratio/tail_limits.hpp"

namespace qfratio::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
  std::string problem;
  std::string grid;
  std::string points;
  std::string side = "both";
  std::string format = "json";
  std::uint64_t seed = 1;
  std::uint64_t draws = 100000;
  std::vector<std::string> tols;
  std::string out;

  std::string kind;
  int n = 2;
  int lag = 1;
  int m = 1;
  std::string mu;
  std::string design = "none";
};

double parse_number(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw InvalidInput(std::string("cannot parse ") + what + " '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  for (const std::string& item : split(text, ',')) values.push_back(parse_number(item, what));
  return values;
}

std::vector<double> linspace(double a, double b, long count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    g[static_cast<std::size_t>(i)] =
        count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return g;
}

std::vector<double> parse_grid(const Options& opt) {
  if (!opt.grid.empty() && !opt.points.empty()) {
    throw InvalidInput("give either --grid or --points, not both");
  }
  if (!opt.points.empty()) return parse_list(opt.points, "point");
  if (opt.grid.empty()) throw InvalidInput("a grid is required (--grid a:b:n or --points)");
  const auto parts = split(opt.grid, ':');
  if (parts.size() != 3) throw InvalidInput("--grid must look like a:b:n");
  const double a = parse_number(parts[0], "grid start");
  const double b = parse_number(parts[1], "grid stop");
  const double count = parse_number(parts[2], "grid count");
  if (count < 1 || count != std::floor(count)) {
    throw InvalidInput("grid count must be a positive integer");
  }
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("grid ends must be finite");
  return linspace(a, b, static_cast<long>(count));
}

Tolerances parse_tolerances(const Options& opt) {
  Tolerances tol;
  for (const std::string& item : opt.tols) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidInput("--tol expects NAME=VALUE, got '" + item + "'");
    tol.set(item.substr(0, eq), parse_number(item.substr(eq + 1), "tolerance"));
  }
  return tol;
}

QuadFormRatio load(const Options& opt) {
  if (opt.problem.empty()) throw InvalidInput("--problem is required");
  return load_problem(opt.problem, parse_tolerances(opt));
}

Json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json vec(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Json mat(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Side> sides(const std::string& s) {
  if (s == "right") return {Side::right};
  if (s == "left") return {Side::left};
  if (s == "both") return {Side::left, Side::right};
  throw InvalidInput("--side must be left, right or both");
}

void require_format(const Options& opt) {
  if (opt.format != "json" && opt.format != "csv") {
    throw InvalidInput("--format must be json or csv");
  }
}

// Writes to --out when given, otherwise to the command's output stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InvalidInput("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

Json edge_json(const EdgeStructure& e) {
  Json j;
  j["side"] = std::string(to_string(e.side));
  j["edge"] = num(e.edge);
  j["m"] = e.m;
  j["nu0"] = vec(e.nu0);
  j["omega"] = vec(e.omega);
  j["H_edge"] = mat(e.H_edge);
  return j;
}

int cmd_analyze(const Options& opt, std::ostream& out) {
  const QuadFormRatio ratio = load(opt);
  const SupportInfo info = support(ratio);
  Json j;
  j["n"] = ratio.dim();
  j["support"] = {{"l", num(info.l)},
                  {"r_bar", num(info.r_bar)},
                  {"case", std::string(to_string(info.case_tag))},
                  {"left_case", std::string(to_string(info.left_case))},
                  {"in_CR", info.in_CR},
                  {"in_CL", info.in_CL}};
  Json edges = Json::array();
  for (Side s : {Side::left, Side::right}) {
    const bool in_class = s == Side::right ? info.in_CR : info.in_CL;
    if (!in_class) continue;
    try {
      edges.push_back(edge_json(edge_structure(ratio, info, s)));
    } catch (const UnsupportedInstance& e) {
      edges.push_back({{"side", std::string(to_string(s))}, {"error", e.what()}});
    }
  }
  j["edges"] = edges;
  Sink sink(opt.out, out);
  sink.get() << j.dump(2) << '\n';
  return 0;
}

int cmd_build(const Options& opt, std::ostream& out) {
  BuilderSpec spec;
  spec.kind = opt.kind;
  spec.n = opt.n;
  spec.lag = opt.lag;
  spec.m = opt.m;
  spec.design = parse_design(opt.design);
  if (!opt.mu.empty()) {
    const auto values = parse_list(opt.mu, "mean");
    spec.mu = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  const QuadFormRatio ratio = build(spec);
  Sink sink(opt.out, out);
  sink.get() << problem_to_json(ratio) << '\n';
  return 0;
}

Json solution_fields(Json j, const std::optional<SaddlepointSolution>& sol) {
  j["s_hat"] = sol ? num(sol->s_hat) : Json(nullptr);
  j["w_hat"] = sol ? num(sol->w_hat) : Json(nullptr);
  j["u_hat"] = sol ? num(sol->u_hat) : Json(nullptr);
  return j;
}

std::string opt_csv(const std::optional<SaddlepointSolution>& sol, double SaddlepointSolution::*f) {
  return sol ? csv_num((*sol).*f) : std::string();
}

int cmd_cdf(const Options& opt, std::ostream& out) {
  require_format(opt);
  const QuadFormRatio ratio = load(opt);
  const std::vector<double> grid = parse_grid(opt);
  std::vector<CdfApprox> res(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { res[i] = cdf(ratio, grid[i]); });

  Sink sink(opt.out, out);
  if (opt.format == "csv") {
    sink.get() << "r,value,upper,s_hat,w_hat,u_hat,branch\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& c = res[i];
      sink.get() << csv_num(grid[i]) << ',' << csv_num(c.value) << ',' << csv_num(c.upper) << ','
                 << opt_csv(c.solution, &SaddlepointSolution::s_hat) << ','
                 << opt_csv(c.solution, &SaddlepointSolution::w_hat) << ','
                 << opt_csv(c.solution, &SaddlepointSolution::u_hat) << ',' << to_string(c.branch)
                 << '\n';
    }
    return 0;
  }
  Json records = Json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& c = res[i];
    Json j;
    j["r"] = num(grid[i]);
    j["value"] = num(c.value);
    j["upper"] = num(c.upper);
    j = solution_fields(j, c.solution);
    j["branch"] = std::string(to_string(c.branch));
    records.push_back(j);
  }
  sink.get() << records.dump(2) << '\n';
  return 0;
}

int cmd_pdf(const Options& opt, std::ostream& out) {
  require_format(opt);
  const QuadFormRatio ratio = load(opt);
  const std::vector<double> grid = parse_grid(opt);
  std::vector<DensityApprox> res(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { res[i] = pdf(ratio, grid[i]); });

  Sink sink(opt.out, out);
  if (opt.format == "csv") {
    sink.get() << "r,value,J,s_hat,w_hat,u_hat,branch\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& d = res[i];
      sink.get() << csv_num(grid[i]) << ',' << csv_num(d.value) << ',' << csv_num(d.J) << ','
                 << opt_csv(d.solution, &SaddlepointSolution::s_hat) << ','
                 << opt_csv(d.solution, &SaddlepointSolution::w_hat) << ','
                 << opt_csv(d.solution, &SaddlepointSolution::u_hat) << ',' << to_string(d.branch)
                 << '\n';
    }
    return 0;
  }
  Json records = Json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& d = res[i];
    Json j;
    j["r"] = num(grid[i]);
    j["value"] = num(d.value);
    j["J"] = num(d.J);
    j = solution_fields(j, d.solution);
    j["branch"] = std::string(to_string(d.branch));
    records.push_back(j);
  }
  sink.get() << records.dump(2) << '\n';
  return 0;
}

int cmd_tail_limit(const Options& opt, std::ostream& out) {
  const QuadFormRatio ratio = load(opt);
  const SupportInfo info = support(ratio);
  const int n = static_cast<int>(ratio.dim());
  Json limits = Json::array();
  for (Side s : sides(opt.side)) {
    const EdgeStructure e = edge_structure(ratio, info, s);
    Json j;
    j["side"] = std::string(to_string(s));
    j["edge"] = num(e.edge);
    j["m"] = e.m;
    j["nu0"] = vec(e.nu0);
    j["omega"] = vec(e.omega);
    if (e.m == 1) {
      const TailLimitSimple t = limit_simple(n, e.nu0(0));
      j["t0"] = num(t.t0);
      j["u0"] = num(t.u0);
      j["RE_cdf"] = num(t.RE);
      j["RE_pdf"] = num(t.RE);
    } else {
      const TailLimitMultiple t = limit_multiple(n, e);
      j["t0"] = num(t.t0);
      j["u0"] = num(t.u0);
      j["RE_cdf"] = num(t.RE_cdf);
      j["RE_pdf"] = num(t.RE_pdf);
    }
    limits.push_back(j);
  }
  Sink sink(opt.out, out);
  sink.get() << limits.dump(2) << '\n';
  return 0;
}

int cmd_oracle(const Options& opt, std::ostream& out) {
  require_format(opt);
  const QuadFormRatio ratio = load(opt);
  const std::vector<double> grid = parse_grid(opt);
  const std::vector<CurvePoint> curve = relative_error_curve(ratio, grid);
  const std::vector<McEstimate> mc = mc_cdf_grid(ratio, grid, opt.draws, opt.seed);

  Sink sink(opt.out, out);
  if (opt.format == "csv") {
    sink.get() << "r,exact,approx,ratio,se\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      sink.get() << csv_num(curve[i].r) << ',' << csv_num(curve[i].exact_cdf) << ','
                 << csv_num(curve[i].approx_cdf) << ',' << csv_num(curve[i].tail_ratio) << ','
                 << csv_num(mc[i].std_error) << '\n';
    }
    return 0;
  }
  Json records = Json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Json j;
    j["r"] = num(curve[i].r);
    j["exact"] = num(curve[i].exact_cdf);
    j["approx"] = num(curve[i].approx_cdf);
    j["ratio"] = num(curve[i].tail_ratio);
    j["mc"] = num(mc[i].value);
    j["se"] = num(mc[i].std_error);
    j["s_hat"] = num(curve[i].s_hat);
    records.push_back(j);
  }
  sink.get() << records.dump(2) << '\n';
  return 0;
}

// Central grid plus log-spaced points out to |r| = 1e5 on each infinite side.
std::vector<double> tail_grid(const SupportInfo& info) {
  std::vector<double> g;
  const double lo = std::isfinite(info.l) ? info.l : -10.0;
  const double hi = std::isfinite(info.r_bar) ? info.r_bar : 10.0;
  const double pad = 1e-3 * (hi - lo);
  for (double r : linspace(lo + pad, hi - pad, 201)) g.push_back(r);
  for (double e : linspace(1.0, 5.0, 41)) {
    const double r = std::pow(10.0, e);
    if (!std::isfinite(info.l)) g.push_back(-r);
    if (!std::isfinite(info.r_bar)) g.push_back(r);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

std::vector<double> density_grid(const SupportInfo& info) {
  const double lo = std::isfinite(info.l) ? info.l : -10.0;
  const double hi = std::isfinite(info.r_bar) ? info.r_bar : 10.0;
  if (std::isfinite(info.l) || std::isfinite(info.r_bar)) {
    const double pad = 1e-3 * (hi - lo);
    return linspace(lo + pad, hi - pad, 801);
  }
  return linspace(lo, hi, 801);
}

void write_curve(const std::filesystem::path& path, const std::vector<CurvePoint>& curve,
                 bool density, const std::vector<double>* normalized) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write " + path.string());
  f << "r,exact,approx,ratio,se" << (normalized ? ",normalized" : "") << '\n';
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const CurvePoint& p = curve[i];
    f << csv_num(p.r) << ',' << csv_num(density ? p.exact_pdf : p.exact_cdf) << ','
      << csv_num(density ? p.approx_pdf : p.approx_cdf) << ','
      << csv_num(density ? p.pdf_ratio : p.tail_ratio) << ',' << csv_num(0.0);
    if (normalized) f << ',' << csv_num((*normalized)[i]);
    f << '\n';
  }
}

int cmd_figure(const Options& opt, std::ostream& out) {
  const QuadFormRatio ratio =
      opt.problem.empty() ? ratio_n2(0.2, 2.0).with_tolerances(parse_tolerances(opt)) : load(opt);
  const SupportInfo info = support(ratio);
  const std::vector<double> dgrid = opt.grid.empty() && opt.points.empty()
                                        ? density_grid(info)
                                        : parse_grid(opt);
  const std::vector<double> tgrid = tail_grid(info);

  const std::vector<CurvePoint> dens = relative_error_curve(ratio, dgrid);
  const std::vector<double> normalized = normalized_pdf(ratio, dgrid);
  const std::vector<CurvePoint> tails = relative_error_curve(ratio, tgrid);

  const std::filesystem::path dir = opt.out.empty() ? "." : opt.out;
  std::filesystem::create_directories(dir);
  write_curve(dir / "density.csv", dens, true, &normalized);
  write_curve(dir / "density_ratio.csv", tails, true, nullptr);
  write_curve(dir / "cdf_tail_ratio.csv", tails, false, nullptr);

  Json j;
  j["files"] = {(dir / "density.csv").string(), (dir / "density_ratio.csv").string(),
                (dir / "cdf_tail_ratio.csv").string()};
  j["density_points"] = dgrid.size();
  j["tail_points"] = tgrid.size();
  out << j.dump(2) << '\n';
  return 0;
}

int report(std::ostream& err, const char* type, const std::string& message, int code) {
  Json j;
  j["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
  err << j.dump() << '\n';
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Saddlepoint approximations for ratios of quadratic forms"};
  app.require_subcommand(1);

  const auto add_problem = [&](CLI::App* c) {
    c->add_option("--problem", opt.problem, "Problem JSON file");
    c->add_option("--tol", opt.tols, "Tolerance override NAME=VALUE (repeatable)");
    c->add_option("--out", opt.out, "Output path");
  };
  const auto add_grid = [&](CLI::App* c) {
    c->add_option("--grid", opt.grid, "Evenly spaced grid a:b:n (use --grid=a:b:n if a < 0)");
    c->add_option("--points", opt.points, "Explicit points r1,r2,...");
    c->add_option("--format", opt.format, "json or csv");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Support, tail class and edge structure");
  add_problem(analyze);

  CLI::App* build_cmd = app.add_subcommand("build", "Write a problem file for a statistic");
  build_cmd->add_option("--kind", opt.kind, "ls_serial | durbin_watson | beta | ratio_n2")
      ->required();
  build_cmd->add_option("--n", opt.n, "Dimension");
  build_cmd->add_option("--lag", opt.lag, "Lag (ls_serial)");
  build_cmd->add_option("--m", opt.m, "Numerator rank (beta)");
  build_cmd->add_option("--mu", opt.mu, "Comma-separated means");
  build_cmd->add_option("--design", opt.design, "none | intercept | trend");
  build_cmd->add_option("--out", opt.out, "Output path");

  CLI::App* cdf_cmd = app.add_subcommand("cdf", "Saddlepoint CDF on a grid");
  add_problem(cdf_cmd);
  add_grid(cdf_cmd);

  CLI::App* pdf_cmd = app.add_subcommand("pdf", "Saddlepoint density on a grid");
  add_problem(pdf_cmd);
  add_grid(pdf_cmd);

  CLI::App* tail_cmd = app.add_subcommand("tail-limit", "Limiting relative errors at the edges");
  add_problem(tail_cmd);
  tail_cmd->add_option("--side", opt.side, "left | right | both");

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Exact, saddlepoint and Monte Carlo CDF");
  add_problem(oracle_cmd);
  add_grid(oracle_cmd);
  oracle_cmd->add_option("--seed", opt.seed, "Monte Carlo seed");
  oracle_cmd->add_option("--draws", opt.draws, "Monte Carlo draws");

  CLI::App* figure_cmd = app.add_subcommand("figure", "Write density and tail-ratio CSV files");
  add_problem(figure_cmd);
  figure_cmd->add_option("--grid", opt.grid, "Density grid a:b:n");
  figure_cmd->add_option("--points", opt.points, "Explicit density points");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    if (app.get_subcommands().size() == 1) {
      // Show subcommand usage alongside the message.
      what += "\n" + app.get_subcommands().front()->help();
    }
    return report(err, "invalid_input", what, 1);
  }

  try {
    if (analyze->parsed()) return cmd_analyze(opt, out);
    if (build_cmd->parsed()) return cmd_build(opt, out);
    if (cdf_cmd->parsed()) return cmd_cdf(opt, out);
    if (pdf_cmd->parsed()) return cmd_pdf(opt, out);
    if (tail_cmd->parsed()) return cmd_tail_limit(opt, out);
    if (oracle_cmd->parsed()) return cmd_oracle(opt, out);
    if (figure_cmd->parsed()) return cmd_figure(opt, out);
  } catch (const InvalidInput& e) {
    return report(err, "invalid_input", e.what(), 1);
  } catch (const UnsupportedInstance& e) {
    return report(err, "unsupported_instance", e.what(), 2);
  } catch (const NumericalFailure& e) {
    return report(err, "numerical_failure", e.what(), 3);
  } catch (const std::filesystem::filesystem_error& e) {
    return report(err, "invalid_input", e.what(), 1);
  }
  return report(err, "invalid_input", "no command given", 1);
}

}  // namespace qfratio::cli
