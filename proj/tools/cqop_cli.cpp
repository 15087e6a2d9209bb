// Command-line front end over the C interface.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cqop.h"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Options {
  std::string chart = "sphere";
  std::string chart_file;
  double radius = 1.0;
  double lz = 1.0;
  double hbar = 1.0;
  double mass = 1.0;
  std::string res;
  std::uint64_t seed = 7;
  std::vector<std::string> tol;
  std::string out;
};

// Thrown to unwind with an exit code after printing a diagnostic.
struct Exit {
  int code;
};

int exit_for(cqop_status s) { return s == CQOP_ERR_NUMERIC || s == CQOP_ERR_INTERNAL ? kFailed : kUsage; }

void check(cqop_status s) {
  if (s == CQOP_OK) return;
  std::cerr << "error: " << cqop_status_name(s) << ": " << cqop_last_error() << "\n";
  throw Exit{exit_for(s)};
}

[[noreturn]] void usage(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  throw Exit{kUsage};
}

// Owns a string returned by the library.
struct CString {
  char* p = nullptr;
  ~CString() { cqop_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Chart {
  cqop_chart* p = nullptr;
  ~Chart() { cqop_chart_free(p); }
};

struct Surface {
  cqop_surface* p = nullptr;
  ~Surface() { cqop_surface_free(p); }
};

void add_common(CLI::App* cmd, Options& o, bool resolution) {
  auto* chart = cmd->add_option("--chart", o.chart, "built-in chart: sphere, cylinder or ring");
  auto* file = cmd->add_option("--chart-file", o.chart_file, "chart JSON file");
  chart->excludes(file);
  cmd->add_option("--R", o.radius, "radius");
  cmd->add_option("--Lz", o.lz, "cylinder axial period");
  cmd->add_option("--hbar", o.hbar, "reduced Planck constant");
  cmd->add_option("--mass", o.mass, "particle mass");
  cmd->add_option("--out", o.out, "output directory");
  if (resolution) {
    cmd->add_option("--res", o.res, "resolution N1xN2 (ring: N1)");
    cmd->add_option("--seed", o.seed, "test-state seed");
  }
}

void load_chart(const Options& o, Chart& c) {
  if (!o.chart_file.empty())
    check(cqop_chart_load(o.chart_file.c_str(), &c.p));
  else
    check(cqop_chart_builtin(o.chart.c_str(), o.radius, o.lz, o.hbar, o.mass, &c.p));
}

std::pair<int, int> parse_res(const std::string& text, const std::string& chart) {
  if (text.empty()) {
    if (chart == "cylinder") return {32, 32};
    if (chart == "ring") return {64, 1};
    return {24, 48};
  }
  int n1 = 0, n2 = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%dx%d%c", &n1, &n2, &tail) == 2) return {n1, n2};
  if (std::sscanf(text.c_str(), "%d%c", &n1, &tail) == 1) return {n1, 1};
  usage("bad resolution '" + text + "', expected N1xN2");
}

void open_surface(const Options& o, Chart& c, Surface& s) {
  load_chart(o, c);
  const auto [n1, n2] = parse_res(o.res, o.chart_file.empty() ? o.chart : "");
  check(cqop_surface_new(c.p, n1, n2, &s.p));
}

void write_out(const Options& o, const std::string& name, const std::string& content) {
  if (o.out.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  const auto path = std::filesystem::path(o.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << content)) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    throw Exit{kUsage};
  }
}

std::string tolerances_json(const std::vector<std::string>& tol) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& t : tol) {
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) usage("--tol expects CHECKID=VALUE, got '" + t + "'");
    try {
      std::size_t used = 0;
      const double v = std::stod(t.substr(eq + 1), &used);
      if (used != t.size() - eq - 1) throw std::invalid_argument("trailing");
      j[t.substr(0, eq)] = v;
    } catch (const std::exception&) {
      usage("--tol value is not a number in '" + t + "'");
    }
  }
  return j.dump();
}

int cmd_curvature(const Options& o) {
  Chart c;
  load_chart(o, c);
  int builtin = 0;
  check(cqop_chart_is_builtin(c.p, &builtin));
  CString js;
  check(cqop_curvature_json(c.p, 8, &js.p));
  const auto j = nlohmann::json::parse(js.str());
  if (builtin) {
    const auto& v = j.at("values");
    // + 0.0 prints a negative zero as 0.
    std::printf("M = %.17g\nK = %.17g\nVgeo = %.17g\n", v.at("M").get<double>() + 0.0, v.at("K").get<double>() + 0.0,
                v.at("Vgeo").get<double>() + 0.0);
  } else {
    std::printf("M = %s\nK = %s\nVgeo = %s\n", j.at("M").get<std::string>().c_str(),
                j.at("K").get<std::string>().c_str(), j.at("Vgeo").get<std::string>().c_str());
    const auto& names = j.at("coords");
    std::printf("%-12s %-12s %20s %20s %20s\n", names.at(0).get<std::string>().c_str(),
                names.at(1).get<std::string>().c_str(), "M", "K", "Vgeo");
    for (const auto& row : j.at("table"))
      std::printf("%-12.6g %-12.6g %20.12g %20.12g %20.12g\n", row.at("q1").get<double>(), row.at("q2").get<double>(),
                  row.at("M").get<double>(), row.at("K").get<double>(), row.at("Vgeo").get<double>());
  }
  write_out(o, "curvature.json", js.str() + "\n");
  return kOk;
}

int cmd_verify(const Options& o) {
  Chart c;
  Surface s;
  open_surface(o, c, s);
  const std::string tol = tolerances_json(o.tol);
  CString js, text;
  int failed = 0;
  check(cqop_verify(s.p, o.seed, tol.c_str(), &js.p, &text.p, &failed));
  std::cout << text.str();
  write_out(o, "report.json", js.str() + "\n");
  write_out(o, "report.txt", text.str());
  return failed == 0 ? kOk : kFailed;
}

int cmd_spectrum(const Options& o, int count) {
  Chart c;
  Surface s;
  open_surface(o, c, s);
  int builtin = 0;
  check(cqop_chart_is_builtin(c.p, &builtin));
  if (count < 1) usage("--count must be positive");
  std::vector<double> values(static_cast<std::size_t>(count)), exact(static_cast<std::size_t>(count));
  check(cqop_spectrum(s.p, count, values.data(), builtin ? exact.data() : nullptr));
  // Relative error scaled by max(|exact|, hbar^2/mR^2) so zero modes stay meaningful.
  const double unit = o.hbar * o.hbar / (o.mass * o.radius * o.radius);
  std::string csv = "index,eigenvalue,analytic,rel_error\n";
  char line[160];
  for (int k = 0; k < count; ++k) {
    const double e = exact[static_cast<std::size_t>(k)];
    const double v = values[static_cast<std::size_t>(k)];
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.3e\n", k, v, e,
                  std::abs(v - e) / std::max(std::abs(e), unit));
    csv += line;
  }
  std::cout << csv;
  write_out(o, "spectrum.csv", csv);
  return kOk;
}

struct EvolveArgs {
  std::string state = "packet";
  std::optional<double> sigma;
  int l0 = 4;
  std::vector<std::string> modes;
  double dt = 0.01;
  int steps = 1000;
};

int cmd_evolve(const Options& o, const EvolveArgs& a) {
  nlohmann::json request;
  if (a.state == "packet") {
    if (!a.sigma) usage("a packet state needs --sigma");
    request = {{"kind", "packet"}, {"sigma", *a.sigma}, {"l0", a.l0}};
  } else if (a.state == "modes") {
    if (a.modes.empty()) usage("a modes state needs at least one --mode L:M");
    auto list = nlohmann::json::array();
    for (const auto& m : a.modes) {
      int l = 0, k = 0;
      char tail = 0;
      if (std::sscanf(m.c_str(), "%d:%d%c", &l, &k, &tail) != 2) usage("bad --mode '" + m + "', expected L:M");
      list.push_back({l, k});
    }
    request = {{"kind", "modes"}, {"modes", list}};
  } else {
    usage("--state must be packet or modes");
  }
  Chart c;
  Surface s;
  open_surface(o, c, s);
  CString csv, summary;
  check(cqop_evolve(s.p, request.dump().c_str(), a.dt, a.steps, &csv.p, &summary.p));
  std::cout << summary.str() << "\n";
  write_out(o, "series.csv", csv.str());
  write_out(o, "summary.json", summary.str() + "\n");
  return kOk;
}

int cmd_convergence(const Options& o, const std::vector<std::string>& res, const std::string& ids) {
  Chart c;
  load_chart(o, c);
  std::vector<int> flat;
  for (const auto& r : res) {
    const auto [n1, n2] = parse_res(r, o.chart);
    flat.push_back(n1);
    flat.push_back(n2);
  }
  CString js;
  check(cqop_convergence(c.p, flat.data(), static_cast<int>(res.size()), o.seed, ids.c_str(), &js.p));
  std::cout << js.str() << "\n";
  write_out(o, "convergence.json", js.str() + "\n");
  return kOk;
}

int cmd_dump(const Options& o, const std::string& op, const std::string& file) {
  Chart c;
  Surface s;
  open_surface(o, c, s);
  std::string path = file;
  if (!o.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(o.out, ec);
    path = (std::filesystem::path(o.out) / file).string();
  }
  check(cqop_dump_operator(s.p, op.c_str(), path.c_str()));
  std::cout << path << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin-layer quantum operators on curved surfaces"};
  app.require_subcommand(1);
  Options o;

  auto* curvature = app.add_subcommand("curvature", "mean and Gaussian curvature and the geometric potential");
  add_common(curvature, o, false);

  auto* verify = app.add_subcommand("verify", "run the operator identity suite");
  add_common(verify, o, true);
  verify->add_option("--tol", o.tol, "tolerance override CHECKID=VALUE (repeatable)");

  int count = 9;
  auto* spectrum = app.add_subcommand("spectrum", "lowest eigenvalues of H against the analytic values");
  add_common(spectrum, o, true);
  spectrum->add_option("--count", count, "number of eigenvalues");

  EvolveArgs ev;
  auto* evolve = app.add_subcommand("evolve", "propagate a state and log observables");
  add_common(evolve, o, true);
  evolve->add_option("--state", ev.state, "packet or modes");
  evolve->add_option("--sigma", ev.sigma, "packet width");
  evolve->add_option("--l0", ev.l0, "packet winding number");
  evolve->add_option("--mode", ev.modes, "spectral mode L:M for --state modes (repeatable)");
  evolve->add_option("--dt", ev.dt, "time step");
  evolve->add_option("--steps", ev.steps, "number of steps");

  std::vector<std::string> conv_res;
  std::string conv_ids = "force.equivalence,torque.net,radial.dr";
  auto* convergence = app.add_subcommand("convergence", "residuals of selected checks across resolutions");
  add_common(convergence, o, false);
  convergence->add_option("--res", conv_res, "resolution N1xN2 (repeat, increasing)")->required();
  convergence->add_option("--seed", o.seed, "test-state seed");
  convergence->add_option("--ids", conv_ids, "comma-separated check ids");

  std::string op = "H", dump_file = "operator.bin";
  auto* dump = app.add_subcommand("dump", "write an operator matrix in the binary container");
  add_common(dump, o, true);
  dump->add_option("--op", op, "H, lap, v2, px, py, pz, Lx, Ly, Lz, Fx, Fy or Fz");
  dump->add_option("--file", dump_file, "output file name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*curvature) return cmd_curvature(o);
    if (*verify) return cmd_verify(o);
    if (*spectrum) return cmd_spectrum(o, count);
    if (*evolve) return cmd_evolve(o, ev);
    if (*convergence) return cmd_convergence(o, conv_res, conv_ids);
    if (*dump) return cmd_dump(o, op, dump_file);
  } catch (const Exit& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
