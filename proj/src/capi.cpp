#include "cqop.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cqop/dynamics.hpp"
#include "cqop/geometry.hpp"
#include "cqop/operators.hpp"
#include "cqop/verification.hpp"

struct cqop_chart {
  cqop::Chart chart;
};

struct cqop_surface {
  cqop::Chart chart;
  cqop::GridPtr grid;
  std::unique_ptr<cqop::OperatorSet> ops;
};

namespace {

thread_local std::string last_error;

cqop_status from_code(cqop::ErrorCode code) {
  using cqop::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return CQOP_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse: return CQOP_ERR_PARSE;
    case ErrorCode::domain: return CQOP_ERR_DOMAIN;
    case ErrorCode::unsupported: return CQOP_ERR_UNSUPPORTED;
    case ErrorCode::grid_mismatch: return CQOP_ERR_GRID_MISMATCH;
    case ErrorCode::numeric: return CQOP_ERR_NUMERIC;
    case ErrorCode::io: return CQOP_ERR_IO;
  }
  return CQOP_ERR_INTERNAL;
}

cqop_status fail(cqop_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs body and turns every exception into a status code.
template <class F>
cqop_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return CQOP_OK;
  } catch (const cqop::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const cqop::ExprError& e) {
    using cqop::ExprErrorKind;
    const bool parse = e.kind() == ExprErrorKind::syntax || e.kind() == ExprErrorKind::unknown_function ||
                       e.kind() == ExprErrorKind::invalid_variable;
    return fail(parse ? CQOP_ERR_PARSE : CQOP_ERR_DOMAIN, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(CQOP_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CQOP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CQOP_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw cqop::Error(cqop::ErrorCode::invalid_argument, what);
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cqop::Error(cqop::ErrorCode::io, std::string("cannot open ") + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const cqop::ScalarOp& named_operator(const cqop::OperatorSet& ops, std::string_view name) {
  if (name == "H") return ops.hamiltonian;
  if (name == "lap") return ops.laplacian;
  if (name == "v2") return ops.v2;
  static constexpr std::string_view axes = "xyz";
  if (name.size() == 2 && axes.find(name[1]) != std::string_view::npos) {
    const auto c = axes.find(name[1]);
    if (name[0] == 'p') return ops.momentum[c];
    if (name[0] == 'L') return ops.angular[c];
    if (name[0] == 'F') return ops.force.total[c];
  }
  throw cqop::Error(cqop::ErrorCode::invalid_argument, "unknown operator '" + std::string(name) + "'");
}

}  // namespace

extern "C" {

const char* cqop_last_error(void) { return last_error.c_str(); }

const char* cqop_status_name(cqop_status status) {
  switch (status) {
    case CQOP_OK: return "ok";
    case CQOP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CQOP_ERR_PARSE: return "parse error";
    case CQOP_ERR_DOMAIN: return "domain error";
    case CQOP_ERR_UNSUPPORTED: return "unsupported";
    case CQOP_ERR_GRID_MISMATCH: return "grid mismatch";
    case CQOP_ERR_NUMERIC: return "numeric failure";
    case CQOP_ERR_IO: return "i/o error";
    case CQOP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void cqop_string_free(char* s) { std::free(s); }

cqop_status cqop_chart_builtin(const char* kind, double R, double Lz, double hbar, double mass, cqop_chart** out) {
  return guarded([&] {
    require(kind && out, "null argument");
    const auto k = cqop::surface_kind_from_string(kind);
    require(k != cqop::SurfaceKind::custom, "custom charts come from JSON");
    *out = new cqop_chart{cqop::builtin_chart(k, R, Lz, cqop::PhysParams{hbar, mass})};
  });
}

cqop_status cqop_chart_from_json(const char* text, cqop_chart** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new cqop_chart{cqop::chart_from_json(text)};
  });
}

cqop_status cqop_chart_load(const char* path, cqop_chart** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new cqop_chart{cqop::chart_from_json(read_file(path))};
  });
}

cqop_status cqop_chart_to_json(const cqop_chart* chart, char** out) {
  return guarded([&] {
    require(chart && out, "null argument");
    *out = dup(cqop::chart_to_json(chart->chart));
  });
}

cqop_status cqop_chart_is_builtin(const cqop_chart* chart, int* out) {
  return guarded([&] {
    require(chart && out, "null argument");
    *out = chart->chart.kind != cqop::SurfaceKind::custom;
  });
}

void cqop_chart_free(cqop_chart* chart) { delete chart; }

cqop_status cqop_curvature_at(const cqop_chart* chart, double q1, double q2, double* mean, double* gaussian,
                              double* potential) {
  return guarded([&] {
    require(chart && mean && gaussian && potential, "null argument");
    const auto data = cqop::curvature(chart->chart);
    const auto at = chart->chart.surface_point(q1, q2);
    *mean = cqop::evaluate(data.mean, at);
    *gaussian = cqop::evaluate(data.gaussian, at);
    *potential = cqop::evaluate(data.potential, at);
  });
}

cqop_status cqop_curvature_json(const cqop_chart* chart, int n, char** out) {
  return guarded([&] {
    require(chart && out, "null argument");
    require(n >= 1 && n <= 1000, "sample count must be in [1, 1000]");
    const cqop::Chart& c = chart->chart;
    const auto data = cqop::curvature(c);
    nlohmann::json j;
    j["chart"] = c.kind == cqop::SurfaceKind::custom ? "custom" : std::string(cqop::to_string(c.kind));
    j["M"] = cqop::to_string(data.mean);
    j["K"] = cqop::to_string(data.gaussian);
    j["Vgeo"] = cqop::to_string(data.potential);
    if (c.kind != cqop::SurfaceKind::custom) {
      // Constant on the built-ins; read off at an interior point.
      const auto at = c.surface_point(1.0, 0.5);
      j["values"] = {{"M", cqop::evaluate(data.mean, at)},
                     {"K", cqop::evaluate(data.gaussian, at)},
                     {"Vgeo", cqop::evaluate(data.potential, at)}};
    } else {
      auto table = nlohmann::json::array();
      const auto& d = c.domains;
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
          const double q1 = d[0].min + (i + 0.5) * (d[0].max - d[0].min) / n;
          const double q2 = d[1].min + (k + 0.5) * (d[1].max - d[1].min) / n;
          const auto at = c.surface_point(q1, q2);
          table.push_back({{"q1", q1},
                           {"q2", q2},
                           {"M", cqop::evaluate(data.mean, at)},
                           {"K", cqop::evaluate(data.gaussian, at)},
                           {"Vgeo", cqop::evaluate(data.potential, at)}});
        }
      }
      j["coords"] = {c.coords[0], c.coords[1]};
      j["table"] = std::move(table);
    }
    *out = dup(j.dump(2));
  });
}

cqop_status cqop_surface_new(const cqop_chart* chart, int n1, int n2, cqop_surface** out) {
  return guarded([&] {
    require(chart && out, "null argument");
    auto s = std::make_unique<cqop_surface>();
    s->chart = chart->chart;
    s->grid = cqop::build_grid(s->chart, n1, n2);
    s->ops = std::make_unique<cqop::OperatorSet>(cqop::build_operators(s->chart, s->grid));
    *out = s.release();
  });
}

cqop_status cqop_surface_nodes(const cqop_surface* surface, int* out) {
  return guarded([&] {
    require(surface && out, "null argument");
    *out = surface->grid->size();
  });
}

void cqop_surface_free(cqop_surface* surface) { delete surface; }

cqop_status cqop_verify(const cqop_surface* surface, uint64_t seed, const char* tolerances, char** report_json,
                        char** report_text, int* failed) {
  return guarded([&] {
    require(surface != nullptr, "null argument");
    cqop::SuiteConfig config;
    config.seed = seed;
    if (tolerances && *tolerances) {
      const auto j = nlohmann::json::parse(tolerances);
      require(j.is_object(), "tolerances must be a JSON object");
      for (const auto& [id, value] : j.items()) config.tolerances[id] = value.get<double>();
    }
    const cqop::Report report = cqop::run_suite(*surface->ops, config);
    // Allocate both before handing either out so a failure leaks nothing.
    std::unique_ptr<char, decltype(&std::free)> js(report_json ? dup(cqop::report_to_json(report)) : nullptr, std::free);
    std::unique_ptr<char, decltype(&std::free)> tx(report_text ? dup(cqop::report_to_text(report)) : nullptr, std::free);
    if (report_json) *report_json = js.release();
    if (report_text) *report_text = tx.release();
    if (failed) *failed = report.failed();
  });
}

cqop_status cqop_convergence(const cqop_chart* chart, const int* resolutions, int count, uint64_t seed, const char* ids,
                             char** out) {
  return guarded([&] {
    require(chart && resolutions && ids && out, "null argument");
    std::vector<std::pair<int, int>> res;
    for (int i = 0; i < count; ++i) res.emplace_back(resolutions[2 * i], resolutions[2 * i + 1]);
    std::vector<std::string> list;
    std::stringstream ss(ids);
    for (std::string id; std::getline(ss, id, ',');)
      if (!id.empty()) list.push_back(id);
    *out = dup(cqop::convergence_to_json(cqop::convergence_study(chart->chart, res, seed, list)));
  });
}

cqop_status cqop_spectrum(const cqop_surface* surface, int count, double* values, double* analytic) {
  return guarded([&] {
    require(surface && values, "null argument");
    require(count >= 1 && count <= surface->grid->size(), "count must be between 1 and the node count");
    const auto eig = cqop::band_eigensystem(surface->ops->hamiltonian);
    require(count <= eig.values.size(), "count exceeds the number of resolved modes");
    for (int k = 0; k < count; ++k) values[k] = eig.values(k);
    if (analytic) {
      const auto exact = cqop::analytic_band_spectrum(surface->chart, *surface->grid);
      for (int k = 0; k < count; ++k) analytic[k] = exact[static_cast<std::size_t>(k)];
    }
  });
}

cqop_status cqop_evolve(const cqop_surface* surface, const char* state, double dt, int steps, char** csv,
                        char** summary) {
  return guarded([&] {
    require(surface && state, "null argument");
    const auto request = nlohmann::json::parse(state);
    const std::string kind = request.value("kind", "");
    cqop::SurfaceState psi;
    if (kind == "packet") {
      require(request.contains("sigma"), "packet state needs sigma");
      psi = cqop::gaussian_packet(surface->chart, surface->grid, request.at("sigma").get<double>(), request.value("l0", 4));
    } else if (kind == "modes") {
      std::vector<cqop::SpectralMode> modes;
      for (const auto& m : request.at("modes")) modes.push_back({m.at(0).get<int>(), m.at(1).get<int>()});
      psi = cqop::mode_superposition(surface->grid, modes);
    } else {
      throw cqop::Error(cqop::ErrorCode::invalid_argument, "state kind must be 'packet' or 'modes'");
    }
    const auto run = cqop::propagate(*surface->ops, psi, dt, steps);
    std::unique_ptr<char, decltype(&std::free)> c(csv ? dup(cqop::series_to_csv(run)) : nullptr, std::free);
    std::unique_ptr<char, decltype(&std::free)> s(
        summary ? dup(cqop::summary_to_json(cqop::summarize(*surface->ops, run))) : nullptr, std::free);
    if (csv) *csv = c.release();
    if (summary) *summary = s.release();
  });
}

cqop_status cqop_dump_operator(const cqop_surface* surface, const char* name, const char* path) {
  return guarded([&] {
    require(surface && name && path, "null argument");
    cqop::write_operator(named_operator(*surface->ops, name), path);
  });
}

}  // extern "C"
