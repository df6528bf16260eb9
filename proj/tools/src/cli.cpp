#include "roughpath_cli/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "roughpath/coefficient.hpp"
#include "roughpath/error.hpp"
#include "roughpath/laplace.hpp"
#include "roughpath/lift.hpp"
#include "roughpath/path.hpp"
#include "roughpath/rde.hpp"
#include "roughpath/taylor.hpp"
#include "roughpath/variation.hpp"

namespace roughpath::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using cjson = nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct Context {
  std::string command;
  cjson config = cjson::object();
  std::string input;
  fs::path out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 0;
  std::ostream* out = nullptr;
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::kConfig, what); }

template <class T>
T get_or(const cjson& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const cjson::exception& e) {
    config_error(std::string("config field '") + key + "': " + e.what());
  }
}

const cjson& require(const cjson& j, const char* key) {
  if (!j.contains(key)) config_error(std::string("config is missing '") + key + "'");
  return j.at(key);
}

cjson load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config file '" + file + "'");
  cjson cfg;
  try {
    cfg = cjson::parse(in);
  } catch (const cjson::exception& e) {
    config_error("config is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) config_error("config must be a JSON object");
  if (get_or(cfg, "schema_version", 0) != kSchemaVersion)
    config_error("config schema_version must be " + std::to_string(kSchemaVersion));
  return cfg;
}

CoefficientPtr coefficient(const cjson& spec) { return coefficient_from_json(spec); }

std::ofstream open_output(const Context& ctx, const std::string& name) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory '" + ctx.out_dir.string() + "'");
  const auto path = ctx.out_dir / name;
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  f.precision(17);
  return f;
}

void write_json(const Context& ctx, const std::string& name, const json& j) {
  auto f = open_output(ctx, name);
  f << j.dump(2) << '\n';
  if (!f) throw Error(ErrorKind::kIo, "write failed for '" + name + "'");
}

json header(const Context& ctx) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = ctx.command;
  j["status"] = "ok";
  return j;
}

json tensor_json(const TruncatedTensor& t) {
  json levels = json::array();
  for (int j = 1; j <= t.level(); ++j) levels.push_back(std::vector<double>(t[j].begin(), t[j].end()));
  return levels;
}

GridPath input_path(const Context& ctx) {
  if (ctx.input.empty()) config_error("this command needs --input");
  return read_path_csv(ctx.input);
}

int level_of(const Context& ctx, int flag) {
  const int level = flag > 0 ? flag : get_or(ctx.config, "level", 2);
  if (level < 1 || level > kMaxLevel) config_error("level must lie in [1, " + std::to_string(kMaxLevel) + "]");
  return level;
}

/// Driving path X: --input CSV, else config "driver".
GridRoughPath driver(const Context& ctx, int level) {
  if (!ctx.input.empty()) return lift_piecewise_linear(read_path_csv(ctx.input), level);
  if (!ctx.config.contains("driver")) config_error("need --input or a 'driver' config entry");
  const auto& d = ctx.config.at("driver");
  const auto kind = get_or<std::string>(d, "kind", "ramp");
  if (kind == "ramp") {
    const auto n = get_or<std::size_t>(d, "intervals", 256);
    const auto dir = get_or(d, "direction", std::vector<double>{1.0});
    if (n < 1 || dir.empty()) config_error("ramp driver needs intervals >= 1 and a direction");
    const int dim = static_cast<int>(dir.size());
    return lift_piecewise_linear(
        GridPath::sample(uniform_grid(n), dim,
                         [&](double t, std::span<double> v) {
                           for (int c = 0; c < dim; ++c) v[c] = t * dir[c];
                         }),
        level);
  }
  if (kind == "brownian")
    return sample_brownian_rough_path(get_or(d, "dim", 1), get_or(d, "dyadic_level", 8), ctx.seed,
                                      level);
  config_error("unknown driver kind '" + kind + "'");
}

GridPath lambda_path(const Context& ctx, const std::vector<double>& times) {
  const cjson spec = ctx.config.contains("lambda") ? ctx.config.at("lambda") : cjson{{"kind", "time"}};
  const auto kind = get_or<std::string>(spec, "kind", "time");
  if (kind == "time")
    return GridPath::sample(times, 1, [](double t, std::span<double> v) { v[0] = t; });
  if (kind == "zero") {
    const int dim = get_or(spec, "dim", 1);
    return GridPath(times, dim, std::vector<double>(times.size() * dim, 0.0));
  }
  if (kind == "csv") {
    auto p = read_path_csv(get_or<std::string>(spec, "file", ""));
    if (p.times() != times) config_error("lambda CSV must use the driver's time grid");
    return p;
  }
  config_error("unknown lambda kind '" + kind + "'");
}

SolverConfig solver_config(const cjson& cfg) {
  SolverConfig s;
  if (!cfg.contains("solver")) return s;
  const auto& j = cfg.at("solver");
  s.p = get_or(j, "p", s.p);
  s.beta = get_or(j, "beta", s.beta);
  s.tol = get_or(j, "tol", s.tol);
  s.max_iters = get_or(j, "max_iters", s.max_iters);
  s.step_budget = get_or(j, "step_budget", s.step_budget);
  s.rho = get_or(j, "rho", s.rho);
  s.radius = get_or(j, "radius", s.radius);
  s.max_bisections = get_or(j, "max_bisections", s.max_bisections);
  return s;
}

std::vector<double> y0_of(const cjson& cfg, int w) {
  auto y0 = get_or(cfg, "y0", std::vector<double>(w, 0.0));
  if (static_cast<int>(y0.size()) != w) config_error("y0 must have one entry per state coordinate");
  return y0;
}

// ---- subcommands -------------------------------------------------------------

int cmd_lift(const Context& ctx, int level_flag) {
  const int level = level_of(ctx, level_flag);
  const auto path = input_path(ctx);
  const auto rp = lift_piecewise_linear(path, level);
  json j = header(ctx);
  j["dim"] = rp.dim();
  j["level"] = level;
  j["points"] = rp.points();
  j["signature"] = tensor_json(rp.cumulative(rp.points() - 1));
  write_json(ctx, "signature.json", j);
  *ctx.out << j.dump() << '\n';
  return kOk;
}

int cmd_pvar(const Context& ctx, int level_flag, double p_flag) {
  const int level = level_of(ctx, level_flag);
  const double p = p_flag > 0 ? p_flag : get_or(ctx.config, "p", level + 0.5);
  if (p < 1.0) config_error("p must be >= 1");
  const auto rp = lift_piecewise_linear(input_path(ctx), level);
  auto f = open_output(ctx, "pvar.csv");
  f << "level,pvar_sum,norm\n";
  json rows = json::array();
  for (int j = 1; j <= variation_levels(p, level); ++j) {
    const double s = pvar_sum(rp, j, p, 0, rp.points() - 1);
    const double n = pvar_norm(rp, j, p);
    f << j << ',' << s << ',' << n << '\n';
    rows.push_back(json{{"level", j}, {"pvar_sum", s}, {"norm", n}});
  }
  json j = header(ctx);
  j["p"] = p;
  j["level"] = level;
  j["norms"] = rows;
  j["xi"] = xi_gauge(rp, p);
  write_json(ctx, "pvar.json", j);
  *ctx.out << j.dump() << '\n';
  return kOk;
}

int cmd_rde(const Context& ctx) {
  const auto f = coefficient(require(ctx.config, "coefficient"));
  const int level = level_of(ctx, 0);
  const auto x = driver(ctx, level);
  const auto y0 = y0_of(ctx.config, f->point_dim());
  const auto cfg = solver_config(ctx.config);
  const auto sol = solve(f, x, y0, cfg);
  const auto z = sol.z.level1();
  const int w = f->point_dim();
  std::vector<double> y(z.points() * w);
  for (std::size_t i = 0; i < z.points(); ++i)
    for (int c = 0; c < w; ++c) y[i * w + c] = z.value(i)[sol.drive_dim() + c];
  {
    auto out = open_output(ctx, "solution.csv");
    write_path_csv(out, GridPath(z.times(), w, std::move(y)), y0);
  }
  json j = header(ctx);
  j["level"] = level;
  j["p"] = sol.p;
  j["rho"] = sol.rho;
  j["iterations"] = sol.iterations;
  j["residual"] = sol.residual;
  j["fixed_point_residual"] = fixed_point_residual(f, sol);
  j["terminal"] = sol.state(sol.z.points() - 1);
  json pieces = json::array();
  for (const auto& pc : sol.pieces)
    pieces.push_back(json{{"first", pc.first},
                          {"last", pc.last},
                          {"budget", pc.budget},
                          {"iterations", pc.iterations},
                          {"residuals", pc.residuals}});
  j["pieces"] = pieces;
  write_json(ctx, "diagnostics.json", j);
  *ctx.out << json{{"schema_version", kSchemaVersion}, {"command", ctx.command}, {"status", "ok"},
                   {"terminal", j["terminal"]}, {"residual", sol.residual}}
                  .dump()
           << '\n';
  return kOk;
}

struct ExpansionInputs {
  CoefficientPtr sigma;
  CoefficientPtr b;
  GridRoughPath x;
  GridPath lambda;
  std::vector<double> y0;
  int order = 1;
};

ExpansionInputs expansion_inputs(const Context& ctx) {
  ExpansionInputs in;
  in.sigma = coefficient(require(ctx.config, "sigma"));
  in.b = coefficient(require(ctx.config, "b"));
  in.order = get_or(ctx.config, "order", 1);
  if (in.order < 0 || in.order > 4) config_error("expansion order must lie in [0, 4]");
  in.x = driver(ctx, level_of(ctx, 0));
  in.lambda = lambda_path(ctx, in.x.times());
  in.y0 = y0_of(ctx.config, in.sigma->point_dim());
  return in;
}

int cmd_taylor(const Context& ctx) {
  const auto in = expansion_inputs(ctx);
  const auto e = expand(in.sigma, in.b, in.x, in.lambda, in.y0, in.order, solver_config(ctx.config));
  {
    auto f = open_output(ctx, "terms.csv");
    f << "time";
    for (int k = 0; k <= e.n; ++k)
      for (int c = 1; c <= e.w; ++c) f << ",Y" << k << '_' << c;
    f << '\n';
    for (std::size_t i = 0; i < e.joint.points(); ++i) {
      f << e.joint.times()[i];
      for (int k = 0; k <= e.n; ++k)
        for (double v : e.value(k, i)) f << ',' << v;
      f << '\n';
    }
  }
  json j = header(ctx);
  j["order"] = e.n;
  j["level"] = e.joint.level();
  json terms = json::array();
  for (int k = 0; k <= e.n; ++k) {
    const int idx[] = {k};
    terms.push_back(json{{"k", k}, {"terminal", e.value(k, e.joint.points() - 1)}, {"sup", e.gauge(idx)}});
  }
  j["terms"] = terms;
  j["omega_series_terms"] = e.flow.max_terms;
  write_json(ctx, "taylor.json", j);
  *ctx.out << j.dump() << '\n';
  return kOk;
}

int cmd_order_check(const Context& ctx) {
  const auto in = expansion_inputs(ctx);
  const auto scfg = solver_config(ctx.config);
  std::vector<double> eps = get_or(ctx.config, "epsilons", std::vector<double>{});
  if (eps.empty())
    for (int k = 2; k <= 8; ++k) eps.push_back(std::ldexp(1.0, -k));
  const auto e = expand(in.sigma, in.b, in.x, in.lambda, in.y0, in.order, scfg);
  std::vector<RemainderBundle> rs(eps.size());
  parallel_for(eps.size(), ctx.threads,
               [&](std::size_t k) { rs[k] = remainder(in.sigma, in.b, e, eps[k], scfg); });
  std::vector<double> q(eps.size());
  json rows = json::array();
  for (std::size_t k = 0; k < eps.size(); ++k) {
    q[k] = rs[k].q_sup();
    const int ix[] = {-3};
    rows.push_back(json{{"epsilon", eps[k]},
                        {"q_sup", q[k]},
                        {"eps_x_gauge", rs[k].gauge(ix)},
                        {"rde_residual", rs[k].rde.residual},
                        {"rde_iterations", rs[k].rde.iterations}});
  }
  const auto fit = order_fit(eps, q, get_or(ctx.config, "exact_tolerance", 1e-9));
  json j = header(ctx);
  j["order"] = in.order;
  j["expected_slope"] = in.order + 1;
  j["rows"] = rows;
  j["exact_termination"] = fit.exact;
  if (fit.exact) {
    j["slope"] = nullptr;
  } else {
    j["slope"] = fit.slope;
    j["slope_stderr"] = fit.stderr_slope;
    j["r_squared"] = fit.r_squared;
    j["within_band"] = fit.slope >= in.order + 0.7 && fit.slope <= in.order + 1.5;
  }
  write_json(ctx, "order_check.json", j);
  *ctx.out << j.dump() << '\n';
  return kOk;
}

int cmd_laplace(const Context& ctx) {
  const auto& c = ctx.config;
  LaplaceProblem pr;
  pr.sigma = coefficient(require(c, "sigma"));
  pr.b = coefficient(require(c, "b"));
  pr.y0 = y0_of(c, pr.sigma->point_dim());
  pr.cm_grid = uniform_grid(get_or<std::size_t>(c, "cm_intervals", 8));
  pr.substeps = get_or(c, "substeps", pr.substeps);
  pr.F = c.contains("F") ? functional_from_json(c.at("F"), pr.cm_grid, pr.w())
                         : make_constant_functional(0.0);
  pr.G = c.contains("G") ? functional_from_json(c.at("G"), pr.cm_grid, pr.w())
                         : make_constant_functional(1.0);
  validate(pr);
  MinimizerConfig mc;
  mc.seed = ctx.seed;
  if (c.contains("minimizer")) {
    const auto& m = c.at("minimizer");
    mc.starts = get_or(m, "starts", mc.starts);
    mc.max_iters = get_or(m, "max_iters", mc.max_iters);
    mc.start_scale = get_or(m, "start_scale", mc.start_scale);
    mc.ritz_modes = get_or(m, "ritz_modes", mc.ritz_modes);
    mc.h3_radius = get_or(m, "h3_radius", mc.h3_radius);
  }
  const auto mr = find_minimizer(pr, mc);
  const auto xr = xi_and_c(pr, mr);
  json j = header(ctx);
  j["cm_grid"] = pr.cm_grid;
  j["lambda"] = mr.lambda;
  j["phi"] = mr.phi.cm_states;
  j["value"] = mr.value;
  j["grad_norm"] = mr.grad_norm;
  j["hessian_floor"] = mr.hessian_floor;
  j["unique"] = mr.unique;
  j["start_values"] = mr.start_values;
  j["h3"] = json{{"radius", mr.h3_radius}, {"bound", mr.h3_bound}};
  j["xi"] = xr.cm_xi;
  j["c"] = xr.c;
  if (c.contains("smoke")) {
    const auto& s = c.at("smoke");
    SmokeConfig sc;
    sc.epsilons = get_or(s, "epsilons", sc.epsilons);
    sc.samples = get_or(s, "samples", sc.samples);
    sc.dyadic_level = get_or(s, "dyadic_level", sc.dyadic_level);
    sc.blocks = get_or(s, "blocks", sc.blocks);
    sc.seed = ctx.seed;
    sc.threads = ctx.threads;
    sc.solver = solver_config(c);
    const auto rep = laplace_smoke(pr, mr, xr, sc);
    json rows = json::array();
    for (const auto& r : rep.rows)
      rows.push_back(json{{"epsilon", r.eps},
                          {"value", r.value},
                          {"stderr", r.stderr_value},
                          {"conclusive", r.conclusive}});
    j["smoke"] = json{{"rows", rows}, {"stabilized", rep.stabilized}};
  }
  write_json(ctx, "laplace.json", j);
  *ctx.out << j.dump() << '\n';
  return kOk;
}

int cmd_sample_bm(const Context& ctx, int dim_flag, int m_flag) {
  const int dim = dim_flag > 0 ? dim_flag : get_or(ctx.config, "dim", 1);
  const int m = m_flag >= 0 ? m_flag : get_or(ctx.config, "dyadic_level", 8);
  const int level = level_of(ctx, 0);
  const auto rp = sample_brownian_rough_path(dim, m, ctx.seed, level);
  {
    auto f = open_output(ctx, "bm.csv");
    write_path_csv(f, rp.level1());
  }
  json incs = json::array();
  for (const auto& inc : rp.increments()) incs.push_back(tensor_json(inc));
  json j = header(ctx);
  j["seed"] = ctx.seed;
  j["dim"] = dim;
  j["dyadic_level"] = m;
  j["level"] = level;
  j["times"] = rp.times();
  j["increments"] = incs;
  write_json(ctx, "bm_rough_path.json", j);
  *ctx.out << json{{"schema_version", kSchemaVersion}, {"command", ctx.command}, {"status", "ok"},
                   {"signature", tensor_json(rp.cumulative(rp.points() - 1))}}
                  .dump()
           << '\n';
  return kOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return kIoError;
    case ErrorKind::kConfig:
    case ErrorKind::kShape:
    case ErrorKind::kDomain:
    case ErrorKind::kDerivativeOrder: return kConfigError;
    default: return kNumericalError;
  }
}

void error_record(std::ostream& err, const std::string& command, std::string_view kind,
                  const std::string& message) {
  err << json{{"schema_version", kSchemaVersion}, {"command", command}, {"status", "error"},
              {"kind", kind}, {"message", message}}
             .dump()
      << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rough path toolkit: signatures, variation norms, RDEs, expansions"};
  app.require_subcommand(1);
  Context ctx;
  ctx.out = &out;
  std::string config_file, log_level = "warn";
  std::string out_dir = ".";
  app.add_option("--config", config_file, "JSON config (schema_version 1)");
  app.add_option("--input", ctx.input, "input path CSV (time,x1,...,xd)");
  app.add_option("--out-dir", out_dir, "directory for output artifacts");
  app.add_option("--seed", ctx.seed, "random seed");
  app.add_option("--threads", ctx.threads, "worker threads (0 = all cores)");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  int level = 0, dim = 0, dyadic = -1;
  double p = 0.0;
  auto* lift = app.add_subcommand("lift", "signature of a CSV path");
  lift->add_option("--level", level, "truncation level");
  auto* pvar = app.add_subcommand("pvar", "p-variation norms of a CSV path");
  pvar->add_option("--level", level, "truncation level");
  pvar->add_option("-p,--p", p, "variation exponent");
  app.add_subcommand("rde-solve", "solve dY = f(Y) dX");
  app.add_subcommand("taylor-expand", "expansion terms Y^0..Y^n");
  app.add_subcommand("order-check", "remainder order over an epsilon sweep");
  app.add_subcommand("laplace", "minimizer, Xi and c(Lambda), optional Monte Carlo");
  auto* bm = app.add_subcommand("sample-bm", "sample a Brownian rough path");
  bm->add_option("--dim", dim, "dimension");
  bm->add_option("--dyadic-level", dyadic, "2^m intervals");
  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) sub->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_record(err, "", "usage", e.what());
    return kUsage;
  }
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.out_dir = out_dir;
  spdlog::set_level(spdlog::level::from_str(log_level));
  if (ctx.threads < 0) ctx.threads = 0;

  try {
    if (!config_file.empty()) ctx.config = load_config(config_file);
    if (ctx.command == "lift") return cmd_lift(ctx, level);
    if (ctx.command == "pvar") return cmd_pvar(ctx, level, p);
    if (ctx.command == "rde-solve") return cmd_rde(ctx);
    if (ctx.command == "taylor-expand") return cmd_taylor(ctx);
    if (ctx.command == "order-check") return cmd_order_check(ctx);
    if (ctx.command == "laplace") return cmd_laplace(ctx);
    if (ctx.command == "sample-bm") return cmd_sample_bm(ctx, dim, dyadic);
  } catch (const Error& e) {
    error_record(err, ctx.command, to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    error_record(err, ctx.command, "internal", e.what());
    return kNumericalError;
  }
  return kUsage;
}

}  // namespace roughpath::cli
