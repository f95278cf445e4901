#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "momentsdp/entangle.hpp"
#include "momentsdp/error.hpp"
#include "momentsdp/io.hpp"
#include "momentsdp/lasserre.hpp"
#include "momentsdp/log.hpp"

namespace momentsdp::cli {

namespace {

using entangle::Task;
using entangle::TaskKind;
using io::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kCsvHeader = "param,lower_bound,oracle_upper,certified,order,wall_ms";

class Clock {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Orders {
  int h_start = 0;
  int h_max = 0;
};

Orders resolve_orders(const RunConfig& c, const lasserre::PolyProblem& p, std::optional<int> file_order = {},
                      std::optional<int> file_max = {}) {
  const int h_min = lasserre::min_order(p);
  Orders o;
  o.h_start = c.order > 0 ? c.order : file_order.value_or(h_min);
  o.h_max = c.max_order > 0 ? c.max_order : file_max.value_or(o.h_start);
  if (o.h_start < h_min) {
    throw InputError(fmt::format("order {} is below the minimum order {} of this problem", o.h_start, h_min));
  }
  if (o.h_max < o.h_start) {
    throw InputError(fmt::format("max order {} is below order {}", o.h_max, o.h_start));
  }
  return o;
}

lasserre::HierarchyOptions hierarchy_options(const RunConfig& c, const Orders& o) {
  lasserre::HierarchyOptions h;
  h.h_start = o.h_start;
  h.h_max = o.h_max;
  h.rank_tol = c.rank_tol;
  h.seed = c.seed;
  h.solver.gap_tol = c.gap_tol;
  h.solver.feas_tol = c.feas_tol;
  h.solver.record_history = log::level() >= log::Level::debug;
  return h;
}

entangle::OracleOptions oracle_options(const RunConfig& c, int jobs) {
  entangle::OracleOptions o;
  o.restarts = c.restarts;
  o.seed = c.seed;
  o.jobs = jobs;
  return o;
}

json config_json(const RunConfig& c, const Orders& o) {
  json j = {{"command", c.command},
            {"input", c.input},
            {"order", o.h_start},
            {"max_order", o.h_max},
            {"gap_tol", c.gap_tol},
            {"feas_tol", c.feas_tol},
            {"rank_tol", c.rank_tol},
            {"assert_threshold", c.assert_threshold},
            {"restarts", c.restarts},
            {"seed", c.seed},
            {"jobs", c.jobs},
            {"format", c.format},
            {"out", c.out},
            {"timing", c.timing}};
  if (c.terms > 0) j["n"] = c.terms;
  if (!c.symmetric.empty()) j["symmetric"] = c.symmetric;
  if (!c.parties.empty()) j["parties"] = c.parties;
  if (!c.dump.empty()) j["dump"] = c.dump;
  if (c.command == "sweep") j["sweep"] = {{"family", c.family}, {"start", c.start}, {"stop", c.stop}, {"steps", c.steps}};
  return j;
}

json hierarchy_json(const lasserre::HierarchyResult& r) {
  json orders = json::array();
  for (const auto& rec : r.records) {
    orders.push_back({{"order", rec.order},
                      {"lower_bound", rec.lower_bound},
                      {"status", sdp::to_string(rec.status)},
                      {"gap", rec.gap},
                      {"rank", rec.rank},
                      {"low_rank", rec.low_rank},
                      {"flat", rec.flat},
                      {"face_minimized", rec.face_minimized},
                      {"y_dim", rec.y_dim},
                      {"free_vars", rec.free_vars},
                      {"iterations", rec.iterations},
                      {"message", rec.message}});
  }
  json j = {{"orders", std::move(orders)},
            {"lower_bound", r.final_bound ? json(*r.final_bound) : json(nullptr)},
            {"certified", r.certified_optimal},
            {"infeasible", r.infeasible},
            {"minimizers", r.minimizers},
            {"message", r.message}};
  if (r.certificate) {
    j["certificate"] = {{"trace_z_h0", r.certificate->trace_z_h0},
                        {"max_abs_trace_z_hs", r.certificate->max_abs_trace_z_hs},
                        {"min_eigenvalue", r.certificate->min_eigenvalue},
                        {"trace_z", r.certificate->trace_z}};
  }
  return j;
}

int final_order(const lasserre::HierarchyResult& r) { return r.records.empty() ? 0 : r.records.back().order; }

// Quantity bounded below by the relaxation and above by the oracle.
struct Headline {
  std::string name;
  double lower = kNan;
  double upper = kNan;
};

Headline headline(TaskKind kind, double bound, double oracle) {
  switch (kind) {
    case TaskKind::geomeasure: return {"entanglement", 1.0 + bound, 1.0 + oracle};
    case TaskKind::witness: return {"epsilon", bound, oracle};
    case TaskKind::hsdist: return {"distance_sq", bound, oracle};
    case TaskKind::variance: return {"variance", bound, oracle};
    case TaskKind::purity: return {"neg_nu_sq", bound, oracle};
  }
  return {};
}

json decoded_json(const entangle::Decoded& d) {
  json j = json::object();
  for (const auto& [k, v] : d.values) j[k] = v;
  j["clamped"] = d.clamped;
  return j;
}

struct Point {
  double param = kNan;
  double lower = kNan;
  double upper = kNan;
  bool certified = false;
  int order = 0;
  double wall_ms = 0.0;
  bool solved = false;
  json report;
};

Point run_task(const Task& task, const RunConfig& c, const Orders& o, int oracle_jobs) {
  const Clock clock;
  Point pt;
  const auto problem = entangle::encode(task);
  const auto hr = lasserre::run_hierarchy(problem, hierarchy_options(c, o));
  const auto oracle = entangle::oracle_upper_bound(task, oracle_options(c, oracle_jobs));
  const double bound = hr.final_bound.value_or(kNan);
  const Headline h = headline(task.kind, bound, oracle.value);
  pt.lower = h.lower;
  pt.upper = h.upper;
  pt.certified = hr.certified_optimal;
  pt.order = final_order(hr);
  pt.solved = hr.final_bound.has_value();
  pt.wall_ms = c.timing ? clock.ms() : 0.0;
  pt.report = {{"task", entangle::to_string(task.kind)},
               {"dims", task.layout.dims},
               {"num_vars", problem.num_vars()},
               {"relaxation", hierarchy_json(hr)},
               {"objective_lower", hr.final_bound ? json(bound) : json(nullptr)},
               {"objective_oracle", oracle.value},
               {"oracle_point", oracle.point},
               {"oracle_best_restart", oracle.best_restart},
               {"headline", h.name},
               {"lower_bound", pt.solved ? json(h.lower) : json(nullptr)},
               {"oracle_upper", h.upper},
               {"gap", pt.solved ? json(oracle.value - bound) : json(nullptr)},
               {"certified", pt.certified},
               {"oracle_decoded", decoded_json(entangle::decode(task, oracle.value, c.assert_threshold))},
               {"wall_ms", pt.wall_ms}};
  if (pt.solved) pt.report["decoded"] = decoded_json(entangle::decode(task, bound, c.assert_threshold));
  if (task.kind == TaskKind::hsdist) pt.report["n"] = task.terms;
  if (!task.groups.empty()) pt.report["groups"] = task.groups;
  return pt;
}

Point run_edge_witness(const quantum::CMatrix& rho, const quantum::SubsystemLayout& layout, const RunConfig& c,
                       int oracle_jobs) {
  const Clock clock;
  std::vector<int> parties;
  for (int p : c.parties) {
    if (p < 1 || p > layout.parties()) throw InputError(fmt::format("party {} out of range 1..{}", p, layout.parties()));
    parties.push_back(p - 1);
  }
  const auto probe = entangle::encode_witness_min(rho, layout);
  const Orders o = resolve_orders(c, probe);
  const auto ew = entangle::build_edge_witness(rho, layout, parties, 1e-9, hierarchy_options(c, o), c.assert_threshold);
  Task wt;
  wt.kind = TaskKind::witness;
  wt.layout = layout;
  wt.op = ew.prewitness;
  const auto oracle = entangle::oracle_upper_bound(wt, oracle_options(c, oracle_jobs));
  Point pt;
  pt.solved = ew.hierarchy.final_bound.has_value();
  pt.lower = pt.solved ? ew.epsilon : kNan;
  pt.upper = oracle.value;
  pt.certified = ew.hierarchy.certified_optimal;
  pt.order = final_order(ew.hierarchy);
  pt.wall_ms = c.timing ? clock.ms() : 0.0;
  std::vector<int> shown;
  for (int p : ew.parties) shown.push_back(p + 1);
  pt.report = {{"task", "edge-witness"},
               {"dims", layout.dims},
               {"parties", shown},
               {"ppt", ew.ppt},
               {"relaxation", hierarchy_json(ew.hierarchy)},
               {"headline", "epsilon"},
               {"lower_bound", pt.solved ? json(pt.lower) : json(nullptr)},
               {"oracle_upper", pt.upper},
               {"gap", pt.solved ? json(pt.upper - pt.lower) : json(nullptr)},
               {"certified", pt.certified},
               {"expectation", ew.expectation},
               {"detected", ew.detected},
               {"prewitness", io::matrix_to_json(ew.prewitness)},
               {"witness", io::matrix_to_json(ew.witness)},
               {"message", ew.message},
               {"wall_ms", pt.wall_ms}};
  return pt;
}

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.12g}", v) : "nan"; }

std::string csv_rows(const RunConfig& c, const Orders& o, const std::vector<Point>& points) {
  std::string s = fmt::format("# config {}\n{}\n", config_json(c, o).dump(), kCsvHeader);
  for (const auto& p : points) {
    s += fmt::format("{},{},{},{},{},{:.0f}\n", std::isfinite(p.param) ? fmt::format("{:.6g}", p.param) : "",
                     num(p.lower), num(p.upper), p.certified ? 1 : 0, p.order, p.wall_ms);
  }
  return s;
}

void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
  } else {
    io::write_text_file(c.out, text);
  }
}

TaskKind command_kind(const std::string& command) {
  if (command == "geomeasure") return TaskKind::geomeasure;
  if (command == "witness-eps") return TaskKind::witness;
  if (command == "hs-distance") return TaskKind::hsdist;
  if (command == "variance-min") return TaskKind::variance;
  if (command == "output-purity") return TaskKind::purity;
  throw InputError(fmt::format("no task for command {}", command));
}

// Task options given on the command line replace those of the file.
void apply_overrides(const RunConfig& c, json& options) {
  if (c.terms > 0) options["n"] = c.terms;
  if (c.symmetric == "true") {
    options["symmetric"] = true;
  } else if (c.symmetric == "false") {
    options["symmetric"] = false;
  } else if (!c.symmetric.empty()) {
    json groups = json::array();
    std::stringstream ss(c.symmetric);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        groups.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw InputError(fmt::format("--symmetric: bad group label '{}'", item));
      }
    }
    options["symmetric"] = std::move(groups);
  }
}

io::TaskFile load_task(const RunConfig& c) {
  const TaskKind kind = command_kind(c.command);
  json j = io::read_json_file(c.input);
  json env;
  if (j.is_object() && j.contains("task")) {
    env = j;
    const auto file_kind = entangle::parse_task_kind(env["task"].get<std::string>());
    if (file_kind != kind) {
      throw InputError(fmt::format("{} holds a {} task, not {}", c.input, entangle::to_string(file_kind),
                                   entangle::to_string(kind)));
    }
  } else {
    env = {{"task", entangle::to_string(kind)}, {"input", j}};
  }
  if (!env.contains("options")) env["options"] = json::object();
  apply_overrides(c, env["options"]);
  return io::task_from_json(env);
}

int finish_single(const RunConfig& c, const Orders& o, Point pt, std::ostream& out) {
  if (c.format == "csv") {
    emit(c, csv_rows(c, o, {pt}), out);
  } else {
    pt.report["config"] = config_json(c, o);
    emit(c, pt.report.dump(2) + "\n", out);
  }
  return pt.solved ? kSuccess : kSolverFailure;
}

int cmd_task(const RunConfig& c, std::ostream& out) {
  const auto tf = load_task(c);
  const Orders o = resolve_orders(c, entangle::encode(tf.task), tf.order, tf.max_order);
  return finish_single(c, o, run_task(tf.task, c, o, c.jobs), out);
}

int cmd_edge_witness(const RunConfig& c, std::ostream& out) {
  json j = io::read_json_file(c.input);
  if (j.is_object() && j.contains("input")) j = j["input"];
  quantum::SubsystemLayout layout;
  const auto rho = io::operator_from_json(j, layout);
  Point pt = run_edge_witness(rho, layout, c, c.jobs);
  const Orders o = resolve_orders(c, entangle::encode_witness_min(rho, layout));
  return finish_single(c, o, std::move(pt), out);
}

int cmd_relax(const RunConfig& c, std::ostream& out) {
  const Clock clock;
  const auto problem = io::problem_from_json(io::read_json_file(c.input));
  const Orders o = resolve_orders(c, problem);
  if (!c.dump.empty()) {
    const auto inst = lasserre::build_relaxation(problem, o.h_start).to_instance();
    io::write_text_file(c.dump, io::relaxation_dump(inst).dump() + "\n");
  }
  const auto hr = lasserre::run_hierarchy(problem, hierarchy_options(c, o));
  // Extracted atoms double as feasible points for an upper bound.
  double upper = kNan;
  for (const auto& x : hr.minimizers) {
    const double v = problem.objective.evaluate(x);
    if (!(v >= upper)) upper = v;
  }
  json sizes = json::array();
  for (int h = o.h_start; h <= o.h_max; ++h) {
    const std::int64_t y_dim = basis_size(problem.num_vars(), 2 * h);
    sizes.push_back({{"order", h},
                     {"moment_block", basis_size(problem.num_vars(), h)},
                     {"y_dim", y_dim},
                     {"y_free_dim", y_dim - 1}});
  }
  Point pt;
  pt.solved = hr.final_bound.has_value() || hr.infeasible;
  pt.lower = hr.final_bound.value_or(kNan);
  pt.upper = upper;
  pt.certified = hr.certified_optimal || (hr.infeasible && hr.certificate.has_value());
  pt.order = final_order(hr);
  pt.wall_ms = c.timing ? clock.ms() : 0.0;
  pt.report = {{"task", "relax"},
               {"num_vars", problem.num_vars()},
               {"sizes", std::move(sizes)},
               {"relaxation", hierarchy_json(hr)},
               {"lower_bound", hr.final_bound ? json(pt.lower) : json(nullptr)},
               {"oracle_upper", std::isfinite(upper) ? json(upper) : json(nullptr)},
               {"gap", hr.final_bound && std::isfinite(upper) ? json(upper - pt.lower) : json(nullptr)},
               {"certified", pt.certified},
               {"result", hr.infeasible ? "infeasible" : (hr.final_bound ? "bounded" : "failed")},
               {"wall_ms", pt.wall_ms}};
  return finish_single(c, o, std::move(pt), out);
}

int cmd_sweep(RunConfig c, std::ostream& out) {
  struct Family {
    double start, stop;
    int steps;
  };
  Family f;
  if (c.family == "s" || c.family == "p") {
    f = {0.0, 1.0, 11};
  } else if (c.family == "c") {
    f = {0.1, 0.9, 9};
  } else {
    throw InputError(fmt::format("unknown sweep family '{}' (expected s, p or c)", c.family));
  }
  if (std::isnan(c.start)) c.start = f.start;
  if (std::isnan(c.stop)) c.stop = f.stop;
  if (c.steps == -1) c.steps = f.steps;
  if (c.steps < 1) throw InputError("--steps must be at least 1");
  std::vector<double> params;
  for (int i = 0; i < c.steps; ++i) {
    params.push_back(c.steps == 1 ? c.start : c.start + (c.stop - c.start) * i / (c.steps - 1));
  }
  for (double x : params) {
    if (c.family == "c" ? !(x > 0.0 && x < 1.0) : !(x >= 0.0 && x <= 1.0)) {
      throw InputError(fmt::format("sweep value {} outside the family's range", x));
    }
  }

  auto make_task = [&](double x) {
    Task t;
    t.kind = TaskKind::geomeasure;
    t.state = c.family == "s" ? entangle::states::w_superposition(x) : entangle::states::psi4(x);
    t.layout = t.state->layout();
    if (!c.symmetric.empty()) {
      json options = json::object();
      apply_overrides(c, options);
      json env = {{"task", "geomeasure"}, {"input", io::to_json(*t.state)}, {"options", options}};
      t.groups = io::task_from_json(env).task.groups;
    }
    return t;
  };
  const quantum::SubsystemLayout bes_layout = quantum::SubsystemLayout::qubits(3);
  const Orders o = c.family == "c" ? resolve_orders(c, entangle::encode_witness_min(entangle::states::bound_entangled(1, 1, 0.5), bes_layout))
                                   : resolve_orders(c, entangle::encode(make_task(params.front())));

  const int workers = std::max(1, std::min<int>(c.jobs, static_cast<int>(params.size())));
  const int oracle_jobs = workers > 1 ? 1 : c.jobs;
  std::vector<Point> points(params.size());
  std::vector<std::exception_ptr> errors(params.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < params.size(); i = next++) {
      try {
        const double x = params[i];
        if (c.family == "c") {
          points[i] = run_edge_witness(entangle::states::bound_entangled(1.0 / x, 1.0 / x, x), bes_layout, c, oracle_jobs);
        } else {
          points[i] = run_task(make_task(x), c, o, oracle_jobs);
        }
        points[i].param = x;
        points[i].report["param"] = x;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  bool all_solved = true;
  for (const auto& p : points) all_solved = all_solved && p.solved;
  if (c.format == "csv") {
    emit(c, csv_rows(c, o, points), out);
  } else {
    json rows = json::array();
    for (auto& p : points) {
      p.report.erase("prewitness");
      p.report.erase("witness");
      rows.push_back(std::move(p.report));
    }
    json j = {{"config", config_json(c, o)}, {"family", c.family}, {"points", std::move(rows)}};
    emit(c, j.dump(2) + "\n", out);
  }
  return all_solved ? kSuccess : kSolverFailure;
}

void add_common(CLI::App* sub, RunConfig& c, bool needs_input) {
  if (needs_input) sub->add_option("input", c.input, "Input JSON file")->required()->check(CLI::ExistingFile);
  sub->add_option("--order", c.order, "Relaxation order to start from (default: minimum)")->check(CLI::PositiveNumber);
  sub->add_option("--max-order", c.max_order, "Highest order to try (default: --order)")->check(CLI::PositiveNumber);
  sub->add_option("--gap-tol", c.gap_tol, "SDP relative gap tolerance")->capture_default_str();
  sub->add_option("--feas-tol", c.feas_tol, "SDP feasibility tolerance")->capture_default_str();
  sub->add_option("--rank-tol", c.rank_tol, "Relative singular value cutoff for flatness")->capture_default_str();
  sub->add_option("--assert-threshold", c.assert_threshold, "Smallest value asserted as nonzero")->capture_default_str();
  sub->add_option("--restarts", c.restarts, "Oracle restarts")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--format", c.format, "Output format")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", c.out, "Output file (default: stdout)");
  sub->add_flag("!--no-timing", c.timing, "Report wall times as 0 for byte-stable output");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment relaxation bounds for polynomial and entanglement problems", "momentsdp"};
  app.require_subcommand(1);
  RunConfig c;
  c.start = kNan;
  c.stop = kNan;
  c.steps = -1;

  auto* geo = app.add_subcommand("geomeasure", "Geometric measure of a pure state (state JSON or task envelope)");
  add_common(geo, c, true);
  geo->add_option("--symmetric", c.symmetric, "true, false, or comma-separated group label per party");
  auto* wit = app.add_subcommand("witness-eps", "Minimum of tr[W P] over product states");
  add_common(wit, c, true);
  wit->add_option("--symmetric", c.symmetric, "true, false, or comma-separated group label per party");
  auto* edge = app.add_subcommand("edge-witness", "Witness for a PPT state from the kernels of rho and its partial transposes");
  add_common(edge, c, true);
  edge->add_option("--parties", c.parties, "1-based parties to transpose (default: all)");
  auto* hs = app.add_subcommand("hs-distance", "Squared Hilbert-Schmidt distance to sums of n product terms");
  add_common(hs, c, true);
  hs->add_option("--n", c.terms, "Number of product terms")->check(CLI::PositiveNumber);
  auto* var = app.add_subcommand("variance-min", "Minimum variance of an observable over product states");
  add_common(var, c, true);
  var->add_option("--symmetric", c.symmetric, "true, false, or comma-separated group label per party");
  auto* pur = app.add_subcommand("output-purity", "Maximal output purity of a channel given by Kraus operators");
  add_common(pur, c, true);
  auto* relax = app.add_subcommand("relax", "Relaxation of a polynomial program");
  add_common(relax, c, true);
  relax->add_option("--dump", c.dump, "Write the relaxation at --order as JSON");
  auto* sweep = app.add_subcommand("sweep", "Series over a built-in state family");
  add_common(sweep, c, false);
  sweep->add_option("--family", c.family, "s (W superposition), p (four-qubit family) or c (bound entangled)")->required();
  sweep->add_option("--start", c.start, "First parameter value");
  sweep->add_option("--stop", c.stop, "Last parameter value");
  sweep->add_option("--steps", c.steps, "Number of points");
  sweep->add_option("--symmetric", c.symmetric, "Party groups for s and p families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUserError;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    if (c.command == "edge-witness") return cmd_edge_witness(c, out);
    if (c.command == "relax") return cmd_relax(c, out);
    if (c.command == "sweep") return cmd_sweep(c, out);
    return cmd_task(c, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << "\n";
    return kSolverFailure;
  }
}

}  // namespace momentsdp::cli
