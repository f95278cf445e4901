#include "momentsdp/io.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "momentsdp/error.hpp"

namespace momentsdp::io {

namespace {

using quantum::CMatrix;
using quantum::Complex;
using quantum::CVector;
using quantum::SubsystemLayout;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError(fmt::format("{}: {}", where, what));
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, fmt::format("missing \"{}\"", key));
  return *it;
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

Complex as_complex(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  fail(where, "expected [re, im] or a number");
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

SubsystemLayout layout_from(const json& j, const std::string& where) {
  const json& d = field(j, "dims", where);
  if (!d.is_array() || d.empty()) fail(where + ".dims", "expected a nonempty array");
  std::vector<int> dims;
  for (std::size_t i = 0; i < d.size(); ++i) dims.push_back(as_int(d[i], fmt::format("{}.dims[{}]", where, i)));
  return SubsystemLayout(std::move(dims));
}

Polynomial poly_from(const json& j, int vars, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  if (j.contains("vars")) {
    const int v = as_int(j["vars"], where + ".vars");
    if (vars >= 0 && v != vars) fail(where, fmt::format("has {} variables, expected {}", v, vars));
    vars = v;
  }
  if (vars < 0) fail(where, "missing \"vars\"");
  if (vars > kMaxVariables) fail(where, fmt::format("more than {} variables", kMaxVariables));
  const json& terms = field(j, "terms", where);
  if (!terms.is_array()) fail(where + ".terms", "expected an array");
  Polynomial p(vars);
  std::set<std::vector<int>> seen;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const std::string tw = fmt::format("{}.terms[{}]", where, k);
    const json& e = field(terms[k], "exp", tw);
    if (!e.is_array() || static_cast<int>(e.size()) != vars) {
      fail(tw + ".exp", fmt::format("expected {} exponents", vars));
    }
    std::vector<int> exps;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const int v = as_int(e[i], fmt::format("{}.exp[{}]", tw, i));
      if (v < 0) fail(tw + ".exp", "negative exponent");
      exps.push_back(v);
    }
    if (!seen.insert(exps).second) fail(tw, "duplicate exponent vector");
    p.add_term(MultiIndex(std::move(exps)), as_double(field(terms[k], "coef", tw), tw + ".coef"));
  }
  return p;
}

}  // namespace

json to_json(const Polynomial& p) {
  json terms = json::array();
  for (const auto& [alpha, coef] : p.terms()) terms.push_back({{"exp", alpha.exponents()}, {"coef", coef}});
  return {{"vars", p.num_vars()}, {"terms", std::move(terms)}};
}

Polynomial polynomial_from_json(const json& j) { return poly_from(j, -1, "polynomial"); }

json to_json(const lasserre::PolyProblem& p) {
  json out = {{"vars", p.num_vars()}, {"objective", to_json(p.objective)}};
  json cons = json::array();
  for (const auto& c : p.constraints) {
    json cj = {{"type", c.kind == lasserre::ConstraintKind::equality ? "eq" : "ge"}, {"poly", to_json(c.poly)}};
    if (!c.label.empty()) cj["label"] = c.label;
    cons.push_back(std::move(cj));
  }
  out["constraints"] = std::move(cons);
  if (p.ball_radius_sq) out["ball_radius_sq"] = *p.ball_radius_sq;
  return out;
}

lasserre::PolyProblem problem_from_json(const json& j) {
  const std::string where = "problem";
  const int vars = as_int(field(j, "vars", where), where + ".vars");
  if (vars < 1) fail(where + ".vars", "must be positive");
  lasserre::PolyProblem p;
  p.objective = poly_from(field(j, "objective", where), vars, where + ".objective");
  if (j.contains("constraints")) {
    const json& cons = j["constraints"];
    if (!cons.is_array()) fail(where + ".constraints", "expected an array");
    for (std::size_t k = 0; k < cons.size(); ++k) {
      const std::string cw = fmt::format("{}.constraints[{}]", where, k);
      const json& c = cons[k];
      const std::string type = c.value("type", "ge");
      Polynomial g = poly_from(field(c, "poly", cw), vars, cw + ".poly");
      const std::string label = c.value("label", "");
      if (type == "ge") {
        p.add_inequality(std::move(g), label);
      } else if (type == "eq") {
        p.add_equality(std::move(g), label);
      } else {
        fail(cw + ".type", fmt::format("unknown constraint type \"{}\"", type));
      }
    }
  }
  if (j.contains("ball_radius_sq")) {
    const double a2 = as_double(j["ball_radius_sq"], where + ".ball_radius_sq");
    if (!(a2 > 0)) fail(where + ".ball_radius_sq", "must be positive");
    p.ball_radius_sq = a2;
  }
  p.check();
  return p;
}

json to_json(const quantum::StateVector& s) {
  json amps = json::array();
  for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i) amps.push_back(complex_json(s.amplitudes()(i)));
  return {{"dims", s.layout().dims}, {"amplitudes", std::move(amps)}};
}

quantum::StateVector state_from_json(const json& j) {
  const std::string where = "state";
  const SubsystemLayout layout = layout_from(j, where);
  const json& a = field(j, "amplitudes", where);
  if (!a.is_array() || static_cast<int>(a.size()) != layout.total_dim()) {
    fail(where + ".amplitudes", fmt::format("expected {} amplitudes", layout.total_dim()));
  }
  CVector v(layout.total_dim());
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_complex(a[i], fmt::format("{}.amplitudes[{}]", where, i));
  if (j.value("normalize", false)) return quantum::StateVector::normalized(layout, v);
  return quantum::StateVector(layout, v);
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
  const std::size_t n = j.size();
  CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (!j[r].is_array() || j[r].size() != n) fail(fmt::format("{}[{}]", where, r), fmt::format("expected {} entries", n));
    for (std::size_t c = 0; c < n; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = as_complex(j[r][c], fmt::format("{}[{}][{}]", where, r, c));
    }
  }
  return m;
}

json operator_to_json(const CMatrix& m, const SubsystemLayout& layout) {
  return {{"dims", layout.dims}, {"matrix", matrix_to_json(m)}};
}

CMatrix operator_from_json(const json& j, SubsystemLayout& layout) {
  const std::string where = "operator";
  layout = layout_from(j, where);
  CMatrix m = matrix_from_json(field(j, "matrix", where), where + ".matrix");
  if (m.rows() != layout.total_dim()) {
    fail(where, fmt::format("matrix is {}x{} but dims give {}", m.rows(), m.cols(), layout.total_dim()));
  }
  // Validates Hermiticity.
  const quantum::HermitianOp op(m, layout);
  return op.matrix();
}

json kraus_to_json(const std::vector<CMatrix>& kraus, const SubsystemLayout& layout) {
  json list = json::array();
  for (const auto& k : kraus) list.push_back(matrix_to_json(k));
  return {{"dims", layout.dims}, {"kraus", std::move(list)}};
}

std::vector<CMatrix> kraus_from_json(const json& j, SubsystemLayout& layout) {
  const std::string where = "channel";
  layout = layout_from(j, where);
  const json& list = field(j, "kraus", where);
  if (!list.is_array() || list.empty()) fail(where + ".kraus", "expected a nonempty array");
  std::vector<CMatrix> kraus;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string kw = fmt::format("{}.kraus[{}]", where, k);
    CMatrix m = matrix_from_json(list[k], kw);
    if (m.cols() != layout.total_dim()) fail(kw, fmt::format("expected {} columns", layout.total_dim()));
    if (!kraus.empty() && m.rows() != kraus.front().rows()) fail(kw, "output dimensions differ");
    kraus.push_back(std::move(m));
  }
  entangle::check_kraus(kraus);
  return kraus;
}

TaskFile task_from_json(const json& j) {
  const std::string where = "task";
  const json& name = field(j, "task", where);
  if (!name.is_string()) fail(where + ".task", "expected a string");
  TaskFile tf;
  entangle::Task& t = tf.task;
  t.kind = entangle::parse_task_kind(name.get<std::string>());
  const json& input = field(j, "input", where);
  switch (t.kind) {
    case entangle::TaskKind::geomeasure:
      t.state = state_from_json(input);
      t.layout = t.state->layout();
      break;
    case entangle::TaskKind::purity: t.kraus = kraus_from_json(input, t.layout); break;
    default: t.op = operator_from_json(input, t.layout); break;
  }
  if (j.contains("options")) {
    const json& o = j["options"];
    const std::string ow = where + ".options";
    if (!o.is_object()) fail(ow, "expected an object");
    if (o.contains("order")) tf.order = as_int(o["order"], ow + ".order");
    if (o.contains("max_order")) tf.max_order = as_int(o["max_order"], ow + ".max_order");
    if (tf.order && *tf.order < 1) fail(ow + ".order", "must be positive");
    if (tf.order && tf.max_order && *tf.max_order < *tf.order) fail(ow + ".max_order", "below order");
    if (o.contains("n")) {
      t.terms = as_int(o["n"], ow + ".n");
      if (t.terms < 1) fail(ow + ".n", "must be positive");
    }
    if (o.contains("symmetric")) {
      const json& s = o["symmetric"];
      const int n = t.layout.parties();
      if (s.is_boolean()) {
        if (s.get<bool>()) {
          // Each party joins the first earlier party of the same dimension.
          t.groups.assign(static_cast<std::size_t>(n), 0);
          for (int i = 0; i < n; ++i) {
            t.groups[static_cast<std::size_t>(i)] = i;
            for (int k = 0; k < i; ++k) {
              if (t.layout.dims[static_cast<std::size_t>(k)] == t.layout.dims[static_cast<std::size_t>(i)]) {
                t.groups[static_cast<std::size_t>(i)] = t.groups[static_cast<std::size_t>(k)];
                break;
              }
            }
          }
        }
      } else if (s.is_array()) {
        if (static_cast<int>(s.size()) != n) fail(ow + ".symmetric", fmt::format("expected {} group labels", n));
        for (std::size_t i = 0; i < s.size(); ++i) {
          t.groups.push_back(as_int(s[i], fmt::format("{}.symmetric[{}]", ow, i)));
        }
      } else {
        fail(ow + ".symmetric", "expected a boolean or an array of group labels");
      }
      if (!t.groups.empty() && (t.kind == entangle::TaskKind::hsdist || t.kind == entangle::TaskKind::purity)) {
        fail(ow + ".symmetric", fmt::format("not supported for task {}", entangle::to_string(t.kind)));
      }
    }
  }
  // Encoding surfaces layout/group mismatches as InputError now.
  (void)entangle::encode(t);
  return tf;
}

json to_json(const TaskFile& tf) {
  const entangle::Task& t = tf.task;
  json j = {{"task", entangle::to_string(t.kind)}};
  switch (t.kind) {
    case entangle::TaskKind::geomeasure: j["input"] = to_json(*t.state); break;
    case entangle::TaskKind::purity: j["input"] = kraus_to_json(t.kraus, t.layout); break;
    default: j["input"] = operator_to_json(t.op, t.layout); break;
  }
  json o = json::object();
  if (tf.order) o["order"] = *tf.order;
  if (tf.max_order) o["max_order"] = *tf.max_order;
  if (t.kind == entangle::TaskKind::hsdist) o["n"] = t.terms;
  if (!t.groups.empty()) o["symmetric"] = t.groups;
  j["options"] = std::move(o);
  return j;
}

json relaxation_dump(const sdp::SdpInstance& inst) {
  json blocks = json::array();
  for (const auto& b : inst.blocks) {
    json entries = json::array();
    for (const auto& e : b.entries) {
      const int r = std::min(e.row, e.col);
      const int c = std::max(e.row, e.col);
      entries.push_back(json::array({r, c, e.var + 1, e.value}));
    }
    blocks.push_back({{"label", b.label}, {"dim", b.dim}, {"entries", std::move(entries)}});
  }
  json eqs = json::array();
  for (const auto& e : inst.equalities) {
    json coeffs = json::array();
    for (const auto& [v, a] : e.coeffs) coeffs.push_back(json::array({v + 1, a}));
    eqs.push_back({{"coeffs", std::move(coeffs)}, {"rhs", e.rhs}});
  }
  return {{"num_vars", inst.num_vars},
          {"objective", inst.objective},
          {"objective_offset", inst.objective_offset},
          {"equalities", std::move(eqs)},
          {"blocks", std::move(blocks)}};
}

sdp::SdpInstance instance_from_dump(const json& j) {
  const std::string where = "relaxation";
  sdp::SdpInstance inst;
  inst.num_vars = as_int(field(j, "num_vars", where), where + ".num_vars");
  const json& obj = field(j, "objective", where);
  if (!obj.is_array()) fail(where + ".objective", "expected an array");
  for (std::size_t i = 0; i < obj.size(); ++i) inst.objective.push_back(as_double(obj[i], fmt::format("{}.objective[{}]", where, i)));
  inst.objective_offset = j.contains("objective_offset") ? as_double(j["objective_offset"], where + ".objective_offset") : 0.0;
  if (j.contains("equalities")) {
    for (std::size_t k = 0; k < j["equalities"].size(); ++k) {
      const std::string ew = fmt::format("{}.equalities[{}]", where, k);
      const json& e = j["equalities"][k];
      sdp::LinearEquality eq;
      for (const auto& c : field(e, "coeffs", ew)) {
        if (!c.is_array() || c.size() != 2) fail(ew + ".coeffs", "expected [ordinal, coefficient] pairs");
        const int ord = as_int(c[0], ew + ".coeffs");
        if (ord < 1) fail(ew + ".coeffs", "ordinal must be >= 1");
        eq.coeffs.emplace_back(ord - 1, as_double(c[1], ew + ".coeffs"));
      }
      eq.rhs = as_double(field(e, "rhs", ew), ew + ".rhs");
      inst.equalities.push_back(std::move(eq));
    }
  }
  const json& blocks = field(j, "blocks", where);
  if (!blocks.is_array()) fail(where + ".blocks", "expected an array");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string bw = fmt::format("{}.blocks[{}]", where, b);
    sdp::LmiBlock block;
    block.dim = as_int(field(blocks[b], "dim", bw), bw + ".dim");
    block.label = blocks[b].value("label", "");
    for (const auto& q : field(blocks[b], "entries", bw)) {
      if (!q.is_array() || q.size() != 4) fail(bw + ".entries", "expected (row, col, ordinal, coefficient)");
      block.entries.push_back({as_int(q[2], bw) - 1, as_int(q[0], bw), as_int(q[1], bw), as_double(q[3], bw)});
    }
    inst.blocks.push_back(std::move(block));
  }
  inst.check();
  return inst;
}

void write_trace(std::ostream& out, const std::vector<sdp::IterationRecord>& history) {
  for (const auto& h : history) {
    out << fmt::format("{:4d} {:+.10e} {:+.10e} {:.2e} {:.2e} {:.2e} {:.2e} {:.3f} {:.3f}\n", h.iter, h.primal_objective,
                       h.dual_objective, h.relative_gap, h.primal_residual, h.dual_residual, h.mu, h.step_primal,
                       h.step_dual);
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("{}: malformed JSON ({})", path, e.what()));
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write {}", path));
  out << text;
}

}  // namespace momentsdp::io
