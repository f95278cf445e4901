#include "momentsdp/entangle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "momentsdp/error.hpp"
#include "momentsdp/log.hpp"

namespace momentsdp::entangle {

using lasserre::PolyProblem;
using quantum::BlochVariables;
using quantum::Complex;

namespace {

void check_square(const CMatrix& m, const SubsystemLayout& layout, const char* what) {
  if (m.rows() != m.cols() || m.rows() != layout.total_dim()) {
    throw InputError(fmt::format("{} is {}x{}, layout dimension is {}", what, m.rows(), m.cols(), layout.total_dim()));
  }
}

void check_hermitian(const CMatrix& m, const SubsystemLayout& layout, const char* what) {
  check_square(m, layout, what);
  const double tol = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) throw InputError(fmt::format("{} is not Hermitian", what));
}

double group_ball(const BlochVariables& vars) {
  double r = 0.0;
  std::vector<char> seen(vars.layout.dims.size(), 0);
  for (int j = 0; j < vars.layout.parties(); ++j) {
    const int g = vars.group[static_cast<std::size_t>(j)];
    if (seen[static_cast<std::size_t>(g)]) continue;
    seen[static_cast<std::size_t>(g)] = 1;
    r += vars.layout.dims[static_cast<std::size_t>(j)] - 1.0;
  }
  return r;
}

PolyProblem product_problem(Polynomial objective, const BlochVariables& vars) {
  PolyProblem p;
  p.objective = std::move(objective);
  const auto purity = quantum::bloch_purity(vars);
  for (std::size_t k = 0; k < purity.size(); ++k) p.add_equality(purity[k], fmt::format("purity[{}]", k));
  p.ball_radius_sq = group_ball(vars);
  return p;
}

double clamp_flag(double v, double lo, double hi, bool& clamped) {
  if (v < lo) {
    clamped = true;
    return lo;
  }
  if (v > hi) {
    clamped = true;
    return hi;
  }
  return v;
}

}  // namespace

PolyProblem encode_geometric_measure(const StateVector& state, const std::vector<int>& groups) {
  const auto vars = quantum::bloch_variables(state.layout(), groups);
  const CMatrix rho = state.amplitudes() * state.amplitudes().adjoint();
  return product_problem(-quantum::product_expectation(rho, vars), vars);
}

GeometricMeasure decode_geometric_measure(double bound) {
  GeometricMeasure g;
  g.lambda_sq = clamp_flag(-bound, 0.0, 1.0, g.clamped);
  g.entanglement = 1.0 - g.lambda_sq;
  return g;
}

PolyProblem encode_witness_min(const CMatrix& w, const SubsystemLayout& layout, const std::vector<int>& groups) {
  check_hermitian(w, layout, "witness");
  const auto vars = quantum::bloch_variables(layout, groups);
  return product_problem(quantum::product_expectation(w, vars), vars);
}

WitnessShift decode_witness(const CMatrix& w, double bound) {
  WitnessShift s;
  s.epsilon = bound;
  s.finer_witness = w - bound * CMatrix::Identity(w.rows(), w.cols());
  return s;
}

EdgeWitness build_edge_witness(const CMatrix& rho, const SubsystemLayout& layout, std::vector<int> parties,
                               double rank_tol, const lasserre::HierarchyOptions& options, double threshold) {
  check_hermitian(rho, layout, "state");
  if (parties.empty()) {
    for (int j = 0; j < layout.parties(); ++j) parties.push_back(j);
  }
  EdgeWitness out;
  out.parties = parties;
  const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
  if (quantum::min_eigenvalue(rho) < -1e-10 * scale) log::warn("edge witness: state is not positive semidefinite");
  out.kernel = quantum::kernel_projector(rho, rank_tol);
  out.prewitness = out.kernel;
  for (int j : parties) {
    const CMatrix pt = quantum::partial_transpose(rho, layout, j);
    if (quantum::min_eigenvalue(pt) < -1e-10 * scale) {
      out.ppt = false;
      log::warn("edge witness: partial transpose on party {} is not positive", j + 1);
    }
    out.prewitness += quantum::partial_transpose(quantum::kernel_projector(pt, rank_tol), layout, j);
  }
  out.hierarchy = lasserre::run_hierarchy(encode_witness_min(out.prewitness, layout), options);
  if (!out.hierarchy.final_bound) {
    out.message = out.hierarchy.message.empty() ? "no bound" : out.hierarchy.message;
    out.witness = out.prewitness;
    return out;
  }
  out.epsilon = *out.hierarchy.final_bound;
  out.witness = out.prewitness - out.epsilon * CMatrix::Identity(rho.rows(), rho.cols());
  out.expectation = (out.witness.transpose().cwiseProduct(rho)).sum().real();
  out.detected = out.epsilon > threshold && out.expectation < 0.0;
  if (!out.detected) out.message = "state not detected (not an edge state at this tolerance)";
  return out;
}

HsLayout hs_layout(const SubsystemLayout& layout, int terms) {
  if (terms < 1) throw InputError("hs distance needs at least one term");
  HsLayout h;
  h.terms = terms;
  h.per_term = static_cast<int>(layout.basis_count() - 1);
  h.trace_offset = terms * h.per_term;
  h.epigraph = h.trace_offset + terms - 1;
  h.num_vars = h.epigraph + 1;
  if (h.num_vars > kMaxVariables) {
    throw InputError(fmt::format("hs distance with {} terms needs {} variables, limit is {}", terms, h.num_vars,
                                 kMaxVariables));
  }
  return h;
}

PolyProblem encode_hs_distance(const CMatrix& rho, const SubsystemLayout& layout, int terms) {
  check_hermitian(rho, layout, "state");
  if (std::abs(rho.trace().real() - 1.0) > 1e-10) throw InputError("state must have unit trace");
  const HsLayout h = hs_layout(layout, terms);
  for (int d : layout.dims) {
    if (d > 2) {
      log::warn("hs distance on a qudit layout: degree-3 purity conditions force order >= 2");
      break;
    }
  }
  const int t = h.num_vars;
  std::vector<Polynomial> traces;
  Polynomial last = Polynomial::constant(t, 1.0);
  for (int i = 0; i + 1 < terms; ++i) {
    traces.push_back(Polynomial::variable(t, h.trace_offset + i));
    last -= traces.back();
  }
  traces.push_back(last);

  PolyProblem p;
  p.objective = Polynomial::variable(t, h.epigraph);
  for (int i = 0; i < terms; ++i) {
    const quantum::TensorTerm term{i * h.per_term, traces[static_cast<std::size_t>(i)]};
    const auto purity = quantum::full_tensor_purity(layout, term, t);
    for (std::size_t k = 0; k < purity.size(); ++k) p.add_equality(purity[k], fmt::format("term{}.purity[{}]", i + 1, k));
    if (terms > 1) p.add_inequality(traces[static_cast<std::size_t>(i)], fmt::format("term{}.trace", i + 1));
  }
  // tr(rho - P)^2 = (prod xi) sum_kappa (r_kappa - P_kappa)^2; the kappa = 0
  // entries cancel because both traces are 1.
  const auto r = quantum::expand(rho, layout);
  double xi = 1.0;
  for (int d : layout.dims) xi *= quantum::operator_basis(d).xi;
  Polynomial dist(t);
  for (int k = 1; k <= h.per_term; ++k) {
    Polynomial diff = Polynomial::constant(t, r[static_cast<std::size_t>(k)]);
    for (int i = 0; i < terms; ++i) diff -= Polynomial::variable(t, i * h.per_term + k - 1);
    dist += xi * (diff * diff);
  }
  p.add_inequality(Polynomial::variable(t, h.epigraph) - dist, "epigraph");
  p.ball_radius_sq = layout.total_dim() + 16.0;
  return p;
}

HsDistance decode_hs_distance(double bound, double threshold) {
  HsDistance d;
  d.distance_sq = clamp_flag(bound, 0.0, std::numeric_limits<double>::infinity(), d.clamped);
  d.entangled = bound > threshold;
  return d;
}

PolyProblem encode_variance_min(const CMatrix& m, const SubsystemLayout& layout, const std::vector<int>& groups) {
  check_hermitian(m, layout, "observable");
  const auto vars = quantum::bloch_variables(layout, groups);
  const Polynomial mean = quantum::product_expectation(m, vars);
  const CMatrix m2 = m * m;
  return product_problem((quantum::product_expectation(m2, vars) - mean * mean).pruned(1e-14), vars);
}

VarianceBound decode_variance(double bound) {
  VarianceBound v;
  v.variance = clamp_flag(bound, 0.0, std::numeric_limits<double>::infinity(), v.clamped);
  return v;
}

void check_kraus(const std::vector<CMatrix>& kraus, double tol) {
  if (kraus.empty()) throw InputError("empty Kraus set");
  const auto in = kraus.front().cols(), out = kraus.front().rows();
  CMatrix sum = CMatrix::Zero(in, in);
  for (const auto& r : kraus) {
    if (r.cols() != in || r.rows() != out) throw InputError("Kraus operators have different shapes");
    sum += r.adjoint() * r;
  }
  const double dev = (sum - CMatrix::Identity(in, in)).cwiseAbs().maxCoeff();
  if (dev > tol) throw InputError(fmt::format("Kraus set is not trace preserving (deviation {:.3g})", dev));
}

PolyProblem encode_output_purity(const std::vector<CMatrix>& kraus, const SubsystemLayout& layout) {
  check_kraus(kraus);
  const int d = layout.total_dim();
  if (kraus.front().cols() != d) throw InputError("Kraus input dimension does not match layout");
  const auto& basis = quantum::operator_basis(d);
  const int n = d * d;
  std::vector<CMatrix> images;
  for (const auto& s : basis.elements) {
    CMatrix e = CMatrix::Zero(kraus.front().rows(), kraus.front().rows());
    for (const auto& r : kraus) e += r * s * r.adjoint();
    images.push_back(std::move(e));
  }
  const int t = n - 1;
  auto coord = [&](int k) { return k == 0 ? Polynomial::constant(t, 1.0) : Polynomial::variable(t, k - 1); };
  Polynomial f(t);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const double g = (images[static_cast<std::size_t>(a)].transpose().cwiseProduct(images[static_cast<std::size_t>(b)]))
                           .sum()
                           .real();
      if (std::abs(g) < 1e-15) continue;
      f -= (a == b ? 1.0 : 2.0) * g * (coord(a) * coord(b));
    }
  }
  PolyProblem p;
  p.objective = f.pruned(1e-14);
  const auto purity = quantum::bloch_purity_block(t, 0, d);
  for (std::size_t k = 0; k < purity.size(); ++k) p.add_equality(purity[k], fmt::format("purity[{}]", k));
  p.ball_radius_sq = d - 1.0;
  return p;
}

OutputPurity decode_output_purity(double bound, int output_dim) {
  OutputPurity o;
  o.nu_sq = clamp_flag(-bound, 1.0 / output_dim, 1.0, o.clamped);
  o.nu = std::sqrt(o.nu_sq);
  return o;
}

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::geomeasure: return "geomeasure";
    case TaskKind::witness: return "witness";
    case TaskKind::hsdist: return "hsdist";
    case TaskKind::variance: return "variance";
    case TaskKind::purity: return "purity";
  }
  return "unknown";
}

TaskKind parse_task_kind(const std::string& name) {
  for (auto k : {TaskKind::geomeasure, TaskKind::witness, TaskKind::hsdist, TaskKind::variance, TaskKind::purity}) {
    if (to_string(k) == name) return k;
  }
  throw InputError(fmt::format("unknown task '{}'", name));
}

PolyProblem encode(const Task& task) {
  switch (task.kind) {
    case TaskKind::geomeasure:
      if (!task.state) throw InputError("geomeasure needs a state");
      return encode_geometric_measure(*task.state, task.groups);
    case TaskKind::witness: return encode_witness_min(task.op, task.layout, task.groups);
    case TaskKind::hsdist: return encode_hs_distance(task.op, task.layout, task.terms);
    case TaskKind::variance: return encode_variance_min(task.op, task.layout, task.groups);
    case TaskKind::purity: return encode_output_purity(task.kraus, task.layout);
  }
  throw InputError("unknown task");
}

Decoded decode(const Task& task, double bound, double threshold) {
  Decoded d;
  switch (task.kind) {
    case TaskKind::geomeasure: {
      const auto g = decode_geometric_measure(bound);
      d.values = {{"lambda_sq", g.lambda_sq}, {"entanglement", g.entanglement}};
      d.clamped = g.clamped;
      break;
    }
    case TaskKind::witness: d.values = {{"epsilon", bound}}; break;
    case TaskKind::hsdist: {
      const auto h = decode_hs_distance(bound, threshold);
      d.values = {{"distance_sq", h.distance_sq}, {"entangled", h.entangled ? 1.0 : 0.0}};
      d.clamped = h.clamped;
      break;
    }
    case TaskKind::variance: {
      const auto v = decode_variance(bound);
      d.values = {{"variance", v.variance}};
      d.clamped = v.clamped;
      break;
    }
    case TaskKind::purity: {
      const auto o = decode_output_purity(bound, static_cast<int>(task.kraus.at(0).rows()));
      d.values = {{"nu_sq", o.nu_sq}, {"nu", o.nu}};
      d.clamped = o.clamped;
      break;
    }
  }
  return d;
}

namespace states {

namespace {

CVector basis_ket(int dim, int index) {
  CVector v = CVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw InputError(fmt::format("{} must lie in [0, 1], got {}", name, v));
}

}  // namespace

StateVector w() {
  return StateVector::normalized(SubsystemLayout::qubits(3), basis_ket(8, 1) + basis_ket(8, 2) + basis_ket(8, 4));
}

StateVector w_tilde() {
  return StateVector::normalized(SubsystemLayout::qubits(3), basis_ket(8, 3) + basis_ket(8, 5) + basis_ket(8, 6));
}

StateVector w_superposition(double s) {
  check_unit(s, "s");
  return StateVector::normalized(SubsystemLayout::qubits(3),
                                 std::sqrt(s) * w().amplitudes() + std::sqrt(1.0 - s) * w_tilde().amplitudes());
}

StateVector ghz(int parties) {
  if (parties < 2) throw InputError("GHZ needs at least two parties");
  const int d = 1 << parties;
  return StateVector::normalized(SubsystemLayout::qubits(parties), basis_ket(d, 0) + basis_ket(d, d - 1));
}

StateVector ghz_prime() {
  return StateVector::normalized(SubsystemLayout::qubits(4), basis_ket(16, 0b0011) + basis_ket(16, 0b1100));
}

StateVector psi_plus() {
  return StateVector::normalized(SubsystemLayout::qubits(2), basis_ket(4, 1) + basis_ket(4, 2));
}

StateVector psi4(double p) {
  check_unit(p, "p");
  const CVector pp = quantum::kron(psi_plus().amplitudes(), psi_plus().amplitudes());
  return StateVector::normalized(SubsystemLayout::qubits(4),
                                 std::sqrt(p) * ghz_prime().amplitudes() - std::sqrt(1.0 - p) * pp);
}

std::vector<int> psi4_groups() { return {0, 1, 0, 1}; }

CMatrix bound_entangled(double a, double b, double c) {
  if (!(a > 0 && b > 0 && c > 0)) throw InputError("a, b, c must be positive");
  CMatrix rho = CMatrix::Zero(8, 8);
  const double diag[8] = {0.0, a, b, c, 1.0 / c, 1.0 / b, 1.0 / a, 0.0};
  for (int i = 0; i < 8; ++i) rho(i, i) = diag[i];
  const CVector g = ghz(3).amplitudes();
  rho += 2.0 * g * g.adjoint();
  return rho / (2.0 + a + b + c + 1.0 / a + 1.0 / b + 1.0 / c);
}

CMatrix bound_entangled_prewitness(double a, double b, double c) {
  if (!(a > 0 && b > 0 && c > 0)) throw InputError("a, b, c must be positive");
  CMatrix w = CMatrix::Zero(8, 8);
  w(0, 0) = w(7, 7) = 0.5;
  w(4, 4) = c * c / (1 + c * c);
  w(3, 3) = 1 / (1 + c * c);
  w(2, 2) = 1 / (1 + b * b);
  w(5, 5) = b * b / (1 + b * b);
  w(1, 1) = 1 / (1 + a * a);
  w(6, 6) = a * a / (1 + a * a);
  const double off = 0.5 + c / (1 + c * c) + b / (1 + b * b) + a / (1 + a * a);
  w(0, 7) = w(7, 0) = -off;
  return w;
}

}  // namespace states

}  // namespace momentsdp::entangle
