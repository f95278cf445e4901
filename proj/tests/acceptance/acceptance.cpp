// Acceptance runs. Prints one PASS/FAIL line per criterion, with detail
// lines above it. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "momentsdp/entangle.hpp"
#include "momentsdp/lasserre.hpp"
#include "momentsdp/polycore.hpp"
#include "momentsdp/quantum.hpp"
#include "momentsdp/sdp.hpp"

using namespace momentsdp;
using entangle::Task;
using entangle::TaskKind;
using quantum::CMatrix;
using quantum::CVector;
using quantum::StateVector;
using quantum::SubsystemLayout;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects sub-check results for one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    std::printf("    %s %s\n", ok ? "ok  " : "FAIL", what.c_str());
    std::fflush(stdout);
    ok_ = ok_ && ok;
  }
  bool ok() const { return ok_; }

 private:
  bool ok_ = true;
};

lasserre::HierarchyResult solve_at(const lasserre::PolyProblem& p, int h) {
  lasserre::HierarchyOptions o;
  o.h_start = h;
  o.h_max = h;
  return lasserre::run_hierarchy(p, o);
}

Task geo_task(const StateVector& s, std::vector<int> groups = {}) {
  Task t;
  t.kind = TaskKind::geomeasure;
  t.state = s;
  t.layout = s.layout();
  t.groups = std::move(groups);
  return t;
}

entangle::OracleOptions restarts(int n) {
  entangle::OracleOptions o;
  o.restarts = n;
  o.seed = 7;
  return o;
}

std::int64_t binomial(int n, int k) {
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// ---------------------------------------------------------------- 1

bool criterion_sizes() {
  Checks c;
  // Independent count: monomials of degree <= r in t variables = C(t + r, r).
  struct Case {
    const char* name;
    lasserre::PolyProblem problem;
    std::int64_t y_free;
    int block;
  };
  const std::vector<Case> cases = {
      {"3-qubit product state (t=9)", entangle::encode_geometric_measure(entangle::states::w()), 714, 55},
      {"4-qubit product state (t=12)", entangle::encode_geometric_measure(entangle::states::psi4(0.5)), 1819, 91},
  };
  for (const auto& k : cases) {
    const int t = k.problem.num_vars();
    const auto rel = lasserre::build_relaxation(k.problem, 2);
    const std::int64_t y_free = rel.y_dim - 1;
    const auto block = rel.moment_block.rows();
    c.expect(y_free == k.y_free && y_free == binomial(t + 4, 4) - 1,
             fmt::format("{}: free y dimension {} (expected {})", k.name, y_free, k.y_free));
    c.expect(block == k.block && block == binomial(t + 2, 2),
             fmt::format("{}: moment block {}x{} (expected {})", k.name, block, block, k.block));
  }
  return c.ok();
}

// ---------------------------------------------------------------- 2

bool criterion_psi4() {
  Checks c;
  for (const auto& [p, expected] : std::vector<std::pair<double, double>>{{1.0, 0.5}, {0.0, 0.25}}) {
    const auto t0 = Clock::now();
    const auto r = solve_at(entangle::encode_geometric_measure(entangle::states::psi4(p)), 2);
    const double secs = seconds_since(t0);
    if (!r.final_bound) {
      c.expect(false, fmt::format("p={}: no bound ({})", p, r.message));
      continue;
    }
    const double lambda_sq = -*r.final_bound;
    c.expect(std::abs(lambda_sq - expected) <= 1e-5,
             fmt::format("p={}: lambda^2 = {:.9f} (expected {}), E = {:.9f}", p, lambda_sq, expected, 1 - lambda_sq));
    c.expect(r.certified_optimal, fmt::format("p={}: flatness certificate at order 2", p));
    c.expect(secs <= 600.0, fmt::format("p={}: {:.1f} s (limit 600 s)", p, secs));
  }
  return c.ok();
}

// ---------------------------------------------------------------- 3

bool criterion_three_qubit() {
  Checks c;
  std::vector<std::pair<std::string, StateVector>> states = {{"W", entangle::states::w()},
                                                             {"GHZ", entangle::states::ghz()}};
  for (int i = 0; i <= 10; ++i) {
    const double s = i / 10.0;
    states.emplace_back(fmt::format("s={:.1f}", s), entangle::states::w_superposition(s));
  }
  for (const auto& [name, state] : states) {
    const auto t0 = Clock::now();
    const Task task = geo_task(state);
    const auto r = solve_at(entangle::encode(task), 2);
    const auto oracle = entangle::oracle_upper_bound(task, restarts(10000));
    const double secs = seconds_since(t0);
    if (!r.final_bound) {
      c.expect(false, fmt::format("{}: no bound ({})", name, r.message));
      continue;
    }
    const double diff = std::abs(*r.final_bound - oracle.value);
    c.expect(diff <= 1e-5 && r.certified_optimal && secs <= 60.0,
             fmt::format("{}: E = {:.9f}, oracle E = {:.9f}, |diff| = {:.1e}, certified = {}, {:.2f} s", name,
                         1 + *r.final_bound, 1 + oracle.value, diff, r.certified_optimal, secs));
  }
  return c.ok();
}

// ---------------------------------------------------------------- 4

bool criterion_witness_curve() {
  Checks c;
  const SubsystemLayout layout = SubsystemLayout::qubits(3);
  for (int i = 1; i <= 9; ++i) {
    const double cc = i / 10.0;
    const double a = 1.0 / cc;
    const CMatrix rho = entangle::states::bound_entangled(a, a, cc);
    const auto ew = entangle::build_edge_witness(rho, layout);
    Task t;
    t.kind = TaskKind::witness;
    t.layout = layout;
    t.op = ew.prewitness;
    const double oracle = entangle::oracle_upper_bound(t, restarts(10000)).value;
    // Independent expectation tr[W' rho].
    const CMatrix w = ew.prewitness - ew.epsilon * CMatrix::Identity(8, 8);
    const double expectation = (w * rho).trace().real();
    const bool ok = ew.hierarchy.final_bound && ew.epsilon > 0 && std::abs(ew.epsilon - oracle) <= 1e-5 &&
                    expectation < 0;
    c.expect(ok, fmt::format("c={:.1f}: eps = {:.9f}, oracle = {:.9f}, tr[W'rho] = {:.3e}, ppt = {}", cc, ew.epsilon,
                             oracle, expectation, ew.ppt));
  }
  return c.ok();
}

// ---------------------------------------------------------------- 5

// Degree-k exponent vectors in decreasing lexicographic order.
void enumerate_degree(int t, int k, std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == t - 1) {
    prefix.push_back(k);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int e = k; e >= 0; --e) {
    prefix.push_back(e);
    enumerate_degree(t, k - e, prefix, out);
    prefix.pop_back();
  }
}

void check_rank_unrank(Checks& c) {
  bool ok = true;
  std::int64_t checked = 0;
  for (const auto& [t, r] : std::vector<std::pair<int, int>>{{1, 6}, {2, 5}, {3, 4}, {5, 4}, {9, 4}, {12, 4}}) {
    std::vector<std::vector<int>> expected;
    for (int k = 0; k <= r; ++k) {
      std::vector<int> prefix;
      enumerate_degree(t, k, prefix, expected);
    }
    const std::int64_t n = basis_size(t, r);
    ok = ok && n == static_cast<std::int64_t>(expected.size()) && n == binomial(t + r, r);
    for (std::int64_t i = 1; i <= n && ok; ++i) {
      const MultiIndex a = unrank(i, t, r);
      ok = a.exponents() == expected[static_cast<std::size_t>(i - 1)] && rank(a, r) == i;
      ++checked;
    }
  }
  c.expect(ok, fmt::format("rank/unrank bijection against brute-force enumeration ({} positions)", checked));
}

Eigen::MatrixXd eval_ordinals(const lasserre::OrdinalMatrix& m, const std::vector<double>& y) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = y[static_cast<std::size_t>(m(i, j) - 1)];
  }
  return out;
}

double min_eig(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

void check_blocks_psd(Checks& c, std::mt19937_64& rng) {
  struct Sampled {
    std::string name;
    lasserre::PolyProblem problem;
    int order;
    std::function<std::vector<double>()> sample;
  };
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Sampled> cases;
  {
    lasserre::PolyProblem p;
    const int t = 2;
    p.objective = Polynomial::variable(t, 0) * Polynomial::variable(t, 1);
    for (int i = 0; i < t; ++i) {
      p.add_inequality(Polynomial::constant(t, 1.0) - Polynomial::variable(t, i) * Polynomial::variable(t, i));
    }
    cases.push_back({"box [-1,1]^2", p, 2, [&] { return std::vector<double>{unif(rng), unif(rng)}; }});
  }
  {
    lasserre::PolyProblem p;
    p.objective = Polynomial::variable(2, 0);
    p.add_equality(Polynomial::constant(2, 2.0) - Polynomial::variable(2, 0) * Polynomial::variable(2, 0) -
                   Polynomial::variable(2, 1) * Polynomial::variable(2, 1));
    p.ball_radius_sq = 3.0;
    cases.push_back({"circle radius sqrt 2", p, 3, [&] {
                       const double th = M_PI * unif(rng);
                       return std::vector<double>{std::sqrt(2.0) * std::cos(th), std::sqrt(2.0) * std::sin(th)};
                     }});
  }
  cases.push_back({"3-qubit product states", entangle::encode_geometric_measure(entangle::states::w()), 2, [&] {
                     std::vector<double> x;
                     for (int j = 0; j < 3; ++j) {
                       const auto b = quantum::bloch_coordinates(quantum::random_state(2, rng));
                       x.insert(x.end(), b.begin(), b.end());
                     }
                     return x;
                   }});
  {
    std::vector<CMatrix> kraus;
    for (int k = 0; k < 3; ++k) {
      CMatrix m = CMatrix::Zero(3, 3);
      m(k, k) = 1.0;
      kraus.push_back(m);
    }
    cases.push_back({"pure qutrit inputs", entangle::encode_output_purity(kraus, SubsystemLayout({3})), 2,
                     [&] { return quantum::bloch_coordinates(quantum::random_state(3, rng)); }});
  }
  for (const auto& k : cases) {
    const auto rel = lasserre::build_relaxation(k.problem, k.order);
    double worst = 0.0, worst_eq = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = k.sample();
      const auto y = lasserre::moment_vector(x, k.order);
      const Eigen::MatrixXd m = eval_ordinals(rel.moment_block, y);
      worst = std::min(worst, min_eig(m) / std::max(1.0, m.norm()));
      for (const auto& loc : rel.localizing) {
        const Eigen::MatrixXd l = loc.block.evaluate(y);
        if (loc.kind == lasserre::ConstraintKind::equality) {
          worst_eq = std::max(worst_eq, l.cwiseAbs().maxCoeff());
        } else {
          worst = std::min(worst, min_eig(l) / std::max(1.0, l.norm()));
        }
      }
    }
    c.expect(worst >= -1e-10 && worst_eq <= 1e-9,
             fmt::format("{} (order {}): 100 feasible points, min scaled eigenvalue {:.1e}, equality block max {:.1e}",
                         k.name, k.order, worst, worst_eq));
  }
}

void check_monotone(Checks& c) {
  std::vector<std::pair<std::string, lasserre::PolyProblem>> cases;
  {
    const int t = 3;
    lasserre::PolyProblem p;
    p.objective = Polynomial::variable(t, 0) * Polynomial::variable(t, 1) * Polynomial::variable(t, 2);
    Polynomial g = Polynomial::constant(t, 1.0);
    for (int i = 0; i < t; ++i) g -= Polynomial::variable(t, i) * Polynomial::variable(t, i);
    p.add_equality(g);
    p.ball_radius_sq = 1.0;
    cases.emplace_back("x1 x2 x3 on the sphere", p);
  }
  {
    const int t = 2;
    const Polynomial x = Polynomial::variable(t, 0), y = Polynomial::variable(t, 1);
    lasserre::PolyProblem p;
    p.objective = x * x * y * y - x * y + Polynomial::constant(t, 0.1) * x;
    p.add_inequality(Polynomial::constant(t, 1.0) - x * x);
    p.add_inequality(Polynomial::constant(t, 1.0) - y * y);
    cases.emplace_back("quartic on the box", p);
  }
  cases.emplace_back("W geometric measure", entangle::encode_geometric_measure(entangle::states::w()));
  for (const auto& [name, p] : cases) {
    const int h0 = lasserre::min_order(p);
    std::vector<double> bounds;
    bool ok = true;
    for (int h = h0; h <= h0 + 1; ++h) {
      const auto r = solve_at(p, h);
      ok = ok && r.final_bound.has_value();
      bounds.push_back(r.final_bound.value_or(NAN));
    }
    ok = ok && bounds[0] <= bounds[1] + 1e-7;
    c.expect(ok, fmt::format("{}: bounds {:.9f} <= {:.9f} at orders {}, {}", name, bounds[0], bounds[1], h0, h0 + 1));
  }
}

void check_sandwich(Checks& c, std::mt19937_64& rng) {
  const SubsystemLayout two = SubsystemLayout::qubits(2);
  std::vector<std::pair<std::string, Task>> tasks;
  tasks.emplace_back("geomeasure 3 qubits", geo_task(StateVector(SubsystemLayout::qubits(3), quantum::random_state(8, rng))));
  tasks.emplace_back("geomeasure 2x3", geo_task(StateVector(SubsystemLayout({2, 3}), quantum::random_state(6, rng))));
  CMatrix h = CMatrix::Random(4, 4);
  h = (h + h.adjoint()).eval();
  Task wit;
  wit.kind = TaskKind::witness;
  wit.layout = two;
  wit.op = h;
  tasks.emplace_back("witness", wit);
  Task var = wit;
  var.kind = TaskKind::variance;
  tasks.emplace_back("variance", var);
  CMatrix rho = CMatrix::Zero(4, 4);
  {
    const CVector v = quantum::random_state(4, rng);
    rho = 0.7 * v * v.adjoint() + 0.3 * CMatrix::Identity(4, 4) / 4.0;
  }
  Task hs;
  hs.kind = TaskKind::hsdist;
  hs.layout = two;
  hs.op = rho;
  tasks.emplace_back("hs distance n=1", hs);
  Task pur;
  pur.kind = TaskKind::purity;
  pur.layout = SubsystemLayout({2});
  {
    // Kraus operators from a random isometry 2 -> 2x3.
    const CMatrix u = quantum::random_unitary(6, rng);
    for (int k = 0; k < 3; ++k) pur.kraus.push_back(u.block(2 * k, 0, 2, 2));
  }
  tasks.emplace_back("output purity", pur);
  for (const auto& [name, t] : tasks) {
    const auto p = entangle::encode(t);
    const double oracle = entangle::oracle_upper_bound(t, restarts(1000)).value;
    const int h0 = lasserre::min_order(p);
    const int h1 = p.num_vars() <= 9 ? h0 + 1 : h0;
    for (int h = h0; h <= h1; ++h) {
      const auto r = solve_at(p, h);
      const bool ok = r.final_bound && *r.final_bound <= oracle + 1e-7;
      c.expect(ok, fmt::format("{} order {}: bound {:.9f} <= oracle {:.9f}", name, h, r.final_bound.value_or(NAN), oracle));
    }
  }
}

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ();
}

void check_planted(Checks& c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.5, 2.0);
  int recovered = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 3 + trial % 6;
    const std::vector<int> dims = trial % 2 ? std::vector<int>{3 + trial % 4, 2} : std::vector<int>{4 + trial % 3};
    sdp::SdpInstance inst;
    inst.num_vars = m;
    std::vector<double> y_star(static_cast<std::size_t>(m));
    for (auto& v : y_star) v = g(rng);
    std::vector<double> cost(static_cast<std::size_t>(m), 0.0);
    for (int d : dims) {
      // S* and Z* share an eigenbasis with complementary supports.
      const Eigen::MatrixXd q = random_orthogonal(rng, d);
      Eigen::VectorXd sd = Eigen::VectorXd::Zero(d), zd = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < d; ++i) (i <= d / 2 ? sd(i) : zd(i)) = u(rng);
      const Eigen::MatrixXd s_star = q * sd.asDiagonal() * q.transpose();
      const Eigen::MatrixXd z_star = q * zd.asDiagonal() * q.transpose();
      sdp::LmiBlock block;
      block.dim = d;
      Eigen::MatrixXd h0 = s_star;
      for (int s = 0; s < m; ++s) {
        Eigen::MatrixXd hs(d, d);
        for (int i = 0; i < d; ++i) {
          for (int j = i; j < d; ++j) hs(i, j) = hs(j, i) = g(rng);
        }
        for (int i = 0; i < d; ++i) {
          for (int j = i; j < d; ++j) block.entries.push_back({s, i, j, hs(i, j)});
        }
        h0 -= y_star[static_cast<std::size_t>(s)] * hs;
        cost[static_cast<std::size_t>(s)] += hs.cwiseProduct(z_star).sum();
      }
      for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) block.entries.push_back({sdp::BlockEntry::kConstant, i, j, h0(i, j)});
      }
      inst.blocks.push_back(std::move(block));
    }
    inst.objective = cost;
    double optimum = 0.0;
    for (int s = 0; s < m; ++s) optimum += cost[static_cast<std::size_t>(s)] * y_star[static_cast<std::size_t>(s)];
    const auto r = sdp::solve(inst);
    const double scale = 1.0 + std::abs(optimum);
    const double err = std::max(std::abs(r.gap), std::abs(r.primal_objective - optimum)) / scale;
    worst = std::max(worst, err);
    if (r.status == sdp::Status::optimal && err <= 1e-7) ++recovered;
  }
  c.expect(recovered == 50, fmt::format("planted SDPs recovered: {}/50, worst scaled error {:.1e}", recovered, worst));
}

void check_local_unitary(Checks& c, std::mt19937_64& rng) {
  const SubsystemLayout layout = SubsystemLayout::qubits(3);
  double worst = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 3; ++trial) {
    const CVector psi = quantum::random_state(8, rng);
    const CMatrix u = quantum::kron({quantum::random_unitary(2, rng), quantum::random_unitary(2, rng),
                                     quantum::random_unitary(2, rng)});
    const auto a = solve_at(entangle::encode_geometric_measure(StateVector(layout, psi)), 2);
    const auto b = solve_at(entangle::encode_geometric_measure(StateVector::normalized(layout, u * psi)), 2);
    ok = ok && a.final_bound && b.final_bound;
    if (ok) worst = std::max(worst, std::abs(*a.final_bound - *b.final_bound));
  }
  c.expect(ok && worst < 1e-6, fmt::format("local-unitary invariance of E, 3 random 3-qubit states: max diff {:.1e}", worst));
}

void check_finer_witness(Checks& c) {
  const SubsystemLayout layout = SubsystemLayout::qubits(3);
  const auto ew = entangle::build_edge_witness(entangle::states::bound_entangled(2.0, 2.0, 0.5), layout);
  const auto r = lasserre::run_hierarchy(entangle::encode_witness_min(ew.witness, layout));
  const double eps2 = r.final_bound.value_or(NAN);
  c.expect(r.final_bound && std::abs(eps2) <= 1e-6,
           fmt::format("finer witness re-minimized: eps' = {:.1e} (first eps = {:.6f})", eps2, ew.epsilon));
}

void check_hs_cases(Checks& c) {
  const SubsystemLayout two = SubsystemLayout::qubits(2);
  const CVector prod = quantum::kron(CMatrix(CVector::Unit(2, 0)), CMatrix((CVector::Unit(2, 0) + CVector::Unit(2, 1)).normalized()));
  CMatrix phi = CMatrix::Zero(4, 4);
  phi(0, 0) = phi(0, 3) = phi(3, 0) = phi(3, 3) = 0.5;
  const auto a = lasserre::run_hierarchy(entangle::encode_hs_distance(prod * prod.adjoint(), two, 1));
  const auto b = lasserre::run_hierarchy(entangle::encode_hs_distance(phi, two, 1));
  const double da = a.final_bound.value_or(NAN), db = b.final_bound.value_or(NAN);
  c.expect(std::abs(da) <= 1e-6 && std::abs(db - 1.0) <= 1e-6,
           fmt::format("HS distance: product state {:.1e} (expected 0), Bell state {:.9f} (expected 1)", da, db));
}

void check_depolarizing(Checks& c) {
  const double lambda = 0.5;
  const CMatrix x = (CMatrix(2, 2) << 0, 1, 1, 0).finished();
  const CMatrix y = (CMatrix(2, 2) << 0, quantum::Complex(0, -1), quantum::Complex(0, 1), 0).finished();
  const CMatrix z = (CMatrix(2, 2) << 1, 0, 0, -1).finished();
  std::vector<CMatrix> kraus = {std::sqrt(lambda + (1 - lambda) / 4) * CMatrix::Identity(2, 2)};
  for (const CMatrix* p : {&x, &y, &z}) kraus.push_back(std::sqrt((1 - lambda) / 4) * *p);
  const auto r = lasserre::run_hierarchy(entangle::encode_output_purity(kraus, SubsystemLayout({2})));
  const double nu_sq = -r.final_bound.value_or(NAN);
  c.expect(std::abs(nu_sq - 0.625) <= 1e-7, fmt::format("depolarizing output purity nu^2 = {:.10f} (expected 0.625)", nu_sq));
}

bool criterion_properties() {
  Checks c;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240611);
  check_rank_unrank(c);
  check_blocks_psd(c, rng);
  check_monotone(c);
  check_sandwich(c, rng);
  check_planted(c, rng);
  check_local_unitary(c, rng);
  check_finer_witness(c);
  check_hs_cases(c);
  check_depolarizing(c);
  const double secs = seconds_since(t0);
  c.expect(secs < 300.0, fmt::format("property suite time {:.1f} s (limit 300 s)", secs));
  return c.ok();
}

// ---------------------------------------------------------------- 6

// tr[Z H0'] and max |tr[Z H_f']| over the free directions left after the
// linear equalities, recomputed from the dense block coefficients.
std::pair<double, double> recompute_certificate(const sdp::SdpInstance& inst, const std::vector<Eigen::MatrixXd>& z) {
  const sdp::Reduction red = sdp::reduce(inst);
  double h0 = 0.0;
  std::vector<double> hf(red.free_vars.size(), 0.0);
  for (std::size_t b = 0; b < inst.blocks.size(); ++b) {
    h0 += z[b].cwiseProduct(inst.block_coefficient(b, sdp::BlockEntry::kConstant)).sum();
    for (int s = 0; s < inst.num_vars; ++s) {
      const Eigen::MatrixXd hs = inst.block_coefficient(b, s);
      const double tr = z[b].cwiseProduct(hs).sum();
      if (tr == 0.0) continue;
      h0 += red.base[static_cast<std::size_t>(s)] * tr;
      for (const auto& [f, coef] : red.expr[static_cast<std::size_t>(s)]) hf[static_cast<std::size_t>(f)] += coef * tr;
    }
  }
  double worst = 0.0;
  for (double v : hf) worst = std::max(worst, std::abs(v));
  return {h0, worst};
}

bool criterion_infeasibility() {
  Checks c;
  std::vector<std::tuple<std::string, lasserre::PolyProblem, int>> cases;
  {
    // x^2 >= 1 and x^2 <= 1/4.
    const Polynomial x = Polynomial::variable(1, 0);
    lasserre::PolyProblem p;
    p.objective = Polynomial(1);
    p.add_inequality(x * x - Polynomial::constant(1, 1.0));
    p.add_inequality(Polynomial::constant(1, 0.25) - x * x);
    cases.emplace_back("x^2 >= 1 and x^2 <= 1/4", p, 1);
  }
  {
    // A product state within squared distance 1/2 of a Bell state; the true
    // minimum is 1.
    CMatrix phi = CMatrix::Zero(4, 4);
    phi(0, 0) = phi(0, 3) = phi(3, 0) = phi(3, 3) = 0.5;
    lasserre::PolyProblem p = entangle::encode_hs_distance(phi, SubsystemLayout::qubits(2), 1);
    const int t = p.num_vars();
    const Polynomial epi = p.objective;
    p.objective = Polynomial(t);
    p.add_inequality(Polynomial::constant(t, 0.5) - epi, "distance <= 1/2");
    cases.emplace_back("Bell state within HS distance^2 1/2 of a product state", p, 1);
  }
  for (const auto& [name, p, h] : cases) {
    const auto r = solve_at(p, h);
    if (!r.infeasible || !r.certificate) {
      c.expect(false, fmt::format("{}: expected primal_infeasible with a certificate ({})", name, r.message));
      continue;
    }
    const auto inst = lasserre::assemble(p, h);
    const auto [tr_h0, tr_hs] = recompute_certificate(inst, r.certificate->z);
    double min_ev = 0.0;
    for (const auto& z : r.certificate->z) min_ev = std::min(min_ev, min_eig(z));
    c.expect(tr_h0 < 0 && tr_hs <= 1e-7 && min_ev >= -1e-9,
             fmt::format("{}: tr[Z H0] = {:.3e}, max |tr[Z Hs]| = {:.1e}, min eig Z = {:.1e}", name, tr_h0, tr_hs, min_ev));
  }
  return c.ok();
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    bool (*run)();
  };
  const std::vector<Criterion> all = {
      {1, "relaxation sizes", criterion_sizes},
      {2, "4-qubit endpoints at order 2", criterion_psi4},
      {3, "3-qubit values vs oracle", criterion_three_qubit},
      {4, "edge witness epsilon curve", criterion_witness_curve},
      {5, "property suite", criterion_properties},
      {6, "infeasibility certificate", criterion_infeasibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& k : all) {
    if (!selected.empty() && !selected.count(k.id)) continue;
    std::printf("criterion %d (%s)\n", k.id, k.name);
    std::fflush(stdout);
    const auto t0 = Clock::now();
    bool ok = false;
    try {
      ok = k.run();
    } catch (const std::exception& e) {
      std::printf("    FAIL exception: %s\n", e.what());
    }
    std::printf("criterion %d: %s (%s, %.1f s)\n", k.id, ok ? "PASS" : "FAIL", k.name, seconds_since(t0));
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
