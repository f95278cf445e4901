#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "momentsdp/entangle.hpp"
#include "momentsdp/error.hpp"

using namespace momentsdp;
using namespace momentsdp::entangle;
using quantum::kron;

namespace {

lasserre::HierarchyResult relax(const lasserre::PolyProblem& p, int h = 0) {
  lasserre::HierarchyOptions o;
  o.h_start = h;
  o.h_max = h;
  return lasserre::run_hierarchy(p, o);
}

double bound(const lasserre::PolyProblem& p, int h = 0) {
  const auto r = relax(p, h);
  EXPECT_TRUE(r.final_bound.has_value()) << r.message;
  return r.final_bound.value_or(NAN);
}

Task geo_task(const StateVector& s, std::vector<int> groups = {}) {
  Task t;
  t.kind = TaskKind::geomeasure;
  t.layout = s.layout();
  t.state = s;
  t.groups = std::move(groups);
  return t;
}

Task op_task(TaskKind kind, const CMatrix& op, const SubsystemLayout& layout, int terms = 1) {
  Task t;
  t.kind = kind;
  t.layout = layout;
  t.op = op;
  t.terms = terms;
  return t;
}

OracleOptions restarts(int n, std::uint64_t seed = 1) {
  OracleOptions o;
  o.restarts = n;
  o.seed = seed;
  return o;
}

CMatrix pauli(char c) {
  CMatrix m = CMatrix::Zero(2, 2);
  switch (c) {
    case 'x': m(0, 1) = m(1, 0) = 1; break;
    case 'y': m(0, 1) = quantum::Complex(0, -1); m(1, 0) = quantum::Complex(0, 1); break;
    case 'z': m(0, 0) = 1; m(1, 1) = -1; break;
    default: m = CMatrix::Identity(2, 2);
  }
  return m;
}

CMatrix phi_plus() {
  CVector v = CVector::Zero(4);
  v(0) = v(3) = 1 / std::sqrt(2.0);
  return v * v.adjoint();
}

// Brute-force overlap of a two-qubit pure state with product states on a
// Bloch-sphere grid; an independent check of the Bell-state values.
double grid_overlap(const CVector& psi, int n) {
  double best = 0.0;
  auto qubit = [](double th, double ph) {
    CVector v(2);
    v << std::cos(th / 2), std::polar(1.0, ph) * std::sin(th / 2);
    return v;
  };
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b < 2 * n; ++b) {
      for (int c = 0; c <= n; ++c) {
        for (int d = 0; d < 2 * n; ++d) {
          const CVector p = kron(qubit(M_PI * a / n, M_PI * b / n), qubit(M_PI * c / n, M_PI * d / n));
          best = std::max(best, std::norm(p.dot(psi)));
        }
      }
    }
  }
  return best;
}

}  // namespace

TEST(States, Families) {
  EXPECT_NEAR(states::w().amplitudes()(1).real(), 1 / std::sqrt(3.0), 1e-15);
  EXPECT_TRUE(states::w_superposition(1.0).amplitudes().isApprox(states::w().amplitudes()));
  EXPECT_TRUE(states::w_superposition(0.0).amplitudes().isApprox(states::w_tilde().amplitudes()));
  EXPECT_TRUE(states::psi4(1.0).amplitudes().isApprox(states::ghz_prime().amplitudes()));
  const CVector pp = kron(states::psi_plus().amplitudes(), states::psi_plus().amplitudes());
  EXPECT_TRUE(states::psi4(0.0).amplitudes().isApprox(-pp));
  EXPECT_NEAR(states::psi4(0.3).amplitudes().norm(), 1.0, 1e-14);
  EXPECT_THROW(states::w_superposition(1.5), InputError);
  EXPECT_THROW(states::bound_entangled(0.0, 1, 1), InputError);
}

TEST(States, BoundEntangledFamilyIsPpt) {
  const SubsystemLayout three = SubsystemLayout::qubits(3);
  for (double c : {0.2, 0.5, 0.9}) {
    const CMatrix rho = states::bound_entangled(1 / c, 1 / c, c);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-14);
    EXPECT_GT(quantum::min_eigenvalue(rho), -1e-14);
    for (int j = 0; j < 3; ++j) EXPECT_GT(quantum::min_eigenvalue(quantum::partial_transpose(rho, three, j)), -1e-14);
    // The written-out prewitness is R + sum_j Q_j^{T_j}.
    CMatrix w = quantum::kernel_projector(rho);
    for (int j = 0; j < 3; ++j) {
      w += quantum::partial_transpose(quantum::kernel_projector(quantum::partial_transpose(rho, three, j)), three, j);
    }
    EXPECT_LT((w - states::bound_entangled_prewitness(1 / c, 1 / c, c)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GeometricMeasure, EncodingShape) {
  const auto p = encode_geometric_measure(states::ghz());
  EXPECT_EQ(p.num_vars(), 9);
  EXPECT_EQ(p.objective.degree(), 3);
  EXPECT_EQ(p.constraints.size(), 3u);
  EXPECT_EQ(lasserre::min_order(p), 2);
  ASSERT_TRUE(p.ball_radius_sq);
  EXPECT_DOUBLE_EQ(*p.ball_radius_sq, 3.0);
  EXPECT_EQ(encode_geometric_measure(states::psi4(0.5), states::psi4_groups()).num_vars(), 6);
}

TEST(GeometricMeasure, BellStateMatchesGrid) {
  const CVector psi = states::psi_plus().amplitudes();
  const double lambda = decode_geometric_measure(bound(encode_geometric_measure(states::psi_plus()))).lambda_sq;
  EXPECT_NEAR(lambda, 0.5, 1e-6);
  EXPECT_NEAR(grid_overlap(psi, 24), 0.5, 1e-9);
}

TEST(GeometricMeasure, GhzAndW) {
  const auto ghz = relax(encode_geometric_measure(states::ghz()), 2);
  ASSERT_TRUE(ghz.final_bound);
  EXPECT_TRUE(ghz.certified_optimal);
  EXPECT_NEAR(decode_geometric_measure(*ghz.final_bound).lambda_sq, 0.5, 1e-6);
  const auto w = relax(encode_geometric_measure(states::w()), 2);
  ASSERT_TRUE(w.final_bound);
  const double oracle = oracle_upper_bound(geo_task(states::w()), restarts(200)).value;
  EXPECT_NEAR(*w.final_bound, oracle, 1e-6);
  EXPECT_NEAR(-oracle, 4.0 / 9.0, 1e-9);
}

TEST(GeometricMeasure, ProductStatesHaveUnitOverlap) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const CVector v = kron(kron(quantum::random_state(2, rng), quantum::random_state(2, rng)), quantum::random_state(2, rng));
    const auto g = decode_geometric_measure(bound(encode_geometric_measure(StateVector(SubsystemLayout::qubits(3), v))));
    EXPECT_NEAR(g.entanglement, 0.0, 1e-8);
  }
}

TEST(GeometricMeasure, LocalUnitaryInvariance) {
  std::mt19937_64 rng(7);
  const SubsystemLayout three = SubsystemLayout::qubits(3);
  const StateVector base = states::w_superposition(0.3);
  const double e0 = decode_geometric_measure(bound(encode_geometric_measure(base))).entanglement;
  for (int trial = 0; trial < 2; ++trial) {
    const CMatrix u = kron({quantum::random_unitary(2, rng), quantum::random_unitary(2, rng), quantum::random_unitary(2, rng)});
    const StateVector rotated = StateVector::normalized(three, u * base.amplitudes());
    EXPECT_NEAR(decode_geometric_measure(bound(encode_geometric_measure(rotated))).entanglement, e0, 1e-6);
  }
}

TEST(GeometricMeasure, DecodeClamps) {
  EXPECT_FALSE(decode_geometric_measure(-0.5).clamped);
  const auto over = decode_geometric_measure(-1.0 - 1e-9);
  EXPECT_TRUE(over.clamped);
  EXPECT_DOUBLE_EQ(over.lambda_sq, 1.0);
  EXPECT_DOUBLE_EQ(over.entanglement, 0.0);
  EXPECT_TRUE(decode_geometric_measure(1e-9).clamped);
}

TEST(Witness, IdentityAndBellWitness) {
  const SubsystemLayout two = SubsystemLayout::qubits(2);
  EXPECT_NEAR(bound(encode_witness_min(CMatrix::Identity(4, 4), two)), 1.0, 1e-7);
  const CMatrix w = CMatrix::Identity(4, 4) / 2.0 - phi_plus();
  EXPECT_NEAR(bound(encode_witness_min(w, two)), 0.0, 1e-7);
  EXPECT_NEAR(oracle_upper_bound(op_task(TaskKind::witness, w, two), restarts(100)).value, 0.0, 1e-9);
  CMatrix bad = CMatrix::Zero(4, 4);
  bad(0, 1) = 1;
  EXPECT_THROW(encode_witness_min(bad, two), InputError);
}

TEST(Witness, FinerWitnessReminimizes) {
  const SubsystemLayout three = SubsystemLayout::qubits(3);
  const CMatrix w = states::bound_entangled_prewitness(2.0, 2.0, 0.5);
  const double eps = bound(encode_witness_min(w, three), 2);
  EXPECT_GT(eps, 1e-3);
  const auto shift = decode_witness(w, eps);
  EXPECT_NEAR(bound(encode_witness_min(shift.finer_witness, three), 2), 0.0, 1e-6);
}

TEST(Witness, EdgeWitnessDetectsBoundEntangledState) {
  const SubsystemLayout three = SubsystemLayout::qubits(3);
  const CMatrix rho = states::bound_entangled(2.0, 2.0, 0.5);
  const EdgeWitness e = build_edge_witness(rho, three);
  EXPECT_TRUE(e.ppt);
  EXPECT_TRUE(e.detected) << e.message;
  EXPECT_GT(e.epsilon, 0.0);
  EXPECT_LT(e.expectation, 0.0);
  EXPECT_NEAR(e.expectation, -e.epsilon, 1e-9);
  // One transposed party is not enough for this family.
  const EdgeWitness single = build_edge_witness(rho, three, {1});
  EXPECT_FALSE(single.detected);
}

TEST(Witness, SeparableFullRankStateIsNotDetected) {
  const SubsystemLayout two = SubsystemLayout::qubits(2);
  const EdgeWitness e = build_edge_witness(CMatrix::Identity(4, 4) / 4.0, two);
  EXPECT_LT(e.prewitness.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(e.epsilon, 0.0, 1e-7);
  EXPECT_FALSE(e.detected);
  EXPECT_FALSE(e.message.empty());
}

TEST(HsDistance, LayoutAndLimits) {
  const auto h = hs_layout(SubsystemLayout::qubits(2), 2);
  EXPECT_EQ(h.per_term, 15);
  EXPECT_EQ(h.trace_offset, 30);
  EXPECT_EQ(h.epigraph, 31);
  EXPECT_EQ(h.num_vars, 32);
  EXPECT_THROW(hs_layout(SubsystemLayout::qubits(2), 0), InputError);
  EXPECT_THROW(hs_layout(SubsystemLayout::qubits(2), 5), InputError);
}

TEST(HsDistance, Examples) {
  const SubsystemLayout two = SubsystemLayout::qubits(2);
  const CVector prod = kron(CVector(CVector::Unit(2, 0)), CVector((CVector::Unit(2, 0) + CVector::Unit(2, 1)).normalized()));
  EXPECT_NEAR(bound(encode_hs_distance(prod * prod.adjoint(), two, 1)), 0.0, 1e-6);
  // 2 - 2 max overlap = 1 for a Bell state and one product term.
  const double bell = bound(encode_hs_distance(phi_plus(), two, 1));
  EXPECT_NEAR(bell, 1.0, 1e-6);
  EXPECT_NEAR(oracle_upper_bound(op_task(TaskKind::hsdist, phi_plus(), two), restarts(50)).value, 1.0, 1e-9);
  CMatrix mix = CMatrix::Zero(4, 4);
  mix(0, 0) = mix(3, 3) = 0.5;
  EXPECT_NEAR(bound(encode_hs_distance(mix, two, 2)), 0.0, 1e-5);
  EXPECT_NEAR(oracle_upper_bound(op_task(TaskKind::hsdist, mix, two, 2), restarts(20)).value, 0.0, 1e-6);
  EXPECT_TRUE(decode_hs_distance(bell).entangled);
  EXPECT_FALSE(decode_hs_distance(1e-9).entangled);
}

TEST(HsDistance, MonotoneInTerms) {
  const SubsystemLayout two = SubsystemLayout::qubits(2);
  CMatrix rho = 0.7 * phi_plus();
  rho(1, 1) += 0.3;
  const double one = bound(encode_hs_distance(rho, two, 1));
  const double two_terms = bound(encode_hs_distance(rho, two, 2));
  EXPECT_LE(two_terms, one + 1e-7);
}

TEST(Variance, Examples) {
  const SubsystemLayout one({2});
  const SubsystemLayout two = SubsystemLayout::qubits(2);
  EXPECT_NEAR(bound(encode_variance_min(pauli('z'), one)), 0.0, 1e-6);
  EXPECT_NEAR(bound(encode_variance_min(kron(pauli('z'), pauli('z')), two)), 0.0, 1e-6);
  const CMatrix m = kron(pauli('x'), pauli('1')) + kron(pauli('1'), pauli('z'));
  EXPECT_NEAR(bound(encode_variance_min(m, two)), 0.0, 1e-6);
  EXPECT_NEAR(oracle_upper_bound(op_task(TaskKind::variance, m, two), restarts(50)).value, 0.0, 1e-9);
}

TEST(Variance, QuadraticScaling) {
  const SubsystemLayout two = SubsystemLayout::qubits(2);
  // Bell-diagonal with distinct weights: no product eigenvectors.
  CMatrix m = CMatrix::Zero(4, 4);
  const double w[4] = {1.0, 2.0, 3.0, 4.0};
  const int a[4] = {0, 0, 1, 1};
  const int b[4] = {3, 3, 2, 2};
  const double sign[4] = {1.0, -1.0, 1.0, -1.0};
  for (int k = 0; k < 4; ++k) {
    CVector v = CVector::Zero(4);
    v(a[k]) = 1.0 / std::sqrt(2.0);
    v(b[k]) = sign[k] / std::sqrt(2.0);
    m += w[k] * v * v.adjoint();
  }
  const double b1 = bound(encode_variance_min(m, two));
  const double b3 = bound(encode_variance_min(3.0 * m, two));
  const double oracle = oracle_upper_bound(op_task(TaskKind::variance, m, two), restarts(50)).value;
  EXPECT_GT(b1, 0.1);
  EXPECT_NEAR(b1, oracle, 1e-5);
  EXPECT_NEAR(b3, 9.0 * b1, 1e-5);
}

TEST(Purity, ChannelExamples) {
  const SubsystemLayout one({2});
  const double lambda = 0.5;
  std::vector<CMatrix> dep = {std::sqrt(lambda + (1 - lambda) / 4) * pauli('1')};
  for (char c : {'x', 'y', 'z'}) dep.push_back(std::sqrt((1 - lambda) / 4) * pauli(c));
  const auto dep_value = decode_output_purity(bound(encode_output_purity(dep, one)), 2);
  // lambda^2 + lambda (1 - lambda) + (1 - lambda)^2 / 2
  EXPECT_NEAR(dep_value.nu_sq, 0.625, 1e-7);
  EXPECT_NEAR(dep_value.nu, std::sqrt(0.625), 1e-7);

  EXPECT_NEAR(decode_output_purity(bound(encode_output_purity({pauli('1')}, one)), 2).nu_sq, 1.0, 1e-7);
  std::mt19937_64 rng(3);
  const std::vector<CMatrix> unitary = {quantum::random_unitary(2, rng)};
  EXPECT_NEAR(decode_output_purity(bound(encode_output_purity(unitary, one)), 2).nu_sq, 1.0, 1e-7);

  Task t;
  t.kind = TaskKind::purity;
  t.layout = one;
  t.kraus = dep;
  EXPECT_NEAR(oracle_upper_bound(t, restarts(20)).value, -0.625, 1e-12);
  EXPECT_THROW(encode_output_purity({0.5 * pauli('1')}, one), InputError);
}

TEST(Purity, QutritChannel) {
  // Completely dephasing channel on a qutrit keeps basis states pure.
  const SubsystemLayout one({3});
  std::vector<CMatrix> kraus;
  for (int k = 0; k < 3; ++k) {
    CMatrix p = CMatrix::Zero(3, 3);
    p(k, k) = 1;
    kraus.push_back(p);
  }
  EXPECT_NEAR(-bound(encode_output_purity(kraus, one)), 1.0, 1e-6);
}

TEST(Oracle, DeterministicAcrossJobs) {
  const Task t = geo_task(states::w_superposition(0.3));
  OracleOptions a = restarts(64, 11);
  OracleOptions b = a;
  b.jobs = 4;
  const auto ra = oracle_upper_bound(t, a), rb = oracle_upper_bound(t, b);
  EXPECT_EQ(ra.value, rb.value);
  EXPECT_EQ(ra.best_restart, rb.best_restart);
  EXPECT_EQ(ra.point, rb.point);
}

TEST(Oracle, GhzValueAndFeasiblePoint) {
  const Task t = geo_task(states::ghz());
  const auto r = oracle_upper_bound(t, restarts(1000));
  EXPECT_NEAR(r.value, -0.5, 1e-9);
  const auto p = encode(t);
  EXPECT_NEAR(p.objective.evaluate(r.point), r.value, 1e-10);
  for (const auto& c : p.constraints) EXPECT_NEAR(c.poly.evaluate(r.point), 0.0, 1e-10);
}

TEST(Oracle, TiedGroupsUseGradientSearch) {
  const Task t = geo_task(states::psi4(0.0), states::psi4_groups());
  const auto r = oracle_upper_bound(t, restarts(50));
  EXPECT_NEAR(r.value, -0.25, 1e-8);
  EXPECT_NEAR(encode(t).objective.evaluate(r.point), r.value, 1e-10);
}

TEST(Oracle, SandwichOnEveryTask) {
  const SubsystemLayout two = SubsystemLayout::qubits(2);
  std::mt19937_64 rng(13);
  std::vector<Task> tasks;
  tasks.push_back(geo_task(StateVector(two, quantum::random_state(4, rng))));
  tasks.push_back(geo_task(StateVector(SubsystemLayout({2, 3}), quantum::random_state(6, rng))));
  CMatrix h = CMatrix::Random(4, 4);
  h = (h + h.adjoint()).eval();
  tasks.push_back(op_task(TaskKind::witness, h, two));
  tasks.push_back(op_task(TaskKind::variance, h, two));
  CMatrix rho = 0.6 * phi_plus() + 0.1 * CMatrix::Identity(4, 4);
  tasks.push_back(op_task(TaskKind::hsdist, rho, two));
  Task pur;
  pur.kind = TaskKind::purity;
  pur.layout = SubsystemLayout({2});
  pur.kraus = {std::sqrt(0.7) * pauli('1'), std::sqrt(0.3) * pauli('x')};
  tasks.push_back(pur);
  for (const auto& t : tasks) {
    const auto p = encode(t);
    const double oracle = oracle_upper_bound(t, restarts(50)).value;
    for (int h = lasserre::min_order(p); h <= lasserre::min_order(p) + (p.num_vars() <= 6 ? 1 : 0); ++h) {
      const double b = bound(p, h);
      EXPECT_LE(b, oracle + 1e-7) << to_string(t.kind) << " h=" << h;
    }
  }
}

TEST(Tasks, KindNames) {
  for (auto k : {TaskKind::geomeasure, TaskKind::witness, TaskKind::hsdist, TaskKind::variance, TaskKind::purity}) {
    EXPECT_EQ(parse_task_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_task_kind("nope"), InputError);
  Task t = geo_task(states::ghz());
  const auto d = decode(t, -0.5);
  ASSERT_EQ(d.values.size(), 2u);
  EXPECT_EQ(d.values[0].first, "lambda_sq");
  EXPECT_DOUBLE_EQ(d.values[1].second, 0.5);
}
