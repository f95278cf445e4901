#pragma once

// Moment relaxations of polynomial programs
//
//   minimize f(x)  subject to  g_l(x) >= 0,  h_k(x) = 0,  x in R^t.
//
// Moment ordinals are 1-based positions in the graded basis of degree 2h, so
// y_1 is the constant moment and y_{s+1} is the moment of x_s.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "momentsdp/polycore.hpp"
#include "momentsdp/sdp.hpp"

namespace momentsdp::lasserre {

enum class ConstraintKind { inequality, equality };

struct Constraint {
  Polynomial poly;
  ConstraintKind kind = ConstraintKind::inequality;
  std::string label;
};

struct PolyProblem {
  Polynomial objective;
  std::vector<Constraint> constraints;
  std::optional<double> ball_radius_sq;

  int num_vars() const { return objective.num_vars(); }
  // Throws InputError on mismatched variable counts or an empty problem.
  void check() const;
  PolyProblem& add_inequality(Polynomial g, std::string label = {});
  PolyProblem& add_equality(Polynomial g, std::string label = {});
};

// ceil(deg / 2), at least 1 for nonconstant input.
int half_degree(const Polynomial& p);

// max(ceil(delta_l / 2), ceil(deg f / 2), 1)
int min_order(const PolyProblem& problem);

using OrdinalMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Sparse linear form sum_k coef_k * y_{ordinal_k}, sorted by ordinal.
using LinearForm = std::vector<std::pair<std::int64_t, double>>;

struct SymbolicMatrix {
  int dim = 0;
  std::vector<LinearForm> entries;  // row-major, dim * dim

  const LinearForm& at(int i, int j) const { return entries[static_cast<std::size_t>(i * dim + j)]; }
  Eigen::MatrixXd evaluate(const std::vector<double>& y) const;
};

// (i, j) -> rank(unrank(i) + unrank(j)) for the degree-h basis.
OrdinalMatrix build_moment_block(int num_vars, int order);

// (i, j) -> sum_alpha g_alpha y[rank(u_i + u_j + alpha)], i, j over the basis
// of degree order - ceil(deg g / 2). Throws OrderError if that is negative.
SymbolicMatrix build_localizing_block(const Polynomial& g, int order, const std::string& label = {});

// Moment vector of a point: y_alpha = x^alpha over the degree-2h basis.
std::vector<double> moment_vector(std::span<const double> x, int order);

// How equality constraints reach the SDP.
enum class EqualityMode {
  // One linear equality per distinct entry of the localizing matrix.
  linear,
  // Two localizing blocks, +g >= 0 and -g >= 0.
  paired,
};

struct LocalizingInfo {
  int constraint = -1;  // index into problem.constraints, -1 for the ball
  ConstraintKind kind = ConstraintKind::inequality;
  int degree = 0;       // delta_l
  int reduced_order = 0;  // h - ceil(delta_l / 2)
  SymbolicMatrix block;
  std::string label;
};

struct Relaxation {
  int order = 0;
  int num_vars = 0;
  std::int64_t y_dim = 0;  // D_2h including y_1
  OrdinalMatrix moment_block;
  std::vector<LocalizingInfo> localizing;
  std::vector<double> objective;  // d, length y_dim
  std::vector<sdp::LinearEquality> equalities;  // y_1 = 1 first; ordinals shifted to 0-based
  EqualityMode equality_mode = EqualityMode::linear;
  // Moment rows (0-based, sorted) left out of the SDP block: each pairs with
  // a vector g x^gamma that the equalities force into the kernel of M_h.
  std::vector<int> moment_dropped;

  // Variable s of the instance is y_{s+1}.
  sdp::SdpInstance to_instance() const;
};

Relaxation build_relaxation(const PolyProblem& problem, int order, EqualityMode mode = EqualityMode::linear);

sdp::SdpInstance assemble(const PolyProblem& problem, int order, EqualityMode mode = EqualityMode::linear);

struct FlatnessCertificate {
  int order = 0;
  int low_order = 0;
  int rank = 0;      // of M_h
  int low_rank = 0;  // of M_{h - dv}
  bool flat = false;
};

// Ranks of M_h(y) and its leading block M_{h - dv}, dv = max(1, max_l ceil(delta_l/2)).
FlatnessCertificate check_flatness(const std::vector<double>& y, const PolyProblem& problem, int order,
                                   double rank_tol = 1e-6);

// Numerical rank: singular values above rank_tol * sigma_max.
int numerical_rank(const Eigen::MatrixXd& m, double rank_tol);

struct Extraction {
  std::vector<std::vector<double>> atoms;
  bool ok = false;
  std::string warning;
};

// Atoms of a flat moment vector; each is checked against the constraints
// with tolerance feas_tol.
Extraction extract_minimizers(const std::vector<double>& y, const PolyProblem& problem, int order, int rank,
                              double feas_tol = 1e-5, std::uint64_t seed = 1);

struct HierarchyOptions {
  int h_start = 0;  // 0 selects min_order
  int h_max = 0;    // 0 selects h_start
  double rank_tol = 1e-6;
  EqualityMode equality_mode = EqualityMode::linear;
  // When the first optimum is not flat, re-solve on the optimal face with a
  // random trace objective to reach a low-rank point.
  bool face_minimization = true;
  bool extract = true;
  double extraction_tol = 1e-5;
  std::uint64_t seed = 1;
  sdp::SolverOptions solver;
};

struct OrderRecord {
  int order = 0;
  double lower_bound = 0.0;
  sdp::Status status = sdp::Status::numerical_failure;
  double gap = 0.0;
  int rank = 0;
  int low_rank = 0;
  bool flat = false;
  bool face_minimized = false;
  std::int64_t y_dim = 0;
  int free_vars = 0;
  int iterations = 0;
  std::string message;
};

struct HierarchyResult {
  std::vector<OrderRecord> records;
  std::optional<double> final_bound;  // best bound among solved orders
  std::vector<std::vector<double>> minimizers;
  bool certified_optimal = false;
  bool infeasible = false;
  std::optional<sdp::InfeasibilityCertificate> certificate;
  std::vector<double> moments;  // y at the last solved order
  std::string message;
};

HierarchyResult run_hierarchy(const PolyProblem& problem, const HierarchyOptions& options = {});

}  // namespace momentsdp::lasserre
