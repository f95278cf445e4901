#pragma once

// Dense primal-dual interior-point solver for block linear matrix
// inequalities.
//
//   minimize    c^T y + offset
//   subject to  H0^(b) + sum_s y_s H_s^(b)  >= 0   for every block b
//               a_k^T y = r_k                      for every equality k
//
// The conic dual is
//
//   maximize    -sum_b tr[Z^(b) H0^(b)] + offset
//   subject to  sum_b tr[Z^(b) H_s^(b)] = c_s,  Z^(b) >= 0.
//
// Linear equalities are eliminated by substitution before the interior-point
// loop; blocks that no longer depend on any free variable are checked once
// and dropped.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace momentsdp::sdp {

// One symmetric matrix entry of H_var. var == kConstant selects H0. An
// off-diagonal entry (row, col) also sets (col, row); repeated entries add.
struct BlockEntry {
  static constexpr std::int32_t kConstant = -1;
  std::int32_t var = kConstant;
  std::int32_t row = 0;
  std::int32_t col = 0;
  double value = 0.0;
};

struct LmiBlock {
  int dim = 0;
  std::vector<BlockEntry> entries;
  std::string label;
};

struct LinearEquality {
  std::vector<std::pair<std::int32_t, double>> coeffs;
  double rhs = 0.0;
};

struct SdpInstance {
  int num_vars = 0;
  std::vector<LmiBlock> blocks;
  std::vector<double> objective;  // length num_vars
  double objective_offset = 0.0;
  std::vector<LinearEquality> equalities;

  // Throws InputError on out-of-range indices or size mismatches.
  void check() const;
  // H0 + sum_s y_s H_s for block b.
  Eigen::MatrixXd block_value(std::size_t b, std::span<const double> y) const;
  // Matrix of one coefficient (var = BlockEntry::kConstant for H0).
  Eigen::MatrixXd block_coefficient(std::size_t b, std::int32_t var) const;
};

enum class Status { optimal, primal_infeasible, dual_infeasible, max_iter, numerical_failure };

std::string to_string(Status status);

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 200;
  double step_fraction = 0.98;
  // Run a phase-one problem to certify infeasibility when the main loop
  // diverges or stalls.
  bool certify_infeasibility = true;
  bool record_history = true;
};

struct IterationRecord {
  int iter = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double mu = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

// Z >= 0 with tr[Z H_s] = 0 on the free variables and tr[Z H0] < 0.
struct InfeasibilityCertificate {
  std::vector<Eigen::MatrixXd> z;  // one per original block
  double trace_z_h0 = 0.0;          // after eliminating linear equalities
  double max_abs_trace_z_hs = 0.0;
  double min_eigenvalue = 0.0;
  double trace_z = 0.0;
};

struct SdpResult {
  Status status = Status::numerical_failure;
  std::vector<double> y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  // primal - dual
  double relative_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<Eigen::MatrixXd> z;  // one per original block
  int iterations = 0;
  int free_vars = 0;
  std::vector<IterationRecord> history;
  std::optional<InfeasibilityCertificate> certificate;
  std::string message;
};

SdpResult solve(const SdpInstance& instance, const SolverOptions& options = {});

// Checks a primal_infeasible result's certificate by recomputing the traces.
// Returns nullopt (and leaves the result untouched) when the status is not
// primal_infeasible; when residuals exceed tol the status is downgraded to
// numerical_failure.
std::optional<InfeasibilityCertificate> infeasibility_certificate(const SdpInstance& instance,
                                                                  SdpResult& result,
                                                                  double tol = 1e-7);

// Recomputes the certificate quantities for given Z matrices.
InfeasibilityCertificate evaluate_certificate(const SdpInstance& instance,
                                              const std::vector<Eigen::MatrixXd>& z);

struct ResidualReport {
  std::vector<double> min_eigenvalue;  // of F(y) per block
  std::vector<double> min_eigenvalue_z;
  double equality_residual = 0.0;      // max |a_k^T y - r_k|
  double dual_residual = 0.0;          // ||c - A^T(Z) - equality multipliers|| (least squares)
  double complementarity = 0.0;        // sum_b tr[F_b(y) Z_b]
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;                    // primal - dual
};

// Independent residual computation, usable as a test oracle.
ResidualReport validate(const SdpInstance& instance, std::span<const double> y,
                        const std::vector<Eigen::MatrixXd>& z);

// Equality elimination: y = base + sum_f expr[f] y_free[f].
struct Reduction {
  bool consistent = true;
  std::vector<int> free_vars;  // original index of each reduced variable
  std::vector<double> base;    // length num_vars
  // For each original variable, its dependence on reduced variables.
  std::vector<std::vector<std::pair<int, double>>> expr;
  std::vector<int> kept_blocks;      // original index of each reduced block
  std::vector<int> constant_blocks;  // blocks with no free-variable dependence
  SdpInstance reduced;               // no equalities

  std::vector<double> expand(std::span<const double> y_free) const;
};

Reduction reduce(const SdpInstance& instance);

}  // namespace momentsdp::sdp
