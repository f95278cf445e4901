#pragma once

// Finite-dimensional quantum linear algebra on tensor-product layouts.
//
// Tensor order: party 1 is the slowest-varying index, so the basis vector
// |i_1 ... i_N> sits at position ((i_1 d_2 + i_2) d_3 + ...) + i_N.
//
// Single-party operator basis for dimension d: sigma_1 = 1/d and the d^2 - 1
// generalized Gell-Mann matrices scaled by 1/sqrt(2d), ordered symmetric,
// antisymmetric, diagonal. Every element has tr[sigma_k sigma_l] = delta_kl / d.
// For d = 2 this is {1, X, Y, Z} / 2.

#include <complex>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "momentsdp/polycore.hpp"

namespace momentsdp::quantum {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct SubsystemLayout {
  std::vector<int> dims;

  SubsystemLayout() = default;
  explicit SubsystemLayout(std::vector<int> d);
  static SubsystemLayout qubits(int n);

  int parties() const { return static_cast<int>(dims.size()); }
  int total_dim() const;
  // Number of tensor-basis elements, prod d_j^2.
  std::int64_t basis_count() const;
  bool operator==(const SubsystemLayout&) const = default;
};

class HermitianOp {
 public:
  HermitianOp() = default;
  // Throws InputError unless m is square and Hermitian within 1e-12 (relative
  // to max(1, |m|)), or when the layout does not match the dimension.
  explicit HermitianOp(CMatrix m, std::optional<SubsystemLayout> layout = std::nullopt);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  const std::optional<SubsystemLayout>& layout() const { return layout_; }
  // The attached layout, or a single party of full dimension.
  SubsystemLayout layout_or_flat() const;

 private:
  CMatrix m_;
  std::optional<SubsystemLayout> layout_;
};

class StateVector {
 public:
  StateVector() = default;
  // Throws InputError unless |amplitudes| = 1 within 1e-12.
  StateVector(SubsystemLayout layout, CVector amplitudes);
  // Normalizes first; throws on a zero vector.
  static StateVector normalized(SubsystemLayout layout, CVector amplitudes);
  // Computational basis state given per-party digits.
  static StateVector basis(const SubsystemLayout& layout, const std::vector<int>& digits);

  const SubsystemLayout& layout() const { return layout_; }
  const CVector& amplitudes() const { return amps_; }
  HermitianOp projector() const;

 private:
  SubsystemLayout layout_;
  CVector amps_;
};

struct OperatorBasis {
  int dim = 0;
  std::vector<CMatrix> elements;
  double xi = 0.0;  // tr[sigma_k sigma_l] = xi delta_kl
};

// Cached per dimension; throws InputError for d < 2.
const OperatorBasis& operator_basis(int d);

// Re tr[sigma_a sigma_b sigma_c] for the basis of dimension d, flattened as
// (a * n + b) * n + c with n = d^2.
const std::vector<double>& structure_constants(int d);

// Kronecker product of a list of matrices.
CMatrix kron(const std::vector<CMatrix>& factors);
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Tensor basis element Sigma_kappa; kappa is a flat index with party 1
// slowest, kappa_j in [0, d_j^2).
CMatrix tensor_basis_element(const SubsystemLayout& layout, std::int64_t kappa);
std::vector<int> split_index(const SubsystemLayout& layout, std::int64_t kappa);

// p_kappa = tr[op Sigma_kappa] / tr[Sigma_kappa^2]; real for Hermitian op.
std::vector<double> expand(const CMatrix& op, const SubsystemLayout& layout);
std::vector<double> expand(const HermitianOp& op);
CMatrix reconstruct(const std::vector<double>& coefficients, const SubsystemLayout& layout);

// Trace over every party not in keep (0-based, any order; result ordered by
// party index).
CMatrix partial_trace(const CMatrix& op, const SubsystemLayout& layout, const std::vector<int>& keep);
HermitianOp partial_trace(const HermitianOp& op, const std::vector<int>& keep);

CMatrix partial_transpose(const CMatrix& op, const SubsystemLayout& layout, int party);
HermitianOp partial_transpose(const HermitianOp& op, int party);

// Projector onto eigenvectors with eigenvalue <= rank_tol * lambda_max.
CMatrix kernel_projector(const CMatrix& op, double rank_tol = 1e-9);

double min_eigenvalue(const CMatrix& op);

// Operator-valued polynomial sum_k coefficient_k(x) * matrix_k.
struct OperatorPolynomial {
  std::vector<std::pair<Polynomial, CMatrix>> terms;

  // tr[A * this] as a real polynomial (imaginary parts must cancel).
  Polynomial trace_with(const CMatrix& a) const;
  CMatrix evaluate(std::span<const double> x) const;
};

enum class PurityForm { per_party_bloch, full_tensor };

// Variable scheme of an encoded product state.
struct BlochVariables {
  SubsystemLayout layout;
  int num_vars = 0;
  std::vector<int> offset;  // first variable of each party's group
  std::vector<int> group;   // party -> variable group (ties for symmetric states)
};

// Per-party Bloch variables; parties sharing a group reuse the same
// coordinates. Empty groups means one group per party.
BlochVariables bloch_variables(const SubsystemLayout& layout, std::vector<int> groups = {}, int extra_vars = 0);

// Coordinates c_k (k >= 1) of a pure single-party state |v><v| = 1/d + sum c_k sigma_k.
std::vector<double> bloch_coordinates(const CVector& v);
CMatrix bloch_operator(std::span<const double> coords, int d);

// rho_j(x) = sigma_1 + sum_k x_{offset+k-1} sigma_k for party j.
OperatorPolynomial party_operator(const BlochVariables& vars, int party);
// Tensor product of the party operators: tr[W P(x)] = trace_with(W).
Polynomial product_expectation(const CMatrix& w, const BlochVariables& vars);

// Per-party purity for per_party_bloch: sum c^2 = d - 1 and, for d > 2,
// tr[rho^3] = 1 followed by the d^2 - 1 components of rho^2 = rho.
// Polynomials are equalities (= 0).
std::vector<Polynomial> bloch_purity(const BlochVariables& vars);
// Same for a single block of d^2 - 1 coordinates starting at offset.
std::vector<Polynomial> bloch_purity_block(int num_vars, int offset, int d);

// One term P = sum_kappa p_kappa Sigma_kappa in full_tensor form: p_kappa for
// kappa >= 1 is variable offset + kappa - 1; p_0 = tr P is the polynomial
// `trace` (a constant, a variable, or an affine expression).
struct TensorTerm {
  int offset = 0;
  Polynomial trace;
};

// p_kappa as polynomial for kappa = 0 .. basis_count - 1.
std::vector<Polynomial> tensor_coefficients(const SubsystemLayout& layout, const TensorTerm& term, int num_vars);

struct FullTensorOptions {
  bool reductions = true;      // tr[(tr_{I\j} P)^2] = (tr P)^2, and cubes for qudits
  bool segre_minors = true;    // rank-one coefficient tensor
  bool global_purity = true;   // tr[P^2] = (tr P)^2
};

std::vector<Polynomial> full_tensor_purity(const SubsystemLayout& layout, const TensorTerm& term, int num_vars,
                                           const FullTensorOptions& options = {});

// Convenience entry point: per_party_bloch over bloch_variables(layout), or
// full_tensor over a single term with unit trace.
std::vector<Polynomial> purity_constraints(const SubsystemLayout& layout, PurityForm form);

// Haar-distributed unitary and unit vector.
CMatrix random_unitary(int d, std::mt19937_64& rng);
CVector random_state(int d, std::mt19937_64& rng);

}  // namespace momentsdp::quantum
