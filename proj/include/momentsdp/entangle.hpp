#pragma once

// Entanglement problems as polynomial programs over product states, their
// decoders, and a random-restart local-search oracle that supplies feasible
// upper bounds for the same objectives.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "momentsdp/lasserre.hpp"
#include "momentsdp/quantum.hpp"

namespace momentsdp::entangle {

using quantum::CMatrix;
using quantum::CVector;
using quantum::SubsystemLayout;
using quantum::StateVector;

// Objective -<phi|rho|phi> over product states in per-party Bloch
// coordinates. groups ties parties to shared coordinates (empty = untied).
lasserre::PolyProblem encode_geometric_measure(const StateVector& state, const std::vector<int>& groups = {});

struct GeometricMeasure {
  double lambda_sq = 0.0;  // max overlap squared
  double entanglement = 0.0;  // 1 - lambda_sq
  bool clamped = false;
};
GeometricMeasure decode_geometric_measure(double bound);

// Objective tr[W P] over product states P.
lasserre::PolyProblem encode_witness_min(const CMatrix& w, const SubsystemLayout& layout,
                                         const std::vector<int>& groups = {});

struct WitnessShift {
  double epsilon = 0.0;
  CMatrix finer_witness;  // W - epsilon * 1
};
WitnessShift decode_witness(const CMatrix& w, double bound);

struct EdgeWitness {
  CMatrix kernel;       // R, projector onto ker rho
  CMatrix prewitness;   // R + sum_j Q_j^{T_j}
  CMatrix witness;      // prewitness - epsilon * 1
  double epsilon = 0.0;
  double expectation = 0.0;  // tr[witness rho]
  bool ppt = true;
  bool detected = false;
  std::vector<int> parties;
  lasserre::HierarchyResult hierarchy;
  std::string message;
};

// Witness for a PPT state from the kernels of rho and of its partial
// transposes over `parties` (empty = all). epsilon comes from the relaxation
// of encode_witness_min(prewitness); detection requires epsilon > threshold.
EdgeWitness build_edge_witness(const CMatrix& rho, const SubsystemLayout& layout, std::vector<int> parties = {},
                               double rank_tol = 1e-9, const lasserre::HierarchyOptions& options = {},
                               double threshold = 1e-6);

// Squared Hilbert-Schmidt distance from rho to sums of n product terms.
// Variables per term: the p_kappa (kappa >= 1) of its full coefficient
// tensor; then the traces of terms 1..n-1 (the last is 1 minus their sum);
// the final variable is the epigraph x >= tr(rho - P)^2.
struct HsLayout {
  int terms = 0;
  int per_term = 0;    // basis_count - 1
  int trace_offset = 0;
  int epigraph = 0;
  int num_vars = 0;
};
HsLayout hs_layout(const SubsystemLayout& layout, int terms);
lasserre::PolyProblem encode_hs_distance(const CMatrix& rho, const SubsystemLayout& layout, int terms);

struct HsDistance {
  double distance_sq = 0.0;
  bool clamped = false;
  bool entangled = false;  // distance above the threshold
};
HsDistance decode_hs_distance(double bound, double threshold = 1e-6);

// Objective tr[M^2 P] - tr[M P]^2 over product states.
lasserre::PolyProblem encode_variance_min(const CMatrix& m, const SubsystemLayout& layout,
                                          const std::vector<int>& groups = {});
struct VarianceBound {
  double variance = 0.0;
  bool clamped = false;
};
VarianceBound decode_variance(double bound);

// Throws InputError unless sum_i R_i^dag R_i = 1 within tol.
void check_kraus(const std::vector<CMatrix>& kraus, double tol = 1e-10);

// Objective -tr[E(P)^2] over pure input states P in Bloch coordinates of
// the full input space (dimension prod d_j).
lasserre::PolyProblem encode_output_purity(const std::vector<CMatrix>& kraus, const SubsystemLayout& layout);
struct OutputPurity {
  double nu_sq = 0.0;
  double nu = 0.0;
  bool clamped = false;
};
OutputPurity decode_output_purity(double bound, int output_dim);

// Task description shared by the CLI, the oracle and the acceptance runs.
enum class TaskKind { geomeasure, witness, hsdist, variance, purity };
std::string to_string(TaskKind kind);
TaskKind parse_task_kind(const std::string& name);

struct Task {
  TaskKind kind = TaskKind::geomeasure;
  SubsystemLayout layout;
  std::optional<StateVector> state;  // geomeasure
  CMatrix op;                        // witness W, hsdist rho, variance M
  std::vector<CMatrix> kraus;        // purity
  int terms = 1;                     // hsdist
  std::vector<int> groups;           // tied parties, product-state tasks
};

lasserre::PolyProblem encode(const Task& task);

// Named physical quantities decoded from a relaxation bound, in a fixed order.
struct Decoded {
  std::vector<std::pair<std::string, double>> values;
  bool clamped = false;
};
Decoded decode(const Task& task, double bound, double threshold = 1e-6);

struct OracleOptions {
  int restarts = 1000;
  std::uint64_t seed = 1;
  int jobs = 1;
  int max_sweeps = 2000;
  double tol = 1e-14;
};

struct OracleResult {
  double value = 0.0;          // objective value, same units as encode(task)
  std::vector<double> point;   // variables of encode(task) at the best restart
  int best_restart = -1;
};

// Feasible value of the encoded objective by seeded random-restart local
// search. Deterministic for a fixed seed regardless of jobs.
OracleResult oracle_upper_bound(const Task& task, const OracleOptions& options = {});

namespace states {

// (|001> + |010> + |100>) / sqrt 3
StateVector w();
// (|011> + |101> + |110>) / sqrt 3
StateVector w_tilde();
// sqrt(s) |W> + sqrt(1 - s) |W~>
StateVector w_superposition(double s);
StateVector ghz(int parties = 3);
// (|0011> + |1100>) / sqrt 2
StateVector ghz_prime();
// (|01> + |10>) / sqrt 2
StateVector psi_plus();
// sqrt(p) |GHZ'> - sqrt(1 - p) |psi+> (x) |psi+>
StateVector psi4(double p);
// Party groups of the (AB) <-> (CD) exchange symmetry of psi4.
std::vector<int> psi4_groups();

// Three-qubit PPT family built from weighted basis projectors and a GHZ
// projector; needs a, b, c > 0.
CMatrix bound_entangled(double a, double b, double c);
// The matching prewitness written out in the computational basis.
CMatrix bound_entangled_prewitness(double a, double b, double c);

}  // namespace states

}  // namespace momentsdp::entangle
