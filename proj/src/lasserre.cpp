#include "momentsdp/lasserre.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <fmt/format.h>

#include "momentsdp/error.hpp"
#include "momentsdp/log.hpp"

namespace momentsdp::lasserre {

namespace {

std::string constraint_name(const Constraint& c, std::size_t index) {
  return c.label.empty() ? fmt::format("g{}", index + 1) : c.label;
}

void add_scaled(LinearForm& form, std::int64_t ordinal, double coef) {
  auto it = std::lower_bound(form.begin(), form.end(), ordinal,
                             [](const auto& entry, std::int64_t o) { return entry.first < o; });
  if (it != form.end() && it->first == ordinal) {
    it->second += coef;
    if (it->second == 0.0) form.erase(it);
  } else if (coef != 0.0) {
    form.insert(it, {ordinal, coef});
  }
}

LinearForm shifted_form(const Polynomial& g, const MultiIndex& shift, int max_degree) {
  LinearForm form;
  for (const auto& [alpha, coef] : g.terms()) add_scaled(form, rank(shift + alpha, max_degree), coef);
  return form;
}

void append_block(sdp::SdpInstance& inst, const SymbolicMatrix& m, double sign, const std::string& label) {
  sdp::LmiBlock block;
  block.dim = m.dim;
  block.label = label;
  for (int i = 0; i < m.dim; ++i) {
    for (int j = i; j < m.dim; ++j) {
      for (const auto& [ord, coef] : m.at(i, j)) {
        block.entries.push_back({static_cast<std::int32_t>(ord - 1), i, j, sign * coef});
      }
    }
  }
  inst.blocks.push_back(std::move(block));
}

int constraint_degree_bound(const PolyProblem& problem) {
  int dv = 1;
  for (const auto& c : problem.constraints) dv = std::max(dv, half_degree(c.poly));
  return dv;
}

bool atom_feasible(const PolyProblem& problem, std::span<const double> x, double tol) {
  for (const auto& c : problem.constraints) {
    double scale = 1.0;
    for (const auto& [alpha, coef] : c.poly.terms()) scale = std::max(scale, std::abs(coef));
    const double v = c.poly.evaluate(x);
    if (c.kind == ConstraintKind::inequality ? v < -tol * scale : std::abs(v) > tol * scale) return false;
  }
  if (problem.ball_radius_sq) {
    double norm_sq = 0.0;
    for (double v : x) norm_sq += v * v;
    if (norm_sq > *problem.ball_radius_sq * (1.0 + tol)) return false;
  }
  return true;
}

}  // namespace

void PolyProblem::check() const {
  const int t = objective.num_vars();
  if (t < 1) throw InputError("problem has no variables");
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (constraints[i].poly.num_vars() != t) {
      throw InputError(fmt::format("constraint '{}' has {} variables, objective has {}",
                                   constraint_name(constraints[i], i), constraints[i].poly.num_vars(), t));
    }
  }
  if (constraints.empty() && objective.is_constant()) throw InputError("empty problem");
  if (ball_radius_sq && !(*ball_radius_sq > 0)) throw InputError("ball radius must be positive");
}

PolyProblem& PolyProblem::add_inequality(Polynomial g, std::string label) {
  constraints.push_back({std::move(g), ConstraintKind::inequality, std::move(label)});
  return *this;
}

PolyProblem& PolyProblem::add_equality(Polynomial g, std::string label) {
  constraints.push_back({std::move(g), ConstraintKind::equality, std::move(label)});
  return *this;
}

int half_degree(const Polynomial& p) { return (p.degree() + 1) / 2; }

int min_order(const PolyProblem& problem) {
  problem.check();
  int h = std::max(1, half_degree(problem.objective));
  for (const auto& c : problem.constraints) h = std::max(h, half_degree(c.poly));
  return h;
}

Eigen::MatrixXd SymbolicMatrix::evaluate(const std::vector<double>& y) const {
  Eigen::MatrixXd out(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double v = 0.0;
      for (const auto& [ord, coef] : at(i, j)) v += coef * y[static_cast<std::size_t>(ord - 1)];
      out(i, j) = v;
    }
  }
  return out;
}

OrdinalMatrix build_moment_block(int num_vars, int order) {
  if (order < 0) throw OrderError("negative relaxation order");
  const auto basis = graded_basis(num_vars, order);
  const auto n = static_cast<Eigen::Index>(basis.size());
  OrdinalMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      m(i, j) = rank(basis[static_cast<std::size_t>(i)] + basis[static_cast<std::size_t>(j)], 2 * order);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

SymbolicMatrix build_localizing_block(const Polynomial& g, int order, const std::string& label) {
  const int reduced = order - half_degree(g);
  if (reduced < 0) {
    throw OrderError(fmt::format("constraint '{}' of degree {} needs relaxation order >= {}, got {}",
                                 label.empty() ? g.to_string() : label, g.degree(), half_degree(g), order));
  }
  const auto basis = graded_basis(g.num_vars(), reduced);
  SymbolicMatrix m;
  m.dim = static_cast<int>(basis.size());
  m.entries.resize(static_cast<std::size_t>(m.dim) * static_cast<std::size_t>(m.dim));
  for (int i = 0; i < m.dim; ++i) {
    for (int j = i; j < m.dim; ++j) {
      auto form = shifted_form(g, basis[static_cast<std::size_t>(i)] + basis[static_cast<std::size_t>(j)], 2 * order);
      m.entries[static_cast<std::size_t>(j * m.dim + i)] = form;
      m.entries[static_cast<std::size_t>(i * m.dim + j)] = std::move(form);
    }
  }
  return m;
}

std::vector<double> moment_vector(std::span<const double> x, int order) {
  const auto basis = graded_basis(static_cast<int>(x.size()), 2 * order);
  std::vector<double> y;
  y.reserve(basis.size());
  for (const auto& alpha : basis) {
    double v = 1.0;
    for (int s = 0; s < alpha.size(); ++s) v *= std::pow(x[static_cast<std::size_t>(s)], alpha[s]);
    y.push_back(v);
  }
  return y;
}

namespace {

// For an equality g of degree delta and deg gamma <= h - 2 ceil(delta / 2),
// the coefficient vector v of g x^gamma satisfies M_h(y) v = 0 for every y
// obeying the linear equalities, so M_h has no interior. Choosing one pivot
// row per independent v (by elimination, preferring late basis positions)
// and deleting those rows and columns leaves an equivalent PSD condition.
std::vector<int> forced_kernel_pivots(const PolyProblem& problem, int order) {
  const int t = problem.num_vars();
  std::vector<std::map<int, double>> rows;  // reduced vectors, keyed by 0-based position
  std::vector<int> pivots;
  for (const auto& c : problem.constraints) {
    if (c.kind != ConstraintKind::equality) continue;
    const int max_shift = order - 2 * half_degree(c.poly);
    if (max_shift < 0) continue;
    for (const auto& gamma : graded_basis(t, max_shift)) {
      std::map<int, double> v;
      for (const auto& [alpha, coef] : c.poly.terms()) {
        v[static_cast<int>(rank(alpha + gamma, order) - 1)] += coef;
      }
      for (std::size_t k = 0; k < pivots.size(); ++k) {
        auto it = v.find(pivots[k]);
        if (it == v.end()) continue;
        const double f = it->second / rows[k].at(pivots[k]);
        for (const auto& [pos, val] : rows[k]) v[pos] -= f * val;
      }
      double top = 0.0;
      for (const auto& [pos, val] : v) top = std::max(top, std::abs(val));
      if (top < 1e-9) continue;
      int pivot = -1;
      for (auto it = v.rbegin(); it != v.rend(); ++it) {
        if (std::abs(it->second) >= 0.1 * top) {
          pivot = it->first;
          break;
        }
      }
      std::erase_if(v, [&](const auto& kv) { return std::abs(kv.second) < 1e-13 * top; });
      rows.push_back(std::move(v));
      pivots.push_back(pivot);
    }
  }
  std::sort(pivots.begin(), pivots.end());
  return pivots;
}

}  // namespace

sdp::SdpInstance Relaxation::to_instance() const {
  sdp::SdpInstance inst;
  inst.num_vars = static_cast<int>(y_dim);
  inst.objective = objective;
  sdp::LmiBlock moment;
  std::vector<int> kept;
  for (int i = 0, d = 0; i < static_cast<int>(moment_block.rows()); ++i) {
    if (d < static_cast<int>(moment_dropped.size()) && moment_dropped[static_cast<std::size_t>(d)] == i) {
      ++d;
    } else {
      kept.push_back(i);
    }
  }
  moment.dim = static_cast<int>(kept.size());
  moment.label = "moment";
  for (int a = 0; a < moment.dim; ++a) {
    for (int b = a; b < moment.dim; ++b) {
      const auto ord = moment_block(kept[static_cast<std::size_t>(a)], kept[static_cast<std::size_t>(b)]);
      moment.entries.push_back({static_cast<std::int32_t>(ord - 1), a, b, 1.0});
    }
  }
  inst.blocks.push_back(std::move(moment));
  for (const auto& loc : localizing) {
    if (loc.kind == ConstraintKind::equality) {
      if (equality_mode != EqualityMode::paired) continue;
      append_block(inst, loc.block, 1.0, loc.label + "+");
      append_block(inst, loc.block, -1.0, loc.label + "-");
    } else {
      append_block(inst, loc.block, 1.0, loc.label);
    }
  }
  inst.equalities = equalities;
  return inst;
}

Relaxation build_relaxation(const PolyProblem& problem, int order, EqualityMode mode) {
  problem.check();
  const int t = problem.num_vars();
  if (order < 1) throw OrderError(fmt::format("relaxation order {} < 1", order));
  if (half_degree(problem.objective) > order) {
    throw OrderError(fmt::format("objective of degree {} needs relaxation order >= {}, got {}",
                                 problem.objective.degree(), half_degree(problem.objective), order));
  }
  Relaxation r;
  r.order = order;
  r.num_vars = t;
  r.equality_mode = mode;
  r.y_dim = basis_size(t, 2 * order);
  if (r.y_dim > std::numeric_limits<std::int32_t>::max()) throw OverflowError("moment vector too long");
  r.moment_block = build_moment_block(t, order);
  r.objective.assign(static_cast<std::size_t>(r.y_dim), 0.0);
  for (const auto& [alpha, coef] : problem.objective.terms()) {
    r.objective[static_cast<std::size_t>(rank(alpha, 2 * order) - 1)] += coef;
  }
  r.equalities.push_back({{{0, 1.0}}, 1.0});

  for (std::size_t l = 0; l < problem.constraints.size(); ++l) {
    const auto& c = problem.constraints[l];
    LocalizingInfo info;
    info.constraint = static_cast<int>(l);
    info.kind = c.kind;
    info.degree = c.poly.degree();
    info.label = constraint_name(c, l);
    info.block = build_localizing_block(c.poly, order, info.label);
    info.reduced_order = order - half_degree(c.poly);
    if (c.kind == ConstraintKind::equality && mode == EqualityMode::linear) {
      // Every entry of the localizing matrix vanishes; distinct entries are
      // indexed by the monomials of degree <= 2 * reduced_order.
      for (const auto& gamma : graded_basis(t, 2 * info.reduced_order)) {
        sdp::LinearEquality eq;
        for (const auto& [ord, coef] : shifted_form(c.poly, gamma, 2 * order)) {
          eq.coeffs.emplace_back(static_cast<std::int32_t>(ord - 1), coef);
        }
        if (!eq.coeffs.empty()) r.equalities.push_back(std::move(eq));
      }
    }
    r.localizing.push_back(std::move(info));
  }
  if (mode == EqualityMode::linear) r.moment_dropped = forced_kernel_pivots(problem, order);
  if (problem.ball_radius_sq) {
    Polynomial ball = Polynomial::constant(t, *problem.ball_radius_sq);
    for (int s = 0; s < t; ++s) ball.add_term(MultiIndex::unit(t, s) + MultiIndex::unit(t, s), -1.0);
    LocalizingInfo info;
    info.kind = ConstraintKind::inequality;
    info.degree = 2;
    info.label = "ball";
    info.reduced_order = order - 1;
    info.block = build_localizing_block(ball, order, info.label);
    r.localizing.push_back(std::move(info));
  }
  return r;
}

sdp::SdpInstance assemble(const PolyProblem& problem, int order, EqualityMode mode) {
  return build_relaxation(problem, order, mode).to_instance();
}

int numerical_rank(const Eigen::MatrixXd& m, double rank_tol) {
  if (m.size() == 0) return 0;
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
          .eigenvalues()
          .cwiseAbs();
  const double top = ev.maxCoeff();
  if (top == 0.0) return 0;
  return static_cast<int>((ev.array() > rank_tol * top).count());
}

namespace {

Eigen::MatrixXd moment_matrix(const std::vector<double>& y, int num_vars, int order) {
  const OrdinalMatrix idx = build_moment_block(num_vars, order);
  Eigen::MatrixXd m(idx.rows(), idx.cols());
  for (Eigen::Index i = 0; i < idx.rows(); ++i) {
    for (Eigen::Index j = 0; j < idx.cols(); ++j) m(i, j) = y.at(static_cast<std::size_t>(idx(i, j) - 1));
  }
  return m;
}

bool nearly_feasible(const sdp::SdpInstance& inst, const std::vector<double>& y, double tol) {
  if (y.size() != static_cast<std::size_t>(inst.num_vars)) return false;
  for (const auto& eq : inst.equalities) {
    double v = -eq.rhs;
    for (const auto& [var, coef] : eq.coeffs) v += coef * y[static_cast<std::size_t>(var)];
    if (std::abs(v) > tol) return false;
  }
  for (std::size_t b = 0; b < inst.blocks.size(); ++b) {
    const Eigen::MatrixXd f = inst.block_value(b, y);
    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
    if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(f, Eigen::EigenvaluesOnly).eigenvalues()(0) < -tol * scale) {
      return false;
    }
  }
  return true;
}

}  // namespace

FlatnessCertificate check_flatness(const std::vector<double>& y, const PolyProblem& problem, int order,
                                   double rank_tol) {
  FlatnessCertificate cert;
  cert.order = order;
  cert.low_order = std::max(0, order - constraint_degree_bound(problem));
  const Eigen::MatrixXd m = moment_matrix(y, problem.num_vars(), order);
  const auto low = static_cast<Eigen::Index>(basis_size(problem.num_vars(), cert.low_order));
  cert.rank = numerical_rank(m, rank_tol);
  cert.low_rank = numerical_rank(m.topLeftCorner(low, low), rank_tol);
  cert.flat = cert.rank == cert.low_rank && cert.rank > 0;
  return cert;
}

Extraction extract_minimizers(const std::vector<double>& y, const PolyProblem& problem, int order, int rank_r,
                              double feas_tol, std::uint64_t seed) {
  Extraction out;
  const int t = problem.num_vars();
  std::vector<std::vector<double>> candidates;
  if (rank_r == 1) {
    candidates.emplace_back(y.begin() + 1, y.begin() + 1 + t);
  } else if (rank_r > 1) {
    const Eigen::MatrixXd m = moment_matrix(y, t, order);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::Index n = m.rows();
    // Columns of the top-r eigenvectors scaled by sqrt(lambda): M ~ V V^T.
    Eigen::MatrixXd v(n, rank_r);
    for (int k = 0; k < rank_r; ++k) {
      const double lambda = std::max(es.eigenvalues()(n - 1 - k), 0.0);
      v.col(k) = es.eigenvectors().col(n - 1 - k) * std::sqrt(lambda);
    }
    // Column echelon form; pivot rows pick the monomial basis w_1..w_r.
    const double tol = 1e-6 * v.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> pivots;
    int col = 0;
    for (Eigen::Index row = 0; row < n && col < rank_r; ++row) {
      Eigen::Index best;
      const double mag = v.row(row).segment(col, rank_r - col).cwiseAbs().maxCoeff(&best);
      if (mag <= tol) continue;
      v.col(col).swap(v.col(col + best));
      v.col(col) /= v(row, col);
      for (int k = 0; k < rank_r; ++k) {
        if (k != col) v.col(k) -= v(row, k) * v.col(col);
      }
      pivots.push_back(row);
      ++col;
    }
    if (col < rank_r) {
      out.warning = "column space rank below the moment-matrix rank";
      return out;
    }
    const auto basis = graded_basis(t, order);
    std::vector<Eigen::MatrixXd> mult(static_cast<std::size_t>(t), Eigen::MatrixXd(rank_r, rank_r));
    for (int s = 0; s < t; ++s) {
      for (int j = 0; j < rank_r; ++j) {
        const MultiIndex shifted = basis[static_cast<std::size_t>(pivots[static_cast<std::size_t>(j)])] +
                                   MultiIndex::unit(t, s);
        if (shifted.degree() > order) {
          out.warning = "basis monomial at top degree; moment matrix is not flat";
          return out;
        }
        mult[static_cast<std::size_t>(s)].row(j) = v.row(rank(shifted, order) - 1);
      }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(rank_r, rank_r);
    double total = 0.0;
    for (int s = 0; s < t; ++s) {
      const double w = u(rng);
      combo += w * mult[static_cast<std::size_t>(s)];
      total += w;
    }
    combo /= total;
    Eigen::RealSchur<Eigen::MatrixXd> schur(combo);
    const Eigen::MatrixXd q = schur.matrixU();
    for (int j = 0; j < rank_r; ++j) {
      std::vector<double> x(static_cast<std::size_t>(t));
      for (int s = 0; s < t; ++s) x[static_cast<std::size_t>(s)] = q.col(j).dot(mult[static_cast<std::size_t>(s)] * q.col(j));
      candidates.push_back(std::move(x));
    }
  } else {
    out.warning = "moment matrix has rank 0";
    return out;
  }
  std::size_t rejected = 0;
  for (auto& x : candidates) {
    if (atom_feasible(problem, x, feas_tol)) {
      out.atoms.push_back(std::move(x));
    } else {
      ++rejected;
    }
  }
  std::sort(out.atoms.begin(), out.atoms.end());
  out.ok = rejected == 0 && !out.atoms.empty();
  if (rejected) out.warning = fmt::format("{} extracted atom(s) violate the constraints", rejected);
  return out;
}

HierarchyResult run_hierarchy(const PolyProblem& problem, const HierarchyOptions& options) {
  const int h_min = min_order(problem);
  const int h_start = options.h_start == 0 ? h_min : options.h_start;
  const int h_max = options.h_max == 0 ? h_start : options.h_max;
  if (h_start < h_min) {
    throw OrderError(fmt::format("starting order {} below the minimum {}", h_start, h_min));
  }
  if (h_max < h_start) throw OrderError(fmt::format("order range [{}, {}] is empty", h_start, h_max));
  HierarchyResult result;
  for (int h = h_start; h <= h_max; ++h) {
    const Relaxation relax = build_relaxation(problem, h, options.equality_mode);
    const sdp::SdpInstance inst = relax.to_instance();
    log::debug("order {}: y_dim {}, {} blocks, {} equalities", h, relax.y_dim, inst.blocks.size(),
               inst.equalities.size());
    sdp::SdpResult sol = sdp::solve(inst, options.solver);
    OrderRecord rec;
    rec.order = h;
    rec.status = sol.status;
    rec.gap = sol.gap;
    rec.y_dim = relax.y_dim;
    rec.free_vars = sol.free_vars;
    rec.iterations = sol.iterations;
    rec.message = sol.message;
    log::info("order {}: {} after {} iterations, bound {:.10g}, gap {:.2e}", h, sdp::to_string(sol.status),
              sol.iterations, sol.dual_objective, sol.gap);
    if (sol.status == sdp::Status::primal_infeasible) {
      result.records.push_back(rec);
      result.infeasible = true;
      result.certificate = sol.certificate;
      result.message = "constraint set empty";
      return result;
    }
    if (sol.status != sdp::Status::optimal) {
      result.records.push_back(rec);
      result.message = fmt::format("solver stopped at order {}: {} ({})", h, sdp::to_string(sol.status), sol.message);
      return result;
    }
    rec.lower_bound = sol.dual_objective;
    result.final_bound = result.final_bound ? std::max(*result.final_bound, rec.lower_bound) : rec.lower_bound;
    result.moments = sol.y;

    FlatnessCertificate flat = check_flatness(sol.y, problem, h, options.rank_tol);
    if (!flat.flat && options.face_minimization) {
      // Stay on the optimal face and minimize a generic trace of M_h(y).
      sdp::SdpInstance face = inst;
      std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(h));
      std::normal_distribution<double> g;
      const auto dim = relax.moment_block.rows();
      Eigen::MatrixXd gm(dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) gm(i, j) = g(rng);
      }
      const Eigen::MatrixXd r = gm * gm.transpose() / static_cast<double>(dim);
      std::fill(face.objective.begin(), face.objective.end(), 0.0);
      for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) face.objective[static_cast<std::size_t>(relax.moment_block(i, j) - 1)] += r(i, j);
      }
      const double slack = 10.0 * options.solver.gap_tol * (1.0 + std::abs(sol.primal_objective));
      sdp::LmiBlock cut;
      cut.dim = 1;
      cut.label = "objective";
      cut.entries.push_back({sdp::BlockEntry::kConstant, 0, 0, sol.primal_objective + slack});
      for (std::size_t k = 0; k < relax.objective.size(); ++k) {
        if (relax.objective[k] != 0.0) cut.entries.push_back({static_cast<std::int32_t>(k), 0, 0, -relax.objective[k]});
      }
      face.blocks.push_back(std::move(cut));
      sdp::SolverOptions face_options = options.solver;
      face_options.certify_infeasibility = false;
      sdp::SdpResult face_sol = sdp::solve(face, face_options);
      log::info("order {}: face minimization {} after {} iterations", h, sdp::to_string(face_sol.status),
                face_sol.iterations);
      // The objective cut leaves a very thin feasible slab, so the face
      // problem often stops short of optimality; any feasible iterate on the
      // face is still a valid candidate, and the atoms are checked below.
      if (face_sol.status == sdp::Status::optimal || nearly_feasible(face, face_sol.y, 1e-7)) {
        const FlatnessCertificate face_flat = check_flatness(face_sol.y, problem, h, options.rank_tol);
        if (face_flat.flat) {
          flat = face_flat;
          rec.face_minimized = true;
          result.moments = face_sol.y;
        }
      }
    }
    rec.rank = flat.rank;
    rec.low_rank = flat.low_rank;
    rec.flat = flat.flat;
    result.records.push_back(rec);
    log::info("order {}: ranks ({}, {}), flat {}", h, flat.rank, flat.low_rank, flat.flat);
    if (flat.flat) {
      result.certified_optimal = true;
      if (options.extract) {
        Extraction ex = extract_minimizers(result.moments, problem, h, flat.rank, options.extraction_tol,
                                           options.seed);
        if (rec.face_minimized) {
          // The flat point came from the face problem: its atoms must be
          // feasible and attain the bound of the first solve.
          bool attained = ex.ok && !ex.atoms.empty();
          for (const auto& x : ex.atoms) {
            attained = attained && std::abs(problem.objective.evaluate(x) - rec.lower_bound) <=
                                       options.extraction_tol * (1.0 + std::abs(rec.lower_bound));
          }
          if (!attained) {
            result.certified_optimal = false;
            rec.flat = false;
            result.records.back().flat = false;
            if (ex.warning.empty()) ex.warning = "face point is flat but its atoms do not attain the bound";
          }
        }
        result.minimizers = std::move(ex.atoms);
        if (!ex.warning.empty()) {
          result.message = ex.warning;
          log::warn("order {}: {}", h, ex.warning);
        }
      }
      if (result.certified_optimal) return result;
    }
  }
  return result;
}

}  // namespace momentsdp::lasserre
