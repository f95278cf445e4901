// Infeasible-start primal-dual interior-point method (HKM direction with a
// Mehrotra predictor-corrector) on the equality-free reduced instance.

#include "momentsdp/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "momentsdp/error.hpp"

namespace momentsdp::sdp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Triplet {
  int row;
  int col;
  double value;
};

struct VarBlock {
  int block;
  std::vector<Triplet> entries;  // both triangles spelled out
  std::vector<int> rows;         // distinct rows touched
};

// Reduced instance in solver layout. Only blocks that depend on some variable.
struct Model {
  int m = 0;
  int n_total = 0;
  std::vector<int> dims;
  std::vector<MatrixXd> h0;
  VectorXd c;
  double offset = 0.0;
  std::vector<std::vector<VarBlock>> var_blocks;
  // Per block: (var, index into var_blocks[var]) sorted by var.
  std::vector<std::vector<std::pair<int, int>>> block_vars;
  double norm_h0 = 0.0;
  double norm_c = 0.0;
  double max_norm_h = 0.0;
  std::vector<double> norm_h;
};

Model build_model(const SdpInstance& red, std::size_t num_blocks) {
  Model md;
  md.m = red.num_vars;
  md.c = VectorXd::Map(red.objective.data(), md.m);
  md.offset = red.objective_offset;
  md.var_blocks.resize(static_cast<std::size_t>(md.m));
  md.block_vars.resize(num_blocks);
  md.norm_h.assign(static_cast<std::size_t>(md.m), 0.0);
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const auto& block = red.blocks[b];
    md.dims.push_back(block.dim);
    md.n_total += block.dim;
    MatrixXd h0 = MatrixXd::Zero(block.dim, block.dim);
    std::vector<int> slot(static_cast<std::size_t>(md.m), -1);
    for (const auto& e : block.entries) {
      if (e.var == BlockEntry::kConstant) {
        h0(e.row, e.col) += e.value;
        if (e.row != e.col) h0(e.col, e.row) += e.value;
        continue;
      }
      auto& list = md.var_blocks[static_cast<std::size_t>(e.var)];
      int& s = slot[static_cast<std::size_t>(e.var)];
      if (s < 0) {
        s = static_cast<int>(list.size());
        list.push_back({static_cast<int>(b), {}, {}});
      }
      auto& vb = list[static_cast<std::size_t>(s)];
      vb.entries.push_back({e.row, e.col, e.value});
      if (e.row != e.col) vb.entries.push_back({e.col, e.row, e.value});
      const double w = e.row == e.col ? 1.0 : 2.0;
      md.norm_h[static_cast<std::size_t>(e.var)] += w * e.value * e.value;
    }
    md.norm_h0 += h0.squaredNorm();
    md.h0.push_back(std::move(h0));
  }
  md.norm_h0 = std::sqrt(md.norm_h0);
  md.norm_c = md.c.norm();
  for (int s = 0; s < md.m; ++s) {
    auto& nh = md.norm_h[static_cast<std::size_t>(s)];
    nh = std::sqrt(nh);
    md.max_norm_h = std::max(md.max_norm_h, nh);
    for (std::size_t k = 0; k < md.var_blocks[static_cast<std::size_t>(s)].size(); ++k) {
      auto& vb = md.var_blocks[static_cast<std::size_t>(s)][k];
      for (const auto& t : vb.entries) vb.rows.push_back(t.row);
      std::sort(vb.rows.begin(), vb.rows.end());
      vb.rows.erase(std::unique(vb.rows.begin(), vb.rows.end()), vb.rows.end());
      md.block_vars[static_cast<std::size_t>(vb.block)].emplace_back(s, static_cast<int>(k));
    }
  }
  return md;
}

using Blocks = std::vector<MatrixXd>;

Blocks apply(const Model& md, const VectorXd& y) {
  Blocks out = md.h0;
  for (int s = 0; s < md.m; ++s) {
    const double ys = y(s);
    if (ys == 0.0) continue;
    for (const auto& vb : md.var_blocks[static_cast<std::size_t>(s)]) {
      auto& f = out[static_cast<std::size_t>(vb.block)];
      for (const auto& t : vb.entries) f(t.row, t.col) += ys * t.value;
    }
  }
  return out;
}

// (A^T X)_s = sum_b tr[H_s X_b]
VectorXd adjoint(const Model& md, const Blocks& x) {
  VectorXd out = VectorXd::Zero(md.m);
  for (int s = 0; s < md.m; ++s) {
    double sum = 0.0;
    for (const auto& vb : md.var_blocks[static_cast<std::size_t>(s)]) {
      const auto& xb = x[static_cast<std::size_t>(vb.block)];
      for (const auto& t : vb.entries) sum += t.value * xb(t.col, t.row);
    }
    out(s) = sum;
  }
  return out;
}

double inner(const Blocks& a, const Blocks& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i].cwiseProduct(b[i]).sum();
  return sum;
}

double frob(const Blocks& a) {
  double sum = 0.0;
  for (const auto& m : a) sum += m.squaredNorm();
  return std::sqrt(sum);
}

double trace(const Blocks& a) {
  double sum = 0.0;
  for (const auto& m : a) sum += m.trace();
  return sum;
}

MatrixXd sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// M_st = sum_b tr[H_s Z H_t S^-1] with B_s = S^-1 H_s Z restricted to the rows
// where H_s is nonzero.
MatrixXd schur(const Model& md, const Blocks& s_inv, const Blocks& z) {
  MatrixXd m = MatrixXd::Zero(md.m, md.m);
  std::vector<std::vector<int>> local(md.dims.size());
  for (std::size_t b = 0; b < md.dims.size(); ++b) local[b].assign(static_cast<std::size_t>(md.dims[b]), -1);
  for (int s = 0; s < md.m; ++s) {
    for (const auto& vb : md.var_blocks[static_cast<std::size_t>(s)]) {
      const auto b = static_cast<std::size_t>(vb.block);
      const int n = md.dims[b];
      const int nr = static_cast<int>(vb.rows.size());
      auto& loc = local[b];
      for (int i = 0; i < nr; ++i) loc[static_cast<std::size_t>(vb.rows[static_cast<std::size_t>(i)])] = i;
      MatrixXd g = MatrixXd::Zero(nr, n);
      for (const auto& t : vb.entries) g.row(loc[static_cast<std::size_t>(t.row)]) += t.value * z[b].row(t.col);
      MatrixXd sr(n, nr);
      for (int i = 0; i < nr; ++i) sr.col(i) = s_inv[b].col(vb.rows[static_cast<std::size_t>(i)]);
      const MatrixXd bs = sr * g;  // S^-1 H_s Z
      for (int i = 0; i < nr; ++i) loc[static_cast<std::size_t>(vb.rows[static_cast<std::size_t>(i)])] = -1;
      const auto& vars = md.block_vars[b];
      auto start = std::lower_bound(vars.begin(), vars.end(), std::make_pair(s, 0));
      for (auto it = start; it != vars.end(); ++it) {
        const auto& other = md.var_blocks[static_cast<std::size_t>(it->first)][static_cast<std::size_t>(it->second)];
        double sum = 0.0;
        for (const auto& t : other.entries) sum += t.value * bs(t.col, t.row);
        m(s, it->first) += sum;
      }
    }
  }
  m.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
  return m;
}

// Largest alpha <= 1 keeping X + alpha dX positive definite, scaled by the
// fraction-to-boundary factor.
double step_length(const Blocks& x, const Blocks& dx, double fraction) {
  double max_step = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < x.size(); ++b) {
    Eigen::LLT<MatrixXd> llt(x[b]);
    if (llt.info() != Eigen::Success) return 0.0;
    MatrixXd w = llt.matrixL().solve(dx[b]);
    w = llt.matrixL().solve(w.transpose()).eval();
    const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(sym(w), Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lmin < 0) max_step = std::min(max_step, -1.0 / lmin);
  }
  return std::min(1.0, fraction * max_step);
}

double min_eigenvalue(const MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(sym(a), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

constexpr double kReducedAccuracy = 1e-6;

struct CoreResult {
  Status status = Status::numerical_failure;
  VectorXd y;
  Blocks z;
  double pobj = 0.0;
  double dobj = 0.0;
  double pres = 0.0;
  double dres = 0.0;
  double rgap = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> history;
  std::string message;
  // Normalized direction of a diverging dual iterate, when one was seen.
  std::optional<Blocks> ray;
};

CoreResult run_ipm(const Model& md, const SolverOptions& opt) {
  CoreResult res;
  const int nb = static_cast<int>(md.dims.size());
  const double n = std::max(1, md.n_total);
  VectorXd y = VectorXd::Zero(md.m);

  // Variables absent from every block: free directions of the objective.
  std::vector<char> unused(static_cast<std::size_t>(md.m), 0);
  for (int s = 0; s < md.m; ++s) {
    if (md.var_blocks[static_cast<std::size_t>(s)].empty()) {
      unused[static_cast<std::size_t>(s)] = 1;
      if (std::abs(md.c(s)) > 0) {
        res.status = Status::dual_infeasible;
        res.message = fmt::format("variable {} is unconstrained with nonzero cost", s);
        res.y = y;
        return res;
      }
    }
  }

  double alpha = 0.0;
  for (int s = 0; s < md.m; ++s) {
    alpha = std::max(alpha, (1.0 + std::abs(md.c(s))) / (1.0 + md.norm_h[static_cast<std::size_t>(s)]));
  }
  alpha = std::max(alpha * n, 1.0);
  const double beta = (1.0 + std::max(md.max_norm_h, md.norm_h0)) / std::sqrt(n);
  Blocks s_mat(static_cast<std::size_t>(nb));
  Blocks z(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    s_mat[static_cast<std::size_t>(b)] = 10.0 * beta * MatrixXd::Identity(md.dims[static_cast<std::size_t>(b)], md.dims[static_cast<std::size_t>(b)]);
    z[static_cast<std::size_t>(b)] = 10.0 * alpha * MatrixXd::Identity(md.dims[static_cast<std::size_t>(b)], md.dims[static_cast<std::size_t>(b)]);
  }
  const double z_scale = std::max(alpha, 1.0) * n;

  // Best iterate seen so far, returned when the run breaks down after
  // getting close enough.
  CoreResult best;
  double best_merit = std::numeric_limits<double>::infinity();
  auto give_up = [&](Status status, std::string message) {
    if (best_merit <= kReducedAccuracy) {
      best.status = Status::optimal;
      best.message = fmt::format("reduced accuracy ({}: {:.1e})", message, best_merit);
      best.history = std::move(res.history);
      best.iterations = res.iterations;
      return best;
    }
    res.status = status;
    res.message = std::move(message);
    return res;
  };

  int stalls = 0;
  for (int iter = 0;; ++iter) {
    const Blocks f = apply(md, y);
    Blocks p_res(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) p_res[static_cast<std::size_t>(b)] = f[static_cast<std::size_t>(b)] - s_mat[static_cast<std::size_t>(b)];
    const VectorXd d_res = md.c - adjoint(md, z);
    const double pobj = md.c.dot(y) + md.offset;
    const double dobj = -inner(md.h0, z) + md.offset;
    const double mu = inner(s_mat, z) / n;
    const double pres = frob(p_res) / (1.0 + md.norm_h0);
    const double dres = d_res.norm() / (1.0 + md.norm_c);
    const double rgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    res.y = y;
    res.z = z;
    res.pobj = pobj;
    res.dobj = dobj;
    res.pres = pres;
    res.dres = dres;
    res.rgap = rgap;
    res.iterations = iter;
    const double merit = std::max({pres, dres, rgap});
    if (merit < best_merit) {
      best_merit = merit;
      best.y = y;
      best.z = z;
      best.pobj = pobj;
      best.dobj = dobj;
      best.pres = pres;
      best.dres = dres;
      best.rgap = rgap;
    }

    if (pres <= opt.feas_tol && dres <= opt.feas_tol && rgap <= opt.gap_tol) {
      res.status = Status::optimal;
      return res;
    }
    // Diverging dual iterate with a nearly feasible normalized direction
    // points at a primal infeasibility certificate.
    const double tr_z = trace(z);
    if (tr_z > 1e8 * z_scale) {
      Blocks zn = z;
      for (auto& m : zn) m /= tr_z;
      const double h0z = inner(md.h0, zn);
      const double az = adjoint(md, zn).norm();
      if (h0z < 0 && az <= 1e-6 * std::max(1.0, std::abs(h0z))) {
        res.status = Status::primal_infeasible;
        res.message = "dual iterate diverged along an infeasibility ray";
        res.ray = std::move(zn);
        return res;
      }
    }
    // Diverging primal iterate with decreasing objective: unbounded.
    if (y.norm() > 1e8 * (1.0 + md.norm_h0) && pres <= 1e-6 && pobj < -1e8 * (1.0 + std::abs(dobj))) {
      res.status = Status::dual_infeasible;
      res.message = "primal objective unbounded below";
      return res;
    }
    if (iter >= opt.max_iter) {
      return give_up(Status::max_iter, fmt::format("no convergence after {} iterations", iter));
    }

    Blocks s_inv(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) {
      Eigen::LLT<MatrixXd> llt(s_mat[static_cast<std::size_t>(b)]);
      if (llt.info() != Eigen::Success) {
        return give_up(Status::numerical_failure, "slack matrix lost definiteness");
      }
      s_inv[static_cast<std::size_t>(b)] = llt.solve(MatrixXd::Identity(md.dims[static_cast<std::size_t>(b)], md.dims[static_cast<std::size_t>(b)]));
      s_inv[static_cast<std::size_t>(b)] = sym(s_inv[static_cast<std::size_t>(b)]);
    }
    MatrixXd m = schur(md, s_inv, z);
    for (int s = 0; s < md.m; ++s) {
      if (unused[static_cast<std::size_t>(s)]) m(s, s) = 1.0;
    }
    const double diag_max = m.diagonal().cwiseAbs().maxCoeff();
    Eigen::LLT<MatrixXd> m_llt;
    double reg = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      MatrixXd mr = m;
      if (reg > 0) mr.diagonal().array() += reg;
      m_llt.compute(mr);
      if (m_llt.info() == Eigen::Success) break;
      reg = reg == 0.0 ? 1e-14 * std::max(diag_max, 1e-300) : reg * 100.0;
    }
    if (m_llt.info() != Eigen::Success) {
      return give_up(Status::numerical_failure, "Schur complement is not positive definite");
    }

    // rhs_s = tr[H_s R] - c_s where dZ eliminates to M dy = rhs.
    auto direction = [&](const Blocks& r_mat, double sigma_mu, const Blocks* k_mat, VectorXd& dy, Blocks& ds,
                         Blocks& dz) {
      const VectorXd rhs = adjoint(md, r_mat) - md.c;
      dy = m_llt.solve(rhs);
      // Refinement against the unregularized system.
      for (int k = 0; k < 2; ++k) {
        const VectorXd r = rhs - m * dy;
        if (r.norm() <= 1e-15 * (1.0 + rhs.norm())) break;
        dy += m_llt.solve(r);
      }
      for (int s = 0; s < md.m; ++s) {
        if (unused[static_cast<std::size_t>(s)]) dy(s) = 0.0;
      }
      ds = p_res;
      for (int s = 0; s < md.m; ++s) {
        if (dy(s) == 0.0) continue;
        for (const auto& vb : md.var_blocks[static_cast<std::size_t>(s)]) {
          auto& d = ds[static_cast<std::size_t>(vb.block)];
          for (const auto& t : vb.entries) d(t.row, t.col) += dy(s) * t.value;
        }
      }
      dz.resize(static_cast<std::size_t>(nb));
      for (int b = 0; b < nb; ++b) {
        const auto bi = static_cast<std::size_t>(b);
        MatrixXd d = sigma_mu * s_inv[bi] - z[bi] - z[bi] * ds[bi] * s_inv[bi];
        if (k_mat) d -= (*k_mat)[bi];
        dz[bi] = sym(d);
      }
    };

    Blocks r_mat(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      r_mat[bi] = -z[bi] * p_res[bi] * s_inv[bi];
    }
    VectorXd dy;
    Blocks ds, dz;
    direction(r_mat, 0.0, nullptr, dy, ds, dz);
    const double ap_aff = step_length(s_mat, ds, 1.0);
    const double ad_aff = step_length(z, dz, 1.0);
    double mu_aff = 0.0;
    for (int b = 0; b < nb; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      mu_aff += ((s_mat[bi] + ap_aff * ds[bi]).cwiseProduct(z[bi] + ad_aff * dz[bi])).sum();
    }
    mu_aff /= n;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    Blocks k_mat(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      k_mat[bi] = dz[bi] * ds[bi] * s_inv[bi];
      r_mat[bi] = sigma * mu * s_inv[bi] - k_mat[bi] - z[bi] * p_res[bi] * s_inv[bi];
    }
    direction(r_mat, sigma * mu, &k_mat, dy, ds, dz);
    const double ap = step_length(s_mat, ds, opt.step_fraction);
    const double ad = step_length(z, dz, opt.step_fraction);

    if (opt.record_history) {
      res.history.push_back({iter, pobj, dobj, rgap, pres, dres, mu, ap, ad});
    }
    if (ap < 1e-10 && ad < 1e-10) {
      if (++stalls >= 3) {
        return give_up(Status::numerical_failure, "step length collapsed");
      }
    } else {
      stalls = 0;
    }
    y += ap * dy;
    for (int b = 0; b < nb; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      s_mat[bi] = sym(s_mat[bi] + ap * ds[bi]);
      z[bi] = sym(z[bi] + ad * dz[bi]);
    }
  }
}

// min tau  s.t.  F(y) + tau I >= 0,  tau + 1 >= 0. Its dual optimum is a
// normalized certificate whenever tau* > 0.
std::optional<Blocks> phase_one(const Model& md, const SolverOptions& opt, double& tau_lower) {
  SdpInstance aux;
  aux.num_vars = md.m + 1;
  aux.objective.assign(static_cast<std::size_t>(aux.num_vars), 0.0);
  aux.objective.back() = 1.0;
  const int tau = md.m;
  for (std::size_t b = 0; b < md.dims.size(); ++b) {
    LmiBlock block;
    block.dim = md.dims[b];
    for (int i = 0; i < block.dim; ++i) {
      for (int j = i; j < block.dim; ++j) {
        if (md.h0[b](i, j) != 0.0) block.entries.push_back({BlockEntry::kConstant, i, j, md.h0[b](i, j)});
      }
      block.entries.push_back({tau, i, i, 1.0});
    }
    aux.blocks.push_back(std::move(block));
  }
  for (int s = 0; s < md.m; ++s) {
    for (const auto& vb : md.var_blocks[static_cast<std::size_t>(s)]) {
      for (const auto& t : vb.entries) {
        if (t.row <= t.col) aux.blocks[static_cast<std::size_t>(vb.block)].entries.push_back({s, t.row, t.col, t.value});
      }
    }
  }
  aux.blocks.push_back({1, {{BlockEntry::kConstant, 0, 0, 1.0}, {tau, 0, 0, 1.0}}, "tau"});

  const Model amd = build_model(aux, aux.blocks.size());
  SolverOptions o = opt;
  o.certify_infeasibility = false;
  o.record_history = false;
  o.max_iter = std::max(opt.max_iter, 100);
  CoreResult r = run_ipm(amd, o);
  if (r.status != Status::optimal) return std::nullopt;
  tau_lower = r.dobj;
  Blocks z(r.z.begin(), r.z.end() - 1);
  double tr = trace(z);
  if (tr <= 0) return std::nullopt;
  for (auto& m : z) m /= tr;
  return z;
}

}  // namespace

std::string to_string(Status status) {
  switch (status) {
    case Status::optimal: return "optimal";
    case Status::primal_infeasible: return "primal_infeasible";
    case Status::dual_infeasible: return "dual_infeasible";
    case Status::max_iter: return "max_iter";
    case Status::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

SdpResult solve(const SdpInstance& instance, const SolverOptions& options) {
  if (options.gap_tol <= 0 || options.feas_tol <= 0 || options.max_iter < 1 || options.step_fraction <= 0 ||
      options.step_fraction >= 1) {
    throw InputError("solver options out of range");
  }
  const Reduction red = reduce(instance);
  const std::size_t nkept = red.kept_blocks.size();
  SdpResult out;
  out.free_vars = red.reduced.num_vars;
  out.z.resize(instance.blocks.size());
  for (std::size_t b = 0; b < instance.blocks.size(); ++b) {
    out.z[b] = MatrixXd::Zero(instance.blocks[b].dim, instance.blocks[b].dim);
  }
  auto finish_certificate = [&](const std::vector<MatrixXd>& z_orig) {
    out.certificate = evaluate_certificate(instance, z_orig);
    out.certificate->z = z_orig;
    out.z = z_orig;
  };

  if (!red.consistent) {
    out.status = Status::primal_infeasible;
    out.message = "linear equalities are inconsistent";
    out.y = red.expand(std::vector<double>(static_cast<std::size_t>(red.reduced.num_vars), 0.0));
    return out;
  }
  for (std::size_t k = 0; k < red.constant_blocks.size(); ++k) {
    const auto& block = red.reduced.blocks[nkept + k];
    const MatrixXd h0 = red.reduced.block_coefficient(nkept + k, BlockEntry::kConstant);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h0);
    const double scale = std::max(1.0, h0.cwiseAbs().maxCoeff());
    if (es.eigenvalues()(0) < -1e-10 * scale) {
      out.status = Status::primal_infeasible;
      out.message = fmt::format("constant block '{}' has eigenvalue {:.3e}", block.label, es.eigenvalues()(0));
      out.y = red.expand(std::vector<double>(static_cast<std::size_t>(red.reduced.num_vars), 0.0));
      std::vector<MatrixXd> z_orig = out.z;
      const VectorXd v = es.eigenvectors().col(0);
      z_orig[static_cast<std::size_t>(red.constant_blocks[k])] = v * v.transpose();
      finish_certificate(z_orig);
      return out;
    }
  }

  const Model md = build_model(red.reduced, nkept);
  CoreResult core = run_ipm(md, options);

  auto to_original = [&](const Blocks& z) {
    std::vector<MatrixXd> z_orig = out.z;
    for (std::size_t b = 0; b < nkept; ++b) z_orig[static_cast<std::size_t>(red.kept_blocks[b])] = z[b];
    return z_orig;
  };

  out.status = core.status;
  out.message = core.message;
  out.iterations = core.iterations;
  out.history = std::move(core.history);
  std::vector<double> yf(core.y.data(), core.y.data() + core.y.size());
  out.y = red.expand(yf);
  out.primal_objective = core.pobj;
  out.dual_objective = core.dobj;
  out.gap = core.pobj - core.dobj;
  out.relative_gap = core.rgap;
  out.primal_residual = core.pres;
  out.dual_residual = core.dres;
  out.z = to_original(core.z);

  if (core.status == Status::optimal || core.status == Status::dual_infeasible) return out;
  if (core.status == Status::primal_infeasible && core.ray) {
    finish_certificate(to_original(*core.ray));
    infeasibility_certificate(instance, out);
    if (out.status == Status::primal_infeasible) return out;
    out.status = core.status == Status::primal_infeasible ? Status::numerical_failure : core.status;
  }
  if (!options.certify_infeasibility) return out;

  double tau = 0.0;
  auto cert = phase_one(md, options, tau);
  const double tau_tol = 1e-6 * std::max(1.0, md.norm_h0 / std::sqrt(std::max(1, md.n_total)));
  if (cert && tau > tau_tol) {
    const Status before = out.status;
    out.status = Status::primal_infeasible;
    out.message = fmt::format("phase one: F(y) + tau I >= 0 needs tau >= {:.3e}", tau);
    finish_certificate(to_original(*cert));
    infeasibility_certificate(instance, out);
    if (out.status != Status::primal_infeasible) out.status = before;
  } else if (out.status == Status::primal_infeasible) {
    out.status = Status::numerical_failure;
  }
  return out;
}

InfeasibilityCertificate evaluate_certificate(const SdpInstance& instance, const std::vector<MatrixXd>& z) {
  if (z.size() != instance.blocks.size()) throw InputError("certificate block count mismatch");
  const Reduction red = reduce(instance);
  InfeasibilityCertificate cert;
  cert.min_eigenvalue = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> reduced_of(instance.blocks.size());
  for (std::size_t k = 0; k < red.kept_blocks.size(); ++k) reduced_of[static_cast<std::size_t>(red.kept_blocks[k])] = k;
  for (std::size_t k = 0; k < red.constant_blocks.size(); ++k) {
    reduced_of[static_cast<std::size_t>(red.constant_blocks[k])] = red.kept_blocks.size() + k;
  }
  std::vector<double> ts(static_cast<std::size_t>(red.reduced.num_vars), 0.0);
  for (std::size_t b = 0; b < instance.blocks.size(); ++b) {
    const auto& zb = z[b];
    if (zb.rows() != instance.blocks[b].dim || zb.cols() != instance.blocks[b].dim) {
      throw InputError("certificate block has wrong dimension");
    }
    cert.min_eigenvalue = std::min(cert.min_eigenvalue, min_eigenvalue(zb));
    cert.trace_z += zb.trace();
    for (const auto& e : red.reduced.blocks[reduced_of[b]].entries) {
      const double w = e.row == e.col ? zb(e.row, e.row) : zb(e.row, e.col) + zb(e.col, e.row);
      if (e.var == BlockEntry::kConstant) {
        cert.trace_z_h0 += e.value * w;
      } else {
        ts[static_cast<std::size_t>(e.var)] += e.value * w;
      }
    }
  }
  for (double v : ts) cert.max_abs_trace_z_hs = std::max(cert.max_abs_trace_z_hs, std::abs(v));
  if (instance.blocks.empty()) cert.min_eigenvalue = 0.0;
  return cert;
}

std::optional<InfeasibilityCertificate> infeasibility_certificate(const SdpInstance& instance, SdpResult& result,
                                                                  double tol) {
  if (result.status != Status::primal_infeasible) return std::nullopt;
  if (!result.certificate) {
    // Inconsistent equalities carry no matrix certificate.
    return std::nullopt;
  }
  InfeasibilityCertificate cert = evaluate_certificate(instance, result.certificate->z);
  cert.z = result.certificate->z;
  const bool ok = cert.trace_z_h0 < -tol && cert.max_abs_trace_z_hs <= tol * std::max(1.0, cert.trace_z) &&
                  cert.min_eigenvalue >= -tol * std::max(1.0, cert.trace_z);
  if (!ok) {
    result.status = Status::numerical_failure;
    result.message = fmt::format("certificate rejected: tr[Z H0]={:.3e}, max|tr[Z H_s]|={:.3e}, lambda_min={:.3e}",
                                 cert.trace_z_h0, cert.max_abs_trace_z_hs, cert.min_eigenvalue);
  }
  result.certificate = cert;
  return cert;
}

ResidualReport validate(const SdpInstance& instance, std::span<const double> y, const std::vector<MatrixXd>& z) {
  instance.check();
  if (static_cast<int>(y.size()) != instance.num_vars) throw InputError("point has wrong length");
  if (z.size() != instance.blocks.size()) throw InputError("dual block count mismatch");
  ResidualReport rep;
  const int n = instance.num_vars;
  VectorXd c = VectorXd::Map(instance.objective.data(), n);
  VectorXd yv = VectorXd::Map(y.data(), n);
  VectorXd atz = VectorXd::Zero(n);
  double h0z = 0.0;
  for (std::size_t b = 0; b < instance.blocks.size(); ++b) {
    const MatrixXd f = instance.block_value(b, y);
    rep.min_eigenvalue.push_back(min_eigenvalue(f));
    rep.min_eigenvalue_z.push_back(min_eigenvalue(z[b]));
    rep.complementarity += f.cwiseProduct(z[b]).sum();
    for (const auto& e : instance.blocks[b].entries) {
      const double w = e.row == e.col ? z[b](e.row, e.row) : z[b](e.row, e.col) + z[b](e.col, e.row);
      if (e.var == BlockEntry::kConstant) {
        h0z += e.value * w;
      } else {
        atz(e.var) += e.value * w;
      }
    }
  }
  VectorXd r = c - atz;
  double eq_term = 0.0;
  const int k = static_cast<int>(instance.equalities.size());
  if (k > 0) {
    MatrixXd et = MatrixXd::Zero(n, k);
    VectorXd rhs(k);
    for (int i = 0; i < k; ++i) {
      const auto& eq = instance.equalities[static_cast<std::size_t>(i)];
      double lhs = 0.0;
      for (const auto& [var, coef] : eq.coeffs) {
        et(var, i) += coef;
        lhs += coef * y[static_cast<std::size_t>(var)];
      }
      rhs(i) = eq.rhs;
      rep.equality_residual = std::max(rep.equality_residual, std::abs(lhs - eq.rhs));
    }
    const VectorXd lambda = et.colPivHouseholderQr().solve(r);
    eq_term = lambda.dot(rhs);
    r -= et * lambda;
  }
  rep.dual_residual = r.norm();
  rep.primal_objective = c.dot(yv) + instance.objective_offset;
  rep.dual_objective = -h0z + eq_term + instance.objective_offset;
  rep.gap = rep.primal_objective - rep.dual_objective;
  return rep;
}

}  // namespace momentsdp::sdp
