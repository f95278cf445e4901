// Random-restart local search over product states (or pure states for the
// channel purity task). Every restart draws from its own generator seeded by
// (seed, restart index), so the merged result does not depend on threading.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <thread>

#include <fmt/format.h>

#include "momentsdp/entangle.hpp"
#include "momentsdp/error.hpp"

namespace momentsdp::entangle {

namespace {

using quantum::BlochVariables;
using quantum::Complex;

double expectation(const CMatrix& w, const CVector& v) { return (v.adjoint() * w * v)(0, 0).real(); }

CVector min_eigenvector(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()));
  return es.eigenvectors().col(0);
}

CVector max_eigenvector(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()));
  return es.eigenvectors().col(a.rows() - 1);
}

// Product states with party -> group ties.
class ProductSpace {
 public:
  ProductSpace(const SubsystemLayout& layout, const std::vector<int>& groups)
      : layout_(layout), vars_(quantum::bloch_variables(layout, groups)) {
    groups_ = static_cast<int>(*std::max_element(vars_.group.begin(), vars_.group.end())) + 1;
    for (int g = 0; g < groups_; ++g) {
      for (int j = 0; j < layout.parties(); ++j) {
        if (vars_.group[static_cast<std::size_t>(j)] == g) {
          group_dim_.push_back(layout.dims[static_cast<std::size_t>(j)]);
          break;
        }
      }
    }
    tied_ = groups_ < layout.parties();
  }

  bool tied() const { return tied_; }
  int groups() const { return groups_; }
  const BlochVariables& vars() const { return vars_; }

  std::vector<CVector> random(std::mt19937_64& rng) const {
    std::vector<CVector> s;
    for (int d : group_dim_) s.push_back(quantum::random_state(d, rng));
    return s;
  }

  CVector product(const std::vector<CVector>& s) const {
    CMatrix v = CMatrix::Ones(1, 1);
    for (int j = 0; j < layout_.parties(); ++j) v = quantum::kron(v, s[static_cast<std::size_t>(vars_.group[static_cast<std::size_t>(j)])]);
    return v.col(0);
  }

  // V_j with the identity in slot j: <phi_{-j}| W |phi_{-j}> = V^dag W V.
  CMatrix slot(const std::vector<CVector>& s, int party) const {
    CMatrix v = CMatrix::Ones(1, 1);
    for (int j = 0; j < layout_.parties(); ++j) {
      if (j == party) {
        const int d = layout_.dims[static_cast<std::size_t>(j)];
        v = quantum::kron(v, CMatrix(CMatrix::Identity(d, d)));
      } else {
        v = quantum::kron(v, s[static_cast<std::size_t>(vars_.group[static_cast<std::size_t>(j)])]);
      }
    }
    return v;
  }

  // d f / d conj(psi_g) for f = <phi|W|phi>, summed over the parties of g.
  std::vector<CVector> gradient(const CMatrix& w, const std::vector<CVector>& s) const {
    std::vector<CVector> g;
    for (int k = 0; k < groups_; ++k) g.push_back(CVector::Zero(group_dim_[static_cast<std::size_t>(k)]));
    for (int j = 0; j < layout_.parties(); ++j) {
      const int k = vars_.group[static_cast<std::size_t>(j)];
      const CMatrix v = slot(s, j);
      g[static_cast<std::size_t>(k)] += v.adjoint() * w * v * s[static_cast<std::size_t>(k)];
    }
    return g;
  }

  std::vector<double> point(const std::vector<CVector>& s, int extra = 0) const {
    std::vector<double> x(static_cast<std::size_t>(vars_.num_vars + extra), 0.0);
    for (int j = 0; j < layout_.parties(); ++j) {
      const auto c = quantum::bloch_coordinates(s[static_cast<std::size_t>(vars_.group[static_cast<std::size_t>(j)])]);
      std::copy(c.begin(), c.end(), x.begin() + vars_.offset[static_cast<std::size_t>(j)]);
    }
    return x;
  }

  // One sweep of exact per-party minimization of <phi|W|phi> (untied only).
  void sweep(const CMatrix& w, std::vector<CVector>& s) const {
    for (int j = 0; j < layout_.parties(); ++j) {
      const CMatrix v = slot(s, j);
      s[static_cast<std::size_t>(j)] = min_eigenvector(v.adjoint() * w * v);
    }
  }

 private:
  SubsystemLayout layout_;
  BlochVariables vars_;
  int groups_ = 0;
  std::vector<int> group_dim_;
  bool tied_ = false;
};

// Riemannian gradient descent with Armijo backtracking on the product of
// unit spheres. value(s) and grad(s) give f and d f / d conj(psi_g).
template <class Value, class Grad>
double descend(std::vector<CVector>& s, Value value, Grad grad, int max_iter, double tol) {
  double f = value(s);
  double step = 0.5;
  for (int it = 0; it < max_iter; ++it) {
    auto g = grad(s);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      g[k] -= s[k].dot(g[k]) * s[k];  // tangent part (dot conjugates s)
      norm2 += g[k].squaredNorm();
    }
    if (norm2 < 1e-26) break;
    bool moved = false;
    for (int tries = 0; tries < 60; ++tries) {
      std::vector<CVector> t = s;
      for (std::size_t k = 0; k < s.size(); ++k) t[k] = (s[k] - step * g[k]).normalized();
      const double ft = value(t);
      if (ft <= f - 1e-4 * step * norm2) {
        const double drop = f - ft;
        s = std::move(t);
        f = ft;
        step *= 2.0;
        moved = true;
        if (drop <= tol) return f;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return f;
}

struct Candidate {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> point;
};

// Product-state minimum of tr[W P].
Candidate linear_restart(const ProductSpace& space, const CMatrix& w, std::mt19937_64& rng, const OracleOptions& o) {
  auto s = space.random(rng);
  double f;
  if (!space.tied()) {
    f = expectation(w, space.product(s));
    for (int it = 0; it < o.max_sweeps; ++it) {
      space.sweep(w, s);
      const double next = expectation(w, space.product(s));
      const double drop = f - next;
      f = next;
      if (drop <= o.tol) break;
    }
  } else {
    f = descend(
        s, [&](const auto& t) { return expectation(w, space.product(t)); },
        [&](const auto& t) { return space.gradient(w, t); }, o.max_sweeps, o.tol);
  }
  return {f, space.point(s)};
}

// Product-state minimum of tr[M^2 P] - tr[M P]^2.
Candidate variance_restart(const ProductSpace& space, const CMatrix& m, std::mt19937_64& rng, const OracleOptions& o) {
  const CMatrix m2 = m * m;
  const auto n = m.rows();
  auto s = space.random(rng);
  auto variance = [&](const std::vector<CVector>& t) {
    const CVector v = space.product(t);
    const double mean = expectation(m, v);
    return expectation(m2, v) - mean * mean;
  };
  double f = variance(s);
  if (!space.tied()) {
    // Alternate between the product state for (M - lambda)^2 and lambda = <M>.
    for (int it = 0; it < o.max_sweeps; ++it) {
      const double lambda = expectation(m, space.product(s));
      const CMatrix shifted = m - lambda * CMatrix::Identity(n, n);
      space.sweep(shifted * shifted, s);
      const double next = variance(s);
      const double drop = f - next;
      f = next;
      if (drop <= o.tol) break;
    }
  }
  f = descend(
      s, variance,
      [&](const std::vector<CVector>& t) {
        const double mean = expectation(m, space.product(t));
        auto g2 = space.gradient(m2, t);
        const auto g1 = space.gradient(m, t);
        for (std::size_t k = 0; k < g2.size(); ++k) g2[k] -= 2.0 * mean * g1[k];
        return g2;
      },
      o.max_sweeps, o.tol);
  return {f, space.point(s)};
}

// Maximum of tr[E(P)^2] over pure P by the monotone fixed-point iteration
// psi <- top eigenvector of E^dag(E(P)).
Candidate purity_restart(const std::vector<CMatrix>& kraus, int dim, std::mt19937_64& rng, const OracleOptions& o) {
  CVector psi = quantum::random_state(dim, rng);
  auto apply = [&](const CMatrix& rho) {
    CMatrix e = CMatrix::Zero(kraus.front().rows(), kraus.front().rows());
    for (const auto& r : kraus) e += r * rho * r.adjoint();
    return e;
  };
  double f = 0.0;
  for (int it = 0; it < o.max_sweeps; ++it) {
    const CMatrix e = apply(psi * psi.adjoint());
    const double next = (e * e).trace().real();
    CMatrix g = CMatrix::Zero(dim, dim);
    for (const auto& r : kraus) g += r.adjoint() * e * r;
    psi = max_eigenvector(g);
    const double gain = next - f;
    f = next;
    if (it > 0 && gain <= o.tol) break;
  }
  const CMatrix e = apply(psi * psi.adjoint());
  f = (e * e).trace().real();
  return {-f, quantum::bloch_coordinates(psi)};
}

// Euclidean projection onto the probability simplex.
Eigen::VectorXd simplex_projection(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

// min_w w^T G w - 2 b^T w over the simplex by accelerated projected gradient.
Eigen::VectorXd simplex_qp(const Eigen::MatrixXd& g, const Eigen::VectorXd& b, Eigen::VectorXd w) {
  const double lip = 2.0 * std::max(1e-12, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().maxCoeff());
  Eigen::VectorXd z = w;
  double t = 1.0;
  for (int it = 0; it < 5000; ++it) {
    const Eigen::VectorXd next = simplex_projection(z - (2.0 * (g * z - b)) / lip);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / tn) * (next - w);
    const double change = (next - w).cwiseAbs().maxCoeff();
    w = next;
    t = tn;
    if (change < 1e-15) break;
  }
  return w;
}

// Squared HS distance to sum_i w_i |pi_i><pi_i| over product vectors pi_i.
Candidate hs_restart(const SubsystemLayout& layout, const CMatrix& rho, int terms, std::mt19937_64& rng,
                     const OracleOptions& o) {
  const ProductSpace space(layout, {});
  const auto n = static_cast<Eigen::Index>(terms);
  std::vector<std::vector<CVector>> factors;
  std::vector<CVector> pis;
  for (int i = 0; i < terms; ++i) {
    factors.push_back(space.random(rng));
    pis.push_back(space.product(factors.back()));
  }
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / terms);
  const double purity = (rho * rho).trace().real();
  auto distance = [&](const Eigen::VectorXd& wt) {
    double d = purity;
    for (Eigen::Index i = 0; i < n; ++i) {
      d -= 2.0 * wt(i) * expectation(rho, pis[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < n; ++j) {
        d += wt(i) * wt(j) * std::norm(pis[static_cast<std::size_t>(i)].dot(pis[static_cast<std::size_t>(j)]));
      }
    }
    return d;
  };
  double f = distance(w);
  const int outer = std::max(1, o.max_sweeps / 10);
  for (int it = 0; it < outer; ++it) {
    Eigen::MatrixXd g(n, n);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      b(i) = expectation(rho, pis[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < n; ++j) g(i, j) = std::norm(pis[static_cast<std::size_t>(i)].dot(pis[static_cast<std::size_t>(j)]));
    }
    w = simplex_qp(g, b, w);
    // Each term moves toward the product state minimizing
    // tr[pi (sum_{j != i} w_j pi_j - rho)], with an exact per-party sweep.
    for (int i = 0; i < terms; ++i) {
      CMatrix a = -rho;
      for (int j = 0; j < terms; ++j) {
        if (j != i) a += w(j) * pis[static_cast<std::size_t>(j)] * pis[static_cast<std::size_t>(j)].adjoint();
      }
      auto trial = factors[static_cast<std::size_t>(i)];
      for (int s = 0; s < 20; ++s) space.sweep(a, trial);
      const CVector old = pis[static_cast<std::size_t>(i)];
      const auto old_factors = factors[static_cast<std::size_t>(i)];
      pis[static_cast<std::size_t>(i)] = space.product(trial);
      factors[static_cast<std::size_t>(i)] = trial;
      if (distance(w) > f) {
        pis[static_cast<std::size_t>(i)] = old;
        factors[static_cast<std::size_t>(i)] = old_factors;
      } else {
        f = distance(w);
      }
    }
    const double next = distance(w);
    const double drop = f - next;
    f = std::min(f, next);
    if (it > 0 && std::abs(drop) <= o.tol) break;
  }
  f = distance(w);

  const HsLayout h = hs_layout(layout, terms);
  std::vector<double> x(static_cast<std::size_t>(h.num_vars), 0.0);
  for (int i = 0; i < terms; ++i) {
    const CMatrix term = w(i) * pis[static_cast<std::size_t>(i)] * pis[static_cast<std::size_t>(i)].adjoint();
    const auto p = quantum::expand(term, layout);
    std::copy(p.begin() + 1, p.end(), x.begin() + i * h.per_term);
    if (i + 1 < terms) x[static_cast<std::size_t>(h.trace_offset + i)] = w(i);
  }
  x[static_cast<std::size_t>(h.epigraph)] = f;
  return {f, x};
}

}  // namespace

OracleResult oracle_upper_bound(const Task& task, const OracleOptions& options) {
  if (options.restarts < 1) throw InputError("oracle needs at least one restart");
  // Validation happens in the encoder; the oracle reuses its checks.
  (void)encode(task);

  std::function<Candidate(std::mt19937_64&)> restart;
  std::optional<ProductSpace> space;
  CMatrix rho;
  switch (task.kind) {
    case TaskKind::geomeasure:
      space.emplace(task.state->layout(), task.groups);
      rho = -(task.state->amplitudes() * task.state->amplitudes().adjoint());
      restart = [&](std::mt19937_64& rng) { return linear_restart(*space, rho, rng, options); };
      break;
    case TaskKind::witness:
      space.emplace(task.layout, task.groups);
      restart = [&](std::mt19937_64& rng) { return linear_restart(*space, task.op, rng, options); };
      break;
    case TaskKind::variance:
      space.emplace(task.layout, task.groups);
      restart = [&](std::mt19937_64& rng) { return variance_restart(*space, task.op, rng, options); };
      break;
    case TaskKind::purity:
      restart = [&](std::mt19937_64& rng) { return purity_restart(task.kraus, task.layout.total_dim(), rng, options); };
      break;
    case TaskKind::hsdist:
      restart = [&](std::mt19937_64& rng) { return hs_restart(task.layout, task.op, task.terms, rng, options); };
      break;
  }

  const int jobs = std::max(1, std::min(options.jobs, options.restarts));
  std::vector<Candidate> best(static_cast<std::size_t>(jobs));
  std::vector<int> best_index(static_cast<std::size_t>(jobs), -1);
  std::atomic<int> next{0};
  auto worker = [&](int id) {
    for (int r = next++; r < options.restarts; r = next++) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                        static_cast<std::uint32_t>(r)};
      std::mt19937_64 rng(seq);
      Candidate c = restart(rng);
      auto& b = best[static_cast<std::size_t>(id)];
      auto& bi = best_index[static_cast<std::size_t>(id)];
      if (c.value < b.value || (c.value == b.value && (bi < 0 || r < bi))) {
        b = std::move(c);
        bi = r;
      }
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int id = 0; id < jobs; ++id) pool.emplace_back(worker, id);
    for (auto& t : pool) t.join();
  }
  OracleResult out;
  out.value = std::numeric_limits<double>::infinity();
  for (int id = 0; id < jobs; ++id) {
    const auto& b = best[static_cast<std::size_t>(id)];
    const int bi = best_index[static_cast<std::size_t>(id)];
    if (bi < 0) continue;
    if (b.value < out.value || (b.value == out.value && bi < out.best_restart)) {
      out.value = b.value;
      out.point = b.point;
      out.best_restart = bi;
    }
  }
  return out;
}

}  // namespace momentsdp::entangle
