#include "momentsdp/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <fmt/format.h>

#include "momentsdp/error.hpp"

namespace momentsdp::quantum {

namespace {

constexpr Complex kI(0.0, 1.0);

std::vector<int> strides(const SubsystemLayout& layout) {
  std::vector<int> s(layout.dims.size(), 1);
  for (int j = layout.parties() - 2; j >= 0; --j) {
    s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j + 1)] * layout.dims[static_cast<std::size_t>(j + 1)];
  }
  return s;
}

void check_op(const CMatrix& op, const SubsystemLayout& layout) {
  if (op.rows() != op.cols() || op.rows() != layout.total_dim()) {
    throw InputError(fmt::format("operator of size {}x{} does not match layout dimension {}", op.rows(), op.cols(),
                                 layout.total_dim()));
  }
}

OperatorBasis make_basis(int d) {
  OperatorBasis b;
  b.dim = d;
  b.xi = 1.0 / d;
  const double scale = 1.0 / std::sqrt(2.0 * d);
  b.elements.push_back(CMatrix::Identity(d, d) / static_cast<double>(d));
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      CMatrix m = CMatrix::Zero(d, d);
      m(j, k) = m(k, j) = scale;
      b.elements.push_back(m);
    }
  }
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      CMatrix m = CMatrix::Zero(d, d);
      m(j, k) = -kI * scale;
      m(k, j) = kI * scale;
      b.elements.push_back(m);
    }
  }
  for (int l = 1; l < d; ++l) {
    CMatrix m = CMatrix::Zero(d, d);
    const double f = std::sqrt(2.0 / (l * (l + 1.0))) * scale;
    for (int i = 0; i < l; ++i) m(i, i) = f;
    m(l, l) = -l * f;
    b.elements.push_back(m);
  }
  return b;
}

}  // namespace

SubsystemLayout::SubsystemLayout(std::vector<int> d) : dims(std::move(d)) {
  if (dims.empty()) throw InputError("layout needs at least one party");
  for (int v : dims) {
    if (v < 2) throw InputError(fmt::format("party dimension {} < 2", v));
  }
  if (total_dim() > 4096) throw InputError("layout dimension above 4096");
}

SubsystemLayout SubsystemLayout::qubits(int n) { return SubsystemLayout(std::vector<int>(static_cast<std::size_t>(n), 2)); }

int SubsystemLayout::total_dim() const {
  std::int64_t d = 1;
  for (int v : dims) d *= v;
  return static_cast<int>(d);
}

std::int64_t SubsystemLayout::basis_count() const {
  std::int64_t n = 1;
  for (int v : dims) n *= static_cast<std::int64_t>(v) * v;
  return n;
}

HermitianOp::HermitianOp(CMatrix m, std::optional<SubsystemLayout> layout) : m_(std::move(m)), layout_(std::move(layout)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) throw InputError("operator must be a nonempty square matrix");
  const double tol = 1e-12 * std::max(1.0, m_.cwiseAbs().maxCoeff());
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol) throw InputError("operator is not Hermitian");
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
  if (layout_) check_op(m_, *layout_);
}

SubsystemLayout HermitianOp::layout_or_flat() const {
  return layout_ ? *layout_ : SubsystemLayout(std::vector<int>{dim()});
}

StateVector::StateVector(SubsystemLayout layout, CVector amplitudes) : layout_(std::move(layout)), amps_(std::move(amplitudes)) {
  if (amps_.size() != layout_.total_dim()) {
    throw InputError(fmt::format("state has {} amplitudes, layout needs {}", amps_.size(), layout_.total_dim()));
  }
  if (std::abs(amps_.norm() - 1.0) > 1e-12) {
    throw InputError(fmt::format("state norm {:.15g} differs from 1", amps_.norm()));
  }
}

StateVector StateVector::normalized(SubsystemLayout layout, CVector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0)) throw InputError("zero state vector");
  return StateVector(std::move(layout), amplitudes / n);
}

StateVector StateVector::basis(const SubsystemLayout& layout, const std::vector<int>& digits) {
  if (static_cast<int>(digits.size()) != layout.parties()) throw InputError("digit count differs from party count");
  const auto st = strides(layout);
  int pos = 0;
  for (std::size_t j = 0; j < digits.size(); ++j) {
    if (digits[j] < 0 || digits[j] >= layout.dims[j]) throw InputError("basis digit out of range");
    pos += digits[j] * st[j];
  }
  CVector v = CVector::Zero(layout.total_dim());
  v(pos) = 1.0;
  return StateVector(layout, v);
}

HermitianOp StateVector::projector() const { return HermitianOp(amps_ * amps_.adjoint(), layout_); }

const OperatorBasis& operator_basis(int d) {
  if (d < 2) throw InputError(fmt::format("operator basis needs d >= 2, got {}", d));
  static std::mutex mutex;
  static std::map<int, OperatorBasis> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, make_basis(d)).first;
  return it->second;
}

const std::vector<double>& structure_constants(int d) {
  static std::mutex mutex;
  static std::map<int, std::vector<double>> cache;
  const OperatorBasis& b = operator_basis(d);
  std::lock_guard lock(mutex);
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;
  const int n = d * d;
  std::vector<double> f(static_cast<std::size_t>(n) * n * n);
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < n; ++c) {
      const CMatrix ab_c = b.elements[static_cast<std::size_t>(c)] * b.elements[static_cast<std::size_t>(a)];
      for (int bb = 0; bb < n; ++bb) {
        // tr[s_a s_b s_c] = sum_ij (s_c s_a)_{ji} (s_b)_{ij}
        const Complex tr = (ab_c.transpose().cwiseProduct(b.elements[static_cast<std::size_t>(bb)])).sum();
        f[(static_cast<std::size_t>(a) * n + bb) * n + c] = tr.real();
      }
    }
  }
  return cache.emplace(d, std::move(f)).first->second;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

CMatrix kron(const std::vector<CMatrix>& factors) {
  if (factors.empty()) return CMatrix::Ones(1, 1);
  CMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

std::vector<int> split_index(const SubsystemLayout& layout, std::int64_t kappa) {
  if (kappa < 0 || kappa >= layout.basis_count()) throw InputError("tensor basis index out of range");
  std::vector<int> out(layout.dims.size());
  for (int j = layout.parties() - 1; j >= 0; --j) {
    const std::int64_t n = static_cast<std::int64_t>(layout.dims[static_cast<std::size_t>(j)]) * layout.dims[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(j)] = static_cast<int>(kappa % n);
    kappa /= n;
  }
  return out;
}

CMatrix tensor_basis_element(const SubsystemLayout& layout, std::int64_t kappa) {
  const auto k = split_index(layout, kappa);
  std::vector<CMatrix> f;
  for (std::size_t j = 0; j < k.size(); ++j) f.push_back(operator_basis(layout.dims[j]).elements[static_cast<std::size_t>(k[j])]);
  return kron(f);
}

std::vector<double> expand(const CMatrix& op, const SubsystemLayout& layout) {
  check_op(op, layout);
  const int parties = layout.parties();
  const auto st = strides(layout);
  double norm = 1.0;
  // Nonzero entries (row, col, value) of every single-party basis element.
  struct Entry {
    int row, col;
    Complex value;
  };
  std::vector<std::vector<std::vector<Entry>>> nz(static_cast<std::size_t>(parties));
  for (int j = 0; j < parties; ++j) {
    const OperatorBasis& b = operator_basis(layout.dims[static_cast<std::size_t>(j)]);
    norm *= b.xi;
    for (const CMatrix& e : b.elements) {
      std::vector<Entry> list;
      for (int r = 0; r < b.dim; ++r) {
        for (int c = 0; c < b.dim; ++c) {
          if (e(r, c) != Complex(0.0)) list.push_back({r, c, e(r, c)});
        }
      }
      nz[static_cast<std::size_t>(j)].push_back(std::move(list));
    }
  }
  const std::int64_t n = layout.basis_count();
  std::vector<double> out(static_cast<std::size_t>(n));
  std::vector<int> k;
  // tr[op Sigma] = sum over entries Sigma(r, c) op(c, r); Sigma's entries are
  // products of single-party entries.
  auto accumulate = [&](auto&& self, int j, int r, int c, Complex w) -> Complex {
    if (j == parties) return w * op(c, r);
    Complex sum = 0.0;
    const int s = st[static_cast<std::size_t>(j)];
    for (const Entry& e : nz[static_cast<std::size_t>(j)][static_cast<std::size_t>(k[static_cast<std::size_t>(j)])]) {
      sum += self(self, j + 1, r + e.row * s, c + e.col * s, w * e.value);
    }
    return sum;
  };
  for (std::int64_t kappa = 0; kappa < n; ++kappa) {
    k = split_index(layout, kappa);
    out[static_cast<std::size_t>(kappa)] = accumulate(accumulate, 0, 0, 0, Complex(1.0)).real() / norm;
  }
  return out;
}

std::vector<double> expand(const HermitianOp& op) { return expand(op.matrix(), op.layout_or_flat()); }

CMatrix reconstruct(const std::vector<double>& coefficients, const SubsystemLayout& layout) {
  if (static_cast<std::int64_t>(coefficients.size()) != layout.basis_count()) {
    throw InputError("coefficient count does not match layout");
  }
  CMatrix out = CMatrix::Zero(layout.total_dim(), layout.total_dim());
  for (std::int64_t kappa = 0; kappa < layout.basis_count(); ++kappa) {
    const double c = coefficients[static_cast<std::size_t>(kappa)];
    if (c != 0.0) out += c * tensor_basis_element(layout, kappa);
  }
  return out;
}

CMatrix partial_trace(const CMatrix& op, const SubsystemLayout& layout, const std::vector<int>& keep) {
  check_op(op, layout);
  if (keep.empty()) throw InputError("partial trace needs at least one kept party");
  std::vector<char> kept(layout.dims.size(), 0);
  for (int j : keep) {
    if (j < 0 || j >= layout.parties()) throw InputError(fmt::format("party index {} out of range", j));
    if (kept[static_cast<std::size_t>(j)]) throw InputError(fmt::format("party {} listed twice", j));
    kept[static_cast<std::size_t>(j)] = 1;
  }
  const auto st = strides(layout);
  std::vector<int> kept_parties, traced_parties;
  for (int j = 0; j < layout.parties(); ++j) (kept[static_cast<std::size_t>(j)] ? kept_parties : traced_parties).push_back(j);
  auto offsets = [&](const std::vector<int>& parties) {
    std::vector<int> out{0};
    for (int j : parties) {
      std::vector<int> next;
      for (int base : out) {
        for (int v = 0; v < layout.dims[static_cast<std::size_t>(j)]; ++v) next.push_back(base + v * st[static_cast<std::size_t>(j)]);
      }
      out = std::move(next);
    }
    return out;
  };
  const auto ko = offsets(kept_parties);
  const auto to = offsets(traced_parties);
  const auto m = static_cast<Eigen::Index>(ko.size());
  CMatrix out = CMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      Complex sum = 0.0;
      for (int t : to) sum += op(ko[static_cast<std::size_t>(i)] + t, ko[static_cast<std::size_t>(j)] + t);
      out(i, j) = sum;
    }
  }
  return out;
}

HermitianOp partial_trace(const HermitianOp& op, const std::vector<int>& keep) {
  const auto layout = op.layout_or_flat();
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> dims;
  for (int j : sorted) {
    if (j >= 0 && j < layout.parties()) dims.push_back(layout.dims[static_cast<std::size_t>(j)]);
  }
  return HermitianOp(partial_trace(op.matrix(), layout, keep), SubsystemLayout(dims));
}

CMatrix partial_transpose(const CMatrix& op, const SubsystemLayout& layout, int party) {
  check_op(op, layout);
  if (party < 0 || party >= layout.parties()) throw InputError(fmt::format("party index {} out of range", party));
  const auto st = strides(layout);
  const int s = st[static_cast<std::size_t>(party)];
  const int d = layout.dims[static_cast<std::size_t>(party)];
  const int n = layout.total_dim();
  CMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    const int di = (i / s) % d;
    for (int j = 0; j < n; ++j) {
      const int dj = (j / s) % d;
      out(i + (dj - di) * s, j + (di - dj) * s) = op(i, j);
    }
  }
  return out;
}

HermitianOp partial_transpose(const HermitianOp& op, int party) {
  return HermitianOp(partial_transpose(op.matrix(), op.layout_or_flat(), party), op.layout());
}

CMatrix kernel_projector(const CMatrix& op, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (op + op.adjoint()));
  const auto& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  CMatrix out = CMatrix::Zero(op.rows(), op.cols());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) <= rank_tol * top) out += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
  }
  return out;
}

double min_eigenvalue(const CMatrix& op) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(0.5 * (op + op.adjoint()), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

Polynomial OperatorPolynomial::trace_with(const CMatrix& a) const {
  if (terms.empty()) throw InputError("empty operator polynomial");
  Polynomial out(terms.front().first.num_vars());
  for (const auto& [coef, m] : terms) {
    if (m.rows() != a.cols() || m.cols() != a.rows()) throw InputError("operator size mismatch");
    const Complex tr = (a.transpose().cwiseProduct(m)).sum();
    out += coef * tr.real();
  }
  return out.pruned(1e-14);
}

CMatrix OperatorPolynomial::evaluate(std::span<const double> x) const {
  if (terms.empty()) throw InputError("empty operator polynomial");
  CMatrix out = CMatrix::Zero(terms.front().second.rows(), terms.front().second.cols());
  for (const auto& [coef, m] : terms) out += coef.evaluate(x) * m;
  return out;
}

BlochVariables bloch_variables(const SubsystemLayout& layout, std::vector<int> groups, int extra_vars) {
  BlochVariables v;
  v.layout = layout;
  if (groups.empty()) {
    for (int j = 0; j < layout.parties(); ++j) groups.push_back(j);
  }
  if (static_cast<int>(groups.size()) != layout.parties()) throw InputError("group list length differs from party count");
  // Renumber groups in order of first appearance.
  std::map<int, int> renumber;
  std::vector<int> group_offset;
  int next = 0;
  for (int j = 0; j < layout.parties(); ++j) {
    auto [it, inserted] = renumber.try_emplace(groups[static_cast<std::size_t>(j)], static_cast<int>(group_offset.size()));
    const int d = layout.dims[static_cast<std::size_t>(j)];
    if (inserted) {
      group_offset.push_back(next);
      next += d * d - 1;
    } else {
      // Tied parties must have equal dimension.
      for (int i = 0; i < j; ++i) {
        if (groups[static_cast<std::size_t>(i)] == groups[static_cast<std::size_t>(j)] && layout.dims[static_cast<std::size_t>(i)] != d) {
          throw InputError("tied parties have different dimensions");
        }
      }
    }
    v.group.push_back(it->second);
    v.offset.push_back(group_offset[static_cast<std::size_t>(it->second)]);
  }
  v.num_vars = next + extra_vars;
  if (v.num_vars < 1 || v.num_vars > kMaxVariables) {
    throw InputError(fmt::format("encoding needs {} variables, limit is {}", v.num_vars, kMaxVariables));
  }
  return v;
}

std::vector<double> bloch_coordinates(const CVector& v) {
  const int d = static_cast<int>(v.size());
  const OperatorBasis& b = operator_basis(d);
  const CMatrix rho = v * v.adjoint() / v.squaredNorm();
  std::vector<double> c;
  for (int k = 1; k < d * d; ++k) {
    c.push_back((rho.transpose().cwiseProduct(b.elements[static_cast<std::size_t>(k)])).sum().real() / b.xi);
  }
  return c;
}

CMatrix bloch_operator(std::span<const double> coords, int d) {
  const OperatorBasis& b = operator_basis(d);
  if (static_cast<int>(coords.size()) != d * d - 1) throw InputError("wrong number of Bloch coordinates");
  CMatrix out = b.elements[0];
  for (int k = 1; k < d * d; ++k) out += coords[static_cast<std::size_t>(k - 1)] * b.elements[static_cast<std::size_t>(k)];
  return out;
}

OperatorPolynomial party_operator(const BlochVariables& vars, int party) {
  const int d = vars.layout.dims.at(static_cast<std::size_t>(party));
  const OperatorBasis& b = operator_basis(d);
  OperatorPolynomial op;
  op.terms.emplace_back(Polynomial::constant(vars.num_vars, 1.0), b.elements[0]);
  for (int k = 1; k < d * d; ++k) {
    op.terms.emplace_back(Polynomial::variable(vars.num_vars, vars.offset[static_cast<std::size_t>(party)] + k - 1),
                          b.elements[static_cast<std::size_t>(k)]);
  }
  return op;
}

Polynomial product_expectation(const CMatrix& w, const BlochVariables& vars) {
  const auto& layout = vars.layout;
  const std::vector<double> coeffs = expand(w, layout);
  double norm = 1.0;
  for (int d : layout.dims) norm *= operator_basis(d).xi;
  Polynomial out(vars.num_vars);
  for (std::int64_t kappa = 0; kappa < layout.basis_count(); ++kappa) {
    const double c = coeffs[static_cast<std::size_t>(kappa)] * norm;
    if (std::abs(c) < 1e-15) continue;
    std::vector<int> e(static_cast<std::size_t>(vars.num_vars), 0);
    const auto k = split_index(layout, kappa);
    for (std::size_t j = 0; j < k.size(); ++j) {
      if (k[j] > 0) ++e[static_cast<std::size_t>(vars.offset[j] + k[j] - 1)];
    }
    out.add_term(MultiIndex(std::move(e)), c);
  }
  return out;
}

std::vector<Polynomial> bloch_purity_block(int num_vars, int offset, int d) {
  const int n = d * d;
  auto coord = [&](int k) {
    return k == 0 ? Polynomial::constant(num_vars, 1.0) : Polynomial::variable(num_vars, offset + k - 1);
  };
  std::vector<Polynomial> out;
  Polynomial sq = Polynomial::constant(num_vars, -(d - 1.0));
  for (int k = 1; k < n; ++k) sq += coord(k) * coord(k);
  out.push_back(sq);
  if (d > 2) {
    const auto& f = structure_constants(d);
    Polynomial cube = Polynomial::constant(num_vars, -1.0);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          const double v = f[(static_cast<std::size_t>(a) * n + b) * n + c];
          if (std::abs(v) > 1e-15) cube += v * (coord(a) * coord(b) * coord(c));
        }
      }
    }
    out.push_back(cube.pruned(1e-14));
    // P^2 = P, one sigma_c component at a time. Redundant on pure states but
    // without it the order-2 moment block has no interior.
    const double xi = operator_basis(d).xi;
    for (int c = 1; c < n; ++c) {
      Polynomial q = -xi * coord(c);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const double v = f[(static_cast<std::size_t>(a) * n + b) * n + c];
          if (std::abs(v) > 1e-15) q += v * (coord(a) * coord(b));
        }
      }
      out.push_back(q.pruned(1e-14));
    }
  }
  return out;
}

std::vector<Polynomial> bloch_purity(const BlochVariables& vars) {
  std::vector<Polynomial> out;
  std::vector<char> seen(vars.layout.dims.size(), 0);
  for (int j = 0; j < vars.layout.parties(); ++j) {
    const int g = vars.group[static_cast<std::size_t>(j)];
    if (seen[static_cast<std::size_t>(g)]) continue;
    seen[static_cast<std::size_t>(g)] = 1;
    for (auto& p : bloch_purity_block(vars.num_vars, vars.offset[static_cast<std::size_t>(j)], vars.layout.dims[static_cast<std::size_t>(j)])) {
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<Polynomial> tensor_coefficients(const SubsystemLayout& layout, const TensorTerm& term, int num_vars) {
  std::vector<Polynomial> p;
  p.push_back(term.trace);
  for (std::int64_t kappa = 1; kappa < layout.basis_count(); ++kappa) {
    p.push_back(Polynomial::variable(num_vars, term.offset + static_cast<int>(kappa) - 1));
  }
  return p;
}

std::vector<Polynomial> full_tensor_purity(const SubsystemLayout& layout, const TensorTerm& term, int num_vars,
                                           const FullTensorOptions& options) {
  const auto p = tensor_coefficients(layout, term, num_vars);
  const Polynomial& tr = p[0];
  std::vector<Polynomial> out;
  const int parties = layout.parties();
  std::vector<std::int64_t> block(static_cast<std::size_t>(parties));  // stride of party j in kappa
  {
    std::int64_t s = 1;
    for (int j = parties - 1; j >= 0; --j) {
      block[static_cast<std::size_t>(j)] = s;
      s *= static_cast<std::int64_t>(layout.dims[static_cast<std::size_t>(j)]) * layout.dims[static_cast<std::size_t>(j)];
    }
  }
  if (options.reductions && parties > 1) {
    for (int j = 0; j < parties; ++j) {
      const int d = layout.dims[static_cast<std::size_t>(j)];
      const int n = d * d;
      auto red = [&](int k) { return p[static_cast<std::size_t>(k * block[static_cast<std::size_t>(j)])]; };
      Polynomial sq = -(tr * tr);
      for (int k = 0; k < n; ++k) sq += operator_basis(d).xi * (red(k) * red(k));
      out.push_back(sq.pruned(1e-14));
      if (d > 2) {
        const auto& f = structure_constants(d);
        Polynomial cube = -(tr * tr * tr);
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
              const double v = f[(static_cast<std::size_t>(a) * n + b) * n + c];
              if (std::abs(v) > 1e-15) cube += v * (red(a) * red(b) * red(c));
            }
          }
        }
        out.push_back(cube.pruned(1e-14));
      }
    }
  }
  if (options.global_purity) {
    double xi = 1.0;
    for (int d : layout.dims) xi *= operator_basis(d).xi;
    Polynomial g = -(tr * tr);
    for (const auto& c : p) g += xi * (c * c);
    out.push_back(g.pruned(1e-14));
  }
  if (options.segre_minors && parties > 1) {
    // 2x2 minors of the flattening (party j) x (all other parties). With two
    // parties both flattenings are transposes of each other.
    const int flattenings = parties == 2 ? 1 : parties;
    const std::int64_t total = layout.basis_count();
    for (int j = 0; j < flattenings; ++j) {
      const int n = layout.dims[static_cast<std::size_t>(j)] * layout.dims[static_cast<std::size_t>(j)];
      const std::int64_t bj = block[static_cast<std::size_t>(j)];
      // Column indices: kappa with kappa_j = 0.
      std::vector<std::int64_t> cols;
      for (std::int64_t kappa = 0; kappa < total; ++kappa) {
        if ((kappa / bj) % n == 0) cols.push_back(kappa);
      }
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          for (std::size_t u = 0; u < cols.size(); ++u) {
            for (std::size_t v = u + 1; v < cols.size(); ++v) {
              const auto& au = p[static_cast<std::size_t>(cols[u] + a * bj)];
              const auto& bv = p[static_cast<std::size_t>(cols[v] + b * bj)];
              const auto& av = p[static_cast<std::size_t>(cols[v] + a * bj)];
              const auto& bu = p[static_cast<std::size_t>(cols[u] + b * bj)];
              Polynomial minor = au * bv - av * bu;
              if (!minor.pruned(1e-14).is_zero()) out.push_back(minor.pruned(1e-14));
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<Polynomial> purity_constraints(const SubsystemLayout& layout, PurityForm form) {
  if (form == PurityForm::per_party_bloch) return bloch_purity(bloch_variables(layout));
  const int num_vars = static_cast<int>(layout.basis_count() - 1);
  if (num_vars > kMaxVariables) throw InputError("full_tensor form exceeds the variable limit");
  TensorTerm term{0, Polynomial::constant(num_vars, 1.0)};
  return full_tensor_purity(layout, term, num_vars);
}

CMatrix random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    const Complex diag = r(j, j);
    if (std::abs(diag) > 0) q.col(j) *= diag / std::abs(diag);
  }
  return q;
}

CVector random_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace momentsdp::quantum
