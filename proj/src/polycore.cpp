#include "momentsdp/polycore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "momentsdp/error.hpp"

namespace momentsdp {

namespace {

constexpr std::int64_t kInt64Max = std::numeric_limits<std::int64_t>::max();

std::int64_t checked_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  __int128 result = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    // result * (n-k+i) / i stays integral at every step.
    result = result * (n - k + i) / i;
    if (result > kInt64Max) {
      throw OverflowError(fmt::format("binomial C({}, {}) exceeds int64", n, k));
    }
  }
  return static_cast<std::int64_t>(result);
}

// Number of exponent vectors in `parts` variables summing to `total`.
std::int64_t compositions(int total, int parts) {
  if (parts == 0) return total == 0 ? 1 : 0;
  return checked_binomial(static_cast<std::int64_t>(total) + parts - 1, parts - 1);
}

void check_num_vars(int num_vars) {
  if (num_vars < 1 || num_vars > kMaxVariables) {
    throw InputError(fmt::format("variable count {} outside [1, {}]", num_vars, kMaxVariables));
  }
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw InputError("negative exponent in multi-index");
    degree_ += e;
  }
}

MultiIndex MultiIndex::zero(int num_vars) {
  return MultiIndex(std::vector<int>(static_cast<std::size_t>(num_vars), 0));
}

MultiIndex MultiIndex::unit(int num_vars, int var) {
  if (var < 0 || var >= num_vars) throw InputError("variable index out of range");
  std::vector<int> e(static_cast<std::size_t>(num_vars), 0);
  e[static_cast<std::size_t>(var)] = 1;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.size() != size()) throw InputError("multi-index length mismatch");
  MultiIndex out = *this;
  for (std::size_t i = 0; i < exponents_.size(); ++i) out.exponents_[i] += other.exponents_[i];
  out.degree_ += other.degree_;
  return out;
}

std::string MultiIndex::to_string() const {
  return fmt::format("({})", fmt::join(exponents_, ","));
}

bool GradedOrder::operator()(const MultiIndex& a, const MultiIndex& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  return a.exponents() > b.exponents();
}

std::int64_t degree_block_size(int num_vars, int degree) {
  check_num_vars(num_vars);
  if (degree < 0) return 0;
  return compositions(degree, num_vars);
}

std::int64_t basis_size(int num_vars, int max_degree) {
  check_num_vars(num_vars);
  if (max_degree < 0) throw InputError("negative degree");
  std::int64_t total = 0;
  for (int k = 0; k <= max_degree; ++k) {
    const std::int64_t block = degree_block_size(num_vars, k);
    if (block > kInt64Max - total) {
      throw OverflowError(fmt::format("basis size for t={}, r={} exceeds int64", num_vars, max_degree));
    }
    total += block;
  }
  return total;
}

MultiIndex unrank(std::int64_t position, int num_vars, int max_degree) {
  const std::int64_t size = basis_size(num_vars, max_degree);
  if (position < 1 || position > size) {
    throw InputError(fmt::format("basis position {} outside [1, {}]", position, size));
  }
  int degree = 0;
  std::int64_t before = 0;
  while (true) {
    const std::int64_t block = degree_block_size(num_vars, degree);
    if (position <= before + block) break;
    before += block;
    ++degree;
  }
  std::int64_t within = position - before - 1;
  std::vector<int> e(static_cast<std::size_t>(num_vars), 0);
  int remaining = degree;
  for (int i = 0; i + 1 < num_vars; ++i) {
    for (int v = remaining; v >= 0; --v) {
      const std::int64_t count = compositions(remaining - v, num_vars - 1 - i);
      if (within < count) {
        e[static_cast<std::size_t>(i)] = v;
        break;
      }
      within -= count;
    }
    remaining -= e[static_cast<std::size_t>(i)];
  }
  e.back() = remaining;
  return MultiIndex(std::move(e));
}

std::int64_t rank(const MultiIndex& alpha, int max_degree) {
  const int t = alpha.size();
  check_num_vars(t);
  if (alpha.degree() > max_degree) {
    throw InputError(fmt::format("monomial {} has degree {} > {}", alpha.to_string(), alpha.degree(),
                                 max_degree));
  }
  const int k = alpha.degree();
  std::int64_t pos = k == 0 ? 0 : basis_size(t, k - 1);
  int remaining = k;
  for (int i = 0; i + 1 < t; ++i) {
    for (int v = alpha[i] + 1; v <= remaining; ++v) pos += compositions(remaining - v, t - 1 - i);
    remaining -= alpha[i];
  }
  return pos + 1;
}

std::vector<MultiIndex> graded_basis(int num_vars, int max_degree) {
  const std::int64_t size = basis_size(num_vars, max_degree);
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(size));
  // Walk the order directly instead of unranking each position.
  for (int k = 0; k <= max_degree; ++k) {
    std::vector<int> e(static_cast<std::size_t>(num_vars), 0);
    e[0] = k;
    while (true) {
      out.emplace_back(e);
      // Next vector in decreasing lex order with the same sum: find the
      // rightmost nonzero entry before the last position, move one unit
      // right and gather everything after it.
      int j = num_vars - 2;
      while (j >= 0 && e[static_cast<std::size_t>(j)] == 0) --j;
      if (j < 0) break;
      e[static_cast<std::size_t>(j)] -= 1;
      int tail = e.back();
      e.back() = 0;
      e[static_cast<std::size_t>(j + 1)] += tail + 1;
    }
  }
  return out;
}

Polynomial::Polynomial(int num_vars) : num_vars_(num_vars) { check_num_vars(num_vars); }

Polynomial::Polynomial(int num_vars, const TermMap& terms) : Polynomial(num_vars) {
  for (const auto& [alpha, coef] : terms) {
    if (alpha.size() != num_vars) throw InputError("term length differs from variable count");
    add_term(alpha, coef);
  }
}

Polynomial Polynomial::constant(int num_vars, double value) {
  Polynomial p(num_vars);
  p.add_term(MultiIndex::zero(num_vars), value);
  return p;
}

Polynomial Polynomial::variable(int num_vars, int var, double coef) {
  Polynomial p(num_vars);
  p.add_term(MultiIndex::unit(num_vars, var), coef);
  return p;
}

int Polynomial::degree() const {
  // The map is graded, so the last key has the highest degree.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::constant_term() const { return coefficient(MultiIndex::zero(num_vars_)); }

void Polynomial::add_term(const MultiIndex& alpha, double coef) {
  if (alpha.size() != num_vars_) throw InputError("term length differs from variable count");
  if (coef == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(alpha, coef);
  if (!inserted) {
    it->second += coef;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != num_vars_) {
    throw InputError(fmt::format("point has {} coordinates, polynomial has {} variables", x.size(),
                                 num_vars_));
  }
  double sum = 0.0;
  for (const auto& [alpha, coef] : terms_) {
    double term = coef;
    for (int i = 0; i < num_vars_; ++i) {
      for (int p = 0; p < alpha[i]; ++p) term *= x[static_cast<std::size_t>(i)];
    }
    sum += term;
  }
  return sum;
}

Polynomial Polynomial::pruned(double tol) const {
  Polynomial out(num_vars_);
  for (const auto& [alpha, coef] : terms_) {
    if (std::abs(coef) > tol) out.terms_.emplace_hint(out.terms_.end(), alpha, coef);
  }
  return out;
}

void Polynomial::check_compatible(const Polynomial& other) const {
  if (other.num_vars_ != num_vars_) {
    throw InputError(fmt::format("polynomials over {} and {} variables", num_vars_, other.num_vars_));
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  check_compatible(other);
  for (const auto& [alpha, coef] : other.terms_) add_term(alpha, coef);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  check_compatible(other);
  for (const auto& [alpha, coef] : other.terms_) add_term(alpha, -coef);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [alpha, coef] : terms_) coef *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.check_compatible(b);
  Polynomial out(a.num_vars_);
  for (const auto& [alpha, ca] : a.terms_) {
    for (const auto& [beta, cb] : b.terms_) out.add_term(alpha + beta, ca * cb);
  }
  return out;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [alpha, coef] : terms_) {
    std::string mono;
    for (int i = 0; i < num_vars_; ++i) {
      if (alpha[i] == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += alpha[i] == 1 ? fmt::format("x{}", i + 1) : fmt::format("x{}^{}", i + 1, alpha[i]);
    }
    const double mag = std::abs(coef);
    if (first) {
      out += coef < 0 ? "-" : "";
    } else {
      out += coef < 0 ? " - " : " + ";
    }
    if (mono.empty()) {
      out += fmt::format("{:g}", mag);
    } else if (mag != 1.0) {
      out += fmt::format("{:g}*{}", mag, mono);
    } else {
      out += mono;
    }
    first = false;
  }
  return out;
}

}  // namespace momentsdp
