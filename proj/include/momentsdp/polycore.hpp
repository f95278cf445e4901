#pragma once

// Graded monomial basis and sparse real polynomials.
//
// Monomials of degree <= r in t variables are enumerated degree by degree;
// inside one degree the exponent vectors appear in decreasing lexicographic
// order:
//
//   1; x1, ..., xt; x1^2, x1 x2, ..., x1 xt; x2^2, x2 x3, ..., xt^r
//
// Positions are 1-based throughout, matching the moment-vector ordinals used
// by the relaxation code (y_1 is the constant monomial).

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace momentsdp {

// Largest supported variable count.
inline constexpr int kMaxVariables = 64;

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);

  static MultiIndex zero(int num_vars);
  static MultiIndex unit(int num_vars, int var);

  int size() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exponents_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const { return exponents_; }

  MultiIndex operator+(const MultiIndex& other) const;
  bool operator==(const MultiIndex& other) const = default;

  std::string to_string() const;

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

// Strict weak order matching basis positions: lower degree first, then
// lexicographically larger exponent vectors first.
struct GradedOrder {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

// Number of monomials of degree <= r in t variables,
// sum_{k=0}^{r} C(t+k-1, k). Throws OverflowError past int64.
std::int64_t basis_size(int num_vars, int max_degree);

// Number of monomials of degree exactly k in t variables.
std::int64_t degree_block_size(int num_vars, int degree);

// The position-th basis element (1-based) of the degree-r basis.
MultiIndex unrank(std::int64_t position, int num_vars, int max_degree);

// Inverse of unrank: the 1-based position of alpha in the degree-r basis.
std::int64_t rank(const MultiIndex& alpha, int max_degree);

// All monomials of degree <= r, in basis order.
std::vector<MultiIndex> graded_basis(int num_vars, int max_degree);

class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double, GradedOrder>;

  Polynomial() = default;
  explicit Polynomial(int num_vars);
  Polynomial(int num_vars, const TermMap& terms);

  static Polynomial constant(int num_vars, double value);
  static Polynomial variable(int num_vars, int var, double coef = 1.0);

  int num_vars() const { return num_vars_; }
  // Degree of the highest term; 0 for constants and for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return degree() == 0; }
  const TermMap& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }

  double coefficient(const MultiIndex& alpha) const;
  double constant_term() const;

  // Accumulates coef into the alpha term, dropping it if it cancels.
  void add_term(const MultiIndex& alpha, double coef);

  double evaluate(std::span<const double> x) const;

  // Copy with every coefficient of magnitude <= tol removed.
  Polynomial pruned(double tol) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  bool operator==(const Polynomial& other) const = default;

  std::string to_string() const;

 private:
  void check_compatible(const Polynomial& other) const;

  int num_vars_ = 0;
  TermMap terms_;
};

}  // namespace momentsdp
