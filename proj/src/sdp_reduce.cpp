// Linear-equality elimination and block presolve for SdpInstance.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "momentsdp/error.hpp"
#include "momentsdp/sdp.hpp"

namespace momentsdp::sdp {

namespace {

constexpr double kDropTol = 1e-13;

struct AffineExpr {
  std::map<int, double> coeffs;  // over original variable indices (all free)
  double constant = 0.0;
};

void prune(std::map<int, double>& coeffs, double scale) {
  for (auto it = coeffs.begin(); it != coeffs.end();) {
    if (std::abs(it->second) <= kDropTol * scale) {
      it = coeffs.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace

void SdpInstance::check() const {
  if (num_vars < 0) throw InputError("negative variable count");
  if (static_cast<int>(objective.size()) != num_vars) {
    throw InputError(fmt::format("objective has {} entries, expected {}", objective.size(), num_vars));
  }
  for (const auto& block : blocks) {
    if (block.dim < 1) throw InputError(fmt::format("block '{}' has dimension {}", block.label, block.dim));
    for (const auto& e : block.entries) {
      if (e.var < BlockEntry::kConstant || e.var >= num_vars) {
        throw InputError(fmt::format("block '{}' references variable {}", block.label, e.var));
      }
      if (e.row < 0 || e.row >= block.dim || e.col < 0 || e.col >= block.dim) {
        throw InputError(fmt::format("block '{}' entry ({}, {}) outside {}x{}", block.label, e.row,
                                     e.col, block.dim, block.dim));
      }
      if (!std::isfinite(e.value)) throw InputError("non-finite block entry");
    }
  }
  for (const auto& eq : equalities) {
    for (const auto& [var, coef] : eq.coeffs) {
      if (var < 0 || var >= num_vars) throw InputError("equality references unknown variable");
      if (!std::isfinite(coef)) throw InputError("non-finite equality coefficient");
    }
  }
}

Eigen::MatrixXd SdpInstance::block_coefficient(std::size_t b, std::int32_t var) const {
  const auto& block = blocks.at(b);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(block.dim, block.dim);
  for (const auto& e : block.entries) {
    if (e.var != var) continue;
    out(e.row, e.col) += e.value;
    if (e.row != e.col) out(e.col, e.row) += e.value;
  }
  return out;
}

Eigen::MatrixXd SdpInstance::block_value(std::size_t b, std::span<const double> y) const {
  const auto& block = blocks.at(b);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(block.dim, block.dim);
  for (const auto& e : block.entries) {
    const double scale = e.var == BlockEntry::kConstant ? 1.0 : y[static_cast<std::size_t>(e.var)];
    out(e.row, e.col) += scale * e.value;
    if (e.row != e.col) out(e.col, e.row) += scale * e.value;
  }
  return out;
}

std::vector<double> Reduction::expand(std::span<const double> y_free) const {
  std::vector<double> y = base;
  for (std::size_t v = 0; v < expr.size(); ++v) {
    for (const auto& [f, coef] : expr[v]) y[v] += coef * y_free[static_cast<std::size_t>(f)];
  }
  return y;
}

Reduction reduce(const SdpInstance& instance) {
  instance.check();
  const int n = instance.num_vars;
  std::vector<std::optional<AffineExpr>> dep(static_cast<std::size_t>(n));
  std::vector<std::set<int>> users(static_cast<std::size_t>(n));
  Reduction out;

  for (const auto& eq : instance.equalities) {
    std::map<int, double> row;
    double rhs = eq.rhs;
    double scale = std::abs(eq.rhs);
    for (const auto& [var, coef] : eq.coeffs) {
      scale = std::max(scale, std::abs(coef));
      const auto& d = dep[static_cast<std::size_t>(var)];
      if (d) {
        for (const auto& [u, c] : d->coeffs) row[u] += coef * c;
        rhs -= coef * d->constant;
      } else {
        row[var] += coef;
      }
    }
    prune(row, std::max(scale, 1.0));
    if (row.empty()) {
      if (std::abs(rhs) > 1e-9 * std::max(1.0, scale)) out.consistent = false;
      continue;
    }
    // Pivot on the highest-index variable among well-sized coefficients, so
    // high-order moments get expressed through lower-order ones.
    double max_abs = 0.0;
    for (const auto& [v, c] : row) max_abs = std::max(max_abs, std::abs(c));
    int pivot = -1;
    for (auto it = row.rbegin(); it != row.rend(); ++it) {
      if (std::abs(it->second) >= 0.1 * max_abs) {
        pivot = it->first;
        break;
      }
    }
    const double pc = row[pivot];
    AffineExpr e;
    e.constant = rhs / pc;
    for (const auto& [v, c] : row) {
      if (v != pivot) e.coeffs[v] = -c / pc;
    }
    // Substitute the new pivot into every expression that mentions it.
    for (int u : users[static_cast<std::size_t>(pivot)]) {
      auto& ue = dep[static_cast<std::size_t>(u)];
      if (!ue) continue;
      auto it = ue->coeffs.find(pivot);
      if (it == ue->coeffs.end()) continue;
      const double c = it->second;
      ue->coeffs.erase(it);
      ue->constant += c * e.constant;
      for (const auto& [v, ec] : e.coeffs) {
        ue->coeffs[v] += c * ec;
        users[static_cast<std::size_t>(v)].insert(u);
      }
      prune(ue->coeffs, 1.0);
    }
    users[static_cast<std::size_t>(pivot)].clear();
    for (const auto& [v, c] : e.coeffs) users[static_cast<std::size_t>(v)].insert(pivot);
    dep[static_cast<std::size_t>(pivot)] = std::move(e);
  }

  std::vector<int> reduced_index(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    if (!dep[static_cast<std::size_t>(v)]) {
      reduced_index[static_cast<std::size_t>(v)] = static_cast<int>(out.free_vars.size());
      out.free_vars.push_back(v);
    }
  }
  out.base.assign(static_cast<std::size_t>(n), 0.0);
  out.expr.assign(static_cast<std::size_t>(n), {});
  for (int v = 0; v < n; ++v) {
    const auto& d = dep[static_cast<std::size_t>(v)];
    if (!d) {
      out.expr[static_cast<std::size_t>(v)].emplace_back(reduced_index[static_cast<std::size_t>(v)], 1.0);
      continue;
    }
    out.base[static_cast<std::size_t>(v)] = d->constant;
    for (const auto& [u, c] : d->coeffs) {
      out.expr[static_cast<std::size_t>(v)].emplace_back(reduced_index[static_cast<std::size_t>(u)], c);
    }
  }

  SdpInstance& red = out.reduced;
  red.num_vars = static_cast<int>(out.free_vars.size());
  red.objective.assign(out.free_vars.size(), 0.0);
  red.objective_offset = instance.objective_offset;
  for (int v = 0; v < n; ++v) {
    const double c = instance.objective[static_cast<std::size_t>(v)];
    if (c == 0.0) continue;
    red.objective_offset += c * out.base[static_cast<std::size_t>(v)];
    for (const auto& [f, coef] : out.expr[static_cast<std::size_t>(v)]) {
      red.objective[static_cast<std::size_t>(f)] += c * coef;
    }
  }

  for (std::size_t b = 0; b < instance.blocks.size(); ++b) {
    const auto& block = instance.blocks[b];
    std::map<std::tuple<int, int, int>, double> acc;  // (var, row, col), row <= col
    double scale = 0.0;
    for (const auto& e : block.entries) {
      const int r = std::min(e.row, e.col);
      const int c = std::max(e.row, e.col);
      scale = std::max(scale, std::abs(e.value));
      if (e.var == BlockEntry::kConstant) {
        acc[{BlockEntry::kConstant, r, c}] += e.value;
        continue;
      }
      const double base = out.base[static_cast<std::size_t>(e.var)];
      if (base != 0.0) acc[{BlockEntry::kConstant, r, c}] += base * e.value;
      for (const auto& [f, coef] : out.expr[static_cast<std::size_t>(e.var)]) {
        acc[{f, r, c}] += coef * e.value;
      }
    }
    LmiBlock rb;
    rb.dim = block.dim;
    rb.label = block.label;
    bool depends = false;
    for (const auto& [key, value] : acc) {
      if (std::abs(value) <= kDropTol * std::max(scale, 1.0)) continue;
      const auto [var, r, c] = key;
      rb.entries.push_back({var, r, c, value});
      depends = depends || var != BlockEntry::kConstant;
    }
    if (depends) {
      out.kept_blocks.push_back(static_cast<int>(b));
      red.blocks.push_back(std::move(rb));
    } else {
      out.constant_blocks.push_back(static_cast<int>(b));
      // Keep the constant data reachable for certificate checks.
      red.blocks.push_back(std::move(rb));
    }
  }
  // Constant blocks are appended after the kept ones so solver indices line up.
  std::vector<LmiBlock> ordered;
  std::vector<LmiBlock> constants;
  for (std::size_t i = 0; i < red.blocks.size(); ++i) {
    bool is_const = std::find(out.constant_blocks.begin(), out.constant_blocks.end(),
                              static_cast<int>(i)) != out.constant_blocks.end();
    (is_const ? constants : ordered).push_back(std::move(red.blocks[i]));
  }
  red.blocks = std::move(ordered);
  for (auto& c : constants) red.blocks.push_back(std::move(c));
  return out;
}

}  // namespace momentsdp::sdp
