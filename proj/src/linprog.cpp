#include "distdom/linprog.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace distdom {

namespace {

constexpr double kPivotTolerance = 1e-9;
constexpr double kCostTolerance = 1e-9;

void validate(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  if (n == 0) throw std::invalid_argument("solve: program has no variables");
  if (lp.a.rows() != lp.b.size()) {
    throw std::invalid_argument("solve: A has " + std::to_string(lp.a.rows()) +
                                " rows but b has " + std::to_string(lp.b.size()));
  }
  if (lp.a.rows() > 0 && lp.a.cols() != n) {
    throw std::invalid_argument("solve: A has " + std::to_string(lp.a.cols()) +
                                " columns but c has " + std::to_string(n));
  }
  if (lp.bounds.size() != n) {
    throw std::invalid_argument("solve: bounds vector does not match variable count");
  }
  for (double c : lp.objective) {
    if (!std::isfinite(c)) throw std::invalid_argument("solve: non-finite objective");
  }
  for (double v : lp.b) {
    if (!std::isfinite(v)) throw std::invalid_argument("solve: non-finite right-hand side");
  }
  for (std::size_t r = 0; r < lp.a.rows(); ++r) {
    for (std::size_t c = 0; c < lp.a.cols(); ++c) {
      if (!std::isfinite(lp.a(r, c))) throw std::invalid_argument("solve: non-finite matrix entry");
    }
  }
}

// Dense tableau: m constraint rows plus the reduced-cost row, each with
// `width` coefficients followed by the right-hand side.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t width)
      : rows_(rows), width_(width), data_((rows + 1) * (width + 1), 0.0), basis_(rows, npos) {}

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  double& at(std::size_t r, std::size_t c) { return data_[r * (width_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, width_); }
  double& cost(std::size_t c) { return at(rows_, c); }
  double& value() { return at(rows_, width_); }

  std::size_t rows() const { return rows_; }
  std::size_t width() const { return width_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::vector<bool>& dropped() { return dropped_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const std::size_t stride = width_ + 1;
    double* prow = &data_[pr * stride];
    const double inv = 1.0 / prow[pc];
    for (std::size_t c = 0; c < stride; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      double* row = &data_[r * stride];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < stride; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  enum class Outcome { optimal, unbounded };

  // Bland's rule on columns [0, active_width).
  Outcome run(std::size_t active_width) {
    const std::size_t limit = 100 * (rows_ + width_) + 1000;
    for (std::size_t iter = 0; iter < limit; ++iter) {
      std::size_t enter = npos;
      for (std::size_t c = 0; c < active_width; ++c) {
        if (cost(c) > kCostTolerance) {
          enter = c;
          break;
        }
      }
      if (enter == npos) return Outcome::optimal;

      std::size_t leave = npos;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        if (!dropped_.empty() && dropped_[r]) continue;
        const double a = at(r, enter);
        if (a <= kPivotTolerance) continue;
        const double ratio = std::max(rhs(r), 0.0) / a;
        const double slack = 1e-12 * std::max(1.0, std::abs(best));
        if (leave == npos || ratio < best - slack) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + slack && basis_[r] < basis_[leave]) {
          leave = r;  // Bland: lowest basic index among ties
        }
      }
      if (leave == npos) return Outcome::unbounded;
      pivot(leave, enter);
    }
    throw SolverError("simplex iteration limit exceeded");
  }

 private:
  std::size_t rows_;
  std::size_t width_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
  std::vector<bool> dropped_;
};

struct Elimination {
  std::size_t var;
  std::size_t row;
};

}  // namespace

const char* to_string(LPStatus status) {
  switch (status) {
    case LPStatus::optimal: return "optimal";
    case LPStatus::infeasible: return "infeasible";
    case LPStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

LPSolution solve(const LinearProgram& lp) {
  validate(lp);
  const std::size_t n = lp.num_vars();
  const std::size_t m = lp.num_rows();

  // --- presolve: eliminate free column singletons -------------------------
  std::vector<std::vector<std::size_t>> col_rows(n);
  std::vector<std::vector<std::size_t>> row_cols(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (lp.a(r, c) != 0.0) {
        col_rows[c].push_back(r);
        row_cols[r].push_back(c);
      }
    }
  }
  std::vector<std::size_t> live_count(n);
  for (std::size_t c = 0; c < n; ++c) live_count[c] = col_rows[c].size();
  std::vector<bool> row_active(m, true);
  std::vector<bool> eliminated(n, false);
  std::vector<double> cost = lp.objective;
  std::vector<Elimination> eliminations;

  for (std::size_t j = 0; j < n; ++j) {
    if (lp.bounds[j] != VarBound::free || live_count[j] != 1) continue;
    std::size_t row = m;
    for (std::size_t r : col_rows[j]) {
      if (row_active[r]) row = r;
    }
    const double pivot = lp.a(row, j);
    const double cj = cost[j];
    if (cj != 0.0) {
      for (std::size_t k : row_cols[row]) {
        if (k != j) cost[k] -= cj * lp.a(row, k) / pivot;
      }
      cost[j] = 0.0;
    }
    eliminated[j] = true;
    row_active[row] = false;
    eliminations.push_back({j, row});
    for (std::size_t k : row_cols[row]) --live_count[k];
  }

  // Free variables left in no active row: unbounded if they carry cost.
  for (std::size_t j = 0; j < n; ++j) {
    if (eliminated[j] || lp.bounds[j] != VarBound::free || live_count[j] != 0) continue;
    if (std::abs(cost[j]) > kCostTolerance) {
      return LPSolution{LPStatus::unbounded, 0.0, {}};
    }
  }

  // --- column layout of the reduced program -------------------------------
  // Each kept variable maps to a positive column and, if free, a negative one.
  std::vector<std::size_t> pos_col(n, Tableau::npos);
  std::vector<std::size_t> neg_col(n, Tableau::npos);
  std::size_t width = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (eliminated[j]) continue;
    if (lp.bounds[j] == VarBound::free && live_count[j] == 0) continue;
    pos_col[j] = width++;
    if (lp.bounds[j] == VarBound::free) neg_col[j] = width++;
  }
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < m; ++r) {
    if (row_active[r]) rows.push_back(r);
  }
  const std::size_t structural = width;

  // Row signs so that b >= 0, then look for unit columns to seed the basis.
  std::vector<double> sign(rows.size(), 1.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (lp.b[rows[i]] < 0.0) sign[i] = -1.0;
  }
  std::vector<std::size_t> seed(rows.size(), Tableau::npos);
  std::vector<double> seed_coef(rows.size(), 1.0);
  {
    std::vector<std::size_t> local_row(m, Tableau::npos);
    for (std::size_t i = 0; i < rows.size(); ++i) local_row[rows[i]] = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (pos_col[j] == Tableau::npos || lp.bounds[j] != VarBound::nonnegative) continue;
      std::size_t hit = Tableau::npos;
      std::size_t hits = 0;
      for (std::size_t r : col_rows[j]) {
        if (!row_active[r]) continue;
        ++hits;
        hit = local_row[r];
      }
      if (hits != 1) continue;
      const double coef = sign[hit] * lp.a(rows[hit], j);
      if (coef > kPivotTolerance && seed[hit] == Tableau::npos) {
        seed[hit] = pos_col[j];
        seed_coef[hit] = coef;
      }
    }
  }
  std::size_t artificials = 0;
  for (std::size_t s : seed) {
    if (s == Tableau::npos) ++artificials;
  }
  width += artificials;

  Tableau t(rows.size(), width);
  t.dropped().assign(rows.size(), false);
  {
    std::size_t next_art = structural;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t r = rows[i];
      const double scale = sign[i] / seed_coef[i];
      for (std::size_t j : row_cols[r]) {
        if (pos_col[j] == Tableau::npos) continue;
        t.at(i, pos_col[j]) = scale * lp.a(r, j);
        if (neg_col[j] != Tableau::npos) t.at(i, neg_col[j]) = -scale * lp.a(r, j);
      }
      t.rhs(i) = scale * lp.b[r];
      if (seed[i] == Tableau::npos) {
        t.at(i, next_art) = 1.0;
        t.basis()[i] = next_art++;
      } else {
        t.basis()[i] = seed[i];
      }
    }
  }

  // --- phase one: maximise -sum(artificials) -------------------------------
  if (artificials > 0) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (t.basis()[i] < structural) continue;
      for (std::size_t c = 0; c < structural; ++c) t.cost(c) += t.at(i, c);
      t.value() += t.rhs(i);
    }
    t.run(width);
    if (t.value() > kFeasibilityTolerance) {
      return LPSolution{LPStatus::infeasible, 0.0, {}};
    }
    // Drive remaining artificials out; rows without a structural pivot are
    // redundant and dropped.
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (t.basis()[i] < structural) continue;
      std::size_t col = Tableau::npos;
      for (std::size_t c = 0; c < structural; ++c) {
        if (std::abs(t.at(i, c)) > kPivotTolerance) {
          col = c;
          break;
        }
      }
      if (col == Tableau::npos) {
        t.dropped()[i] = true;
      } else {
        t.pivot(i, col);
      }
    }
  }

  // --- phase two --------------------------------------------------------------
  std::vector<double> col_cost(width, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (pos_col[j] != Tableau::npos) col_cost[pos_col[j]] = cost[j];
    if (neg_col[j] != Tableau::npos) col_cost[neg_col[j]] = -cost[j];
  }
  for (std::size_t c = 0; c < width; ++c) t.cost(c) = c < structural ? col_cost[c] : 0.0;
  t.value() = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (t.dropped()[i]) continue;
    const double cb = col_cost[t.basis()[i]];
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c < width; ++c) t.cost(c) -= cb * t.at(i, c);
    t.value() -= cb * t.rhs(i);
  }
  if (t.run(structural) == Tableau::Outcome::unbounded) {
    return LPSolution{LPStatus::unbounded, 0.0, {}};
  }

  // --- recover the original variables -----------------------------------------
  std::vector<double> col_value(width, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!t.dropped()[i]) col_value[t.basis()[i]] = std::max(t.rhs(i), 0.0);
  }
  LPSolution sol;
  sol.status = LPStatus::optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (pos_col[j] != Tableau::npos) sol.x[j] = col_value[pos_col[j]];
    if (neg_col[j] != Tableau::npos) sol.x[j] -= col_value[neg_col[j]];
  }
  for (auto it = eliminations.rbegin(); it != eliminations.rend(); ++it) {
    double acc = lp.b[it->row];
    for (std::size_t k : row_cols[it->row]) {
      if (k != it->var) acc -= lp.a(it->row, k) * sol.x[k];
    }
    sol.x[it->var] = acc / lp.a(it->row, it->var);
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];

  for (std::size_t r = 0; r < m; ++r) {
    double residual = -lp.b[r];
    for (std::size_t k : row_cols[r]) residual += lp.a(r, k) * sol.x[k];
    if (std::abs(residual) > kFeasibilityTolerance) {
      throw SolverError("simplex optimum violates row " + std::to_string(r) +
                        " by " + std::to_string(residual));
    }
  }
  return sol;
}

}  // namespace distdom
