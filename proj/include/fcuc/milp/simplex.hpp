#pragma once

// Bounded revised simplex with an explicit dense basis inverse.
//
// Rows are turned into logical variables s = a.x with the row bounds, so the
// working system is A x - s = 0 with every variable carrying [lb, ub].
// Primal phase 1 minimises the sum of infeasibilities; the dual simplex is used
// whenever the current basis is dual feasible (after bound changes in
// branch-and-bound, or for nonnegative-cost models from the slack basis).

#include <chrono>
#include <cstdint>
#include <vector>

#include "fcuc/milp/model.hpp"

namespace fcuc::milp {

struct SimplexOptions {
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  double pivot_tol = 1e-9;
  double numerical_fail_pivot = 1e-10;
  int refactor_interval = 100;
  int degenerate_before_bland = 50;
  long iteration_limit = 1'000'000;
  double time_limit_seconds = 1e30;
};

class Simplex {
 public:
  enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, AtZero };

  struct Basis {
    std::vector<VarStatus> status;  // size num_vars + num_rows
    std::vector<int> head;          // basic variable per basis position
  };

  // Binary variables are relaxed to their bounds.
  explicit Simplex(const MilpModel& model, SimplexOptions opts = {});

  void set_bounds(int var, double lb, double ub);
  [[nodiscard]] double lower(int var) const { return lb_[static_cast<std::size_t>(var)]; }
  [[nodiscard]] double upper(int var) const { return ub_[static_cast<std::size_t>(var)]; }

  Status solve();

  [[nodiscard]] double objective() const;
  [[nodiscard]] std::vector<double> primal() const;
  [[nodiscard]] double value(int var) const { return x_[static_cast<std::size_t>(var)]; }
  [[nodiscard]] long iterations() const { return iterations_; }
  [[nodiscard]] int num_rows() const { return m_; }
  [[nodiscard]] int num_cols() const { return n_; }

  [[nodiscard]] Basis basis() const;
  void set_basis(const Basis& b);

  void set_deadline(std::chrono::steady_clock::time_point deadline) { deadline_ = deadline; }

 private:
  enum class Phase { One, Two };

  [[nodiscard]] bool is_logical(int j) const { return j >= n_; }
  [[nodiscard]] double& binv(int r, int i) {
    return binv_[static_cast<std::size_t>(r) * static_cast<std::size_t>(m_) +
                 static_cast<std::size_t>(i)];
  }
  [[nodiscard]] double binv(int r, int i) const {
    return binv_[static_cast<std::size_t>(r) * static_cast<std::size_t>(m_) +
                 static_cast<std::size_t>(i)];
  }

  void place_nonbasic(int j);
  bool reinvert();
  void compute_primal();
  void compute_duals(Phase phase);
  void ftran(int j, std::vector<double>& out) const;
  void pivot_row(int r, std::vector<double>& alpha_row) const;
  void update_inverse(int r, const std::vector<double>& alpha);
  void swap_basis(int r, int entering, VarStatus leaving_status);

  [[nodiscard]] double infeasibility(int j) const;
  [[nodiscard]] double max_primal_infeasibility() const;
  bool make_dual_feasible();

  Status run_primal();
  Status run_dual();
  bool deadline_passed() const;

  SimplexOptions opts_;
  int n_ = 0;
  int m_ = 0;
  // CSC of the structural columns.
  std::vector<int> col_start_;
  std::vector<int> row_idx_;
  std::vector<double> val_;

  std::vector<double> lb_, ub_, cost_, x_, d_;
  std::vector<VarStatus> status_;
  std::vector<int> head_;
  std::vector<int> pos_;  // basis position or -1
  std::vector<double> binv_;
  bool have_inverse_ = false;
  int updates_since_refactor_ = 0;
  long iterations_ = 0;
  double obj_offset_ = 0.0;
  std::chrono::steady_clock::time_point deadline_ = std::chrono::steady_clock::time_point::max();

  std::vector<double> work_col_, work_row_;
};

// Solves the LP relaxation (binaries relaxed to [lb, ub]).
[[nodiscard]] SolveResult lp_solve(const MilpModel& model, const SimplexOptions& opts = {});

}  // namespace fcuc::milp
