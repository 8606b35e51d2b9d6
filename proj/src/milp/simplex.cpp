#include "fcuc/milp/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace fcuc::milp {

namespace {

constexpr double kSingularPivot = 1e-11;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Simplex::Simplex(const MilpModel& model, SimplexOptions opts) : opts_(opts) {
  n_ = static_cast<int>(model.num_vars());
  m_ = static_cast<int>(model.num_constraints());
  const auto N = static_cast<std::size_t>(n_ + m_);

  std::vector<int> count(static_cast<std::size_t>(n_) + 1, 0);
  for (const auto& r : model.constraints())
    for (const auto& t : r.terms) ++count[static_cast<std::size_t>(t.var) + 1];
  col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (int j = 0; j < n_; ++j)
    col_start_[static_cast<std::size_t>(j) + 1] =
        col_start_[static_cast<std::size_t>(j)] + count[static_cast<std::size_t>(j) + 1];
  row_idx_.resize(static_cast<std::size_t>(col_start_.back()));
  val_.resize(row_idx_.size());
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  int i = 0;
  for (const auto& r : model.constraints()) {
    for (const auto& t : r.terms) {
      const auto k = static_cast<std::size_t>(fill[static_cast<std::size_t>(t.var)]++);
      row_idx_[k] = i;
      val_[k] = t.coef;
    }
    ++i;
  }

  lb_.resize(N);
  ub_.resize(N);
  cost_.assign(N, 0.0);
  for (int j = 0; j < n_; ++j) {
    const auto& v = model.vars()[static_cast<std::size_t>(j)];
    lb_[static_cast<std::size_t>(j)] = v.lb;
    ub_[static_cast<std::size_t>(j)] = v.ub;
    cost_[static_cast<std::size_t>(j)] = v.obj;
  }
  for (int r = 0; r < m_; ++r) {
    const auto& c = model.constraints()[static_cast<std::size_t>(r)];
    lb_[static_cast<std::size_t>(n_ + r)] = c.lower();
    ub_[static_cast<std::size_t>(n_ + r)] = c.upper();
  }
  obj_offset_ = model.obj_offset();

  x_.assign(N, 0.0);
  d_.assign(N, 0.0);
  status_.assign(N, VarStatus::AtLower);
  pos_.assign(N, -1);
  head_.resize(static_cast<std::size_t>(m_));
  for (int r = 0; r < m_; ++r) {
    head_[static_cast<std::size_t>(r)] = n_ + r;
    pos_[static_cast<std::size_t>(n_ + r)] = r;
    status_[static_cast<std::size_t>(n_ + r)] = VarStatus::Basic;
  }
  for (int j = 0; j < n_; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (finite(lb_[uj]) && finite(ub_[uj]))
      status_[uj] = cost_[uj] < 0.0 ? VarStatus::AtUpper : VarStatus::AtLower;
    else
      status_[uj] = VarStatus::AtLower;
    place_nonbasic(j);
  }
  work_col_.resize(static_cast<std::size_t>(m_));
  work_row_.resize(N);
}

void Simplex::place_nonbasic(int j) {
  const auto uj = static_cast<std::size_t>(j);
  auto& st = status_[uj];
  if (st == VarStatus::Basic) return;
  if (st == VarStatus::AtUpper && !finite(ub_[uj])) st = VarStatus::AtLower;
  if (st == VarStatus::AtLower && !finite(lb_[uj])) st = finite(ub_[uj]) ? VarStatus::AtUpper : VarStatus::AtZero;
  if (st == VarStatus::AtZero && finite(lb_[uj])) st = VarStatus::AtLower;
  if (st == VarStatus::AtZero && finite(ub_[uj])) st = VarStatus::AtUpper;
  switch (st) {
    case VarStatus::AtLower: x_[uj] = lb_[uj]; break;
    case VarStatus::AtUpper: x_[uj] = ub_[uj]; break;
    case VarStatus::AtZero: x_[uj] = 0.0; break;
    case VarStatus::Basic: break;
  }
}

void Simplex::set_bounds(int var, double lb, double ub) {
  const auto uj = static_cast<std::size_t>(var);
  lb_[uj] = lb;
  ub_[uj] = ub;
  if (status_[uj] != VarStatus::Basic) place_nonbasic(var);
}

Simplex::Basis Simplex::basis() const { return {status_, head_}; }

void Simplex::set_basis(const Basis& b) {
  status_ = b.status;
  head_ = b.head;
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int r = 0; r < m_; ++r) pos_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])] = r;
  for (int j = 0; j < n_ + m_; ++j) place_nonbasic(j);
  have_inverse_ = false;
}

bool Simplex::deadline_passed() const { return std::chrono::steady_clock::now() > deadline_; }

bool Simplex::reinvert() {
  const auto um = static_cast<std::size_t>(m_);
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::vector<int> row_to_c(um, -1);
    std::vector<int> cover_pos(um, -1);  // basis position of the logical of row i
    std::vector<int> structural_pos;     // basis positions holding structurals
    for (int r = 0; r < m_; ++r) {
      const int h = head_[static_cast<std::size_t>(r)];
      if (is_logical(h))
        cover_pos[static_cast<std::size_t>(h - n_)] = r;
      else
        structural_pos.push_back(r);
    }
    std::vector<int> crow;
    for (int i = 0; i < m_; ++i)
      if (cover_pos[static_cast<std::size_t>(i)] < 0) {
        row_to_c[static_cast<std::size_t>(i)] = static_cast<int>(crow.size());
        crow.push_back(i);
      }
    const auto k = structural_pos.size();
    if (crow.size() != k) return false;

    // W[l][c] = A[crow[l], structural c]; invert by Gauss-Jordan with row pivoting.
    std::vector<double> w(k * k, 0.0), inv(k * k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      const int j = head_[static_cast<std::size_t>(structural_pos[c])];
      for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p) {
        const int l = row_to_c[static_cast<std::size_t>(row_idx_[static_cast<std::size_t>(p)])];
        if (l >= 0) w[static_cast<std::size_t>(l) * k + c] = val_[static_cast<std::size_t>(p)];
      }
    }
    for (std::size_t l = 0; l < k; ++l) inv[l * k + l] = 1.0;
    std::vector<int> row_of_col(k, -1);  // pivot row chosen for column c
    std::vector<char> row_used(k, 0);
    std::vector<std::size_t> dependent;
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t best = k;
      double best_abs = kSingularPivot;
      for (std::size_t l = 0; l < k; ++l) {
        if (row_used[l]) continue;
        const double a = std::abs(w[l * k + c]);
        if (a > best_abs) {
          best_abs = a;
          best = l;
        }
      }
      if (best == k) {
        dependent.push_back(c);
        continue;
      }
      row_used[best] = 1;
      row_of_col[c] = static_cast<int>(best);
      const double piv = w[best * k + c];
      double* wb = &w[best * k];
      double* ib = &inv[best * k];
      const double s = 1.0 / piv;
      for (std::size_t q = 0; q < k; ++q) {
        wb[q] *= s;
        ib[q] *= s;
      }
      for (std::size_t l = 0; l < k; ++l) {
        if (l == best) continue;
        const double f = w[l * k + c];
        if (f == 0.0) continue;
        double* wl = &w[l * k];
        double* il = &inv[l * k];
        for (std::size_t q = c; q < k; ++q) wl[q] -= f * wb[q];
        for (std::size_t q = 0; q < k; ++q) il[q] -= f * ib[q];
      }
    }
    if (!dependent.empty()) {
      // Swap dependent structurals for logicals of rows that received no pivot.
      std::vector<int> free_rows;
      for (std::size_t l = 0; l < k; ++l)
        if (!row_used[l]) free_rows.push_back(crow[l]);
      for (std::size_t t = 0; t < dependent.size(); ++t) {
        const int r = structural_pos[dependent[t]];
        const int j = head_[static_cast<std::size_t>(r)];
        const int logical = n_ + free_rows[t];
        status_[static_cast<std::size_t>(j)] = VarStatus::AtLower;
        pos_[static_cast<std::size_t>(j)] = -1;
        place_nonbasic(j);
        head_[static_cast<std::size_t>(r)] = logical;
        pos_[static_cast<std::size_t>(logical)] = r;
        status_[static_cast<std::size_t>(logical)] = VarStatus::Basic;
      }
      continue;
    }

    // Row c of the structural block inverse sits in the pivot row of column c.
    binv_.assign(um * um, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      const int p = structural_pos[c];
      const double* src = &inv[static_cast<std::size_t>(row_of_col[c]) * k];
      for (std::size_t l = 0; l < k; ++l) binv(p, crow[l]) = src[l];
    }
    for (int i = 0; i < m_; ++i) {
      const int p = cover_pos[static_cast<std::size_t>(i)];
      if (p >= 0) binv(p, i) = -1.0;
    }
    for (std::size_t c = 0; c < k; ++c) {
      const int j = head_[static_cast<std::size_t>(structural_pos[c])];
      const double* src = &inv[static_cast<std::size_t>(row_of_col[c]) * k];
      for (int q = col_start_[static_cast<std::size_t>(j)]; q < col_start_[static_cast<std::size_t>(j) + 1]; ++q) {
        const int i = row_idx_[static_cast<std::size_t>(q)];
        const int p = cover_pos[static_cast<std::size_t>(i)];
        if (p < 0) continue;
        const double a = val_[static_cast<std::size_t>(q)];
        for (std::size_t l = 0; l < k; ++l) binv(p, crow[l]) += a * src[l];
      }
    }
    have_inverse_ = true;
    updates_since_refactor_ = 0;
    return true;
  }
  return false;
}

void Simplex::compute_primal() {
  const auto um = static_cast<std::size_t>(m_);
  std::vector<double> w(um, 0.0);
  for (int j = 0; j < n_ + m_; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (status_[uj] == VarStatus::Basic) continue;
    const double xj = x_[uj];
    if (xj == 0.0) continue;
    if (is_logical(j)) {
      w[static_cast<std::size_t>(j - n_)] += xj;
    } else {
      for (int p = col_start_[uj]; p < col_start_[uj + 1]; ++p)
        w[static_cast<std::size_t>(row_idx_[static_cast<std::size_t>(p)])] -= val_[static_cast<std::size_t>(p)] * xj;
    }
  }
  for (int r = 0; r < m_; ++r) {
    const double* br = &binv_[static_cast<std::size_t>(r) * um];
    double s = 0.0;
    for (std::size_t i = 0; i < um; ++i) s += br[i] * w[i];
    x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])] = s;
  }
}

double Simplex::infeasibility(int j) const {
  const auto uj = static_cast<std::size_t>(j);
  if (x_[uj] < lb_[uj] - opts_.primal_tol) return lb_[uj] - x_[uj];
  if (x_[uj] > ub_[uj] + opts_.primal_tol) return x_[uj] - ub_[uj];
  return 0.0;
}

double Simplex::max_primal_infeasibility() const {
  double worst = 0.0;
  for (int r = 0; r < m_; ++r) worst = std::max(worst, infeasibility(head_[static_cast<std::size_t>(r)]));
  return worst;
}

void Simplex::compute_duals(Phase phase) {
  const auto um = static_cast<std::size_t>(m_);
  std::vector<double> y(um, 0.0);
  for (int r = 0; r < m_; ++r) {
    const int h = head_[static_cast<std::size_t>(r)];
    const auto uh = static_cast<std::size_t>(h);
    double c = 0.0;
    if (phase == Phase::Two) {
      c = cost_[uh];
    } else if (x_[uh] < lb_[uh] - opts_.primal_tol) {
      c = -1.0;
    } else if (x_[uh] > ub_[uh] + opts_.primal_tol) {
      c = 1.0;
    }
    if (c == 0.0) continue;
    const double* br = &binv_[static_cast<std::size_t>(r) * um];
    for (std::size_t i = 0; i < um; ++i) y[i] += c * br[i];
  }
  for (int j = 0; j < n_ + m_; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (status_[uj] == VarStatus::Basic) {
      d_[uj] = 0.0;
      continue;
    }
    if (is_logical(j)) {
      d_[uj] = y[static_cast<std::size_t>(j - n_)];
      continue;
    }
    double s = phase == Phase::Two ? cost_[uj] : 0.0;
    for (int p = col_start_[uj]; p < col_start_[uj + 1]; ++p)
      s -= y[static_cast<std::size_t>(row_idx_[static_cast<std::size_t>(p)])] * val_[static_cast<std::size_t>(p)];
    d_[uj] = s;
  }
}

void Simplex::ftran(int j, std::vector<double>& out) const {
  const auto um = static_cast<std::size_t>(m_);
  std::fill(out.begin(), out.end(), 0.0);
  if (is_logical(j)) {
    const auto i = static_cast<std::size_t>(j - n_);
    for (std::size_t r = 0; r < um; ++r) out[r] = -binv_[r * um + i];
    return;
  }
  const auto uj = static_cast<std::size_t>(j);
  for (int p = col_start_[uj]; p < col_start_[uj + 1]; ++p) {
    const auto i = static_cast<std::size_t>(row_idx_[static_cast<std::size_t>(p)]);
    const double a = val_[static_cast<std::size_t>(p)];
    for (std::size_t r = 0; r < um; ++r) out[r] += a * binv_[r * um + i];
  }
}

void Simplex::pivot_row(int r, std::vector<double>& alpha_row) const {
  const auto um = static_cast<std::size_t>(m_);
  const double* rho = &binv_[static_cast<std::size_t>(r) * um];
  for (int j = 0; j < n_ + m_; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    if (status_[uj] == VarStatus::Basic) {
      alpha_row[uj] = 0.0;
      continue;
    }
    if (is_logical(j)) {
      alpha_row[uj] = -rho[static_cast<std::size_t>(j - n_)];
      continue;
    }
    double s = 0.0;
    for (int p = col_start_[uj]; p < col_start_[uj + 1]; ++p)
      s += rho[static_cast<std::size_t>(row_idx_[static_cast<std::size_t>(p)])] * val_[static_cast<std::size_t>(p)];
    alpha_row[uj] = s;
  }
}

void Simplex::update_inverse(int r, const std::vector<double>& alpha) {
  const auto um = static_cast<std::size_t>(m_);
  const auto ur = static_cast<std::size_t>(r);
  double* br = &binv_[ur * um];
  const double s = 1.0 / alpha[ur];
  for (std::size_t i = 0; i < um; ++i) br[i] *= s;
  for (std::size_t q = 0; q < um; ++q) {
    if (q == ur) continue;
    const double f = alpha[q];
    if (f == 0.0) continue;
    double* bq = &binv_[q * um];
    for (std::size_t i = 0; i < um; ++i) bq[i] -= f * br[i];
  }
  ++updates_since_refactor_;
}

void Simplex::swap_basis(int r, int entering, VarStatus leaving_status) {
  const int leaving = head_[static_cast<std::size_t>(r)];
  status_[static_cast<std::size_t>(leaving)] = leaving_status;
  pos_[static_cast<std::size_t>(leaving)] = -1;
  head_[static_cast<std::size_t>(r)] = entering;
  pos_[static_cast<std::size_t>(entering)] = r;
  status_[static_cast<std::size_t>(entering)] = VarStatus::Basic;
}

bool Simplex::make_dual_feasible() {
  bool flipped = false;
  for (int j = 0; j < n_ + m_; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const auto st = status_[uj];
    if (st == VarStatus::Basic || lb_[uj] == ub_[uj]) continue;
    const double dj = d_[uj];
    if (st == VarStatus::AtLower && dj < -opts_.dual_tol) {
      if (!finite(ub_[uj])) return false;
      status_[uj] = VarStatus::AtUpper;
      x_[uj] = ub_[uj];
      flipped = true;
    } else if (st == VarStatus::AtUpper && dj > opts_.dual_tol) {
      if (!finite(lb_[uj])) return false;
      status_[uj] = VarStatus::AtLower;
      x_[uj] = lb_[uj];
      flipped = true;
    } else if (st == VarStatus::AtZero && std::abs(dj) > opts_.dual_tol) {
      return false;
    }
  }
  if (flipped) compute_primal();
  return true;
}

Status Simplex::solve() {
  if (!have_inverse_ && !reinvert()) return Status::NumericalFailure;
  compute_primal();
  compute_duals(Phase::Two);
  if (make_dual_feasible()) {
    const auto st = run_dual();
    if (st != Status::Optimal) return st;
    compute_duals(Phase::Two);
    if (make_dual_feasible() && max_primal_infeasibility() == 0.0) return Status::Optimal;
  }
  return run_primal();
}

Status Simplex::run_primal() {
  int degenerate = 0;
  auto& alpha = work_col_;
  for (;;) {
    if (iterations_ >= opts_.iteration_limit) return Status::NumericalFailure;
    if ((iterations_ & 31) == 0 && deadline_passed()) return Status::TimeLimit;
    if (updates_since_refactor_ >= opts_.refactor_interval) {
      if (!reinvert()) return Status::NumericalFailure;
      compute_primal();
    }
    const bool phase_one = max_primal_infeasibility() > 0.0;
    compute_duals(phase_one ? Phase::One : Phase::Two);
    const bool bland = degenerate > opts_.degenerate_before_bland;

    int q = -1;
    double best = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const auto st = status_[uj];
      if (st == VarStatus::Basic || lb_[uj] == ub_[uj]) continue;
      const double dj = d_[uj];
      const bool eligible = (st == VarStatus::AtLower && dj < -opts_.dual_tol) ||
                            (st == VarStatus::AtUpper && dj > opts_.dual_tol) ||
                            (st == VarStatus::AtZero && std::abs(dj) > opts_.dual_tol);
      if (!eligible) continue;
      if (bland) {
        q = j;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        q = j;
      }
    }
    if (q < 0) return phase_one ? Status::Infeasible : Status::Optimal;

    const auto uq = static_cast<std::size_t>(q);
    const double dir = d_[uq] < 0.0 ? 1.0 : -1.0;
    ftran(q, alpha);

    // Harris two-pass ratio test.
    const double tol = opts_.primal_tol;
    double theta_max = kInf;
    for (int r = 0; r < m_; ++r) {
      const double a = alpha[static_cast<std::size_t>(r)];
      if (std::abs(a) <= opts_.pivot_tol) continue;
      const auto ub = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
      const double rate = -a * dir;
      const double xb = x_[ub];
      double lim = kInf;
      if (xb < lb_[ub] - tol) {
        if (rate > 0.0) lim = (lb_[ub] - xb + tol) / rate;
      } else if (xb > ub_[ub] + tol) {
        if (rate < 0.0) lim = (xb - ub_[ub] + tol) / -rate;
      } else if (rate < 0.0) {
        if (finite(lb_[ub])) lim = (xb - lb_[ub] + tol) / -rate;
      } else if (finite(ub_[ub])) {
        lim = (ub_[ub] - xb + tol) / rate;
      }
      theta_max = std::min(theta_max, lim);
    }
    const double flip = ub_[uq] - lb_[uq];
    int leave = -1;
    double theta = kInf;
    double leave_abs = 0.0;
    bool leave_to_upper = false;
    for (int r = 0; r < m_; ++r) {
      const double a = alpha[static_cast<std::size_t>(r)];
      if (std::abs(a) <= opts_.pivot_tol) continue;
      const int h = head_[static_cast<std::size_t>(r)];
      const auto ub = static_cast<std::size_t>(h);
      const double rate = -a * dir;
      const double xb = x_[ub];
      double lim = kInf;
      bool to_upper = false;
      if (xb < lb_[ub] - tol) {
        if (rate > 0.0) lim = (lb_[ub] - xb) / rate;
      } else if (xb > ub_[ub] + tol) {
        if (rate < 0.0) {
          lim = (xb - ub_[ub]) / -rate;
          to_upper = true;
        }
      } else if (rate < 0.0) {
        if (finite(lb_[ub])) lim = (xb - lb_[ub]) / -rate;
      } else if (finite(ub_[ub])) {
        lim = (ub_[ub] - xb) / rate;
        to_upper = true;
      }
      if (!finite(lim) || !(lim <= theta_max)) continue;
      const bool better = bland ? (leave < 0 || lim < theta - 1e-12 ||
                                   (lim <= theta + 1e-12 && h < head_[static_cast<std::size_t>(leave)]))
                                : std::abs(a) > leave_abs;
      if (better) {
        leave = r;
        theta = std::max(lim, 0.0);
        leave_abs = std::abs(a);
        leave_to_upper = to_upper;
      }
    }

    if (finite(flip) && flip <= theta && flip <= theta_max) {
      const double step = dir * flip;
      for (int r = 0; r < m_; ++r)
        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])] -= alpha[static_cast<std::size_t>(r)] * step;
      status_[uq] = dir > 0.0 ? VarStatus::AtUpper : VarStatus::AtLower;
      x_[uq] = dir > 0.0 ? ub_[uq] : lb_[uq];
      ++iterations_;
      degenerate = 0;
      continue;
    }
    if (leave < 0) return phase_one ? Status::NumericalFailure : Status::Unbounded;
    if (leave_abs < opts_.numerical_fail_pivot) return Status::NumericalFailure;

    const double step = dir * theta;
    for (int r = 0; r < m_; ++r)
      x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])] -= alpha[static_cast<std::size_t>(r)] * step;
    x_[uq] += step;
    const auto lv = static_cast<std::size_t>(head_[static_cast<std::size_t>(leave)]);
    x_[lv] = leave_to_upper ? ub_[lv] : lb_[lv];
    swap_basis(leave, q, leave_to_upper ? VarStatus::AtUpper : VarStatus::AtLower);
    update_inverse(leave, alpha);
    ++iterations_;
    degenerate = theta < 1e-12 ? degenerate + 1 : 0;
  }
}

Status Simplex::run_dual() {
  int degenerate = 0;
  auto& alpha_row = work_row_;
  auto& alpha = work_col_;
  for (;;) {
    if (iterations_ >= opts_.iteration_limit) return Status::NumericalFailure;
    if ((iterations_ & 31) == 0 && deadline_passed()) return Status::TimeLimit;
    if (updates_since_refactor_ >= opts_.refactor_interval) {
      if (!reinvert()) return Status::NumericalFailure;
      compute_primal();
      compute_duals(Phase::Two);
      if (!make_dual_feasible()) return Status::NumericalFailure;
    }
    const bool bland = degenerate > opts_.degenerate_before_bland;

    int r = -1;
    double worst = 0.0;
    for (int p = 0; p < m_; ++p) {
      const int h = head_[static_cast<std::size_t>(p)];
      const double inf = infeasibility(h);
      if (inf <= 0.0) continue;
      if (bland) {
        if (r < 0 || h < head_[static_cast<std::size_t>(r)]) r = p;
      } else if (inf > worst) {
        worst = inf;
        r = p;
      }
    }
    if (r < 0) return Status::Optimal;

    const auto ul = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
    const bool below = x_[ul] < lb_[ul];
    pivot_row(r, alpha_row);

    auto eligible = [&](int j) {
      const auto uj = static_cast<std::size_t>(j);
      const auto st = status_[uj];
      if (st == VarStatus::Basic || lb_[uj] == ub_[uj]) return false;
      const double a = alpha_row[uj];
      if (std::abs(a) <= opts_.pivot_tol) return false;
      if (st == VarStatus::AtZero) return true;
      const bool increase = st == VarStatus::AtLower;
      // x_leave changes by -a * delta; below needs growth, above needs decrease.
      return below ? (increase ? a < 0.0 : a > 0.0) : (increase ? a > 0.0 : a < 0.0);
    };

    double theta_max = kInf;
    for (int j = 0; j < n_ + m_; ++j) {
      if (!eligible(j)) continue;
      const auto uj = static_cast<std::size_t>(j);
      theta_max = std::min(theta_max, (std::abs(d_[uj]) + opts_.dual_tol) / std::abs(alpha_row[uj]));
    }
    int q = -1;
    double q_abs = 0.0;
    double q_ratio = kInf;
    for (int j = 0; j < n_ + m_; ++j) {
      if (!eligible(j)) continue;
      const auto uj = static_cast<std::size_t>(j);
      const double ratio = std::abs(d_[uj]) / std::abs(alpha_row[uj]);
      if (ratio > theta_max) continue;
      const bool better = bland ? (q < 0 || ratio < q_ratio - 1e-12) : std::abs(alpha_row[uj]) > q_abs;
      if (better) {
        q = j;
        q_abs = std::abs(alpha_row[uj]);
        q_ratio = ratio;
      }
    }
    if (q < 0) return Status::Infeasible;
    if (q_abs < opts_.numerical_fail_pivot) return Status::NumericalFailure;

    const auto uq = static_cast<std::size_t>(q);
    ftran(q, alpha);
    const double arq = alpha[static_cast<std::size_t>(r)];
    if (std::abs(arq - alpha_row[uq]) > 1e-7 * (1.0 + std::abs(arq))) {
      if (updates_since_refactor_ == 0) return Status::NumericalFailure;
      updates_since_refactor_ = opts_.refactor_interval;
      continue;
    }

    const double theta_d = d_[uq] / arq;
    for (int j = 0; j < n_ + m_; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (status_[uj] == VarStatus::Basic || alpha_row[uj] == 0.0) continue;
      d_[uj] -= theta_d * alpha_row[uj];
    }
    d_[uq] = 0.0;
    d_[ul] = -theta_d;

    const double target = below ? lb_[ul] : ub_[ul];
    const double delta = (x_[ul] - target) / arq;
    for (int p = 0; p < m_; ++p)
      x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] -= alpha[static_cast<std::size_t>(p)] * delta;
    x_[uq] += delta;
    x_[ul] = target;
    swap_basis(r, q, below ? VarStatus::AtLower : VarStatus::AtUpper);
    update_inverse(r, alpha);
    ++iterations_;
    degenerate = std::abs(theta_d) < 1e-12 ? degenerate + 1 : 0;
  }
}

double Simplex::objective() const {
  double s = obj_offset_;
  for (int j = 0; j < n_; ++j) s += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
  return s;
}

std::vector<double> Simplex::primal() const {
  return {x_.begin(), x_.begin() + n_};
}

SolveResult lp_solve(const MilpModel& model, const SimplexOptions& opts) {
  model.validate();
  const auto start = std::chrono::steady_clock::now();
  Simplex lp(model, opts);
  if (opts.time_limit_seconds < 1e29)
    lp.set_deadline(start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(opts.time_limit_seconds)));
  SolveResult res;
  res.status = lp.solve();
  res.lp_iterations = lp.iterations();
  if (res.status == Status::Optimal) {
    res.values = lp.primal();
    res.objective = lp.objective();
    res.best_bound = res.objective;
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace fcuc::milp
