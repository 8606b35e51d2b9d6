#include "fcuc/milp/bnb.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>

namespace fcuc::milp {

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  double bound = -kInf;
  long seq = 0;
  std::vector<std::pair<int, std::uint8_t>> fix;  // binary index, fixed value
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

class Search {
 public:
  Search(const MilpModel& model, const BnbOptions& opts)
      : model_(model), opts_(opts), start_(Clock::now()) {
    for (std::size_t j = 0; j < model.num_vars(); ++j)
      if (model.vars()[j].kind == VarKind::Binary) binaries_.push_back(static_cast<int>(j));
    if (opts.time_limit_seconds < 1e29)
      deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(opts.time_limit_seconds));
    lp_ = std::make_unique<Simplex>(model, opts.lp);
    lp_->set_deadline(deadline_);
  }

  SolveResult run();

 private:
  void apply(const Node& node);
  Status solve_node(const Node& node);
  [[nodiscard]] int pick_branch() const;
  void polish_and_record(double node_obj);
  [[nodiscard]] double cutoff() const {
    if (!std::isfinite(incumbent_)) return kInf;
    return incumbent_ - std::max(opts_.abs_gap, opts_.rel_gap * std::abs(incumbent_));
  }

  const MilpModel& model_;
  const BnbOptions& opts_;
  Clock::time_point start_;
  Clock::time_point deadline_ = Clock::time_point::max();
  std::vector<int> binaries_;
  std::unique_ptr<Simplex> lp_;
  double incumbent_ = kInf;
  std::vector<double> best_x_;
  long nodes_ = 0;
  long lp_iterations_ = 0;
};

void Search::apply(const Node& node) {
  std::vector<double> lo(binaries_.size()), hi(binaries_.size());
  std::vector<int> slot(model_.num_vars(), -1);
  for (std::size_t k = 0; k < binaries_.size(); ++k) {
    const auto& v = model_.vars()[static_cast<std::size_t>(binaries_[k])];
    lo[k] = v.lb;
    hi[k] = v.ub;
    slot[static_cast<std::size_t>(binaries_[k])] = static_cast<int>(k);
  }
  for (const auto& [j, val] : node.fix) {
    const auto k = static_cast<std::size_t>(slot[static_cast<std::size_t>(j)]);
    lo[k] = hi[k] = val;
  }
  for (std::size_t k = 0; k < binaries_.size(); ++k) {
    const int j = binaries_[k];
    if (lp_->lower(j) != lo[k] || lp_->upper(j) != hi[k]) lp_->set_bounds(j, lo[k], hi[k]);
  }
}

Status Search::solve_node(const Node& node) {
  apply(node);
  const long before = lp_->iterations();
  auto st = lp_->solve();
  lp_iterations_ += lp_->iterations() - before;
  if (st == Status::NumericalFailure) {
    // Cold restart from the slack basis with the node's bounds.
    auto fresh = std::make_unique<Simplex>(model_, opts_.lp);
    fresh->set_deadline(deadline_);
    lp_ = std::move(fresh);
    apply(node);
    st = lp_->solve();
    lp_iterations_ += lp_->iterations();
  }
  return st;
}

int Search::pick_branch() const {
  int best = -1;
  int best_priority = 0;
  double best_dist = 1.0;
  for (const int j : binaries_) {
    const double v = lp_->value(j);
    const double frac = v - std::floor(v);
    if (frac <= opts_.integrality_tol || frac >= 1.0 - opts_.integrality_tol) continue;
    const int pr = model_.vars()[static_cast<std::size_t>(j)].priority;
    const double dist = std::abs(frac - 0.5);
    if (best < 0 || pr > best_priority || (pr == best_priority && dist < best_dist)) {
      best = j;
      best_priority = pr;
      best_dist = dist;
    }
  }
  return best;
}

void Search::polish_and_record(double node_obj) {
  std::vector<double> x = lp_->primal();
  double obj = node_obj;
  if (!binaries_.empty()) {
    Node fixed;
    for (const int j : binaries_)
      fixed.fix.emplace_back(j, static_cast<std::uint8_t>(std::lround(lp_->value(j))));
    const auto st = solve_node(fixed);
    if (st == Status::Optimal) {
      x = lp_->primal();
      obj = lp_->objective();
    } else {
      for (const int j : binaries_) x[static_cast<std::size_t>(j)] = std::round(x[static_cast<std::size_t>(j)]);
    }
  }
  if (obj < incumbent_) {
    incumbent_ = obj;
    best_x_ = std::move(x);
    if (opts_.on_incumbent) opts_.on_incumbent(incumbent_, nodes_);
  }
}

SolveResult Search::run() {
  SolveResult res;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long seq = 0;
  std::optional<Node> next = Node{};
  double root_bound = -kInf;
  Status stop = Status::Optimal;

  while (next || !open.empty()) {
    Node node;
    if (next) {
      node = std::move(*next);
      next.reset();
    } else {
      node = open.top();
      open.pop();
    }
    if (node.bound >= cutoff()) continue;
    if (nodes_ >= opts_.node_limit) {
      open.push(std::move(node));
      stop = Status::NodeLimit;
      break;
    }
    if (Clock::now() > deadline_) {
      open.push(std::move(node));
      stop = Status::TimeLimit;
      break;
    }
    ++nodes_;
    const auto st = solve_node(node);
    if (st == Status::TimeLimit) {
      open.push(std::move(node));
      stop = Status::TimeLimit;
      break;
    }
    if (nodes_ == 1 && st != Status::Optimal) {
      res.status = st;
      res.nodes = nodes_;
      res.lp_iterations = lp_iterations_;
      res.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
      return res;
    }
    if (st == Status::Infeasible) continue;
    if (st != Status::Optimal) {
      stop = Status::NumericalFailure;
      break;
    }
    const double obj = lp_->objective();
    if (nodes_ == 1) root_bound = obj;
    if (obj >= cutoff()) continue;
    const int j = pick_branch();
    if (j < 0) {
      polish_and_record(obj);
      continue;
    }
    const bool up_first = lp_->value(j) >= 0.5;
    Node down{obj, seq++, node.fix};
    down.fix.emplace_back(j, 0);
    Node up{obj, seq++, std::move(node.fix)};
    up.fix.emplace_back(j, 1);
    if (opts_.dive) {
      next = up_first ? std::move(up) : std::move(down);
      open.push(up_first ? std::move(down) : std::move(up));
    } else {
      open.push(std::move(down));
      open.push(std::move(up));
    }
  }

  double best_open = kInf;
  if (next) best_open = std::min(best_open, next->bound);
  while (!open.empty()) {
    best_open = std::min(best_open, open.top().bound);
    open.pop();
  }

  res.nodes = nodes_;
  res.lp_iterations = lp_iterations_;
  res.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
  if (std::isfinite(incumbent_)) {
    res.objective = incumbent_;
    res.values = std::move(best_x_);
    res.best_bound = std::min(incumbent_, std::max(best_open, root_bound));
    res.status = stop;
    const double slack = 1e-6 * std::max(1.0, std::abs(root_bound));
    if (res.objective < root_bound - slack)
      throw std::logic_error("bnb: incumbent objective below the root relaxation bound");
  } else {
    res.status = stop == Status::Optimal ? Status::Infeasible : stop;
    res.best_bound = std::max(best_open, root_bound);
  }
  return res;
}

}  // namespace

SolveResult bnb_solve(const MilpModel& model, const BnbOptions& opts) {
  model.validate();
  Search search(model, opts);
  return search.run();
}

}  // namespace fcuc::milp
