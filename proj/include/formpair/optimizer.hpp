#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "formpair/geometry.hpp"
#include "formpair/rng.hpp"

namespace formpair {

struct SizeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// One instance of the global pairing selection problem:
//   maximize  sum_r (p_r - T) x_r  -  c * sum_b (n_b - sum_{r in R_b} x_r)^2
// over binary x. Every candidate touches exactly two boxes.
struct PairingProblem {
  std::vector<double> p;                       // candidate probabilities
  std::vector<std::pair<int, int>> touches;    // box indices per candidate
  std::vector<double> n_target;                // n_b per box
  double c = 0.25;
  double T = 0.7;

  int num_candidates() const { return static_cast<int>(p.size()); }
  int num_boxes() const { return static_cast<int>(n_target.size()); }

  void validate() const {
    if (touches.size() != p.size()) {
      throw InvalidInputError("PairingProblem: touches/p size mismatch");
    }
    if (c < 0) throw InvalidInputError("PairingProblem: c must be >= 0");
    for (const double v : p) {
      if (!(v >= 0 && v <= 1)) throw InvalidInputError("PairingProblem: p outside [0,1]");
    }
    for (const double v : n_target) {
      if (!(v >= 0)) throw InvalidInputError("PairingProblem: n_b must be >= 0");
    }
    for (const auto& [a, b] : touches) {
      if (a < 0 || b < 0 || a >= num_boxes() || b >= num_boxes() || a == b) {
        throw InvalidInputError("PairingProblem: candidate must touch two distinct boxes");
      }
    }
  }
};

struct PairingDecision {
  std::vector<std::uint8_t> x;
  double objective = 0;
  std::vector<double> adjusted_scores;  // p_r if accepted, p_r - 1 if rejected
  long long nodes_explored = 0;
  double wall_seconds = 0;
  bool certified = true;
};

inline double objective(const PairingProblem& prob, const std::vector<std::uint8_t>& x) {
  if (static_cast<int>(x.size()) != prob.num_candidates()) {
    throw InvalidInputError("objective: assignment length mismatch");
  }
  double f = 0;
  for (int r = 0; r < prob.num_candidates(); ++r) {
    if (x[r]) f += prob.p[r] - prob.T;
  }
  if (prob.c > 0) {
    std::vector<double> count(prob.n_target.size(), 0.0);
    for (int r = 0; r < prob.num_candidates(); ++r) {
      if (x[r]) {
        count[prob.touches[r].first] += 1.0;
        count[prob.touches[r].second] += 1.0;
      }
    }
    for (std::size_t b = 0; b < count.size(); ++b) {
      const double d = prob.n_target[b] - count[b];
      f -= prob.c * d * d;
    }
  }
  return f;
}

namespace detail {

inline int accepted_count(const std::vector<std::uint8_t>& x) {
  int n = 0;
  for (const auto v : x) n += v;
  return n;
}

// Shared preference order: higher objective, then fewer accepted, then
// lexicographically smaller x. Objectives are compared exactly; both solvers
// evaluate complete assignments through objective(), so equal-by-construction
// ties really compare equal.
inline bool decision_better(double f_new, const std::vector<std::uint8_t>& x_new,
                            double f_old, const std::vector<std::uint8_t>& x_old) {
  if (f_new != f_old) return f_new > f_old;
  const int cn = accepted_count(x_new), co = accepted_count(x_old);
  if (cn != co) return cn < co;
  return x_new < x_old;
}

inline std::vector<double> fill_adjusted(const PairingProblem& prob,
                                         const std::vector<std::uint8_t>& x) {
  std::vector<double> adj(prob.p.size());
  for (std::size_t r = 0; r < prob.p.size(); ++r) {
    adj[r] = x[r] ? prob.p[r] : prob.p[r] - 1.0;
  }
  return adj;
}

}  // namespace detail

// Exhaustive oracle. Refuses problems with more than 22 candidates.
inline PairingDecision solve_bruteforce(const PairingProblem& prob) {
  prob.validate();
  const int n = prob.num_candidates();
  if (n > 22) throw SizeError("solve_bruteforce: more than 22 candidates");

  const auto t0 = std::chrono::steady_clock::now();
  PairingDecision best;
  best.x.assign(n, 0);
  best.objective = objective(prob, best.x);
  std::vector<std::uint8_t> x(n, 0);
  for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
    for (int r = 0; r < n; ++r) x[r] = (mask >> r) & 1;
    const double f = objective(prob, x);
    if (detail::decision_better(f, x, best.objective, best.x)) {
      best.objective = f;
      best.x = x;
    }
    ++best.nodes_explored;
  }
  best.adjusted_scores = detail::fill_adjusted(prob, best.x);
  best.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return best;
}

namespace detail {

// Presolve: fix variables whose acceptance can never strictly help (x = 0)
// or never hurts under any completion (x = 1), using worst-case bounds on the
// co-accepted candidates of their two boxes. Flipping r on changes f by
//   (p_r - T) + c [2(n_b1 - s_b1) - 1] + c [2(n_b2 - s_b2) - 1]
// where s_b counts the other accepted candidates of box b; s_b ranges between
// the fixed-accepted count and that plus the free degree. Rejection is
// preferred on exact ties, matching the decision comparator.
inline void presolve_fix(const PairingProblem& prob, std::vector<int>& fixed) {
  const int n = prob.num_candidates();
  const int nb = prob.num_boxes();
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<double> s_fixed(nb, 0.0);
    std::vector<int> free_deg(nb, 0);
    for (int r = 0; r < n; ++r) {
      if (fixed[r] == 1) {
        s_fixed[prob.touches[r].first] += 1;
        s_fixed[prob.touches[r].second] += 1;
      } else if (fixed[r] < 0) {
        ++free_deg[prob.touches[r].first];
        ++free_deg[prob.touches[r].second];
      }
    }
    for (int r = 0; r < n; ++r) {
      if (fixed[r] >= 0) continue;
      const auto [b1, b2] = prob.touches[r];
      const auto gain = [&](double s1, double s2) {
        return (prob.p[r] - prob.T) +
               prob.c * (2.0 * (prob.n_target[b1] - s1) - 1.0) +
               prob.c * (2.0 * (prob.n_target[b2] - s2) - 1.0);
      };
      const double best = gain(s_fixed[b1], s_fixed[b2]);
      const double worst = gain(s_fixed[b1] + free_deg[b1] - 1, s_fixed[b2] + free_deg[b2] - 1);
      if (best <= 0) {
        fixed[r] = 0;
        changed = true;
      } else if (worst > 0) {
        fixed[r] = 1;
        changed = true;
      }
    }
  }
}

// One connected component of free candidates after presolve, with box targets
// reduced by the fixed-accepted counts. Solved independently; the comparator
// composes across components (sums of per-component objectives and counts,
// concatenation over disjoint index sets for the lexicographic rule).
struct Component {
  std::vector<int> candidates;          // original candidate indices, ascending
  std::vector<double> p;                // local p
  std::vector<std::pair<int, int>> touches;  // local box indices
  std::vector<double> n_eff;            // local effective targets
};

// Branch and bound over one component. The primary upper bound is the
// concave continuous relaxation over [0,1] for unfixed variables, maximized
// by cyclic coordinate ascent (exact per-coordinate 1-D maximization; the
// relaxation is concave, so the ascent attains the relaxed maximum),
// warm-started from the parent's relaxed point. A cheaper per-box bound that
// respects integer counts is checked first: splitting each candidate's linear
// term between its two boxes and maximizing each box independently over how
// many of its candidates to accept. Nodes also propagate the presolve
// dominance rules before bounding, and a relaxed point that is already
// integral is evaluated as a leaf and fathoms the subtree.
class ComponentSolver {
 public:
  ComponentSolver(const Component& comp, double c, double T, long long node_budget,
                  long long& nodes)
      : comp_(comp), c_(c), T_(T), node_budget_(node_budget), nodes_(nodes) {
    const int n = static_cast<int>(comp_.p.size());
    const int nb = static_cast<int>(comp_.n_eff.size());
    box_candidates_.resize(nb);
    for (int r = 0; r < n; ++r) {
      box_candidates_[comp_.touches[r].first].push_back(r);
      box_candidates_[comp_.touches[r].second].push_back(r);
    }
    // Per box, candidates by descending p (ties by index) for the box bound.
    for (auto& list : box_candidates_) {
      std::sort(list.begin(), list.end(), [&](int a, int b) {
        if (comp_.p[a] != comp_.p[b]) return comp_.p[a] > comp_.p[b];
        return a < b;
      });
    }
  }

  // Returns the optimal local assignment; sets `certified` false if the node
  // budget ran out first.
  std::vector<std::uint8_t> solve(bool& certified) {
    const int n = static_cast<int>(comp_.p.size());
    fixed_.assign(n, -1);
    s_fixed_.assign(comp_.n_eff.size(), 0.0);
    free_deg_.assign(comp_.n_eff.size(), 0);
    for (int r = 0; r < n; ++r) {
      ++free_deg_[comp_.touches[r].first];
      ++free_deg_[comp_.touches[r].second];
    }
    free_count_ = n;

    // Incumbent: threshold assignment improved by deterministic single flips.
    inc_x_.assign(n, 0);
    for (int r = 0; r < n; ++r) inc_x_[r] = comp_.p[r] > T_ ? 1 : 0;
    greedy_improve(inc_x_);
    inc_f_ = local_objective(inc_x_);

    std::vector<double> warm(n, 0.5);
    budget_hit_ = false;
    dfs(warm);
    certified = !budget_hit_;
    return inc_x_;
  }

  double local_objective(const std::vector<std::uint8_t>& x) const {
    double f = 0;
    std::vector<double> count(comp_.n_eff.size(), 0.0);
    for (std::size_t r = 0; r < x.size(); ++r) {
      if (x[r]) {
        f += comp_.p[r] - T_;
        count[comp_.touches[r].first] += 1;
        count[comp_.touches[r].second] += 1;
      }
    }
    for (std::size_t b = 0; b < count.size(); ++b) {
      const double d = comp_.n_eff[b] - count[b];
      f -= c_ * d * d;
    }
    return f;
  }

 private:
  void greedy_improve(std::vector<std::uint8_t>& x) const {
    const int n = static_cast<int>(x.size());
    for (int sweep = 0; sweep < 50; ++sweep) {
      bool improved = false;
      double f = local_objective(x);
      for (int r = 0; r < n; ++r) {
        x[r] ^= 1;
        const double f2 = local_objective(x);
        if (f2 > f + 1e-12) {
          f = f2;
          improved = true;
        } else {
          x[r] ^= 1;
        }
      }
      if (!improved) break;
    }
  }

  void apply_fix(int r, int value, std::vector<int>& trail) {
    fixed_[r] = value;
    trail.push_back(r);
    --free_count_;
    const auto [b1, b2] = comp_.touches[r];
    --free_deg_[b1];
    --free_deg_[b2];
    if (value == 1) {
      s_fixed_[b1] += 1;
      s_fixed_[b2] += 1;
    }
  }

  void undo_trail(const std::vector<int>& trail) {
    for (auto it = trail.rbegin(); it != trail.rend(); ++it) {
      const int r = *it;
      const auto [b1, b2] = comp_.touches[r];
      if (fixed_[r] == 1) {
        s_fixed_[b1] -= 1;
        s_fixed_[b2] -= 1;
      }
      ++free_deg_[b1];
      ++free_deg_[b2];
      fixed_[r] = -1;
      ++free_count_;
    }
  }

  // Gain of flipping r on when its boxes hold s1/s2 other accepted
  // candidates.
  double gain(int r, double s1, double s2) const {
    const auto [b1, b2] = comp_.touches[r];
    return (comp_.p[r] - T_) + c_ * (2.0 * (comp_.n_eff[b1] - s1) - 1.0) +
           c_ * (2.0 * (comp_.n_eff[b2] - s2) - 1.0);
  }

  // Fixes dominated variables under the current partial assignment, to a
  // fixpoint. Accepting can never strictly help when the gain is non-positive
  // even with no other accepted candidates; it always helps when the gain is
  // positive even with every free neighbor accepted.
  void propagate(std::vector<int>& trail) {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t r = 0; r < comp_.p.size(); ++r) {
        if (fixed_[r] >= 0) continue;
        const auto [b1, b2] = comp_.touches[r];
        const double best = gain(static_cast<int>(r), s_fixed_[b1], s_fixed_[b2]);
        if (best <= 0) {
          apply_fix(static_cast<int>(r), 0, trail);
          changed = true;
          continue;
        }
        const double worst = gain(static_cast<int>(r), s_fixed_[b1] + free_deg_[b1] - 1,
                                  s_fixed_[b2] + free_deg_[b2] - 1);
        if (worst > 0) {
          apply_fix(static_cast<int>(r), 1, trail);
          changed = true;
        }
      }
    }
  }

  // Integer-count bound: each candidate's linear term is split in half
  // between its two boxes, and every box independently picks how many of its
  // free candidates to accept (taking them in descending p order). Counts
  // stay integral, which the continuous relaxation does not enforce.
  double box_bound() const {
    double bound = 0;
    for (std::size_t r = 0; r < comp_.p.size(); ++r) {
      if (fixed_[r] == 1) bound += comp_.p[r] - T_;
    }
    for (std::size_t b = 0; b < comp_.n_eff.size(); ++b) {
      const double target = comp_.n_eff[b] - s_fixed_[b];
      double best = -c_ * target * target;  // accept none
      double prefix = 0;
      int k = 0;
      for (const int r : box_candidates_[b]) {
        if (fixed_[r] >= 0) continue;
        prefix += (comp_.p[r] - T_) / 2.0;
        ++k;
        const double d = target - k;
        best = std::max(best, prefix - c_ * d * d);
      }
      bound += best;
    }
    return bound;
  }

  // Relaxation bound; `x` carries the warm start in and the relaxed point out.
  double relax_bound(std::vector<double>& x) const {
    const int n = static_cast<int>(comp_.p.size());
    std::vector<double> box_sum(comp_.n_eff.size(), 0.0);
    for (int r = 0; r < n; ++r) {
      if (fixed_[r] >= 0) x[r] = fixed_[r];
      box_sum[comp_.touches[r].first] += x[r];
      box_sum[comp_.touches[r].second] += x[r];
    }
    for (int sweep = 0; sweep < 1000; ++sweep) {
      double max_change = 0;
      for (int r = 0; r < n; ++r) {
        if (fixed_[r] >= 0) continue;
        const auto [b1, b2] = comp_.touches[r];
        const double a1 = comp_.n_eff[b1] - (box_sum[b1] - x[r]);
        const double a2 = comp_.n_eff[b2] - (box_sum[b2] - x[r]);
        double t;
        if (c_ > 0) {
          t = (a1 + a2) / 2.0 + (comp_.p[r] - T_) / (4.0 * c_);
          t = std::clamp(t, 0.0, 1.0);
        } else {
          t = comp_.p[r] - T_ > 0 ? 1.0 : 0.0;
        }
        const double delta = t - x[r];
        if (delta != 0) {
          box_sum[b1] += delta;
          box_sum[b2] += delta;
          x[r] = t;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      if (max_change < 1e-7) break;
    }
    double f = 0;
    for (int r = 0; r < n; ++r) f += (comp_.p[r] - T_) * x[r];
    for (std::size_t b = 0; b < box_sum.size(); ++b) {
      const double d = comp_.n_eff[b] - box_sum[b];
      f -= c_ * d * d;
    }
    return f;
  }

  void offer_leaf(const std::vector<std::uint8_t>& x) {
    const double f = local_objective(x);
    if (decision_better(f, x, inc_f_, inc_x_)) {
      inc_f_ = f;
      inc_x_ = x;
    }
  }

  int pick_branch_var() const {
    int best = -1;
    double best_score = -1;
    for (std::size_t r = 0; r < comp_.p.size(); ++r) {
      if (fixed_[r] >= 0) continue;
      const auto [b1, b2] = comp_.touches[r];
      const double influence = std::abs(comp_.n_eff[b1] - s_fixed_[b1]) +
                               std::abs(comp_.n_eff[b2] - s_fixed_[b2]);
      const double score = std::abs(comp_.p[r] - T_) + 2.0 * c_ * influence;
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(r);
      }
    }
    return best;
  }

  void dfs(const std::vector<double>& warm) {
    if (budget_hit_) return;
    if (++nodes_ > node_budget_) {
      budget_hit_ = true;
      return;
    }
    const int n = static_cast<int>(comp_.p.size());

    std::vector<int> trail;
    propagate(trail);

    if (free_count_ == 0) {
      std::vector<std::uint8_t> x(n);
      for (int r = 0; r < n; ++r) x[r] = static_cast<std::uint8_t>(fixed_[r]);
      offer_leaf(x);
      undo_trail(trail);
      return;
    }

    if (box_bound() <= inc_f_ + 1e-9) {
      undo_trail(trail);
      return;
    }

    std::vector<double> relaxed = warm;
    if (relax_bound(relaxed) <= inc_f_ + 1e-9) {
      undo_trail(trail);
      return;
    }

    // An integral relaxed point is the best completion of this subtree.
    bool integral = true;
    for (int r = 0; r < n && integral; ++r) {
      if (fixed_[r] < 0 && std::abs(relaxed[r] - std::round(relaxed[r])) > 1e-9) {
        integral = false;
      }
    }
    if (integral) {
      std::vector<std::uint8_t> x(n);
      for (int r = 0; r < n; ++r) {
        x[r] = fixed_[r] >= 0 ? static_cast<std::uint8_t>(fixed_[r])
                              : static_cast<std::uint8_t>(std::lround(relaxed[r]));
      }
      offer_leaf(x);
      undo_trail(trail);
      return;
    }

    const int r = pick_branch_var();
    for (const int value : {0, 1}) {
      std::vector<int> branch_trail;
      apply_fix(r, value, branch_trail);
      dfs(relaxed);
      undo_trail(branch_trail);
      if (budget_hit_) break;
    }
    undo_trail(trail);
  }

  const Component& comp_;
  const double c_, T_;
  const long long node_budget_;
  long long& nodes_;
  std::vector<std::vector<int>> box_candidates_;
  std::vector<int> fixed_;
  std::vector<double> s_fixed_;
  std::vector<int> free_deg_;
  int free_count_ = 0;
  std::vector<std::uint8_t> inc_x_;
  double inc_f_ = 0;
  bool budget_hit_ = false;
};

}  // namespace detail

// Root continuous-relaxation bound for a whole problem, computed by cyclic
// coordinate ascent from the half point: at least the optimal binary
// objective on every instance.
inline double relaxation_upper_bound(const PairingProblem& prob) {
  prob.validate();
  const int n = prob.num_candidates();
  std::vector<double> x(n, 0.5);
  std::vector<double> box_sum(prob.num_boxes(), 0.0);
  for (int r = 0; r < n; ++r) {
    box_sum[prob.touches[r].first] += x[r];
    box_sum[prob.touches[r].second] += x[r];
  }
  for (int sweep = 0; sweep < 1000; ++sweep) {
    double max_change = 0;
    for (int r = 0; r < n; ++r) {
      const auto [b1, b2] = prob.touches[r];
      const double a1 = prob.n_target[b1] - (box_sum[b1] - x[r]);
      const double a2 = prob.n_target[b2] - (box_sum[b2] - x[r]);
      double t;
      if (prob.c > 0) {
        t = (a1 + a2) / 2.0 + (prob.p[r] - prob.T) / (4.0 * prob.c);
        t = std::clamp(t, 0.0, 1.0);
      } else {
        t = prob.p[r] - prob.T > 0 ? 1.0 : 0.0;
      }
      const double delta = t - x[r];
      if (delta != 0) {
        box_sum[b1] += delta;
        box_sum[b2] += delta;
        x[r] = t;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < 1e-7) break;
  }
  double f = 0;
  for (int r = 0; r < n; ++r) f += (prob.p[r] - prob.T) * x[r];
  for (int b = 0; b < prob.num_boxes(); ++b) {
    const double d = prob.n_target[b] - box_sum[b];
    f -= prob.c * d * d;
  }
  return f;
}

// Exact depth-first branch and bound. Presolve fixes candidates that can
// never (or always) pay off, the rest decomposes into connected components of
// the candidate/box graph, and each component is solved with the concave
// relaxation as upper bound. Returns a provably optimal solution unless the
// node budget is exhausted, in which case the best incumbent is returned
// flagged non-certified.
inline PairingDecision solve_bnb(const PairingProblem& prob,
                                 long long node_budget = 10'000'000) {
  prob.validate();
  const int n = prob.num_candidates();
  const auto t0 = std::chrono::steady_clock::now();

  PairingDecision out;
  if (n == 0) {
    out.objective = 0;
    return out;
  }

  std::vector<int> fixed(n, -1);
  detail::presolve_fix(prob, fixed);

  // Fixed-accepted counts feed the components' effective targets.
  std::vector<double> s_fixed(prob.num_boxes(), 0.0);
  for (int r = 0; r < n; ++r) {
    if (fixed[r] == 1) {
      s_fixed[prob.touches[r].first] += 1;
      s_fixed[prob.touches[r].second] += 1;
    }
  }

  // Union-find over boxes through free candidates.
  std::vector<int> parent(prob.num_boxes());
  for (int b = 0; b < prob.num_boxes(); ++b) parent[b] = b;
  const auto find = [&](int b) {
    while (parent[b] != b) b = parent[b] = parent[parent[b]];
    return b;
  };
  for (int r = 0; r < n; ++r) {
    if (fixed[r] < 0) parent[find(prob.touches[r].first)] = find(prob.touches[r].second);
  }

  std::map<int, detail::Component> components;
  std::map<int, std::map<int, int>> box_local;  // root -> original box -> local
  for (int r = 0; r < n; ++r) {
    if (fixed[r] >= 0) continue;
    const int root = find(prob.touches[r].first);
    auto& comp = components[root];
    auto& local = box_local[root];
    const auto local_box = [&](int b) {
      const auto [it, inserted] = local.try_emplace(b, static_cast<int>(local.size()));
      if (inserted) comp.n_eff.push_back(prob.n_target[b] - s_fixed[b]);
      return it->second;
    };
    comp.candidates.push_back(r);
    comp.p.push_back(prob.p[r]);
    comp.touches.emplace_back(local_box(prob.touches[r].first),
                              local_box(prob.touches[r].second));
  }

  std::vector<std::uint8_t> x(n, 0);
  for (int r = 0; r < n; ++r) {
    if (fixed[r] >= 0) x[r] = static_cast<std::uint8_t>(fixed[r]);
  }
  long long nodes = 0;
  bool certified = true;
  for (auto& [root, comp] : components) {
    detail::ComponentSolver solver(comp, prob.c, prob.T, node_budget, nodes);
    bool comp_certified = true;
    const auto local_x = solver.solve(comp_certified);
    certified = certified && comp_certified;
    for (std::size_t i = 0; i < comp.candidates.size(); ++i) {
      x[comp.candidates[i]] = local_x[i];
    }
  }

  out.x = x;
  out.objective = objective(prob, x);
  out.adjusted_scores = detail::fill_adjusted(prob, x);
  out.nodes_explored = nodes;
  out.certified = certified;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

enum class NeighborMode { Predicted, GroundTruthNoisy };

// Target neighbor counts per box. Predicted mode copies nn_pred; the noisy
// ground-truth mode adds continuous Uniform(-1, 1) noise to the true counts,
// drawn in box order from the seeded generator and clamped at 0 (targets must
// stay non-negative).
inline std::vector<double> apply_neighbor_mode(
    const std::vector<TextBox>& boxes, NeighborMode mode,
    const std::map<std::string, double>* gt_neighbor_counts = nullptr,
    std::uint64_t seed = 0) {
  std::vector<double> n_b(boxes.size(), 0.0);
  if (mode == NeighborMode::Predicted) {
    for (std::size_t i = 0; i < boxes.size(); ++i) n_b[i] = boxes[i].nn_pred;
    return n_b;
  }
  if (!gt_neighbor_counts) {
    throw InvalidInputError("apply_neighbor_mode: ground-truth counts required");
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto it = gt_neighbor_counts->find(boxes[i].id);
    if (it == gt_neighbor_counts->end()) {
      throw InvalidInputError("apply_neighbor_mode: missing ground-truth count for box " +
                              boxes[i].id);
    }
    n_b[i] = std::max(0.0, it->second + rng.uniform(-1.0, 1.0));
  }
  return n_b;
}

}  // namespace formpair
