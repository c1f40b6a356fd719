#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gossip/params.hpp"

namespace gossip {

// Lower-triangular table over pool sizes: rows k = 1..n, columns m = 0..n-k.
// Cells start as NaN so a debug build can catch reads that outrun the fill
// order.
class TriangularTable {
 public:
  TriangularTable() = default;
  explicit TriangularTable(int n)
      : n_(n),
        cells_(static_cast<std::size_t>(n) * (n + 1) / 2,
               std::numeric_limits<double>::quiet_NaN()) {}

  int size() const { return n_; }

  bool contains(int k, int m) const { return k >= 1 && m >= 0 && k + m <= n_; }

  double operator()(int k, int m) const {
    assert(contains(k, m));
    const double value = cells_[index(k, m)];
    assert(!std::isnan(value) && "table cell read before it was solved");
    return value;
  }

  double& at(int k, int m) {
    assert(contains(k, m));
    return cells_[index(k, m)];
  }

  bool operator==(const TriangularTable&) const = default;

 private:
  std::size_t index(int k, int m) const {
    const std::size_t row = static_cast<std::size_t>(k - 1);
    return row * (n_ + 1) - row * (row + 1) / 2 + static_cast<std::size_t>(m);
  }

  int n_ = 0;
  std::vector<double> cells_;
};

// Stationary quantities for one parameter set. Vector entry k-1 refers to a
// pool of k nodes (any k nodes; the model is exchangeable):
//   fresh_truth[k-1]       probability that some pool node holds an accurate
//                          packet of the source's current version
//   truth_table(k, m)      probability that, pooling the stored packets of k
//                          nodes with corrupted copies from m other nodes,
//                          some freshest packet of the pool is accurate
//   expected_min_age[k-1]  expected minimum version age over the pool
// truth_fraction is the k=1, m=0 case: the expected fraction of accurate
// nodes. expected_age is the expected version age at a single node.
struct AnalyticalSolution {
  std::vector<double> fresh_truth;
  TriangularTable truth_table;
  std::vector<double> expected_min_age;
  double truth_fraction = 0.0;
  double expected_age = 0.0;
  bool age_diverges = false;
};

namespace detail {
// A zero denominator means no transition can move the quantity, so it stays
// frozen at its start-of-time value; every pool starts with fresh truth, and
// that agrees with the limit of vanishing rates from above.
inline double settle(double numerator, double denominator) {
  return denominator > 0.0 ? numerator / denominator : 1.0;
}

inline double clamp_unit(double value) {
  assert(value > -1e-12 && value < 1.0 + 1e-12);
  return std::clamp(value, 0.0, 1.0);
}
}  // namespace detail

// Fresh-truth probabilities by backward recursion from the full pool. A pool
// of all n nodes loses the fresh truth exactly when the source self-updates,
// and regains it on the next delivery, giving the boundary value
// delivery / (update + delivery). Smaller pools also gain it via honest
// gossip from outside the pool.
inline std::vector<double> solve_fresh_truth(const NetworkParams& params) {
  validate(params);
  const int n = params.node_count;
  const double per_node = params.per_node_delivery_rate();
  const double link = params.pair_gossip_rate();
  const double honest = 1.0 - params.mutation_prob;

  std::vector<double> fresh(static_cast<std::size_t>(n));
  fresh[static_cast<std::size_t>(n - 1)] = detail::settle(
      params.delivery_rate, params.source_update_rate + params.delivery_rate);
  for (int k = n - 1; k >= 1; --k) {
    const double inflow_gossip = honest * k * (n - k) * link;
    const double numerator = k * per_node + fresh[static_cast<std::size_t>(k)] * inflow_gossip;
    const double denominator = params.source_update_rate + k * per_node + inflow_gossip;
    fresh[static_cast<std::size_t>(k - 1)] =
        detail::clamp_unit(detail::settle(numerator, denominator));
  }
  return fresh;
}

struct TruthTableOptions {
  // Negative control for validation: square the outside-pool count on the
  // corruption-inflow term. This breaks the stationarity balance and must
  // make the solver disagree with simulation.
  bool square_corruption_count = false;
};

// Triangular dynamic program for the truth probabilities. The (n, 0) cell is
// exactly 1: the freshest version class in the network always contains the
// node the source delivered that version to, and that node keeps the truth
// while it stays freshest. Every other cell balances the flows that change
// the pooled quantity:
//   - a delivery into the green pool plants the truth (rate k*per_node);
//   - a delivery into the orange pool plants the truth only if the green
//     pool already held it at age zero (rate m*per_node times fresh_truth);
//   - honest gossip from outside grows the green pool, k -> k+1;
//   - dishonest gossip into the pool, or any gossip into the orange side,
//     grows the orange pool, m -> m+1;
//   - honest gossip from the orange pool into the green pool trades one for
//     the other, (k, m) -> (k+1, m-1).
// Cells are filled along anti-diagonals k+m = n, n-1, ..., 1, ascending in m
// within a diagonal, so every referenced cell is already solved. Terms whose
// pair count is zero are dropped without touching their (possibly
// out-of-range) cell.
inline TriangularTable solve_truth_table(const NetworkParams& params,
                                         const std::vector<double>& fresh_truth,
                                         TruthTableOptions options = {}) {
  validate(params);
  const int n = params.node_count;
  if (fresh_truth.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("solve_truth_table: fresh_truth has wrong length");
  }
  const double per_node = params.per_node_delivery_rate();
  const double link = params.pair_gossip_rate();
  const double mutate = params.mutation_prob;
  const double honest = 1.0 - mutate;

  TriangularTable table(n);
  table.at(n, 0) = 1.0;
  for (int diag = n; diag >= 1; --diag) {
    for (int m = 0; m <= diag - 1; ++m) {
      const int k = diag - m;
      if (k == n && m == 0) continue;
      const int outside = n - k - m;

      double numerator = k * per_node + fresh_truth[static_cast<std::size_t>(k - 1)] * m * per_node;
      double denominator =
          (k + m) * per_node + outside * (k + m) * link + honest * k * m * link;
      if (outside > 0) {
        numerator += table(k + 1, m) * honest * outside * k * link;
        double corruption = (mutate * k + m) * outside;
        if (options.square_corruption_count) corruption *= outside;
        numerator += table(k, m + 1) * corruption * link;
      }
      if (m > 0) {
        numerator += table(k + 1, m - 1) * honest * k * m * link;
      }

      double value = detail::settle(numerator, denominator);
      if (!options.square_corruption_count) value = detail::clamp_unit(value);
      table.at(k, m) = value;
    }
  }
  return table;
}

// Expected minimum version age by backward recursion. The full pool ages by
// one on every source self-update and drops to zero on every delivery,
// giving update/delivery at k = n; smaller pools also inherit the age of a
// grown pool through gossip from outside (mutation leaves ages untouched, so
// the result is independent of mutation_prob). With no deliveries at all the
// age grows without bound whenever the source keeps updating; if the source
// never updates either, every node stays at age zero.
inline std::vector<double> solve_expected_min_age(const NetworkParams& params) {
  validate(params);
  const int n = params.node_count;
  std::vector<double> ages(static_cast<std::size_t>(n));
  if (params.delivery_rate == 0.0) {
    const double frozen = params.source_update_rate > 0.0
                              ? std::numeric_limits<double>::infinity()
                              : 0.0;
    std::fill(ages.begin(), ages.end(), frozen);
    return ages;
  }

  const double per_node = params.per_node_delivery_rate();
  const double link = params.pair_gossip_rate();
  ages[static_cast<std::size_t>(n - 1)] = params.source_update_rate / params.delivery_rate;
  for (int k = n - 1; k >= 1; --k) {
    const double neighbor = k * (n - k) * link;
    const double numerator =
        params.source_update_rate + ages[static_cast<std::size_t>(k)] * neighbor;
    const double denominator = k * per_node + neighbor;
    ages[static_cast<std::size_t>(k - 1)] = numerator / denominator;
    assert(ages[static_cast<std::size_t>(k - 1)] >= 0.0);
  }
  return ages;
}

inline AnalyticalSolution solve(const NetworkParams& params) {
  AnalyticalSolution solution;
  solution.fresh_truth = solve_fresh_truth(params);
  solution.truth_table = solve_truth_table(params, solution.fresh_truth);
  solution.expected_min_age = solve_expected_min_age(params);
  solution.truth_fraction = solution.truth_table(1, 0);
  solution.expected_age = solution.expected_min_age.front();
  solution.age_diverges = params.delivery_rate == 0.0 && params.source_update_rate > 0.0;
  return solution;
}

}  // namespace gossip
