#include "edoks/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>

#include "edoks/errors.hpp"

namespace edoks {
namespace {

constexpr double kReducedCostEpsilon = 1e-12;

void check_weights(std::span<const double> w, const char* what) {
  if (w.empty()) throw InvalidInput(std::string(what) + " is empty");
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidInput(std::string(what) + " has a negative or non-finite entry");
    }
  }
}

class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand, std::vector<double> cost)
      : n_(supply.size()),
        m_(demand.size()),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        cost_(std::move(cost)),
        flow_(n_ * m_, 0.0),
        basic_(n_ * m_, 0) {}

  std::size_t solve() {
    northwest_corner();
    double cost_scale = 1.0;
    for (double c : cost_) cost_scale = std::max(cost_scale, std::abs(c));
    const double tolerance = kReducedCostEpsilon * cost_scale;
    const std::size_t max_pivots = 100 * (n_ * m_ + n_ + m_) + 1000;

    std::size_t pivots = 0;
    for (;; ++pivots) {
      if (pivots > max_pivots) fail("pivot limit exceeded");
      compute_potentials();
      std::size_t entering = n_ * m_;
      for (std::size_t c = 0; c < n_ * m_; ++c) {
        if (basic_[c]) continue;
        const double reduced = cost_[c] - u_[c / m_] - v_[c % m_];
        if (reduced < -tolerance) {
          entering = c;
          break;
        }
      }
      if (entering == n_ * m_) return pivots;
      pivot(entering);
    }
  }

  [[nodiscard]] const std::vector<double>& flow() const { return flow_; }

 private:
  void northwest_corner() {
    std::vector<double> a = supply_;
    std::vector<double> b = demand_;
    std::size_t i = 0;
    std::size_t j = 0;
    for (;;) {
      const double x = std::min(a[i], b[j]);
      flow_[i * m_ + j] = x;
      basic_[i * m_ + j] = 1;
      a[i] -= x;
      b[j] -= x;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (i == n_ - 1) {
        ++j;
      } else if (j == m_ - 1) {
        ++i;
      } else if (a[i] == 0.0) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Solves u_i + v_j = c_ij over the basis tree with u_0 = 0.
  void compute_potentials() {
    u_.assign(n_, 0.0);
    v_.assign(m_, 0.0);
    std::vector<char> row_known(n_, 0);
    std::vector<char> col_known(m_, 0);
    std::vector<std::size_t> stack{0};  // node ids: rows [0, n), cols [n, n + m)
    row_known[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node < n_) {
        const std::size_t i = node;
        for (std::size_t j = 0; j < m_; ++j) {
          if (basic_[i * m_ + j] && !col_known[j]) {
            v_[j] = cost_[i * m_ + j] - u_[i];
            col_known[j] = 1;
            ++reached;
            stack.push_back(n_ + j);
          }
        }
      } else {
        const std::size_t j = node - n_;
        for (std::size_t i = 0; i < n_; ++i) {
          if (basic_[i * m_ + j] && !row_known[i]) {
            u_[i] = cost_[i * m_ + j] - v_[j];
            row_known[i] = 1;
            ++reached;
            stack.push_back(i);
          }
        }
      }
    }
    if (reached != n_ + m_) fail("basis is not a spanning tree");
  }

  // Path of basic cells from row `row` to column `col` in the basis tree.
  std::vector<std::size_t> tree_path(std::size_t row, std::size_t col) const {
    const std::size_t nodes = n_ + m_;
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> parent(nodes, kNone);
    std::vector<std::size_t> parent_cell(nodes, kNone);
    std::vector<std::size_t> queue{row};
    parent[row] = row;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t node = queue[head];
      if (node == n_ + col) break;
      if (node < n_) {
        for (std::size_t j = 0; j < m_; ++j) {
          const std::size_t cell = node * m_ + j;
          if (basic_[cell] && parent[n_ + j] == kNone) {
            parent[n_ + j] = node;
            parent_cell[n_ + j] = cell;
            queue.push_back(n_ + j);
          }
        }
      } else {
        const std::size_t j = node - n_;
        for (std::size_t i = 0; i < n_; ++i) {
          const std::size_t cell = i * m_ + j;
          if (basic_[cell] && parent[i] == kNone) {
            parent[i] = node;
            parent_cell[i] = cell;
            queue.push_back(i);
          }
        }
      }
    }
    if (parent[n_ + col] == kNone) fail("entering cell has no cycle in the basis");
    std::vector<std::size_t> cells;  // from the column end back to the row
    for (std::size_t node = n_ + col; node != row; node = parent[node]) {
      cells.push_back(parent_cell[node]);
    }
    return cells;
  }

  void pivot(std::size_t entering) {
    const std::vector<std::size_t> path = tree_path(entering / m_, entering % m_);
    // Walking the cycle from the entering cell, signs alternate -, +, -, ...
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) theta = std::min(theta, flow_[path[k]]);
    std::size_t leaving = n_ * m_;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      if (flow_[path[k]] == theta) leaving = std::min(leaving, path[k]);
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (k % 2 == 0) {
        flow_[path[k]] -= theta;
      } else {
        flow_[path[k]] += theta;
      }
    }
    flow_[entering] = theta;
    basic_[entering] = 1;
    flow_[leaving] = 0.0;
    basic_[leaving] = 0;
  }

  [[noreturn]] void fail(const std::string& why) const {
    std::ostringstream os;
    os << "transportation simplex: " << why << " (" << n_ << "x" << m_ << " problem, supply total "
       << std::accumulate(supply_.begin(), supply_.end(), 0.0) << ", demand total "
       << std::accumulate(demand_.begin(), demand_.end(), 0.0) << ")";
    throw SolverError(os.str());
  }

  std::size_t n_;
  std::size_t m_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<char> basic_;
  std::vector<double> u_;
  std::vector<double> v_;
};

}  // namespace

double ground_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("ground_distance: vectors of length " + std::to_string(u.size()) +
                            " and " + std::to_string(v.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) sum += std::abs(u[k] - v[k]);
  return sum;
}

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> costs) {
  check_weights(supply, "supply");
  check_weights(demand, "demand");
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  if (costs.size() != n * m) throw InvalidInput("cost matrix does not match supply x demand");
  for (double c : costs) {
    if (!std::isfinite(c)) throw InvalidInput("cost matrix has a non-finite entry");
  }

  const double supply_total = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double demand_total = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (!(supply_total > 0.0) || !(demand_total > 0.0)) {
    throw InvalidInput("supply and demand must carry positive total weight");
  }

  std::vector<double> a(supply.begin(), supply.end());
  std::vector<double> b(demand.begin(), demand.end());
  std::size_t rows = n;
  std::size_t cols = m;
  if (supply_total > demand_total) {
    b.push_back(supply_total - demand_total);
    cols = m + 1;
  } else if (demand_total > supply_total) {
    a.push_back(demand_total - supply_total);
    rows = n + 1;
  }
  std::vector<double> c(rows * cols, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) c[i * cols + j] = costs[i * m + j];
  }

  TransportSimplex simplex(std::move(a), std::move(b), std::move(c));
  TransportSolution out;
  out.pivots = simplex.solve();
  out.flow.rows = n;
  out.flow.cols = m;
  out.flow.flows.resize(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double f = std::max(0.0, simplex.flow()[i * cols + j]);
      out.flow.flows[i * m + j] = f;
      out.flow.total_flow += f;
      out.cost += costs[i * m + j] * f;
    }
  }
  return out;
}

EmdResult emd(const Signature& sx, const Signature& sy, const GroundDistanceFn& distance) {
  for (const Signature* s : {&sx, &sy}) {
    if (s->weights.empty() || s->centroids.size() != s->weights.size()) {
      throw InvalidInput("emd: signature must have matching, nonempty centroids and weights");
    }
  }
  const bool swapped = std::tie(sy.weights, sy.centroids) < std::tie(sx.weights, sx.centroids);
  const Signature& a = swapped ? sy : sx;
  const Signature& b = swapped ? sx : sy;

  std::vector<double> costs(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      costs[i * b.size() + j] = distance(a.centroids[i], b.centroids[j]);
    }
  }
  TransportSolution solution = solve_transport(a.weights, b.weights, costs);

  EmdResult result;
  result.value = solution.cost / solution.flow.total_flow;
  if (!swapped) {
    result.flow = std::move(solution.flow);
  } else {
    result.flow.rows = sx.size();
    result.flow.cols = sy.size();
    result.flow.total_flow = solution.flow.total_flow;
    result.flow.flows.resize(sx.size() * sy.size());
    for (std::size_t i = 0; i < sx.size(); ++i) {
      for (std::size_t j = 0; j < sy.size(); ++j) {
        result.flow.flows[i * sy.size() + j] = solution.flow.at(j, i);
      }
    }
  }
  return result;
}

}  // namespace edoks
