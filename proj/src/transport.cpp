#include "rebutrank/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rebutrank/errors.hpp"

namespace rebutrank {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kReducedCostTolerance = 1e-12;
// flows below this are epsilon-perturbation artifacts, not real mass
constexpr double kFlowCleanup = 1e-11;

void validate(const TransportProblem& p) {
  auto m = p.supply.size();
  auto n = p.demand.size();
  if (m < 1 || n < 1) throw Error("transport problem with an empty side");
  if (p.cost.rows() != m || p.cost.cols() != n)
    throw Error("cost matrix shape does not match supply/demand");
  if ((p.cost.array() < 0.0).any())
    throw Error("negative cost entry");
  if ((p.supply.array() < 0.0).any() || (p.demand.array() < 0.0).any())
    throw Error("negative supply or demand");
  if (std::abs(p.supply.sum() - 1.0) > kSumTolerance ||
      std::abs(p.demand.sum() - 1.0) > kSumTolerance)
    throw Error("supply and demand must each sum to 1");
}

struct Basis {
  int m, n;
  std::vector<std::vector<double>> flow;
  std::vector<std::vector<char>> basic;

  Basis(int m_, int n_)
      : m(m_), n(n_),
        flow(static_cast<std::size_t>(m_),
             std::vector<double>(static_cast<std::size_t>(n_), 0.0)),
        basic(static_cast<std::size_t>(m_),
              std::vector<char>(static_cast<std::size_t>(n_), 0)) {}
};

// Northwest-corner start: walk from (0,0) to (m-1,n-1) moving down or right,
// one step per cell, which yields exactly m+n-1 basic cells.
Basis northwest_corner(const Eigen::VectorXd& supply,
                       const Eigen::VectorXd& demand) {
  int m = static_cast<int>(supply.size());
  int n = static_cast<int>(demand.size());
  Basis basis(m, n);
  Eigen::VectorXd s = supply, d = demand;
  int i = 0, j = 0;
  while (true) {
    double f = std::min(s[i], d[j]);
    basis.flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = f;
    basis.basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
    s[i] -= f;
    d[j] -= f;
    if (i == m - 1 && j == n - 1) break;
    if (i == m - 1) ++j;
    else if (j == n - 1) ++i;
    else if (s[i] <= d[j]) ++i;
    else ++j;
  }
  return basis;
}

// Duals from the spanning-tree structure of the basis: u[0] = 0, then
// propagate c = u + v across basic cells.
void compute_duals(const Basis& basis, const Eigen::MatrixXd& cost,
                   std::vector<double>& u, std::vector<double>& v) {
  int m = basis.m, n = basis.n;
  u.assign(static_cast<std::size_t>(m), 0.0);
  v.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<char> u_set(static_cast<std::size_t>(m), 0);
  std::vector<char> v_set(static_cast<std::size_t>(n), 0);
  u_set[0] = 1;
  std::vector<int> stack = {0}; // row nodes 0..m-1, col nodes m..m+n-1
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    if (node < m) {
      int i = node;
      for (int j = 0; j < n; ++j)
        if (basis.basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
            !v_set[static_cast<std::size_t>(j)]) {
          v[static_cast<std::size_t>(j)] =
              cost(i, j) - u[static_cast<std::size_t>(i)];
          v_set[static_cast<std::size_t>(j)] = 1;
          stack.push_back(m + j);
        }
    } else {
      int j = node - m;
      for (int i = 0; i < m; ++i)
        if (basis.basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
            !u_set[static_cast<std::size_t>(i)]) {
          u[static_cast<std::size_t>(i)] =
              cost(i, j) - v[static_cast<std::size_t>(j)];
          u_set[static_cast<std::size_t>(i)] = 1;
          stack.push_back(i);
        }
    }
  }
  for (char s : u_set)
    if (!s) throw NumericalFailure("basis lost spanning-tree structure");
  for (char s : v_set)
    if (!s) throw NumericalFailure("basis lost spanning-tree structure");
}

// Alternating row/col path from row enter_i to col enter_j through basic
// cells; returns the path's cells in walk order.
std::vector<std::pair<int, int>> find_cycle_path(const Basis& basis,
                                                 int enter_i, int enter_j) {
  int m = basis.m, n = basis.n;
  int total = m + n;
  std::vector<int> parent(static_cast<std::size_t>(total), -1);
  std::vector<char> seen(static_cast<std::size_t>(total), 0);
  std::vector<int> stack = {enter_i};
  seen[static_cast<std::size_t>(enter_i)] = 1;
  int target = m + enter_j;
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    if (node == target) break;
    if (node < m) {
      int i = node;
      for (int j = 0; j < n; ++j) {
        int other = m + j;
        if (basis.basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
            !seen[static_cast<std::size_t>(other)]) {
          seen[static_cast<std::size_t>(other)] = 1;
          parent[static_cast<std::size_t>(other)] = node;
          stack.push_back(other);
        }
      }
    } else {
      int j = node - m;
      for (int i = 0; i < m; ++i) {
        if (basis.basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
            !seen[static_cast<std::size_t>(i)]) {
          seen[static_cast<std::size_t>(i)] = 1;
          parent[static_cast<std::size_t>(i)] = node;
          stack.push_back(i);
        }
      }
    }
  }
  if (!seen[static_cast<std::size_t>(target)])
    throw NumericalFailure("no cycle for entering cell");
  std::vector<int> nodes;
  for (int node = target; node != -1; node = parent[static_cast<std::size_t>(node)])
    nodes.push_back(node);
  std::reverse(nodes.begin(), nodes.end()); // enter_i ... target
  std::vector<std::pair<int, int>> cells;
  for (std::size_t p = 0; p + 1 < nodes.size(); ++p) {
    int a = nodes[p], b = nodes[p + 1];
    int i = a < m ? a : b;
    int j = a < m ? b - m : a - m;
    cells.emplace_back(i, j);
  }
  return cells;
}

} // namespace

TransportPlan emd(const TransportProblem& problem) {
  validate(problem);
  int m = static_cast<int>(problem.supply.size());
  int n = static_cast<int>(problem.demand.size());

  // Perturb supplies by 1e-12 * index to break degenerate ties; the last
  // demand absorbs the added mass so the problem stays balanced.
  Eigen::VectorXd supply = problem.supply;
  Eigen::VectorXd demand = problem.demand;
  double added = 0.0;
  for (int i = 0; i < m; ++i) {
    double eps = 1e-12 * static_cast<double>(i);
    supply[i] += eps;
    added += eps;
  }
  demand[n - 1] += added;

  Basis basis = northwest_corner(supply, demand);
  std::vector<double> u, v;
  const long max_iterations = 1000 + 200L * (m + n) * (m + n);
  long iteration = 0;
  while (true) {
    if (++iteration > max_iterations)
      throw NumericalFailure("transportation simplex exceeded iteration guard");
    compute_duals(basis, problem.cost, u, v);

    // Bland: entering cell is the lowest-index (i*n + j) violation.
    int enter_i = -1, enter_j = -1;
    for (int i = 0; i < m && enter_i < 0; ++i)
      for (int j = 0; j < n; ++j) {
        if (basis.basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
          continue;
        if (problem.cost(i, j) - u[static_cast<std::size_t>(i)] -
                v[static_cast<std::size_t>(j)] <
            -kReducedCostTolerance) {
          enter_i = i;
          enter_j = j;
          break;
        }
      }
    if (enter_i < 0) break; // optimal

    auto path = find_cycle_path(basis, enter_i, enter_j);
    // Signs alternate around the cycle: entering gains, the first path cell
    // shares the entering row so it loses, and so on.
    double theta = std::numeric_limits<double>::infinity();
    int leave_i = -1, leave_j = -1;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      auto [i, j] = path[p];
      double f = basis.flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      bool better = f < theta ||
                    (f == theta && (i < leave_i || (i == leave_i && j < leave_j)));
      if (better) {
        theta = f;
        leave_i = i;
        leave_j = j;
      }
    }
    for (std::size_t p = 0; p < path.size(); ++p) {
      auto [i, j] = path[p];
      auto& f = basis.flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      f += (p % 2 == 0) ? -theta : theta;
    }
    basis.flow[static_cast<std::size_t>(enter_i)][static_cast<std::size_t>(enter_j)] =
        theta;
    basis.basic[static_cast<std::size_t>(enter_i)][static_cast<std::size_t>(enter_j)] =
        1;
    basis.basic[static_cast<std::size_t>(leave_i)][static_cast<std::size_t>(leave_j)] =
        0;
    basis.flow[static_cast<std::size_t>(leave_i)][static_cast<std::size_t>(leave_j)] =
        0.0;
  }

  TransportPlan plan;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double f = basis.flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (basis.basic[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
          f > kFlowCleanup) {
        plan.flows.emplace_back(i, j, f);
        plan.objective += f * problem.cost(i, j);
      }
    }
  return plan;
}

TransportProblem make_transport_problem(const WordDistribution& a,
                                        const WordDistribution& b) {
  TransportProblem p;
  auto m = static_cast<Eigen::Index>(a.points.size());
  auto n = static_cast<Eigen::Index>(b.points.size());
  p.supply.resize(m);
  p.demand.resize(n);
  p.cost.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    p.supply[i] = a.points[static_cast<std::size_t>(i)].second;
  for (Eigen::Index j = 0; j < n; ++j)
    p.demand[j] = b.points[static_cast<std::size_t>(j)].second;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      p.cost(i, j) = (a.points[static_cast<std::size_t>(i)].first -
                      b.points[static_cast<std::size_t>(j)].first)
                         .norm();
  return p;
}

double wmd(const WordDistribution& a, const WordDistribution& b) {
  return emd(make_transport_problem(a, b)).objective;
}

double wcd_lower_bound(const WordDistribution& a, const WordDistribution& b) {
  if (a.points.empty() || b.points.empty())
    throw Error("word centroid distance of an empty distribution");
  Eigen::VectorXd mean_a = Eigen::VectorXd::Zero(a.points[0].first.size());
  Eigen::VectorXd mean_b = Eigen::VectorXd::Zero(b.points[0].first.size());
  for (const auto& [vec, w] : a.points) mean_a += w * vec;
  for (const auto& [vec, w] : b.points) mean_b += w * vec;
  return (mean_a - mean_b).norm();
}

} // namespace rebutrank
