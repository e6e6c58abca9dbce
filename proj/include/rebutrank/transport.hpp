#ifndef REBUTRANK_TRANSPORT_HPP
#define REBUTRANK_TRANSPORT_HPP

#include <Eigen/Core>
#include <tuple>
#include <vector>

#include "rebutrank/embeddings.hpp"

namespace rebutrank {

// Balanced transportation problem: supply and demand each sum to 1 (within
// 1e-9), cost is an m x n matrix of nonnegative distances.
struct TransportProblem {
  Eigen::VectorXd supply;
  Eigen::VectorXd demand;
  Eigen::MatrixXd cost;
};

struct TransportPlan {
  std::vector<std::tuple<int, int, double>> flows; // sorted by (i, j)
  double objective = 0.0;
};

// Exact solution via transportation simplex with Bland's anti-cycling rule
// (lowest-index entering variable). Throws NumericalFailure if the iteration
// guard is exceeded.
TransportPlan emd(const TransportProblem& problem);

TransportProblem make_transport_problem(const WordDistribution& a,
                                        const WordDistribution& b);

// Word Mover's Distance: emd objective over pairwise Euclidean costs.
double wmd(const WordDistribution& a, const WordDistribution& b);

// Word Centroid Distance |mean(a) - mean(b)|_2; a lower bound on wmd(a, b).
double wcd_lower_bound(const WordDistribution& a, const WordDistribution& b);

} // namespace rebutrank

#endif
