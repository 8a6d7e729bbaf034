#pragma once

#include <vector>

#include <Eigen/Dense>

namespace radner::neural {

// Linear-chain CRF over L labels. Transition matrices are (L+2)x(L+2) with
// START = L and STOP = L+1; entry (i, j) scores moving from state i to j.
// Emission matrices are n x L.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using TransitionMask = std::vector<std::vector<bool>>;

// Score of one label path: START->y0, y(t-1)->y(t), y(n-1)->STOP transitions plus emissions.
double sequence_score(const Matrix& emissions, const Matrix& transitions, const std::vector<std::size_t>& labels);

// log of the sum of exp(score) over all label paths (forward algorithm in log space).
double log_partition(const Matrix& emissions, const Matrix& transitions);

struct CrfLoss {
  double nll = 0.0;
  double log_z = 0.0;
  double gold_score = 0.0;
  Matrix d_emissions;
  Matrix d_transitions;
};

// Negative log-likelihood of `gold` with exact gradients from forward-backward
// marginals. Throws InvalidArgument for empty input, illegal labels or
// non-finite scores.
CrfLoss crf_loss_grad(const Matrix& emissions, const std::vector<std::size_t>& gold, const Matrix& transitions);

struct ViterbiPath {
  std::vector<std::size_t> labels;
  double score = 0.0;
};

// Highest-scoring path using only transitions the mask allows (an empty mask
// allows everything). Ties go to the lowest label index. Throws
// InvalidArgument when every path is illegal.
ViterbiPath viterbi_decode(const Matrix& emissions, const Matrix& transitions, const TransitionMask& mask = {});

}  // namespace radner::neural
