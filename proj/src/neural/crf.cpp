#include "radner/neural/crf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "radner/core/error.hpp"

namespace radner::neural {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

void check_shapes(const Matrix& emissions, const Matrix& transitions) {
  const auto labels = emissions.cols();
  if (transitions.rows() != labels + 2 || transitions.cols() != labels + 2)
    throw InvalidArgument("transition matrix is " + std::to_string(transitions.rows()) + "x" +
                          std::to_string(transitions.cols()) + ", expected " + std::to_string(labels + 2) + " square");
}

// alpha(t, j): log-sum of all prefixes ending in label j at position t.
Matrix forward(const Matrix& e, const Matrix& a) {
  const Eigen::Index n = e.rows(), l = e.cols();
  Matrix alpha(n, l);
  alpha.row(0) = a.row(l).head(l) + e.row(0);
  for (Eigen::Index t = 1; t < n; ++t)
    for (Eigen::Index j = 0; j < l; ++j)
      alpha(t, j) = log_sum_exp(alpha.row(t - 1).transpose() + a.col(j).head(l)) + e(t, j);
  return alpha;
}

// beta(t, i): log-sum of all suffixes after position t given label i at t.
Matrix backward(const Matrix& e, const Matrix& a) {
  const Eigen::Index n = e.rows(), l = e.cols();
  Matrix beta(n, l);
  beta.row(n - 1) = a.col(l + 1).head(l).transpose();
  for (Eigen::Index t = n - 2; t >= 0; --t)
    for (Eigen::Index i = 0; i < l; ++i)
      beta(t, i) = log_sum_exp(a.row(i).head(l).transpose() + e.row(t + 1).transpose() + beta.row(t + 1).transpose());
  return beta;
}

}  // namespace

double sequence_score(const Matrix& emissions, const Matrix& transitions, const std::vector<std::size_t>& labels) {
  check_shapes(emissions, transitions);
  const auto l = static_cast<std::size_t>(emissions.cols());
  if (labels.size() != static_cast<std::size_t>(emissions.rows()))
    throw InvalidArgument("label sequence length does not match emissions");
  if (labels.empty()) return transitions(l, l + 1);
  double s = transitions(l, labels.front()) + transitions(labels.back(), l + 1);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    s += emissions(t, labels[t]);
    if (t > 0) s += transitions(labels[t - 1], labels[t]);
  }
  return s;
}

double log_partition(const Matrix& emissions, const Matrix& transitions) {
  check_shapes(emissions, transitions);
  if (emissions.rows() == 0) throw InvalidArgument("empty emission matrix");
  const Eigen::Index l = emissions.cols();
  Matrix alpha = forward(emissions, transitions);
  return log_sum_exp(alpha.row(emissions.rows() - 1).transpose() + transitions.col(l + 1).head(l));
}

CrfLoss crf_loss_grad(const Matrix& emissions, const std::vector<std::size_t>& gold, const Matrix& transitions) {
  check_shapes(emissions, transitions);
  const Eigen::Index n = emissions.rows(), l = emissions.cols();
  if (n == 0) throw InvalidArgument("CRF loss needs at least one token");
  if (gold.size() != static_cast<std::size_t>(n)) throw InvalidArgument("gold length does not match emissions");
  for (auto y : gold)
    if (y >= static_cast<std::size_t>(l)) throw InvalidArgument("gold label index out of range");
  if (!emissions.allFinite() || !transitions.allFinite()) throw InvalidArgument("non-finite CRF scores");

  const Matrix alpha = forward(emissions, transitions);
  const Matrix beta = backward(emissions, transitions);
  CrfLoss out;
  out.log_z = log_sum_exp(alpha.row(n - 1).transpose() + transitions.col(l + 1).head(l));
  out.gold_score = sequence_score(emissions, transitions, gold);
  out.nll = out.log_z - out.gold_score;

  // Expected counts minus observed counts.
  out.d_emissions = ((alpha + beta).array() - out.log_z).exp().matrix();
  out.d_transitions = Matrix::Zero(l + 2, l + 2);
  out.d_transitions.row(l).head(l) = out.d_emissions.row(0);
  out.d_transitions.col(l + 1).head(l) = out.d_emissions.row(n - 1).transpose();
  for (Eigen::Index t = 1; t < n; ++t)
    for (Eigen::Index i = 0; i < l; ++i)
      for (Eigen::Index j = 0; j < l; ++j)
        out.d_transitions(i, j) +=
            std::exp(alpha(t - 1, i) + transitions(i, j) + emissions(t, j) + beta(t, j) - out.log_z);

  out.d_transitions(l, gold.front()) -= 1.0;
  out.d_transitions(gold.back(), l + 1) -= 1.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    out.d_emissions(t, gold[t]) -= 1.0;
    if (t > 0) out.d_transitions(gold[t - 1], gold[t]) -= 1.0;
  }
  return out;
}

ViterbiPath viterbi_decode(const Matrix& emissions, const Matrix& transitions, const TransitionMask& mask) {
  check_shapes(emissions, transitions);
  const Eigen::Index n = emissions.rows(), l = emissions.cols();
  if (n == 0) return {};
  auto legal = [&](Eigen::Index from, Eigen::Index to) {
    return mask.empty() || mask[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
  };

  Matrix delta(n, l);
  Eigen::MatrixXi back(n, l);
  for (Eigen::Index j = 0; j < l; ++j) delta(0, j) = legal(l, j) ? transitions(l, j) + emissions(0, j) : kNegInf;
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < l; ++j) {
      double best = kNegInf;
      Eigen::Index arg = 0;
      for (Eigen::Index i = 0; i < l; ++i) {
        if (!legal(i, j) || delta(t - 1, i) == kNegInf) continue;
        double s = delta(t - 1, i) + transitions(i, j);
        if (s > best) {
          best = s;
          arg = i;
        }
      }
      delta(t, j) = best == kNegInf ? kNegInf : best + emissions(t, j);
      back(t, j) = static_cast<int>(arg);
    }
  }

  double best = kNegInf;
  Eigen::Index last = -1;
  for (Eigen::Index j = 0; j < l; ++j) {
    if (!legal(j, l + 1) || delta(n - 1, j) == kNegInf) continue;
    double s = delta(n - 1, j) + transitions(j, l + 1);
    if (s > best) {
      best = s;
      last = j;
    }
  }
  if (last < 0) throw InvalidArgument("no legal label sequence");

  ViterbiPath path;
  path.score = best;
  path.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    path.labels[static_cast<std::size_t>(t)] = static_cast<std::size_t>(last);
    if (t > 0) last = back(t, last);
  }
  return path;
}

}  // namespace radner::neural
