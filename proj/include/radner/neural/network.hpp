#pragma once

#include <functional>
#include <string>
#include <vector>

#include "radner/core/random.hpp"
#include "radner/neural/crf.hpp"
#include "radner/neural/vocab.hpp"

namespace radner::neural {

struct Dims {
  std::size_t words = 0;
  std::size_t chars = 0;
  std::size_t labels = 0;
  std::size_t word_dim = 64;
  std::size_t char_dim = 16;
  std::size_t char_hidden = 16;  // per direction
  std::size_t word_hidden = 64;  // per direction

  std::size_t word_input() const { return word_dim + 2 * char_hidden; }
  bool operator==(const Dims&) const = default;
};

// Gate rows are stacked input, forget, cell, output; columns are [x; h_prev].
struct LstmParams {
  Matrix weights;  // 4h x (in + h)
  Vector bias;     // 4h

  std::size_t hidden() const { return static_cast<std::size_t>(bias.size() / 4); }
  std::size_t input() const { return static_cast<std::size_t>(weights.cols()) - hidden(); }
};

// Activations of one LSTM pass kept for backpropagation.
struct LstmTrace {
  Matrix inputs;  // in x T
  Matrix gates;   // 4h x T, after nonlinearities
  Matrix cells;   // h x T
  Matrix hidden;  // h x T
};

// Runs the cell over the columns of `inputs` (left to right) from zero state.
LstmTrace lstm_forward(const LstmParams& p, const Matrix& inputs);

// Backpropagates d(loss)/d(hidden) through time, accumulating parameter
// gradients into `grad` and returning d(loss)/d(inputs).
Matrix lstm_backward(const LstmParams& p, const LstmTrace& trace, const Matrix& d_hidden, LstmParams& grad);

struct TaggerParams {
  Matrix word_embedding;  // words x word_dim, one row per word
  Matrix char_embedding;  // chars x char_dim
  LstmParams char_forward, char_backward;
  LstmParams word_forward, word_backward;
  Matrix projection;  // labels x 2*word_hidden
  Vector projection_bias;
  Matrix transitions;  // (labels+2) x (labels+2)

  // Random initialization from `rng`: embeddings uniform in +-sqrt(3/d),
  // recurrent weights in +-1/sqrt(h) with forget bias 1, Glorot projection,
  // zero transitions.
  static TaggerParams init(const Dims& dims, Rng& rng);
  static TaggerParams zeros(const Dims& dims);
  TaggerParams zeros_like() const;

  Dims dims() const;
  // Throws ModelError when tensor shapes disagree with each other.
  void check_consistent() const;
  bool all_finite() const;

  // Visits every tensor, in a fixed order, as a column-major map over its storage.
  void for_each(const std::function<void(const std::string&, Eigen::Map<Matrix>)>& fn);
  void for_each(const std::function<void(const std::string&, Eigen::Map<const Matrix>)>& fn) const;
  std::size_t parameter_count() const;
};

struct SentenceScores {
  Matrix emissions;  // n x L
  Matrix hidden;     // 2*word_hidden x n, forward states stacked over backward states
};

// Character BiLSTM per token (final states of both directions), concatenated
// with the word embedding, then the word-level BiLSTM and a linear projection.
// Throws InvalidArgument when a feature index is outside the parameter tables.
SentenceScores score_sentence(const std::vector<TokenFeatures>& features, const TaggerParams& params);

// CRF negative log-likelihood of `gold`; when `grad` is given, adds the exact
// gradient with respect to every parameter.
double sentence_loss(const std::vector<TokenFeatures>& features, const std::vector<std::size_t>& gold,
                     const TaggerParams& params, TaggerParams* grad);

}  // namespace radner::neural
