#include <cmath>

#include "radner/core/error.hpp"
#include "radner/neural/network.hpp"

namespace radner::neural {
namespace {

using Index = Eigen::Index;

Matrix uniform_matrix(Index rows, Index cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  // Fill row by row so the draw order matches the serialized layout.
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  return m;
}

LstmParams init_lstm(std::size_t in, std::size_t hidden, Rng& rng) {
  const auto h = static_cast<Index>(hidden);
  LstmParams p;
  p.weights = uniform_matrix(4 * h, static_cast<Index>(in) + h, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  p.bias = Vector::Zero(4 * h);
  p.bias.segment(h, h).setOnes();
  return p;
}

LstmParams zero_lstm(std::size_t in, std::size_t hidden) {
  const auto h = static_cast<Index>(hidden);
  return {Matrix::Zero(4 * h, static_cast<Index>(in) + h), Vector::Zero(4 * h)};
}

template <typename Params, typename Fn>
void visit(Params& p, Fn&& fn) {
  fn("word_embedding", p.word_embedding.data(), p.word_embedding.rows(), p.word_embedding.cols());
  fn("char_embedding", p.char_embedding.data(), p.char_embedding.rows(), p.char_embedding.cols());
  auto lstm = [&](const char* name, auto& l) {
    fn(std::string(name) + ".weights", l.weights.data(), l.weights.rows(), l.weights.cols());
    fn(std::string(name) + ".bias", l.bias.data(), l.bias.rows(), Index{1});
  };
  lstm("char_forward", p.char_forward);
  lstm("char_backward", p.char_backward);
  lstm("word_forward", p.word_forward);
  lstm("word_backward", p.word_backward);
  fn("projection", p.projection.data(), p.projection.rows(), p.projection.cols());
  fn("projection_bias", p.projection_bias.data(), p.projection_bias.rows(), Index{1});
  fn("transitions", p.transitions.data(), p.transitions.rows(), p.transitions.cols());
}

struct CharTrace {
  LstmTrace forward;
  LstmTrace backward;  // over reversed characters
};

struct ForwardPass {
  std::vector<CharTrace> chars;
  Matrix word_inputs;  // word_input x n
  LstmTrace word_forward;
  LstmTrace word_backward;  // over reversed tokens
  Matrix hidden;            // 2*word_hidden x n
  Matrix emissions;         // n x L
};

Matrix gather_rows(const Matrix& table, const std::vector<std::size_t>& ids) {
  Matrix out(table.cols(), static_cast<Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) out.col(static_cast<Index>(j)) = table.row(static_cast<Index>(ids[j])).transpose();
  return out;
}

ForwardPass run_forward(const std::vector<TokenFeatures>& features, const TaggerParams& p) {
  const Index n = static_cast<Index>(features.size());
  const Index dw = p.word_embedding.cols();
  const Index hc = static_cast<Index>(p.char_forward.hidden());
  const Index hw = static_cast<Index>(p.word_forward.hidden());

  ForwardPass fp;
  fp.chars.reserve(features.size());
  fp.word_inputs.resize(dw + 2 * hc, n);
  for (Index k = 0; k < n; ++k) {
    const auto& f = features[static_cast<std::size_t>(k)];
    if (f.word >= static_cast<std::size_t>(p.word_embedding.rows()))
      throw InvalidArgument("word index " + std::to_string(f.word) + " outside the embedding table");
    if (f.chars.empty()) throw InvalidArgument("token without characters");
    for (auto c : f.chars)
      if (c >= static_cast<std::size_t>(p.char_embedding.rows()))
        throw InvalidArgument("char index " + std::to_string(c) + " outside the embedding table");

    Matrix chars = gather_rows(p.char_embedding, f.chars);
    CharTrace ct{lstm_forward(p.char_forward, chars), lstm_forward(p.char_backward, chars.rowwise().reverse())};
    const Index m = chars.cols();
    fp.word_inputs.col(k).head(dw) = p.word_embedding.row(static_cast<Index>(f.word)).transpose();
    fp.word_inputs.col(k).segment(dw, hc) = ct.forward.hidden.col(m - 1);
    fp.word_inputs.col(k).tail(hc) = ct.backward.hidden.col(m - 1);
    fp.chars.push_back(std::move(ct));
  }

  fp.word_forward = lstm_forward(p.word_forward, fp.word_inputs);
  fp.word_backward = lstm_forward(p.word_backward, fp.word_inputs.rowwise().reverse());
  fp.hidden.resize(2 * hw, n);
  fp.hidden.topRows(hw) = fp.word_forward.hidden;
  fp.hidden.bottomRows(hw) = fp.word_backward.hidden.rowwise().reverse();
  fp.emissions = ((p.projection * fp.hidden).colwise() + p.projection_bias).transpose();
  return fp;
}

}  // namespace

TaggerParams TaggerParams::init(const Dims& d, Rng& rng) {
  TaggerParams p;
  auto emb_bound = [](std::size_t dim) { return std::sqrt(3.0 / static_cast<double>(dim)); };
  p.word_embedding = uniform_matrix(static_cast<Index>(d.words), static_cast<Index>(d.word_dim), emb_bound(d.word_dim), rng);
  p.char_embedding = uniform_matrix(static_cast<Index>(d.chars), static_cast<Index>(d.char_dim), emb_bound(d.char_dim), rng);
  p.char_forward = init_lstm(d.char_dim, d.char_hidden, rng);
  p.char_backward = init_lstm(d.char_dim, d.char_hidden, rng);
  p.word_forward = init_lstm(d.word_input(), d.word_hidden, rng);
  p.word_backward = init_lstm(d.word_input(), d.word_hidden, rng);
  const double glorot = std::sqrt(6.0 / static_cast<double>(d.labels + 2 * d.word_hidden));
  p.projection = uniform_matrix(static_cast<Index>(d.labels), static_cast<Index>(2 * d.word_hidden), glorot, rng);
  p.projection_bias = Vector::Zero(static_cast<Index>(d.labels));
  p.transitions = Matrix::Zero(static_cast<Index>(d.labels + 2), static_cast<Index>(d.labels + 2));
  return p;
}

TaggerParams TaggerParams::zeros(const Dims& d) {
  TaggerParams p;
  p.word_embedding = Matrix::Zero(static_cast<Index>(d.words), static_cast<Index>(d.word_dim));
  p.char_embedding = Matrix::Zero(static_cast<Index>(d.chars), static_cast<Index>(d.char_dim));
  p.char_forward = zero_lstm(d.char_dim, d.char_hidden);
  p.char_backward = zero_lstm(d.char_dim, d.char_hidden);
  p.word_forward = zero_lstm(d.word_input(), d.word_hidden);
  p.word_backward = zero_lstm(d.word_input(), d.word_hidden);
  p.projection = Matrix::Zero(static_cast<Index>(d.labels), static_cast<Index>(2 * d.word_hidden));
  p.projection_bias = Vector::Zero(static_cast<Index>(d.labels));
  p.transitions = Matrix::Zero(static_cast<Index>(d.labels + 2), static_cast<Index>(d.labels + 2));
  return p;
}

TaggerParams TaggerParams::zeros_like() const { return zeros(dims()); }

Dims TaggerParams::dims() const {
  Dims d;
  d.words = static_cast<std::size_t>(word_embedding.rows());
  d.chars = static_cast<std::size_t>(char_embedding.rows());
  d.labels = static_cast<std::size_t>(projection.rows());
  d.word_dim = static_cast<std::size_t>(word_embedding.cols());
  d.char_dim = static_cast<std::size_t>(char_embedding.cols());
  d.char_hidden = char_forward.hidden();
  d.word_hidden = word_forward.hidden();
  return d;
}

void TaggerParams::check_consistent() const {
  const Dims d = dims();
  auto check_lstm = [](const LstmParams& l, std::size_t in, std::size_t hidden, const char* name) {
    if (l.bias.size() != static_cast<Index>(4 * hidden) || l.weights.rows() != static_cast<Index>(4 * hidden) ||
        l.weights.cols() != static_cast<Index>(in + hidden))
      throw ModelError(std::string(name) + " has inconsistent dimensions");
  };
  check_lstm(char_forward, d.char_dim, d.char_hidden, "char_forward");
  check_lstm(char_backward, d.char_dim, d.char_hidden, "char_backward");
  check_lstm(word_forward, d.word_input(), d.word_hidden, "word_forward");
  check_lstm(word_backward, d.word_input(), d.word_hidden, "word_backward");
  if (projection.cols() != static_cast<Index>(2 * d.word_hidden) || projection_bias.size() != projection.rows())
    throw ModelError("projection has inconsistent dimensions");
  if (transitions.rows() != static_cast<Index>(d.labels + 2) || transitions.cols() != transitions.rows())
    throw ModelError("transition matrix has inconsistent dimensions");
}

bool TaggerParams::all_finite() const {
  bool ok = true;
  for_each([&](const std::string&, Eigen::Map<const Matrix> m) { ok = ok && m.allFinite(); });
  return ok;
}

void TaggerParams::for_each(const std::function<void(const std::string&, Eigen::Map<Matrix>)>& fn) {
  visit(*this, [&](const std::string& name, double* data, Index rows, Index cols) {
    fn(name, Eigen::Map<Matrix>(data, rows, cols));
  });
}

void TaggerParams::for_each(const std::function<void(const std::string&, Eigen::Map<const Matrix>)>& fn) const {
  visit(*this, [&](const std::string& name, const double* data, Index rows, Index cols) {
    fn(name, Eigen::Map<const Matrix>(data, rows, cols));
  });
}

std::size_t TaggerParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, Eigen::Map<const Matrix> m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

SentenceScores score_sentence(const std::vector<TokenFeatures>& features, const TaggerParams& params) {
  if (features.empty()) {
    return {Matrix(0, params.projection.rows()), Matrix(2 * params.word_forward.hidden(), 0)};
  }
  auto fp = run_forward(features, params);
  return {std::move(fp.emissions), std::move(fp.hidden)};
}

double sentence_loss(const std::vector<TokenFeatures>& features, const std::vector<std::size_t>& gold,
                     const TaggerParams& p, TaggerParams* grad) {
  auto fp = run_forward(features, p);
  auto crf = crf_loss_grad(fp.emissions, gold, p.transitions);
  if (!grad) return crf.nll;

  const Index n = static_cast<Index>(features.size());
  const Index dw = p.word_embedding.cols();
  const Index hc = static_cast<Index>(p.char_forward.hidden());
  const Index hw = static_cast<Index>(p.word_forward.hidden());

  grad->transitions += crf.d_transitions;
  const Matrix d_scores = crf.d_emissions.transpose();  // L x n
  grad->projection.noalias() += d_scores * fp.hidden.transpose();
  grad->projection_bias += d_scores.rowwise().sum();
  const Matrix d_hidden = p.projection.transpose() * d_scores;

  Matrix d_inputs = lstm_backward(p.word_forward, fp.word_forward, d_hidden.topRows(hw), grad->word_forward);
  d_inputs += lstm_backward(p.word_backward, fp.word_backward, d_hidden.bottomRows(hw).rowwise().reverse(),
                            grad->word_backward)
                  .rowwise()
                  .reverse();

  for (Index k = 0; k < n; ++k) {
    const auto& f = features[static_cast<std::size_t>(k)];
    grad->word_embedding.row(static_cast<Index>(f.word)) += d_inputs.col(k).head(dw).transpose();

    const auto& ct = fp.chars[static_cast<std::size_t>(k)];
    const Index m = ct.forward.inputs.cols();
    Matrix dh_fwd = Matrix::Zero(hc, m), dh_bwd = Matrix::Zero(hc, m);
    dh_fwd.col(m - 1) = d_inputs.col(k).segment(dw, hc);
    dh_bwd.col(m - 1) = d_inputs.col(k).tail(hc);
    Matrix dc_fwd = lstm_backward(p.char_forward, ct.forward, dh_fwd, grad->char_forward);
    Matrix dc_bwd = lstm_backward(p.char_backward, ct.backward, dh_bwd, grad->char_backward);
    for (Index j = 0; j < m; ++j)
      grad->char_embedding.row(static_cast<Index>(f.chars[static_cast<std::size_t>(j)])) +=
          (dc_fwd.col(j) + dc_bwd.col(m - 1 - j)).transpose();
  }
  return crf.nll;
}

}  // namespace radner::neural
