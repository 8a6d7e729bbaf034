#include <cmath>

#include "radner/neural/network.hpp"

namespace radner::neural {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LstmTrace lstm_forward(const LstmParams& p, const Matrix& inputs) {
  const Eigen::Index h = static_cast<Eigen::Index>(p.hidden());
  const Eigen::Index in = inputs.rows(), steps = inputs.cols();
  LstmTrace tr;
  tr.inputs = inputs;
  tr.gates.resize(4 * h, steps);
  tr.cells.resize(h, steps);
  tr.hidden.resize(h, steps);

  const auto wx = p.weights.leftCols(in);
  const auto wh = p.weights.rightCols(h);
  Vector prev_h = Vector::Zero(h), prev_c = Vector::Zero(h);
  for (Eigen::Index t = 0; t < steps; ++t) {
    Vector z = p.bias + wx * inputs.col(t) + wh * prev_h;
    for (Eigen::Index k = 0; k < h; ++k) {
      z(k) = sigmoid(z(k));                  // input
      z(h + k) = sigmoid(z(h + k));          // forget
      z(2 * h + k) = std::tanh(z(2 * h + k));  // candidate
      z(3 * h + k) = sigmoid(z(3 * h + k));  // output
    }
    Vector c = z.segment(h, h).cwiseProduct(prev_c) + z.head(h).cwiseProduct(z.segment(2 * h, h));
    Vector hid = z.tail(h).cwiseProduct(c.array().tanh().matrix());
    tr.gates.col(t) = z;
    tr.cells.col(t) = c;
    tr.hidden.col(t) = hid;
    prev_h = hid;
    prev_c = c;
  }
  return tr;
}

Matrix lstm_backward(const LstmParams& p, const LstmTrace& tr, const Matrix& d_hidden, LstmParams& grad) {
  const Eigen::Index h = static_cast<Eigen::Index>(p.hidden());
  const Eigen::Index in = tr.inputs.rows(), steps = tr.inputs.cols();
  Matrix d_inputs = Matrix::Zero(in, steps);
  Vector dh_next = Vector::Zero(h), dc_next = Vector::Zero(h);
  Vector dz(4 * h);

  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto g = tr.gates.col(t);
    const auto gi = g.head(h), gf = g.segment(h, h), gc = g.segment(2 * h, h), go = g.tail(h);
    const Vector tanh_c = tr.cells.col(t).array().tanh();
    const Vector prev_c = t > 0 ? Vector(tr.cells.col(t - 1)) : Vector::Zero(h);
    const Vector prev_h = t > 0 ? Vector(tr.hidden.col(t - 1)) : Vector::Zero(h);

    const Vector dh = d_hidden.col(t) + dh_next;
    const Vector dc = dh.cwiseProduct(go).cwiseProduct((1.0 - tanh_c.array().square()).matrix()) + dc_next;
    dz.head(h) = dc.cwiseProduct(gc).cwiseProduct((gi.array() * (1.0 - gi.array())).matrix());
    dz.segment(h, h) = dc.cwiseProduct(prev_c).cwiseProduct((gf.array() * (1.0 - gf.array())).matrix());
    dz.segment(2 * h, h) = dc.cwiseProduct(gi).cwiseProduct((1.0 - gc.array().square()).matrix());
    dz.tail(h) = dh.cwiseProduct(tanh_c).cwiseProduct((go.array() * (1.0 - go.array())).matrix());

    grad.weights.leftCols(in).noalias() += dz * tr.inputs.col(t).transpose();
    grad.weights.rightCols(h).noalias() += dz * prev_h.transpose();
    grad.bias += dz;
    d_inputs.col(t).noalias() = p.weights.leftCols(in).transpose() * dz;
    dh_next.noalias() = p.weights.rightCols(h).transpose() * dz;
    dc_next = dc.cwiseProduct(gf);
  }
  return d_inputs;
}

}  // namespace radner::neural
