#include <cmath>

#include "eigen_util.hpp"
#include "lipread/errors.hpp"
#include "lipread/layers.hpp"

namespace lipread::nn {

struct LSTM::Trace {
  Shape in_shape;
  Tensor input;   // (N*T, F), row n*T + t
  Tensor gates;   // (T, N, 4H), post-activation [i f g o]
  Tensor cells;   // (T+1, N, H); slice 0 is the zero initial state
  Tensor hidden;  // (T+1, N, H)
};

namespace {

Scalar sigmoid(Scalar x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LSTM::LSTM(int input_size, int hidden_size, std::mt19937_64& rng) : input_(input_size), hidden_(hidden_size) {
  if (input_ < 1 || hidden_ < 1) throw InvalidSpec("bad LSTM dimensions");
  const int g = 4 * hidden_;
  w_input_ = {"w_input", Tensor({input_, g}), Tensor({input_, g})};
  w_hidden_ = {"w_hidden", Tensor({hidden_, g}), Tensor({hidden_, g})};
  bias_ = {"bias", Tensor({g}), Tensor({g})};
  const Scalar lx = std::sqrt(6.0 / (input_ + g));
  const Scalar lh = std::sqrt(6.0 / (hidden_ + g));
  std::uniform_real_distribution<Scalar> dx(-lx, lx), dh(-lh, lh);
  for (auto& v : w_input_.value.values()) v = dx(rng);
  for (auto& v : w_hidden_.value.values()) v = dh(rng);
  for (int j = hidden_; j < 2 * hidden_; ++j) bias_.value[static_cast<std::size_t>(j)] = 1.0;  // forget gate
}

Shape LSTM::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[1] != input_)
    throw ShapeMismatch("lstm expects (T," + std::to_string(input_) + "), got " + shape_string(input));
  return {hidden_};
}

Tensor LSTM::run(const Tensor& x, Trace* trace) const {
  if (x.rank() != 3 || x.dim(2) != input_)
    throw ShapeMismatch("lstm expects (N,T," + std::to_string(input_) + "), got " + shape_string(x.shape()));
  const int n = x.dim(0), t_len = x.dim(1), h = hidden_, g4 = 4 * hidden_;
  const Eigen::Index rows = static_cast<Eigen::Index>(n) * t_len;

  // Input projections for all steps at once.
  RowMatrix xw = as_matrix(x, rows, input_) * as_matrix(w_input_.value, input_, g4);
  xw.rowwise() += ConstVectorMap(bias_.value.data(), g4);

  RowMatrix hprev = RowMatrix::Zero(n, h), cprev = RowMatrix::Zero(n, h);
  RowMatrix z(n, g4);
  const auto wh = as_matrix(w_hidden_.value, h, g4);
  if (trace) {
    trace->in_shape = x.shape();
    trace->input = x.reshaped({static_cast<int>(rows), input_});
    trace->gates = Tensor({t_len, n, g4});
    trace->cells = Tensor({t_len + 1, n, h});
    trace->hidden = Tensor({t_len + 1, n, h});
  }
  for (int t = 0; t < t_len; ++t) {
    z.noalias() = hprev * wh;
    for (int b = 0; b < n; ++b) {
      const Scalar* xrow = xw.data() + (static_cast<Eigen::Index>(b) * t_len + t) * g4;
      Scalar* zrow = z.data() + static_cast<Eigen::Index>(b) * g4;
      for (int j = 0; j < h; ++j) {
        const Scalar i = sigmoid(zrow[j] + xrow[j]);
        const Scalar f = sigmoid(zrow[h + j] + xrow[h + j]);
        const Scalar gg = std::tanh(zrow[2 * h + j] + xrow[2 * h + j]);
        const Scalar o = sigmoid(zrow[3 * h + j] + xrow[3 * h + j]);
        const Scalar c = f * cprev(b, j) + i * gg;
        cprev(b, j) = c;
        hprev(b, j) = o * std::tanh(c);
        zrow[j] = i, zrow[h + j] = f, zrow[2 * h + j] = gg, zrow[3 * h + j] = o;
      }
    }
    if (trace) {
      std::copy(z.data(), z.data() + z.size(), trace->gates.data() + static_cast<std::size_t>(t) * n * g4);
      std::copy(cprev.data(), cprev.data() + cprev.size(),
                trace->cells.data() + static_cast<std::size_t>(t + 1) * n * h);
      std::copy(hprev.data(), hprev.data() + hprev.size(),
                trace->hidden.data() + static_cast<std::size_t>(t + 1) * n * h);
    }
  }
  Tensor out({n, h});
  std::copy(hprev.data(), hprev.data() + hprev.size(), out.data());
  return out;
}

Tensor LSTM::infer(const Tensor& x) const { return run(x, nullptr); }

Tensor LSTM::forward(const Tensor& x) {
  trace_ = std::make_shared<Trace>();
  return run(x, trace_.get());
}

Tensor LSTM::backward(const Tensor& grad_out) {
  if (!trace_) throw InvalidArgument("lstm backward without forward");
  const Trace& tr = *trace_;
  const int n = tr.in_shape[0], t_len = tr.in_shape[1], h = hidden_, g4 = 4 * hidden_;
  const Eigen::Index rows = static_cast<Eigen::Index>(n) * t_len;
  const auto wh = as_matrix(w_hidden_.value, h, g4);

  RowMatrix dz_all(rows, g4);
  RowMatrix dh = as_matrix(grad_out, n, h);
  RowMatrix dc = RowMatrix::Zero(n, h);
  RowMatrix dz(n, g4);
  auto dwh = as_matrix(w_hidden_.grad, h, g4);
  auto db = VectorMap(bias_.grad.data(), g4);

  for (int t = t_len - 1; t >= 0; --t) {
    const Scalar* gates = tr.gates.data() + static_cast<std::size_t>(t) * n * g4;
    const Scalar* c_now = tr.cells.data() + static_cast<std::size_t>(t + 1) * n * h;
    const Scalar* c_prev = tr.cells.data() + static_cast<std::size_t>(t) * n * h;
    for (int b = 0; b < n; ++b) {
      const Scalar* gr = gates + static_cast<std::size_t>(b) * g4;
      Scalar* dzr = dz.data() + static_cast<Eigen::Index>(b) * g4;
      for (int j = 0; j < h; ++j) {
        const Scalar i = gr[j], f = gr[h + j], gg = gr[2 * h + j], o = gr[3 * h + j];
        const Scalar tc = std::tanh(c_now[static_cast<std::size_t>(b) * h + j]);
        const Scalar dhv = dh(b, j);
        const Scalar dcv = dc(b, j) + dhv * o * (1.0 - tc * tc);
        dzr[j] = dcv * gg * i * (1.0 - i);
        dzr[h + j] = dcv * c_prev[static_cast<std::size_t>(b) * h + j] * f * (1.0 - f);
        dzr[2 * h + j] = dcv * i * (1.0 - gg * gg);
        dzr[3 * h + j] = dhv * tc * o * (1.0 - o);
        dc(b, j) = dcv * f;
      }
      std::copy(dzr, dzr + g4, dz_all.data() + (static_cast<Eigen::Index>(b) * t_len + t) * g4);
    }
    const ConstMatrixMap h_prev(tr.hidden.data() + static_cast<std::size_t>(t) * n * h, n, h);
    dwh.noalias() += h_prev.transpose() * dz;
    db += dz.colwise().sum();
    dh.noalias() = dz * wh.transpose();
  }
  const auto x = as_matrix(tr.input, rows, input_);
  as_matrix(w_input_.grad, input_, g4).noalias() += x.transpose() * dz_all;
  Tensor dx(tr.in_shape);
  as_matrix(dx, rows, input_).noalias() = dz_all * as_matrix(w_input_.value, input_, g4).transpose();
  return dx;
}

}  // namespace lipread::nn
