#include "mapel/nn.hpp"

#include <cmath>
#include <string>

#include "mapel/errors.hpp"

namespace mapel::nn {

namespace {

enum EncoderSlot : std::size_t { kConv1W = 0, kConv1B, kConv2W, kConv2B, kEncoderSlots };
enum RecurrentSlot : std::size_t { kGruWx = kEncoderSlots, kGruBx, kGruWh, kGruBh, kHeadW, kHeadB, kRecurrentSlots };
enum JointSlot : std::size_t { kFcW = kEncoderSlots, kFcB, kOutW, kOutB, kJointSlots };

template <class T>
using MatMap = Eigen::Map<Matrix<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const Matrix<T>>;

template <class T>
void fill_uniform(Matrix<T>& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(rng.uniform_real(-bound, bound));
}

template <class T>
void add_encoder_params(ParamSet<T>& p, const ConvShape& s, Rng& rng) {
  const int fan1 = s.channels * 9;
  const int fan2 = s.maps1 * 9;
  fill_uniform(p.add("conv1.weight", fan1, s.maps1), 1.0 / std::sqrt(fan1), rng);
  fill_uniform(p.add("conv1.bias", 1, s.maps1), 1.0 / std::sqrt(fan1), rng);
  fill_uniform(p.add("conv2.weight", fan2, s.maps2), 1.0 / std::sqrt(fan2), rng);
  fill_uniform(p.add("conv2.bias", 1, s.maps2), 1.0 / std::sqrt(fan2), rng);
}

template <class T>
struct EncoderCache {
  int batch = 0;
  Matrix<T> cols1;  // [batch * P1, channels * 9]
  Matrix<T> act1;   // [batch * P1, maps1]
  Matrix<T> cols2;  // [batch * P2, 9 * maps1]
  Matrix<T> act2;   // [batch * P2, maps2] == embedding [batch, P2 * maps2]
};

// Input rows are plane-major images: channel c, pixel (y, x) at c*H*W + y*W + x.
template <class T>
void encoder_forward(const ConvShape& s, const ParamSet<T>& p, const Matrix<T>& input, EncoderCache<T>& cache) {
  if (input.cols() != s.input_dim()) throw ShapeMismatch("encoder input width " + std::to_string(input.cols()) +
                                                         " != " + std::to_string(s.input_dim()));
  const int batch = static_cast<int>(input.rows());
  const int r1 = s.rows1(), c1 = s.cols1(), r2 = s.rows2(), c2 = s.cols2();
  const int p1 = r1 * c1, p2 = r2 * c2;
  cache.batch = batch;

  cache.cols1.setZero(static_cast<Eigen::Index>(batch) * p1, s.channels * 9);
  for (int b = 0; b < batch; ++b) {
    const T* img = input.row(b).data();
    for (int oy = 0; oy < r1; ++oy) {
      for (int ox = 0; ox < c1; ++ox) {
        T* dst = cache.cols1.row(static_cast<Eigen::Index>(b) * p1 + oy * c1 + ox).data();
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = oy * 2 - 1 + ky;
          if (iy < 0 || iy >= s.rows) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = ox * 2 - 1 + kx;
            if (ix < 0 || ix >= s.cols) continue;
            for (int c = 0; c < s.channels; ++c) dst[c * 9 + ky * 3 + kx] = img[(c * s.rows + iy) * s.cols + ix];
          }
        }
      }
    }
  }
  cache.act1.noalias() = cache.cols1 * p.value(kConv1W);
  cache.act1.rowwise() += p.value(kConv1B).row(0);
  cache.act1 = cache.act1.cwiseMax(T(0));

  cache.cols2.setZero(static_cast<Eigen::Index>(batch) * p2, 9 * s.maps1);
  for (int b = 0; b < batch; ++b) {
    for (int oy = 0; oy < r2; ++oy) {
      for (int ox = 0; ox < c2; ++ox) {
        auto dst = cache.cols2.row(static_cast<Eigen::Index>(b) * p2 + oy * c2 + ox);
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = oy * 2 - 1 + ky;
          if (iy < 0 || iy >= r1) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = ox * 2 - 1 + kx;
            if (ix < 0 || ix >= c1) continue;
            dst.segment((ky * 3 + kx) * s.maps1, s.maps1) = cache.act1.row(static_cast<Eigen::Index>(b) * p1 + iy * c1 + ix);
          }
        }
      }
    }
  }
  cache.act2.noalias() = cache.cols2 * p.value(kConv2W);
  cache.act2.rowwise() += p.value(kConv2B).row(0);
  cache.act2 = cache.act2.cwiseMax(T(0));
}

template <class T>
ConstMatMap<T> embedding_view(const ConvShape& s, const EncoderCache<T>& cache) {
  return ConstMatMap<T>(cache.act2.data(), cache.batch, s.embedding_dim());
}

template <class T>
void encoder_backward(const ConvShape& s, const ParamSet<T>& p, const EncoderCache<T>& cache,
                      const Matrix<T>& d_embedding, ParamSet<T>& grads) {
  const int r1 = s.rows1(), c1 = s.cols1(), r2 = s.rows2(), c2 = s.cols2();
  const int p1 = r1 * c1, p2 = r2 * c2;
  const int batch = cache.batch;

  Matrix<T> d_pre2 = ConstMatMap<T>(d_embedding.data(), static_cast<Eigen::Index>(batch) * p2, s.maps2);
  d_pre2.array() *= (cache.act2.array() > T(0)).template cast<T>();
  grads.value(kConv2W).noalias() += cache.cols2.transpose() * d_pre2;
  grads.value(kConv2B) += d_pre2.colwise().sum();
  const Matrix<T> d_cols2 = d_pre2 * p.value(kConv2W).transpose();

  Matrix<T> d_act1 = Matrix<T>::Zero(static_cast<Eigen::Index>(batch) * p1, s.maps1);
  for (int b = 0; b < batch; ++b) {
    for (int oy = 0; oy < r2; ++oy) {
      for (int ox = 0; ox < c2; ++ox) {
        const auto src = d_cols2.row(static_cast<Eigen::Index>(b) * p2 + oy * c2 + ox);
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = oy * 2 - 1 + ky;
          if (iy < 0 || iy >= r1) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = ox * 2 - 1 + kx;
            if (ix < 0 || ix >= c1) continue;
            d_act1.row(static_cast<Eigen::Index>(b) * p1 + iy * c1 + ix) += src.segment((ky * 3 + kx) * s.maps1, s.maps1);
          }
        }
      }
    }
  }
  d_act1.array() *= (cache.act1.array() > T(0)).template cast<T>();
  grads.value(kConv1W).noalias() += cache.cols1.transpose() * d_act1;
  grads.value(kConv1B) += d_act1.colwise().sum();
}

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <class T>
struct GruStepCache {
  Matrix<T> h_prev, r, z, n, hn;
};

// One cell update. `xp` holds the already-projected input rows [batch, 3H].
template <class T>
Matrix<T> gru_cell(const ParamSet<T>& p, int hidden, const Eigen::Ref<const Matrix<T>>& xp, const Matrix<T>& h,
                   GruStepCache<T>* cache) {
  Matrix<T> hp = h * p.value(kGruWh);
  hp.rowwise() += p.value(kGruBh).row(0);
  const auto H = hidden;
  Matrix<T> r = (xp.leftCols(H) + hp.leftCols(H)).unaryExpr([](T v) { return sigmoid(v); });
  Matrix<T> z = (xp.middleCols(H, H) + hp.middleCols(H, H)).unaryExpr([](T v) { return sigmoid(v); });
  Matrix<T> hn = hp.rightCols(H);
  Matrix<T> n = (xp.rightCols(H).array() + r.array() * hn.array()).tanh().matrix();
  Matrix<T> next = ((T(1) - z.array()) * n.array() + z.array() * h.array()).matrix();
  if (cache != nullptr) {
    cache->h_prev = h;
    cache->r = std::move(r);
    cache->z = std::move(z);
    cache->n = std::move(n);
    cache->hn = std::move(hn);
  }
  return next;
}

template <class T>
void check_finite(T loss) {
  if (!std::isfinite(static_cast<double>(loss))) throw NonFiniteLoss("loss is not finite");
}

// Huber regression on Q(s, a); fills dQ, returns the mean loss.
template <class T>
T huber_regression(const Matrix<T>& q, std::span<const int> actions, std::span<const T> targets,
                   std::span<const T> mask, Matrix<T>& dq) {
  dq.setZero(q.rows(), q.cols());
  T total = 0;
  T count = 0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const T w = mask.empty() ? T(1) : mask[static_cast<std::size_t>(i)];
    if (w == T(0)) continue;
    const int a = actions[static_cast<std::size_t>(i)];
    const T delta = q(i, a) - targets[static_cast<std::size_t>(i)];
    total += w * huber(delta);
    dq(i, a) = w * (std::abs(delta) <= T(1) ? delta : (delta > T(0) ? T(1) : T(-1)));
    count += w;
  }
  if (count == T(0)) throw ShapeMismatch("regression batch has no valid entries");
  dq /= count;
  const T loss = total / count;
  check_finite(loss);
  return loss;
}

}  // namespace

template <class T>
T huber(T delta) {
  const T a = std::abs(delta);
  return a <= T(1) ? T(0.5) * delta * delta : a - T(0.5);
}

template <class T>
ParamSet<T> init_recurrent_params(const RecurrentQShape& shape, Rng& rng) {
  ParamSet<T> p;
  add_encoder_params(p, shape.encoder, rng);
  const double gru_bound = 1.0 / std::sqrt(shape.hidden);
  fill_uniform(p.add("gru.input_weight", shape.cell_input_dim(), 3 * shape.hidden), gru_bound, rng);
  fill_uniform(p.add("gru.input_bias", 1, 3 * shape.hidden), gru_bound, rng);
  fill_uniform(p.add("gru.hidden_weight", shape.hidden, 3 * shape.hidden), gru_bound, rng);
  fill_uniform(p.add("gru.hidden_bias", 1, 3 * shape.hidden), gru_bound, rng);
  fill_uniform(p.add("head.weight", shape.hidden, shape.actions), gru_bound, rng);
  fill_uniform(p.add("head.bias", 1, shape.actions), gru_bound, rng);
  return p;
}

template <class T>
ParamSet<T> init_joint_params(const JointQShape& shape, Rng& rng) {
  ParamSet<T> p;
  add_encoder_params(p, shape.encoder, rng);
  const int d = shape.encoder.embedding_dim();
  fill_uniform(p.add("fc.weight", d, shape.hidden), 1.0 / std::sqrt(d), rng);
  fill_uniform(p.add("fc.bias", 1, shape.hidden), 1.0 / std::sqrt(d), rng);
  fill_uniform(p.add("head.weight", shape.hidden, shape.outputs()), 1.0 / std::sqrt(shape.hidden), rng);
  fill_uniform(p.add("head.bias", 1, shape.outputs()), 1.0 / std::sqrt(shape.hidden), rng);
  return p;
}

namespace {

template <class T>
void expect_shape(const ParamSet<T>& p, std::size_t slot, Eigen::Index rows, Eigen::Index cols) {
  if (p.value(slot).rows() != rows || p.value(slot).cols() != cols) {
    throw ShapeMismatch("parameter '" + p[slot].name + "' has shape " + std::to_string(p.value(slot).rows()) + "x" +
                        std::to_string(p.value(slot).cols()) + ", expected " + std::to_string(rows) + "x" +
                        std::to_string(cols));
  }
}

template <class T>
void check_encoder(const ConvShape& s, const ParamSet<T>& p) {
  expect_shape(p, kConv1W, s.channels * 9, s.maps1);
  expect_shape(p, kConv1B, 1, s.maps1);
  expect_shape(p, kConv2W, 9 * s.maps1, s.maps2);
  expect_shape(p, kConv2B, 1, s.maps2);
}

}  // namespace

template <class T>
void check_recurrent_params(const RecurrentQShape& shape, const ParamSet<T>& p) {
  if (p.size() != kRecurrentSlots) throw ShapeMismatch("recurrent network expects 10 parameter tensors");
  check_encoder(shape.encoder, p);
  const int H = shape.hidden;
  expect_shape(p, kGruWx, shape.cell_input_dim(), 3 * H);
  expect_shape(p, kGruBx, 1, 3 * H);
  expect_shape(p, kGruWh, H, 3 * H);
  expect_shape(p, kGruBh, 1, 3 * H);
  expect_shape(p, kHeadW, H, shape.actions);
  expect_shape(p, kHeadB, 1, shape.actions);
}

template <class T>
void check_joint_params(const JointQShape& shape, const ParamSet<T>& p) {
  if (p.size() != kJointSlots) throw ShapeMismatch("joint network expects 8 parameter tensors");
  check_encoder(shape.encoder, p);
  expect_shape(p, kFcW, shape.encoder.embedding_dim(), shape.hidden);
  expect_shape(p, kFcB, 1, shape.hidden);
  expect_shape(p, kOutW, shape.hidden, shape.outputs());
  expect_shape(p, kOutB, 1, shape.outputs());
}

template <class T>
StepOutput<T> recurrent_step(const RecurrentQShape& shape, const ParamSet<T>& params, const Matrix<T>& observations,
                             const Matrix<T>& hidden, const Matrix<T>& reports) {
  const auto batch = observations.rows();
  if (hidden.rows() != batch || hidden.cols() != shape.hidden) throw ShapeMismatch("hidden state shape mismatch");
  if (reports.rows() != batch || reports.cols() != shape.report_width) throw ShapeMismatch("report width mismatch");
  EncoderCache<T> enc;
  encoder_forward(shape.encoder, params, observations, enc);
  const int d = shape.encoder.embedding_dim();
  Matrix<T> xp = embedding_view(shape.encoder, enc) * params.value(kGruWx).topRows(d);
  if (shape.report_width > 0) xp.noalias() += reports * params.value(kGruWx).bottomRows(shape.report_width);
  xp.rowwise() += params.value(kGruBx).row(0);
  StepOutput<T> out;
  out.hidden = gru_cell<T>(params, shape.hidden, xp, hidden, nullptr);
  out.q = out.hidden * params.value(kHeadW);
  out.q.rowwise() += params.value(kHeadB).row(0);
  return out;
}

namespace {

template <class T>
struct SequenceForward {
  std::vector<Eigen::Index> live;  // rows before each sequence's end
  bool all_live = true;
  EncoderCache<T> encoder;  // live rows only
  Matrix<T> cell_inputs;    // [live, D]
  Matrix<T> hidden_all;   // [L*B, H]
  std::vector<GruStepCache<T>> steps;
  Matrix<T> q;
};

template <class T>
void sequence_forward(const RecurrentQShape& shape, const ParamSet<T>& params, const Matrix<T>& observations,
                      const Matrix<T>& reports, int length, int batch, std::span<const int> lengths,
                      SequenceForward<T>& f, bool keep_cache) {
  const auto rows = static_cast<Eigen::Index>(length) * batch;
  if (observations.rows() != rows || reports.rows() != rows || reports.cols() != shape.report_width) {
    throw ShapeMismatch("sequence batch rows do not match length * batch");
  }
  if (!lengths.empty() && lengths.size() != static_cast<std::size_t>(batch)) {
    throw ShapeMismatch("one length per sequence expected");
  }
  // Trailing padding never influences earlier steps, so the encoder and the
  // input projection skip it.
  f.live.clear();
  for (int t = 0; t < length; ++t) {
    for (int b = 0; b < batch; ++b) {
      if (lengths.empty() || t < lengths[static_cast<std::size_t>(b)]) f.live.push_back(static_cast<Eigen::Index>(t) * batch + b);
    }
  }
  f.all_live = static_cast<Eigen::Index>(f.live.size()) == rows;
  if (f.all_live) {
    encoder_forward(shape.encoder, params, observations, f.encoder);
  } else {
    encoder_forward(shape.encoder, params, Matrix<T>(observations(f.live, Eigen::all)), f.encoder);
  }
  const int d = shape.encoder.embedding_dim();
  const int H = shape.hidden;
  f.cell_inputs.resize(static_cast<Eigen::Index>(f.live.size()), shape.cell_input_dim());
  f.cell_inputs.leftCols(d) = embedding_view(shape.encoder, f.encoder);
  if (f.all_live) {
    f.cell_inputs.rightCols(shape.report_width) = reports;
  } else {
    f.cell_inputs.rightCols(shape.report_width) = reports(f.live, Eigen::all);
  }
  Matrix<T> xp_live = f.cell_inputs * params.value(kGruWx);
  xp_live.rowwise() += params.value(kGruBx).row(0);
  Matrix<T> xp;
  if (f.all_live) {
    xp = std::move(xp_live);
  } else {
    xp.setZero(rows, 3 * H);
    xp(f.live, Eigen::all) = xp_live;
  }

  f.hidden_all.resize(rows, H);
  if (keep_cache) f.steps.resize(static_cast<std::size_t>(length));
  Matrix<T> h = Matrix<T>::Zero(batch, H);
  for (int t = 0; t < length; ++t) {
    const auto block = xp.middleRows(static_cast<Eigen::Index>(t) * batch, batch);
    h = gru_cell<T>(params, H, block, h, keep_cache ? &f.steps[static_cast<std::size_t>(t)] : nullptr);
    f.hidden_all.middleRows(static_cast<Eigen::Index>(t) * batch, batch) = h;
  }
  f.q = f.hidden_all * params.value(kHeadW);
  f.q.rowwise() += params.value(kHeadB).row(0);
}

}  // namespace

template <class T>
Matrix<T> recurrent_sequence_q(const RecurrentQShape& shape, const ParamSet<T>& params,
                               const Matrix<T>& observations, const Matrix<T>& reports, int length, int batch,
                               std::span<const int> lengths) {
  SequenceForward<T> f;
  sequence_forward(shape, params, observations, reports, length, batch, lengths, f, false);
  return std::move(f.q);
}

template <class T>
LossAndGrads<T> recurrent_loss_and_grads(const RecurrentQShape& shape, const ParamSet<T>& params,
                                         const SequenceBatch<T>& b) {
  const auto rows = static_cast<std::size_t>(b.length) * static_cast<std::size_t>(b.batch);
  if (b.actions.size() != rows || b.targets.size() != rows || b.mask.size() != rows) {
    throw ShapeMismatch("sequence batch vectors must have length * batch entries");
  }
  std::vector<int> lengths(static_cast<std::size_t>(b.batch), 0);
  for (int t = 0; t < b.length; ++t) {
    for (int s = 0; s < b.batch; ++s) {
      if (b.mask[static_cast<std::size_t>(t * b.batch + s)] != T(0)) lengths[static_cast<std::size_t>(s)] = t + 1;
    }
  }
  SequenceForward<T> f;
  sequence_forward(shape, params, b.observations, b.reports, b.length, b.batch, lengths, f, true);

  LossAndGrads<T> out;
  out.grads = params.zeros_like();
  Matrix<T> dq;
  out.loss = huber_regression<T>(f.q, b.actions, b.targets, b.mask, dq);

  auto& g = out.grads;
  g.value(kHeadW).noalias() = f.hidden_all.transpose() * dq;
  g.value(kHeadB) = dq.colwise().sum();
  const Matrix<T> d_hidden_all = dq * params.value(kHeadW).transpose();

  const int H = shape.hidden;
  Matrix<T> dxp(static_cast<Eigen::Index>(rows), 3 * H);
  Matrix<T> dh = Matrix<T>::Zero(b.batch, H);
  Matrix<T> dhp(b.batch, 3 * H);
  for (int t = b.length - 1; t >= 0; --t) {
    const auto& c = f.steps[static_cast<std::size_t>(t)];
    dh += d_hidden_all.middleRows(static_cast<Eigen::Index>(t) * b.batch, b.batch);
    const auto z = c.z.array();
    const auto r = c.r.array();
    const auto n = c.n.array();
    const Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dn_pre = dh.array() * (T(1) - z) * (T(1) - n * n);
    const Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dz_pre = dh.array() * (c.h_prev.array() - n) * z * (T(1) - z);
    const Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dr_pre = dn_pre * c.hn.array() * r * (T(1) - r);
    auto dxp_t = dxp.middleRows(static_cast<Eigen::Index>(t) * b.batch, b.batch);
    dxp_t.leftCols(H) = dr_pre.matrix();
    dxp_t.middleCols(H, H) = dz_pre.matrix();
    dxp_t.rightCols(H) = dn_pre.matrix();
    dhp.leftCols(H) = dr_pre.matrix();
    dhp.middleCols(H, H) = dz_pre.matrix();
    dhp.rightCols(H) = (dn_pre * r).matrix();
    g.value(kGruWh).noalias() += c.h_prev.transpose() * dhp;
    g.value(kGruBh) += dhp.colwise().sum();
    dh = (dh.array() * z).matrix();
    dh.noalias() += dhp * params.value(kGruWh).transpose();
  }
  const Matrix<T> dxp_live = f.all_live ? std::move(dxp) : Matrix<T>(dxp(f.live, Eigen::all));
  g.value(kGruWx).noalias() = f.cell_inputs.transpose() * dxp_live;
  g.value(kGruBx) = dxp_live.colwise().sum();

  const int d = shape.encoder.embedding_dim();
  const Matrix<T> d_embedding = dxp_live * params.value(kGruWx).topRows(d).transpose();
  encoder_backward(shape.encoder, params, f.encoder, d_embedding, g);
  return out;
}

template <class T>
Matrix<T> joint_q(const JointQShape& shape, const ParamSet<T>& params, const Matrix<T>& inputs) {
  EncoderCache<T> enc;
  encoder_forward(shape.encoder, params, inputs, enc);
  Matrix<T> hidden = embedding_view(shape.encoder, enc) * params.value(kFcW);
  hidden.rowwise() += params.value(kFcB).row(0);
  hidden = hidden.cwiseMax(T(0));
  Matrix<T> q = hidden * params.value(kOutW);
  q.rowwise() += params.value(kOutB).row(0);
  return q;
}

template <class T>
LossAndGrads<T> joint_loss_and_grads(const JointQShape& shape, const ParamSet<T>& params, const JointBatch<T>& b) {
  const auto rows = static_cast<std::size_t>(b.inputs.rows());
  if (b.actions.size() != rows || b.targets.size() != rows) throw ShapeMismatch("joint batch size mismatch");
  EncoderCache<T> enc;
  encoder_forward(shape.encoder, params, b.inputs, enc);
  const Matrix<T> embedding = embedding_view(shape.encoder, enc);
  Matrix<T> hidden = embedding * params.value(kFcW);
  hidden.rowwise() += params.value(kFcB).row(0);
  hidden = hidden.cwiseMax(T(0));
  Matrix<T> q = hidden * params.value(kOutW);
  q.rowwise() += params.value(kOutB).row(0);

  LossAndGrads<T> out;
  out.grads = params.zeros_like();
  Matrix<T> dq;
  out.loss = huber_regression<T>(q, b.actions, b.targets, {}, dq);
  auto& g = out.grads;
  g.value(kOutW).noalias() = hidden.transpose() * dq;
  g.value(kOutB) = dq.colwise().sum();
  Matrix<T> d_hidden = dq * params.value(kOutW).transpose();
  d_hidden.array() *= (hidden.array() > T(0)).template cast<T>();
  g.value(kFcW).noalias() = embedding.transpose() * d_hidden;
  g.value(kFcB) = d_hidden.colwise().sum();
  const Matrix<T> d_embedding = d_hidden * params.value(kFcW).transpose();
  encoder_backward(shape.encoder, params, enc, d_embedding, g);
  return out;
}

#define MAPEL_INSTANTIATE(T)                                                                                        \
  template T huber<T>(T);                                                                                           \
  template ParamSet<T> init_recurrent_params<T>(const RecurrentQShape&, Rng&);                                     \
  template ParamSet<T> init_joint_params<T>(const JointQShape&, Rng&);                                             \
  template void check_recurrent_params<T>(const RecurrentQShape&, const ParamSet<T>&);                             \
  template void check_joint_params<T>(const JointQShape&, const ParamSet<T>&);                                     \
  template StepOutput<T> recurrent_step<T>(const RecurrentQShape&, const ParamSet<T>&, const Matrix<T>&,           \
                                           const Matrix<T>&, const Matrix<T>&);                                    \
  template Matrix<T> recurrent_sequence_q<T>(const RecurrentQShape&, const ParamSet<T>&, const Matrix<T>&,         \
                                             const Matrix<T>&, int, int, std::span<const int>);                                          \
  template Matrix<T> joint_q<T>(const JointQShape&, const ParamSet<T>&, const Matrix<T>&);                         \
  template LossAndGrads<T> recurrent_loss_and_grads<T>(const RecurrentQShape&, const ParamSet<T>&,                 \
                                                       const SequenceBatch<T>&);                                   \
  template LossAndGrads<T> joint_loss_and_grads<T>(const JointQShape&, const ParamSet<T>&, const JointBatch<T>&);

MAPEL_INSTANTIATE(float)
MAPEL_INSTANTIATE(double)

#undef MAPEL_INSTANTIATE

}  // namespace mapel::nn
