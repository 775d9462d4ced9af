// Copyright 2026 The gacompress Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gacompress/nn.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "gacompress/errors.h"

namespace gacompress {

namespace {

constexpr double kLayerNormEps = 1e-12;
constexpr double kInitStddev = 0.02;

using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const Eigen::RowVectorXd>;
using MutRowMap = Eigen::Map<Eigen::RowVectorXd>;

class View {
 public:
  explicit View(const double* base) : base_(base) {}
  ConstMap Mat(size_t offset, int64_t rows, int64_t cols) const {
    return ConstMap(base_ + offset, rows, cols);
  }
  ConstRowMap Row(size_t offset, int64_t cols) const {
    return ConstRowMap(base_ + offset, cols);
  }

 private:
  const double* base_;
};

class GradView {
 public:
  explicit GradView(double* base) : base_(base) {}
  MutMap Mat(size_t offset, int64_t rows, int64_t cols) const {
    return MutMap(base_ + offset, rows, cols);
  }
  MutRowMap Row(size_t offset, int64_t cols) const {
    return MutRowMap(base_ + offset, cols);
  }

 private:
  double* base_;
};

template <typename A>
void Linear(const A& x, const ConstMap& w, const ConstRowMap& b, RowMatrix& out,
            FlopTally* tally) {
  out.noalias() = x * w;
  out.rowwise() += b;
  if (tally) {
    tally->flops += 2 * x.rows() * x.cols() * w.cols();
    ++tally->matmuls;
  }
}

void LayerNormForward(const RowMatrix& x, const ConstRowMap& gamma,
                      const ConstRowMap& beta, RowMatrix& xhat,
                      Eigen::VectorXd& rstd, RowMatrix& y) {
  const Eigen::Index n = x.rows();
  const double width = static_cast<double>(x.cols());
  xhat.resize(n, x.cols());
  rstd.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mean = x.row(r).sum() / width;
    xhat.row(r) = x.row(r).array() - mean;
    const double var = xhat.row(r).squaredNorm() / width;
    rstd[r] = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(r) *= rstd[r];
  }
  y = (xhat.array().rowwise() * gamma.array()).rowwise() + beta.array();
}

// dy is overwritten with d(loss)/d(input).
void LayerNormBackward(const RowMatrix& xhat, const Eigen::VectorXd& rstd,
                       const ConstRowMap& gamma, MutRowMap dgamma,
                       MutRowMap dbeta, RowMatrix& dy) {
  dgamma += dy.cwiseProduct(xhat).colwise().sum();
  dbeta += dy.colwise().sum();
  const double width = static_cast<double>(dy.cols());
  dy.array().rowwise() *= gamma.array();
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dy.row(r).sum() / width;
    const double mean_dx = dy.row(r).dot(xhat.row(r)) / width;
    dy.row(r) = rstd[r] * (dy.row(r).array() - mean_d -
                           xhat.row(r).array() * mean_dx);
  }
}

double Gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double GeluGrad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  const double pdf = std::exp(-0.5 * x * x) * 0.5 * M_2_SQRTPI * M_SQRT1_2;
  return cdf + x * pdf;
}

void SoftmaxRows(RowMatrix& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double mx = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - mx).exp();
    s.row(r) /= s.row(r).sum();
  }
}

void LinearBackward(const RowMatrix& x, const ConstMap& w, const RowMatrix& dy,
                    MutMap dw, MutRowMap db, RowMatrix* dx, bool accumulate) {
  dw.noalias() += x.transpose() * dy;
  db += dy.colwise().sum();
  if (dx) {
    if (accumulate) {
      dx->noalias() += dy * w.transpose();
    } else {
      dx->noalias() = dy * w.transpose();
    }
  }
}

Eigen::VectorXd ForwardImpl(const EncoderModel& model,
                            std::span<const int32_t> ids, ForwardCache& cache,
                            FlopTally* tally) {
  const ArchConfig& c = model.config();
  CheckTokens(c, ids);
  const auto& sl = model.slots();
  const View w(model.weights().data());
  const int64_t n = static_cast<int64_t>(ids.size());
  const int64_t h = c.hidden;
  const int64_t heads = c.heads;
  const int64_t dh = h / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.ids.assign(ids.begin(), ids.end());
  RowMatrix e(n, h);
  const ConstMap tok = w.Mat(sl.tok_emb, c.vocab, h);
  const ConstMap pos = w.Mat(sl.pos_emb, c.max_seq_len, h);
  for (int64_t i = 0; i < n; ++i) e.row(i) = tok.row(ids[i]) + pos.row(i);
  LayerNormForward(e, w.Row(sl.emb_ln_g, h), w.Row(sl.emb_ln_b, h),
                   cache.xhat0, cache.rstd0, cache.x0);

  cache.layers.resize(c.layers);
  const RowMatrix* x = &cache.x0;
  for (int64_t l = 0; l < c.layers; ++l) {
    const auto& ls = sl.layers[l];
    LayerCache& lc = cache.layers[l];
    lc.x_in = *x;
    Linear(lc.x_in, w.Mat(ls.wq, h, h), w.Row(ls.bq, h), lc.q, tally);
    Linear(lc.x_in, w.Mat(ls.wk, h, h), w.Row(ls.bk, h), lc.k, tally);
    Linear(lc.x_in, w.Mat(ls.wv, h, h), w.Row(ls.bv, h), lc.v, tally);

    lc.ctx.resize(n, h);
    lc.probs.resize(heads);
    for (int64_t hd = 0; hd < heads; ++hd) {
      const auto qh = lc.q.middleCols(hd * dh, dh);
      const auto kh = lc.k.middleCols(hd * dh, dh);
      const auto vh = lc.v.middleCols(hd * dh, dh);
      RowMatrix& p = lc.probs[hd];
      p.noalias() = qh * kh.transpose();
      p *= scale;
      SoftmaxRows(p);
      lc.ctx.middleCols(hd * dh, dh).noalias() = p * vh;
      if (tally) {
        tally->flops += 2 * n * n * dh + 2 * n * n * dh;
        tally->matmuls += 2;
      }
    }

    RowMatrix attn_out;
    Linear(lc.ctx, w.Mat(ls.wo, h, h), w.Row(ls.bo, h), attn_out, tally);
    attn_out += lc.x_in;
    LayerNormForward(attn_out, w.Row(ls.ln1_g, h), w.Row(ls.ln1_b, h),
                     lc.xhat1, lc.rstd1, lc.x1);

    Linear(lc.x1, w.Mat(ls.w_up, h, c.ffn), w.Row(ls.b_up, c.ffn), lc.u, tally);
    lc.g = lc.u.unaryExpr([](double v) { return Gelu(v); });
    RowMatrix ffn_out;
    Linear(lc.g, w.Mat(ls.w_down, c.ffn, h), w.Row(ls.b_down, h), ffn_out,
           tally);
    ffn_out += lc.x1;
    LayerNormForward(ffn_out, w.Row(ls.ln2_g, h), w.Row(ls.ln2_b, h),
                     lc.xhat2, lc.rstd2, lc.x_out);
    x = &lc.x_out;
  }

  RowMatrix first = x->topRows(1);
  RowMatrix pre;
  Linear(first, w.Mat(sl.pool_w, h, h), w.Row(sl.pool_b, h), pre, tally);
  cache.pooled = pre.row(0).array().tanh();
  RowMatrix pooled = cache.pooled;
  RowMatrix logits;
  Linear(pooled, w.Mat(sl.cls_w, h, c.num_classes),
         w.Row(sl.cls_b, c.num_classes), logits, tally);
  cache.logits = logits.row(0).transpose();
  return cache.logits;
}

}  // namespace

EncoderModel::EncoderModel(const ArchConfig& config) : config_(config) {
  if (auto v = ValidateBasic(config)) throw ValidationError(v->message);
  const int64_t h = config.hidden;
  const int64_t d = config.ffn;
  slots_.tok_emb = Add("embeddings.token", {config.vocab, h});
  slots_.pos_emb = Add("embeddings.position", {config.max_seq_len, h});
  slots_.emb_ln_g = Add("embeddings.layer_norm.scale", {h});
  slots_.emb_ln_b = Add("embeddings.layer_norm.shift", {h});
  for (int64_t l = 0; l < config.layers; ++l) {
    const std::string p = "layer." + std::to_string(l) + ".";
    LayerSlots s{};
    s.wq = Add(p + "attention.query.weight", {h, h});
    s.bq = Add(p + "attention.query.bias", {h});
    s.wk = Add(p + "attention.key.weight", {h, h});
    s.bk = Add(p + "attention.key.bias", {h});
    s.wv = Add(p + "attention.value.weight", {h, h});
    s.bv = Add(p + "attention.value.bias", {h});
    s.wo = Add(p + "attention.output.weight", {h, h});
    s.bo = Add(p + "attention.output.bias", {h});
    s.ln1_g = Add(p + "attention.layer_norm.scale", {h});
    s.ln1_b = Add(p + "attention.layer_norm.shift", {h});
    s.w_up = Add(p + "ffn.up.weight", {h, d});
    s.b_up = Add(p + "ffn.up.bias", {d});
    s.w_down = Add(p + "ffn.down.weight", {d, h});
    s.b_down = Add(p + "ffn.down.bias", {h});
    s.ln2_g = Add(p + "ffn.layer_norm.scale", {h});
    s.ln2_b = Add(p + "ffn.layer_norm.shift", {h});
    slots_.layers.push_back(s);
  }
  slots_.pool_w = Add("pooler.weight", {h, h});
  slots_.pool_b = Add("pooler.bias", {h});
  slots_.cls_w = Add("classifier.weight", {h, config.num_classes});
  slots_.cls_b = Add("classifier.bias", {config.num_classes});
  weights_.assign(tensors_.empty()
                      ? 0
                      : tensors_.back().offset + tensors_.back().size,
                  0.0);
}

size_t EncoderModel::Add(std::string name, std::vector<int64_t> shape) {
  size_t size = 1;
  for (int64_t dim : shape) size *= static_cast<size_t>(dim);
  const size_t offset =
      tensors_.empty() ? 0 : tensors_.back().offset + tensors_.back().size;
  tensors_.push_back(TensorInfo{std::move(name), std::move(shape), offset, size});
  return offset;
}

const TensorInfo& EncoderModel::tensor(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw ValidationError("no tensor named " + name);
}

EncoderModel EncoderModel::Init(const ArchConfig& config, uint64_t seed) {
  EncoderModel model(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, kInitStddev);
  for (const TensorInfo& t : model.tensors_) {
    double* p = model.weights_.data() + t.offset;
    if (t.shape.size() == 2) {
      for (size_t i = 0; i < t.size; ++i) {
        p[i] = static_cast<float>(normal(rng));
      }
    } else if (t.name.ends_with(".scale")) {
      std::fill(p, p + t.size, 1.0);
    }
  }
  return model;
}

void CheckTokens(const ArchConfig& config, std::span<const int32_t> ids) {
  if (ids.empty()) throw ValidationError("token sequence is empty");
  if (static_cast<int64_t>(ids.size()) > config.max_seq_len) {
    throw ValidationError("sequence length " + std::to_string(ids.size()) +
                          " exceeds max_seq_len " +
                          std::to_string(config.max_seq_len));
  }
  for (int32_t id : ids) {
    if (id < 0 || id >= config.vocab) {
      throw ValidationError("token id " + std::to_string(id) +
                            " outside vocabulary of size " +
                            std::to_string(config.vocab));
    }
  }
}

Eigen::VectorXd Forward(const EncoderModel& model, std::span<const int32_t> ids,
                        FlopTally* tally) {
  ForwardCache cache;
  return ForwardImpl(model, ids, cache, tally);
}

Eigen::VectorXd ForwardTrain(const EncoderModel& model,
                             std::span<const int32_t> ids,
                             ForwardCache& cache) {
  return ForwardImpl(model, ids, cache, nullptr);
}

void Backward(const EncoderModel& model, const ForwardCache& cache,
              const Eigen::VectorXd& dlogits, std::span<double> grads) {
  const ArchConfig& c = model.config();
  if (grads.size() != model.num_weights()) {
    throw ValidationError("gradient buffer does not match model layout");
  }
  const auto& sl = model.slots();
  const View w(model.weights().data());
  const GradView gv(grads.data());
  const int64_t n = static_cast<int64_t>(cache.ids.size());
  const int64_t h = c.hidden;
  const int64_t dh = h / c.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Classifier and pooler.
  const RowMatrix pooled = cache.pooled;
  const RowMatrix dlog = dlogits.transpose();
  RowMatrix dpooled;
  LinearBackward(pooled, w.Mat(sl.cls_w, h, c.num_classes), dlog,
                 gv.Mat(sl.cls_w, h, c.num_classes),
                 gv.Row(sl.cls_b, c.num_classes), &dpooled, false);
  RowMatrix dpre = dpooled.array() * (1.0 - pooled.array().square());
  const RowMatrix& top = c.layers > 0 ? cache.layers.back().x_out : cache.x0;
  const RowMatrix first = top.topRows(1);
  RowMatrix dfirst;
  LinearBackward(first, w.Mat(sl.pool_w, h, h), dpre, gv.Mat(sl.pool_w, h, h),
                 gv.Row(sl.pool_b, h), &dfirst, false);

  RowMatrix dx = RowMatrix::Zero(n, h);
  dx.row(0) = dfirst.row(0);

  for (int64_t l = c.layers - 1; l >= 0; --l) {
    const auto& ls = sl.layers[l];
    const LayerCache& lc = cache.layers[l];

    // dx holds d/d(x_out); turn it into d/d(x1 + ffn_out).
    LayerNormBackward(lc.xhat2, lc.rstd2, w.Row(ls.ln2_g, h),
                      gv.Row(ls.ln2_g, h), gv.Row(ls.ln2_b, h), dx);
    RowMatrix dx1 = dx;
    RowMatrix dg;
    LinearBackward(lc.g, w.Mat(ls.w_down, c.ffn, h), dx,
                   gv.Mat(ls.w_down, c.ffn, h), gv.Row(ls.b_down, h), &dg,
                   false);
    RowMatrix du = dg.array() * lc.u.unaryExpr([](double v) {
                                     return GeluGrad(v);
                                   }).array();
    LinearBackward(lc.x1, w.Mat(ls.w_up, h, c.ffn), du,
                   gv.Mat(ls.w_up, h, c.ffn), gv.Row(ls.b_up, c.ffn), &dx1,
                   true);

    LayerNormBackward(lc.xhat1, lc.rstd1, w.Row(ls.ln1_g, h),
                      gv.Row(ls.ln1_g, h), gv.Row(ls.ln1_b, h), dx1);
    RowMatrix dx_in = dx1;
    RowMatrix dctx;
    LinearBackward(lc.ctx, w.Mat(ls.wo, h, h), dx1, gv.Mat(ls.wo, h, h),
                   gv.Row(ls.bo, h), &dctx, false);

    RowMatrix dq(n, h), dk(n, h), dv(n, h);
    for (int64_t hd = 0; hd < c.heads; ++hd) {
      const RowMatrix& p = lc.probs[hd];
      const auto qh = lc.q.middleCols(hd * dh, dh);
      const auto kh = lc.k.middleCols(hd * dh, dh);
      const auto vh = lc.v.middleCols(hd * dh, dh);
      const auto dch = dctx.middleCols(hd * dh, dh);
      RowMatrix dp;
      dp.noalias() = dch * vh.transpose();
      dv.middleCols(hd * dh, dh).noalias() = p.transpose() * dch;
      const Eigen::VectorXd row_dot = (dp.cwiseProduct(p)).rowwise().sum();
      RowMatrix ds = p.array() * (dp.colwise() - row_dot).array();
      ds *= scale;
      dq.middleCols(hd * dh, dh).noalias() = ds * kh;
      dk.middleCols(hd * dh, dh).noalias() = ds.transpose() * qh;
    }
    LinearBackward(lc.x_in, w.Mat(ls.wq, h, h), dq, gv.Mat(ls.wq, h, h),
                   gv.Row(ls.bq, h), &dx_in, true);
    LinearBackward(lc.x_in, w.Mat(ls.wk, h, h), dk, gv.Mat(ls.wk, h, h),
                   gv.Row(ls.bk, h), &dx_in, true);
    LinearBackward(lc.x_in, w.Mat(ls.wv, h, h), dv, gv.Mat(ls.wv, h, h),
                   gv.Row(ls.bv, h), &dx_in, true);
    dx = std::move(dx_in);
  }

  LayerNormBackward(cache.xhat0, cache.rstd0, w.Row(sl.emb_ln_g, h),
                    gv.Row(sl.emb_ln_g, h), gv.Row(sl.emb_ln_b, h), dx);
  MutMap dtok = gv.Mat(sl.tok_emb, c.vocab, h);
  MutMap dpos = gv.Mat(sl.pos_emb, c.max_seq_len, h);
  for (int64_t i = 0; i < n; ++i) {
    dtok.row(cache.ids[i]) += dx.row(i);
    dpos.row(i) += dx.row(i);
  }
}

TrainState::TrainState(EncoderModel model_in, uint64_t seed)
    : model(std::move(model_in)),
      m(model.num_weights(), 0.0),
      v(model.num_weights(), 0.0),
      step(0),
      rng_seed(seed) {}

void AdamStep(TrainState& state, std::span<const double> grads, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  auto weights = state.model.mutable_weights();
  if (grads.size() != weights.size()) {
    throw ValidationError("gradient buffer does not match model layout");
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(kBeta1, state.step);
  const double correction2 = 1.0 - std::pow(kBeta2, state.step);
  for (size_t i = 0; i < weights.size(); ++i) {
    const double g = grads[i];
    state.m[i] = kBeta1 * state.m[i] + (1.0 - kBeta1) * g;
    state.v[i] = kBeta2 * state.v[i] + (1.0 - kBeta2) * g * g;
    if (g == 0.0 && state.m[i] == 0.0) continue;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    weights[i] = static_cast<float>(weights[i] -
                                    lr * m_hat / (std::sqrt(v_hat) + kEps));
  }
}

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits) {
  const double mx = logits.maxCoeff();
  Eigen::VectorXd out = (logits.array() - mx).exp();
  return out / out.sum();
}

int ArgMax(const Eigen::VectorXd& logits) {
  Eigen::Index idx = 0;
  logits.maxCoeff(&idx);
  return static_cast<int>(idx);
}

}  // namespace gacompress
