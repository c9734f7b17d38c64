#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "formpair/rng.hpp"
#include "formpair/scoring.hpp"

namespace formpair {

// Row-major dense matrix of doubles. Deliberately minimal; the network below
// only needs a handful of loops, and keeping their arithmetic order fixed
// makes training bit-reproducible.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
};

enum class Mode { Train, Eval };

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;

  int in() const { return weight.cols; }
  int out() const { return weight.rows; }
};

struct BatchNorm {
  std::vector<double> gamma, beta, running_mean, running_var;
  double eps = 1e-5;
  double momentum = 0.1;

  explicit BatchNorm(int size = 0)
      : gamma(size, 1.0), beta(size, 0.0), running_mean(size, 0.0), running_var(size, 1.0) {}
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 512;
  int iterations = 6000;
  std::uint64_t rng_seed = 0;
  // Adam moments
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct LabeledExample {
  FeatureVector features;
  double label = 0;  // 0 or 1
};

// Spatial relationship classifier: dense -> BN -> ReLU -> dropout twice, then
// a dense layer with sigmoid output. Eval mode uses the running BN statistics
// and disables dropout, so it is deterministic and batch-independent.
class SpatialClassifier {
 public:
  DenseLayer fc1, fc2, fc3;
  BatchNorm bn1, bn2;
  double dropout_rate = 0.5;

  struct Metadata {
    std::uint64_t seed = 0;
    int iterations = 0;
    double final_loss = 0;
  } metadata;

  static SpatialClassifier init(int input_dim, int hidden, Rng& rng) {
    SpatialClassifier m;
    m.fc1 = init_dense(input_dim, hidden, rng);
    m.bn1 = BatchNorm(hidden);
    m.fc2 = init_dense(hidden, hidden, rng);
    m.bn2 = BatchNorm(hidden);
    m.fc3 = init_dense(hidden, 1, rng);
    return m;
  }

  int input_dim() const { return fc1.in(); }
  int hidden_size() const { return fc1.out(); }

 private:
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static DenseLayer init_dense(int in, int out, Rng& rng) {
    DenseLayer l;
    l.weight = Matrix(out, in);
    l.bias.assign(out, 0.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : l.weight.data) w = rng.uniform(-bound, bound);
    for (double& b : l.bias) b = rng.uniform(-bound, bound);
    return l;
  }
};

namespace detail {

inline Matrix dense_forward(const DenseLayer& l, const Matrix& x) {
  Matrix z(x.rows, l.out());
  for (int n = 0; n < x.rows; ++n) {
    const double* xr = x.row(n);
    double* zr = z.row(n);
    for (int o = 0; o < l.out(); ++o) {
      const double* wr = l.weight.row(o);
      double acc = l.bias[o];
      for (int i = 0; i < l.in(); ++i) acc += xr[i] * wr[i];
      zr[o] = acc;
    }
  }
  return z;
}

struct BnCache {
  std::vector<double> inv_std;
  Matrix xhat;
};

inline Matrix bn_forward(BatchNorm& bn, const Matrix& z, Mode mode, BnCache* cache) {
  const int n = z.rows, h = z.cols;
  Matrix out(n, h);
  if (mode == Mode::Eval) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < h; ++c) {
        const double xhat =
            (z.at(r, c) - bn.running_mean[c]) / std::sqrt(bn.running_var[c] + bn.eps);
        out.at(r, c) = bn.gamma[c] * xhat + bn.beta[c];
      }
    }
    return out;
  }

  if (n < 2) throw InvalidInputError("bn_forward: train mode needs batch size >= 2");
  std::vector<double> mean(h, 0.0), var(h, 0.0);
  for (int r = 0; r < n; ++r) {
    const double* zr = z.row(r);
    for (int c = 0; c < h; ++c) mean[c] += zr[c];
  }
  for (int c = 0; c < h; ++c) mean[c] /= n;
  for (int r = 0; r < n; ++r) {
    const double* zr = z.row(r);
    for (int c = 0; c < h; ++c) {
      const double d = zr[c] - mean[c];
      var[c] += d * d;
    }
  }
  for (int c = 0; c < h; ++c) var[c] /= n;  // biased, used for normalization

  if (cache) {
    cache->inv_std.resize(h);
    cache->xhat = Matrix(n, h);
  }
  for (int c = 0; c < h; ++c) {
    const double inv_std = 1.0 / std::sqrt(var[c] + bn.eps);
    if (cache) cache->inv_std[c] = inv_std;
    for (int r = 0; r < n; ++r) {
      const double xhat = (z.at(r, c) - mean[c]) * inv_std;
      if (cache) cache->xhat.at(r, c) = xhat;
      out.at(r, c) = bn.gamma[c] * xhat + bn.beta[c];
    }
    // Running statistics track the unbiased batch variance.
    bn.running_mean[c] = (1.0 - bn.momentum) * bn.running_mean[c] + bn.momentum * mean[c];
    const double unbiased = var[c] * n / (n - 1.0);
    bn.running_var[c] = (1.0 - bn.momentum) * bn.running_var[c] + bn.momentum * unbiased;
  }
  return out;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Numerically stable mean binary cross-entropy from logits.
inline double bce_from_logits(const std::vector<double>& logits,
                              const std::vector<double>& labels) {
  double loss = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i], y = labels[i];
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
  }
  return loss / static_cast<double>(logits.size());
}

}  // namespace detail

// Forward state kept for backpropagation: inputs to each dense layer, post-BN
// activations (for the ReLU derivative), BN normalization caches, dropout
// masks, and the output logits.
struct ForwardCache {
  Matrix x;
  Matrix a1, d1;  // post-BN activation / block output (dense-layer-2 input)
  Matrix a2, d2;
  detail::BnCache bn1, bn2;
  std::vector<std::uint8_t> mask1, mask2;  // dropout keep masks (row-major)
  double keep_prob = 1.0;
  std::vector<double> logits;
};

// Forward pass producing logits. In train mode batch statistics are used,
// running statistics updated, and dropout masks drawn from `rng` (pass
// nullptr to disable dropout). Eval mode is deterministic and never writes to
// the model.
inline std::vector<double> mlp_logits(SpatialClassifier& model, const Matrix& batch,
                                      Mode mode, Rng* rng = nullptr,
                                      ForwardCache* cache = nullptr) {
  if (batch.cols != model.input_dim()) {
    throw InvalidInputError("mlp_logits: feature dimension mismatch");
  }
  for (const double v : batch.data) {
    if (!std::isfinite(v)) throw InvalidInputError("mlp_logits: non-finite input");
  }
  const bool use_dropout = mode == Mode::Train && rng != nullptr && model.dropout_rate > 0;
  const double keep = 1.0 - model.dropout_rate;

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.keep_prob = use_dropout ? keep : 1.0;
  c.x = batch;

  const auto block = [&](const DenseLayer& fc, BatchNorm& bn, const Matrix& in,
                         Matrix& a_out, Matrix& d_out, detail::BnCache* bn_cache,
                         std::vector<std::uint8_t>& mask) {
    Matrix z = detail::dense_forward(fc, in);
    a_out = detail::bn_forward(bn, z, mode, bn_cache);
    d_out = a_out;
    for (double& v : d_out.data) {
      if (v < 0) v = 0.0;
    }
    if (use_dropout) {
      mask.resize(d_out.data.size());
      for (std::size_t i = 0; i < d_out.data.size(); ++i) {
        const bool keep_unit = rng->uniform() < keep;
        mask[i] = keep_unit ? 1 : 0;
        d_out.data[i] = keep_unit ? d_out.data[i] / keep : 0.0;
      }
    }
  };

  block(model.fc1, model.bn1, c.x, c.a1, c.d1, cache ? &c.bn1 : nullptr, c.mask1);
  block(model.fc2, model.bn2, c.d1, c.a2, c.d2, cache ? &c.bn2 : nullptr, c.mask2);

  Matrix z3 = detail::dense_forward(model.fc3, c.d2);
  std::vector<double> logits(z3.rows);
  for (int n = 0; n < z3.rows; ++n) logits[n] = z3.at(n, 0);
  c.logits = logits;
  return logits;
}

// Probabilities in (0, 1) for a batch of feature vectors.
inline std::vector<double> mlp_forward(SpatialClassifier& model, const Matrix& batch,
                                       Mode mode, Rng* rng = nullptr) {
  auto logits = mlp_logits(model, batch, mode, rng);
  for (double& z : logits) z = detail::sigmoid(z);
  return logits;
}

inline Matrix to_matrix(const std::vector<FeatureVector>& batch, int dim = 16) {
  Matrix x(static_cast<int>(batch.size()), dim);
  for (std::size_t n = 0; n < batch.size(); ++n) {
    for (int i = 0; i < dim; ++i) x.at(static_cast<int>(n), i) = batch[n][i];
  }
  return x;
}

// Deterministic eval-mode scoring; the eval path performs no writes, so a
// shared model is safe to score from any number of threads.
inline std::vector<double> mlp_eval(const SpatialClassifier& model,
                                    const std::vector<FeatureVector>& batch) {
  auto& m = const_cast<SpatialClassifier&>(model);
  return mlp_forward(m, to_matrix(batch, model.input_dim()), Mode::Eval);
}

// Gradients with the same shapes as the trainable parameters.
struct Gradients {
  Matrix w1, w2, w3;
  std::vector<double> b1, b2, b3;
  std::vector<double> gamma1, beta1, gamma2, beta2;
};

namespace detail {

inline void dense_backward(const DenseLayer& l, const Matrix& x, const Matrix& dz,
                           Matrix& dw, std::vector<double>& db, Matrix* dx) {
  dw = Matrix(l.out(), l.in());
  db.assign(l.out(), 0.0);
  if (dx) *dx = Matrix(x.rows, l.in());
  for (int n = 0; n < x.rows; ++n) {
    const double* xr = x.row(n);
    const double* dzr = dz.row(n);
    for (int o = 0; o < l.out(); ++o) {
      const double g = dzr[o];
      db[o] += g;
      double* dwr = dw.row(o);
      for (int i = 0; i < l.in(); ++i) dwr[i] += g * xr[i];
    }
    if (dx) {
      double* dxr = dx->row(n);
      for (int o = 0; o < l.out(); ++o) {
        const double g = dzr[o];
        const double* wr = l.weight.row(o);
        for (int i = 0; i < l.in(); ++i) dxr[i] += g * wr[i];
      }
    }
  }
}

inline Matrix bn_backward(const BatchNorm& bn, const BnCache& cache, const Matrix& da,
                          std::vector<double>& dgamma, std::vector<double>& dbeta) {
  const int n = da.rows, h = da.cols;
  dgamma.assign(h, 0.0);
  dbeta.assign(h, 0.0);
  Matrix dz(n, h);
  std::vector<double> sum_dxhat(h, 0.0), sum_dxhat_xhat(h, 0.0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < h; ++c) {
      const double g = da.at(r, c);
      const double xhat = cache.xhat.at(r, c);
      dgamma[c] += g * xhat;
      dbeta[c] += g;
      const double dxhat = g * bn.gamma[c];
      sum_dxhat[c] += dxhat;
      sum_dxhat_xhat[c] += dxhat * xhat;
    }
  }
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < h; ++c) {
      const double dxhat = da.at(r, c) * bn.gamma[c];
      dz.at(r, c) = cache.inv_std[c] *
                    (dxhat - sum_dxhat[c] / n - cache.xhat.at(r, c) * sum_dxhat_xhat[c] / n);
    }
  }
  return dz;
}

}  // namespace detail

// Analytic gradients of the mean BCE loss for the cached forward pass.
inline Gradients mlp_backward(const SpatialClassifier& model, const ForwardCache& cache,
                              const std::vector<double>& labels) {
  const int n = static_cast<int>(cache.logits.size());
  Gradients g;

  // dL/dlogit = (sigmoid(z) - y) / n
  Matrix dz3(n, 1);
  for (int i = 0; i < n; ++i) {
    dz3.at(i, 0) = (detail::sigmoid(cache.logits[i]) - labels[i]) / n;
  }

  Matrix dd2;
  detail::dense_backward(model.fc3, cache.d2, dz3, g.w3, g.b3, &dd2);

  const auto block_backward = [&](const DenseLayer& fc, const BatchNorm& bn,
                                  const detail::BnCache& bn_cache, const Matrix& a,
                                  const std::vector<std::uint8_t>& mask, const Matrix& x_in,
                                  Matrix& dd, Matrix& dw, std::vector<double>& db,
                                  std::vector<double>& dgamma, std::vector<double>& dbeta,
                                  Matrix* dx_out) {
    Matrix dr = std::move(dd);
    if (!mask.empty()) {
      for (std::size_t i = 0; i < dr.data.size(); ++i) {
        dr.data[i] = mask[i] ? dr.data[i] / cache.keep_prob : 0.0;
      }
    }
    for (std::size_t i = 0; i < dr.data.size(); ++i) {
      if (a.data[i] <= 0) dr.data[i] = 0.0;
    }
    Matrix dz = detail::bn_backward(bn, bn_cache, dr, dgamma, dbeta);
    detail::dense_backward(fc, x_in, dz, dw, db, dx_out);
  };

  Matrix dd1;
  block_backward(model.fc2, model.bn2, cache.bn2, cache.a2, cache.mask2, cache.d1, dd2,
                 g.w2, g.b2, g.gamma2, g.beta2, &dd1);
  block_backward(model.fc1, model.bn1, cache.bn1, cache.a1, cache.mask1, cache.x, dd1,
                 g.w1, g.b1, g.gamma1, g.beta1, nullptr);
  return g;
}

namespace detail {

// Flat views over parameters and their gradients, used by Adam and by the
// finite-difference check. Order is fixed.
inline std::vector<double*> param_ptrs(SpatialClassifier& m) {
  std::vector<double*> p;
  const auto add = [&](std::vector<double>& v) {
    for (double& x : v) p.push_back(&x);
  };
  add(m.fc1.weight.data);
  add(m.fc1.bias);
  add(m.bn1.gamma);
  add(m.bn1.beta);
  add(m.fc2.weight.data);
  add(m.fc2.bias);
  add(m.bn2.gamma);
  add(m.bn2.beta);
  add(m.fc3.weight.data);
  add(m.fc3.bias);
  return p;
}

inline std::vector<double> grad_flat(const Gradients& g) {
  std::vector<double> out;
  const auto add = [&](const std::vector<double>& v) {
    out.insert(out.end(), v.begin(), v.end());
  };
  add(g.w1.data);
  add(g.b1);
  add(g.gamma1);
  add(g.beta1);
  add(g.w2.data);
  add(g.b2);
  add(g.gamma2);
  add(g.beta2);
  add(g.w3.data);
  add(g.b3);
  return out;
}

}  // namespace detail

// Runs `iterations` Adam steps on an existing model with seeded batch
// sampling and dropout. Returns the final batch loss.
inline double train_steps(SpatialClassifier& model, const std::vector<LabeledExample>& dataset,
                          const TrainConfig& cfg) {
  Rng rng(cfg.rng_seed);
  auto params = detail::param_ptrs(model);
  std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0);
  double last_loss = 0;

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    Matrix x(cfg.batch_size, model.input_dim());
    std::vector<double> y(cfg.batch_size);
    for (int n = 0; n < cfg.batch_size; ++n) {
      const auto& ex = dataset[rng.uniform_index(dataset.size())];
      for (int i = 0; i < x.cols; ++i) x.at(n, i) = ex.features[i];
      y[n] = ex.label;
    }

    ForwardCache cache;
    auto logits = mlp_logits(model, x, Mode::Train, &rng, &cache);
    last_loss = detail::bce_from_logits(logits, y);
    Gradients grads = mlp_backward(model, cache, y);
    auto flat = detail::grad_flat(grads);

    const double bc1 = 1.0 - std::pow(cfg.beta1, iter);
    const double bc2 = 1.0 - std::pow(cfg.beta2, iter);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * flat[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * flat[i] * flat[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      *params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
  return last_loss;
}

// Minimizes mean BCE with Adam over seeded batches (sampling with
// replacement). Returns the eval-mode model; metadata records the seed,
// iteration count, and final batch loss.
inline SpatialClassifier train_classifier(const std::vector<LabeledExample>& dataset,
                                          const TrainConfig& cfg, int hidden = 256) {
  if (dataset.empty()) throw InvalidInputError("train_classifier: empty dataset");
  if (cfg.learning_rate <= 0) throw InvalidInputError("train_classifier: learning_rate <= 0");
  if (cfg.batch_size < 1) throw InvalidInputError("train_classifier: batch_size < 1");

  bool has_pos = false, has_neg = false;
  for (const auto& ex : dataset) (ex.label > 0.5 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    std::cerr << "warning: training dataset contains a single class\n";
  }

  Rng init_rng(cfg.rng_seed);
  SpatialClassifier model = SpatialClassifier::init(16, hidden, init_rng);
  model.metadata.seed = cfg.rng_seed;
  model.metadata.iterations = cfg.iterations;
  model.metadata.final_loss = train_steps(model, dataset, cfg);
  return model;
}

// Compares analytic gradients against central finite differences (step 1e-5)
// on a seeded subsample of at least `sample` parameters. Dropout is disabled
// and batch normalization runs in train mode on the fixed batch. Returns the
// max relative error, with |ga - gn| / max(|ga|, |gn|, 1e-6) per parameter.
inline double gradient_check(SpatialClassifier model, const Matrix& batch,
                             const std::vector<double>& labels,
                             std::uint64_t seed = 0, std::size_t sample = 200) {
  const double step = 1e-5;
  model.dropout_rate = 0.0;

  // Probes run on a scratch copy so running statistics never drift between
  // finite-difference evaluations.
  const auto loss_at = [&]() {
    SpatialClassifier scratch = model;
    auto logits = mlp_logits(scratch, batch, Mode::Train);
    return detail::bce_from_logits(logits, labels);
  };

  SpatialClassifier work = model;
  ForwardCache cache;
  mlp_logits(work, batch, Mode::Train, nullptr, &cache);
  Gradients grads = mlp_backward(model, cache, labels);
  auto analytic = detail::grad_flat(grads);
  auto params = detail::param_ptrs(model);

  std::vector<std::size_t> indices(params.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  Rng rng(seed);
  rng.shuffle(indices);
  const std::size_t n_check = std::min(indices.size(), std::max<std::size_t>(sample, 200));

  double max_rel = 0;
  for (std::size_t k = 0; k < n_check; ++k) {
    const std::size_t i = indices[k];
    const double saved = *params[i];
    *params[i] = saved + step;
    const double up = loss_at();
    *params[i] = saved - step;
    const double down = loss_at();
    *params[i] = saved;
    const double numeric = (up - down) / (2 * step);
    const double rel = std::abs(analytic[i] - numeric) /
                       std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace formpair
