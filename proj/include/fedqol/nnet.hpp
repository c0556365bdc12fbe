#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "fedqol/error.hpp"
#include "fedqol/numstr.hpp"
#include "fedqol/rings.hpp"
#include "fedqol/rng.hpp"
#include "fedqol/scalar_fn.hpp"

// Multilayer perceptron engine generic over a scalar ring. The same template
// code trains on plain doubles and on MORE ciphertexts; only the ring
// changes, never the arithmetic order.

namespace fedqol::nnet {

enum class Activation { relu, tanh_act };
enum class OutputActivation { sigmoid, linear };
enum class Loss { cross_entropy, mse };
enum class Optimizer { sgd, adam };

struct MlpSpec {
  std::vector<int> layer_sizes;  // input, hidden..., output
  Activation hidden_activation = Activation::relu;
  OutputActivation output_activation = OutputActivation::sigmoid;
  Loss loss = Loss::cross_entropy;

  int input_size() const { return layer_sizes.front(); }
  int n_layers() const { return static_cast<int>(layer_sizes.size()); }

  void validate() const {
    if (layer_sizes.size() < 2) throw config_error("mlp needs >= 2 layers");
    for (int s : layer_sizes) {
      if (s <= 0) throw config_error("mlp layer sizes must be positive");
    }
    if (layer_sizes.back() != 1) {
      throw config_error("mlp output layer must have size 1");
    }
    if (loss == Loss::cross_entropy &&
        output_activation != OutputActivation::sigmoid) {
      throw config_error("cross-entropy loss requires a sigmoid output");
    }
  }

  // The evaluated topologies: a three-hidden-layer ReLU classifier with a
  // sigmoid head, a five-by-100 tanh regressor, and the deeper ten-by-40
  // regressor used in federated runs.
  static MlpSpec classifier(int inputs, std::vector<int> hidden = {64, 32, 16}) {
    MlpSpec s;
    s.layer_sizes.push_back(inputs);
    s.layer_sizes.insert(s.layer_sizes.end(), hidden.begin(), hidden.end());
    s.layer_sizes.push_back(1);
    s.hidden_activation = Activation::relu;
    s.output_activation = OutputActivation::sigmoid;
    s.loss = Loss::cross_entropy;
    return s;
  }

  static MlpSpec regressor(int inputs, int hidden_layers = 5, int width = 100) {
    MlpSpec s;
    s.layer_sizes.push_back(inputs);
    for (int i = 0; i < hidden_layers; ++i) s.layer_sizes.push_back(width);
    s.layer_sizes.push_back(1);
    s.hidden_activation = Activation::tanh_act;
    s.output_activation = OutputActivation::linear;
    s.loss = Loss::mse;
    return s;
  }

  static MlpSpec federated_regressor(int inputs) {
    return regressor(inputs, 10, 40);
  }
};

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 128;
  int epochs = 1;
  Optimizer optimizer = Optimizer::sgd;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw config_error("learning_rate must be > 0");
    if (batch_size < 1) throw config_error("batch_size must be >= 1");
    if (epochs < 0) throw config_error("epochs must be >= 0");
  }
};

// Adam constants; the reference defaults.
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

template <class T>
struct WeightsT {
  std::vector<int> layer_sizes;
  std::vector<T> flat;  // per layer: weight matrix (out x in, row-major), bias
};

using Weights = WeightsT<double>;

inline std::size_t param_count(const std::vector<int>& sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    n += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  }
  return n;
}

inline Weights init_weights(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 g(seed);
  Weights w;
  w.layer_sizes = spec.layer_sizes;
  w.flat.reserve(param_count(spec.layer_sizes));
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    int fan_in = spec.layer_sizes[l];
    int fan_out = spec.layer_sizes[l + 1];
    double limit = std::sqrt(6.0 / (fan_in + fan_out));  // Glorot uniform
    for (int i = 0; i < fan_out * fan_in; ++i) {
      w.flat.push_back(uniform_in(g, -limit, limit));
    }
    for (int i = 0; i < fan_out; ++i) w.flat.push_back(0.0);
  }
  return w;
}

namespace detail {

// Offset bookkeeping for the flat layout.
struct Layout {
  std::vector<std::size_t> w_off, b_off;
  std::vector<int> sizes;

  explicit Layout(const std::vector<int>& layer_sizes) : sizes(layer_sizes) {
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      w_off.push_back(off);
      off += static_cast<std::size_t>(sizes[l + 1]) * sizes[l];
      b_off.push_back(off);
      off += sizes[l + 1];
    }
  }
};

inline ScalarFn act_fn(Activation a) {
  return a == Activation::relu ? ScalarFn::relu : ScalarFn::tanh_fn;
}

inline ScalarFn act_grad_fn(Activation a) {
  return a == Activation::relu ? ScalarFn::relu_grad : ScalarFn::tanh_grad;
}

}  // namespace detail

// Forward pass with retained pre-activations and activations, as needed by
// backprop. a[0] is the input row; z[l] / a[l+1] correspond to layer l.
template <class Ring>
struct Trace {
  std::vector<std::vector<typename Ring::Value>> z, a;
};

template <class Ring>
Trace<Ring> forward_trace(const MlpSpec& spec,
                          const WeightsT<typename Ring::Value>& w,
                          const std::vector<typename Ring::Value>& x) {
  using V = typename Ring::Value;
  detail::Layout lay(w.layer_sizes);
  if (static_cast<int>(x.size()) != spec.input_size()) {
    throw data_error("input row width does not match the network input size");
  }
  Trace<Ring> t;
  t.a.push_back(x);
  int depth = spec.n_layers() - 1;
  for (int l = 0; l < depth; ++l) {
    int n_in = lay.sizes[l];
    int n_out = lay.sizes[l + 1];
    std::vector<V> z;
    z.reserve(n_out);
    for (int j = 0; j < n_out; ++j) {
      V acc = w.flat[lay.b_off[l] + j];
      for (int i = 0; i < n_in; ++i) {
        acc = Ring::add(acc,
                        Ring::mul(w.flat[lay.w_off[l] + static_cast<std::size_t>(j) * n_in + i],
                                  t.a[l][i]));
      }
      z.push_back(acc);
    }
    std::vector<V> a;
    a.reserve(n_out);
    bool last = l == depth - 1;
    if (last) {
      if (spec.output_activation == OutputActivation::sigmoid) {
        for (const V& v : z) a.push_back(Ring::apply(ScalarFn::sigmoid, v));
      } else {
        a = z;  // linear head: no op at all, identically in both rings
      }
    } else {
      ScalarFn f = detail::act_fn(spec.hidden_activation);
      for (const V& v : z) a.push_back(Ring::apply(f, v));
    }
    t.z.push_back(std::move(z));
    t.a.push_back(std::move(a));
  }
  return t;
}

template <class Ring>
typename Ring::Value forward_one(const MlpSpec& spec,
                                 const WeightsT<typename Ring::Value>& w,
                                 const std::vector<typename Ring::Value>& x) {
  return forward_trace<Ring>(spec, w, x).a.back().front();
}

// Per-sample loss in ring values. Cross-entropy needs log on the ring, which
// the encrypted instantiation supports through apply_fn.
template <class Ring>
typename Ring::Value sample_loss(const MlpSpec& spec,
                                 const typename Ring::Value& yhat,
                                 const typename Ring::Value& y) {
  using V = typename Ring::Value;
  if (spec.loss == Loss::mse) {
    V diff = Ring::sub(yhat, y);
    return Ring::mul(diff, diff);
  }
  V one = Ring::constant(1.0);
  V pos = Ring::mul(y, Ring::apply(ScalarFn::log_fn, yhat));
  V neg = Ring::mul(Ring::sub(one, y),
                    Ring::apply(ScalarFn::log_fn, Ring::sub(one, yhat)));
  return Ring::mul_const(Ring::add(pos, neg), -1.0);
}

namespace detail {

// Gradient sums and loss sum over a set of sample indices.
template <class Ring>
void batch_gradient(const MlpSpec& spec,
                    const WeightsT<typename Ring::Value>& w,
                    const std::vector<std::vector<typename Ring::Value>>& X,
                    const std::vector<typename Ring::Value>& y,
                    const std::size_t* idx, std::size_t count,
                    std::vector<typename Ring::Value>& grad,
                    typename Ring::Value& loss_sum) {
  using V = typename Ring::Value;
  Layout lay(w.layer_sizes);
  int depth = static_cast<int>(lay.sizes.size()) - 1;
  ScalarFn hidden_grad = act_grad_fn(spec.hidden_activation);

  grad.assign(w.flat.size(), Ring::constant(0.0));
  loss_sum = Ring::constant(0.0);

  std::vector<std::vector<V>> delta(depth);
  for (std::size_t s = 0; s < count; ++s) {
    const auto& x = X[idx[s]];
    const V& target = y[idx[s]];
    Trace<Ring> t = forward_trace<Ring>(spec, w, x);
    const V& yhat = t.a.back().front();
    loss_sum = Ring::add(loss_sum, sample_loss<Ring>(spec, yhat, target));

    // Output delta: dLoss/dz for the last layer.
    V err = Ring::sub(yhat, target);
    V out_delta;
    if (spec.loss == Loss::cross_entropy) {
      out_delta = err;  // sigmoid + cross-entropy shortcut
    } else if (spec.output_activation == OutputActivation::linear) {
      out_delta = Ring::mul_const(err, 2.0);
    } else {
      out_delta = Ring::mul(Ring::mul_const(err, 2.0),
                            Ring::apply(ScalarFn::sigmoid_grad, t.z.back().front()));
    }
    delta[depth - 1] = {out_delta};

    for (int l = depth - 2; l >= 0; --l) {
      int n_this = lay.sizes[l + 1];
      int n_next = lay.sizes[l + 2];
      std::vector<V> d;
      d.reserve(n_this);
      for (int i = 0; i < n_this; ++i) {
        V acc = Ring::constant(0.0);
        for (int j = 0; j < n_next; ++j) {
          acc = Ring::add(
              acc,
              Ring::mul(w.flat[lay.w_off[l + 1] + static_cast<std::size_t>(j) * n_this + i],
                        delta[l + 1][j]));
        }
        d.push_back(Ring::mul(acc, Ring::apply(hidden_grad, t.z[l][i])));
      }
      delta[l] = std::move(d);
    }

    for (int l = 0; l < depth; ++l) {
      int n_in = lay.sizes[l];
      int n_out = lay.sizes[l + 1];
      for (int j = 0; j < n_out; ++j) {
        std::size_t row = lay.w_off[l] + static_cast<std::size_t>(j) * n_in;
        for (int i = 0; i < n_in; ++i) {
          grad[row + i] = Ring::add(grad[row + i], Ring::mul(delta[l][j], t.a[l][i]));
        }
        grad[lay.b_off[l] + j] = Ring::add(grad[lay.b_off[l] + j], delta[l][j]);
      }
    }
  }
}

}  // namespace detail

template <class Ring>
struct TrainResult {
  WeightsT<typename Ring::Value> weights;
  std::vector<typename Ring::Value> epoch_loss;  // mean loss per epoch
};

// Continues training from the given weights. Batch order is a pure function
// of cfg.seed; the whole routine is deterministic.
template <class Ring>
TrainResult<Ring> train_from(const MlpSpec& spec,
                             WeightsT<typename Ring::Value> w,
                             const std::vector<std::vector<typename Ring::Value>>& X,
                             const std::vector<typename Ring::Value>& y,
                             const TrainConfig& cfg) {
  using V = typename Ring::Value;
  spec.validate();
  cfg.validate();
  if (X.size() != y.size()) throw data_error("feature/target row count mismatch");
  if (X.empty()) throw data_error("training set is empty");

  std::mt19937_64 order_rng(cfg.seed);
  std::size_t n = X.size();

  TrainResult<Ring> out;
  std::vector<V> grad;
  std::vector<V> adam_m, adam_v;
  if (cfg.optimizer == Optimizer::adam) {
    adam_m.assign(w.flat.size(), Ring::constant(0.0));
    adam_v.assign(w.flat.size(), Ring::constant(0.0));
  }
  long adam_t = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> idx = shuffled_indices(n, order_rng);
    V epoch_loss_sum = Ring::constant(0.0);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      std::size_t bsz = std::min<std::size_t>(cfg.batch_size, n - start);
      V loss_sum;
      detail::batch_gradient<Ring>(spec, w, X, y, idx.data() + start, bsz,
                                   grad, loss_sum);
      epoch_loss_sum = Ring::add(epoch_loss_sum, loss_sum);

      double inv_n = 1.0 / static_cast<double>(bsz);
      if (cfg.optimizer == Optimizer::sgd) {
        double step = cfg.learning_rate * inv_n;
        for (std::size_t i = 0; i < w.flat.size(); ++i) {
          w.flat[i] = Ring::sub(w.flat[i], Ring::mul_const(grad[i], step));
        }
      } else {
        ++adam_t;
        double c1 = 1.0 / (1.0 - std::pow(kAdamBeta1, adam_t));
        double c2 = 1.0 / (1.0 - std::pow(kAdamBeta2, adam_t));
        for (std::size_t i = 0; i < w.flat.size(); ++i) {
          V g_mean = Ring::mul_const(grad[i], inv_n);
          adam_m[i] = Ring::add(Ring::mul_const(adam_m[i], kAdamBeta1),
                                Ring::mul_const(g_mean, 1.0 - kAdamBeta1));
          adam_v[i] = Ring::add(Ring::mul_const(adam_v[i], kAdamBeta2),
                                Ring::mul_const(Ring::mul(g_mean, g_mean),
                                                1.0 - kAdamBeta2));
          V mhat = Ring::mul_const(adam_m[i], c1);
          V vhat = Ring::mul_const(adam_v[i], c2);
          V denom = Ring::add_const(Ring::apply(ScalarFn::sqrt_fn, vhat), kAdamEps);
          w.flat[i] = Ring::sub(
              w.flat[i],
              Ring::div(Ring::mul_const(mhat, cfg.learning_rate), denom));
        }
      }
    }
    out.epoch_loss.push_back(
        Ring::mul_const(epoch_loss_sum, 1.0 / static_cast<double>(n)));
  }
  out.weights = std::move(w);
  return out;
}

// Fresh Glorot init followed by train_from; the plaintext entry point.
inline TrainResult<PlainRing> train(const MlpSpec& spec,
                                    const std::vector<std::vector<double>>& X,
                                    const std::vector<double>& y,
                                    const TrainConfig& cfg) {
  return train_from<PlainRing>(spec, init_weights(spec, cfg.seed), X, y, cfg);
}

inline std::vector<double> predict(const MlpSpec& spec, const Weights& w,
                                   const std::vector<std::vector<double>>& X) {
  std::vector<double> out;
  out.reserve(X.size());
  for (const auto& row : X) {
    out.push_back(forward_one<PlainRing>(spec, w, row));
  }
  return out;
}

inline double mean_loss(const MlpSpec& spec, const Weights& w,
                        const std::vector<std::vector<double>>& X,
                        const std::vector<double>& y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sum += sample_loss<PlainRing>(spec, forward_one<PlainRing>(spec, w, X[i]),
                                  y[i]);
  }
  return sum / static_cast<double>(X.size());
}

// Gradient of the mean batch loss; plaintext convenience used by the
// validation harness.
inline std::vector<double> loss_gradient(const MlpSpec& spec, const Weights& w,
                                         const std::vector<std::vector<double>>& X,
                                         const std::vector<double>& y) {
  std::vector<std::size_t> idx(X.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<double> grad;
  double loss_sum = 0.0;
  detail::batch_gradient<PlainRing>(spec, w, X, y, idx.data(), idx.size(),
                                    grad, loss_sum);
  double inv_n = 1.0 / static_cast<double>(X.size());
  for (double& g : grad) g *= inv_n;
  return grad;
}

// Backprop vs central finite differences over one batch; returns the largest
// relative disagreement. Plaintext only.
inline double grad_check(const MlpSpec& spec, const Weights& w,
                         const std::vector<std::vector<double>>& X,
                         const std::vector<double>& y, double eps = 1e-5) {
  std::vector<double> grad = loss_gradient(spec, w, X, y);

  double worst = 0.0;
  Weights probe = w;
  for (std::size_t i = 0; i < w.flat.size(); ++i) {
    probe.flat[i] = w.flat[i] + eps;
    double up = mean_loss(spec, probe, X, y);
    probe.flat[i] = w.flat[i] - eps;
    double down = mean_loss(spec, probe, X, y);
    probe.flat[i] = w.flat[i];
    double numeric = (up - down) / (2.0 * eps);
    double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
    worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
  }
  return worst;
}

// --- encrypted-mode helpers ----------------------------------------------

inline WeightsT<hecore::Ciphertext> encrypt_weights(const hecore::SecretKey& key,
                                                    const Weights& w,
                                                    std::mt19937_64& g) {
  WeightsT<hecore::Ciphertext> out;
  out.layer_sizes = w.layer_sizes;
  out.flat.reserve(w.flat.size());
  for (double v : w.flat) out.flat.push_back(hecore::encrypt(key, v, g));
  return out;
}

inline Weights decrypt_weights(const hecore::SecretKey& key,
                               const WeightsT<hecore::Ciphertext>& w) {
  Weights out;
  out.layer_sizes = w.layer_sizes;
  out.flat.reserve(w.flat.size());
  for (const auto& c : w.flat) out.flat.push_back(hecore::decrypt(key, c));
  return out;
}

inline std::vector<std::vector<hecore::Ciphertext>> encrypt_rows(
    const hecore::SecretKey& key, const std::vector<std::vector<double>>& X,
    std::mt19937_64& g) {
  std::vector<std::vector<hecore::Ciphertext>> out;
  out.reserve(X.size());
  for (const auto& row : X) {
    std::vector<hecore::Ciphertext> r;
    r.reserve(row.size());
    for (double v : row) r.push_back(hecore::encrypt(key, v, g));
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<hecore::Ciphertext> encrypt_values(
    const hecore::SecretKey& key, const std::vector<double>& y,
    std::mt19937_64& g) {
  std::vector<hecore::Ciphertext> out;
  out.reserve(y.size());
  for (double v : y) out.push_back(hecore::encrypt(key, v, g));
  return out;
}

// Encrypted training: same init, same schedule, ciphertext scalars. The
// library trains encrypted models with SGD only.
inline TrainResult<CipherRing> train_encrypted(
    const MlpSpec& spec, const hecore::SecretKey& key,
    const std::vector<std::vector<hecore::Ciphertext>>& X,
    const std::vector<hecore::Ciphertext>& y, const TrainConfig& cfg,
    std::mt19937_64& encryption_rng) {
  if (cfg.optimizer != Optimizer::sgd) {
    throw config_error("encrypted training supports only the sgd optimizer");
  }
  Weights w0 = init_weights(spec, cfg.seed);
  return train_from<CipherRing>(spec, encrypt_weights(key, w0, encryption_rng),
                                X, y, cfg);
}

// --- weights file ---------------------------------------------------------
// Text: magic line, layer sizes line, one canonical float per line.
// Binary: magic, u32 layer count, u32 sizes, little-endian float64 data.

inline void save_weights_text(const Weights& w, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw data_error("cannot write " + path);
  f << "fedqol-weights 1\n";
  for (std::size_t i = 0; i < w.layer_sizes.size(); ++i) {
    f << (i ? " " : "") << w.layer_sizes[i];
  }
  f << '\n';
  for (double v : w.flat) f << fmt_double(v) << '\n';
}

inline Weights load_weights_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot read " + path);
  std::string magic;
  std::getline(f, magic);
  if (magic != "fedqol-weights 1") throw data_error("bad weights file header");
  std::string sizes_line;
  std::getline(f, sizes_line);
  Weights w;
  {
    std::size_t i = 0;
    while (i < sizes_line.size()) {
      while (i < sizes_line.size() && sizes_line[i] == ' ') ++i;
      std::size_t j = i;
      while (j < sizes_line.size() && sizes_line[j] != ' ') ++j;
      if (j > i) {
        w.layer_sizes.push_back(
            static_cast<int>(parse_long(sizes_line.substr(i, j - i))));
      }
      i = j;
    }
  }
  std::size_t expect = param_count(w.layer_sizes);
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    w.flat.push_back(parse_double(line));
  }
  if (w.flat.size() != expect) {
    throw data_error("weights file holds " + std::to_string(w.flat.size()) +
                     " values, expected " + std::to_string(expect));
  }
  return w;
}

inline void save_weights_binary(const Weights& w, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot write " + path);
  f.write("FQWB", 4);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(static_cast<std::uint32_t>(w.layer_sizes.size()));
  for (int s : w.layer_sizes) put_u32(static_cast<std::uint32_t>(s));
  for (double v : w.flat) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
    f.write(reinterpret_cast<const char*>(b), 8);
  }
}

inline Weights load_weights_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot read " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string_view(magic, 4) != "FQWB") {
    throw data_error("bad weights blob header");
  }
  auto get_u32 = [&]() {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw data_error("truncated weights blob");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  };
  Weights w;
  std::uint32_t layers = get_u32();
  for (std::uint32_t i = 0; i < layers; ++i) {
    w.layer_sizes.push_back(static_cast<int>(get_u32()));
  }
  std::size_t expect = param_count(w.layer_sizes);
  w.flat.resize(expect);
  for (std::size_t i = 0; i < expect; ++i) {
    unsigned char b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    if (!f) throw data_error("truncated weights blob");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    std::memcpy(&w.flat[i], &bits, sizeof(double));
  }
  return w;
}

}  // namespace fedqol::nnet
