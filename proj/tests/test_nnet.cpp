#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fedqol/nnet.hpp"

using namespace fedqol;
using namespace fedqol::nnet;

namespace {

// Small random fixture with a learnable linear-ish signal.
void make_fixture(int n, int dims, bool binary, std::uint64_t seed,
                  std::vector<std::vector<double>>& X, std::vector<double>& y) {
  std::mt19937_64 g(seed);
  X.assign(n, {});
  y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    X[i].resize(dims);
    double score = 0.0;
    for (int j = 0; j < dims; ++j) {
      X[i][j] = uniform_in(g, -1.0, 1.0);
      score += (j % 2 ? 1.0 : -0.5) * X[i][j];
    }
    if (binary) {
      y[i] = score + gaussian(g, 0.0, 0.3) > 0.0 ? 1.0 : 0.0;
    } else {
      y[i] = score + gaussian(g, 0.0, 0.1);
    }
  }
}

}  // namespace

TEST_CASE("init_weights is deterministic with zero biases and Glorot bounds",
          "[nnet]") {
  MlpSpec spec = MlpSpec::classifier(8, {6, 4});
  Weights a = init_weights(spec, 42);
  Weights b = init_weights(spec, 42);
  CHECK(a.flat == b.flat);

  detail::Layout lay(spec.layer_sizes);
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    double limit =
        std::sqrt(6.0 / (spec.layer_sizes[l] + spec.layer_sizes[l + 1]));
    for (int j = 0; j < spec.layer_sizes[l + 1] * spec.layer_sizes[l]; ++j) {
      CHECK(std::abs(a.flat[lay.w_off[l] + j]) <= limit);
    }
    for (int j = 0; j < spec.layer_sizes[l + 1]; ++j) {
      CHECK(a.flat[lay.b_off[l] + j] == 0.0);
    }
  }

  Weights c = init_weights(spec, 43);
  CHECK(a.flat != c.flat);
}

TEST_CASE("forward matches closed forms", "[nnet]") {
  // All-zero weights through a sigmoid head: every prediction is 0.5.
  MlpSpec spec = MlpSpec::classifier(3, {4});
  Weights zero;
  zero.layer_sizes = spec.layer_sizes;
  zero.flat.assign(param_count(spec.layer_sizes), 0.0);
  CHECK(forward_one<PlainRing>(spec, zero, {0.2, -0.4, 1.0}) == 0.5);

  // One-to-one linear net: y = w x + b.
  MlpSpec lin;
  lin.layer_sizes = {1, 1};
  lin.output_activation = OutputActivation::linear;
  lin.loss = Loss::mse;
  Weights w;
  w.layer_sizes = lin.layer_sizes;
  w.flat = {2.0, 1.0};
  CHECK(forward_one<PlainRing>(lin, w, {3.0}) == 7.0);
}

TEST_CASE("plaintext and encrypted forward agree", "[nnet]") {
  MlpSpec spec = MlpSpec::classifier(5, {6, 4});
  Weights w = init_weights(spec, 3);
  hecore::SecretKey key = hecore::keygen({.seed = 11});
  std::mt19937_64 enc_rng(101);
  auto encw = encrypt_weights(key, w, enc_rng);

  std::mt19937_64 g(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x;
    std::vector<hecore::Ciphertext> ex;
    for (int j = 0; j < 5; ++j) {
      x.push_back(uniform_in(g, -2.0, 2.0));
      ex.push_back(hecore::encrypt(key, x.back(), enc_rng));
    }
    double plain = forward_one<PlainRing>(spec, w, x);
    double enc = hecore::decrypt(key, forward_one<CipherRing>(spec, encw, ex));
    CHECK(std::abs(plain - enc) < 1e-8);
  }
}

TEST_CASE("one SGD step reproduces the hand-derived gradient", "[nnet]") {
  // Single sample (x=1, y=2) on y = wx + b with w=b=0, MSE, lr=0.1:
  // grad_w = 2(yhat - y)x = -4, so both parameters step to 0.4.
  MlpSpec lin;
  lin.layer_sizes = {1, 1};
  lin.output_activation = OutputActivation::linear;
  lin.loss = Loss::mse;
  Weights w0;
  w0.layer_sizes = lin.layer_sizes;
  w0.flat = {0.0, 0.0};
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.batch_size = 1;
  cfg.epochs = 1;
  auto res = train_from<PlainRing>(lin, w0, {{1.0}}, {2.0}, cfg);
  CHECK(res.weights.flat[0] == Catch::Approx(0.4).margin(1e-12));
  CHECK(res.weights.flat[1] == Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("zero epochs leaves weights unchanged", "[nnet]") {
  MlpSpec spec = MlpSpec::classifier(4, {3});
  Weights w = init_weights(spec, 5);
  TrainConfig cfg;
  cfg.epochs = 0;
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  make_fixture(10, 4, true, 1, X, y);
  auto res = train_from<PlainRing>(spec, w, X, y, cfg);
  CHECK(res.weights.flat == w.flat);
  CHECK(res.epoch_loss.empty());
}

TEST_CASE("training is a pure function of its inputs", "[nnet]") {
  MlpSpec spec = MlpSpec::classifier(4, {8, 4});
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  make_fixture(60, 4, true, 2, X, y);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 16;
  cfg.seed = 9;
  auto a = train(spec, X, y, cfg);
  auto b = train(spec, X, y, cfg);
  CHECK(a.weights.flat == b.weights.flat);
  CHECK(a.epoch_loss == b.epoch_loss);

  // Training actually reduces the loss on the fixture.
  CHECK(a.epoch_loss.back() < a.epoch_loss.front());
}

TEST_CASE("adam optimizes and stays deterministic", "[nnet]") {
  MlpSpec spec = MlpSpec::regressor(4, 2, 8);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  make_fixture(80, 4, false, 3, X, y);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 16;
  cfg.optimizer = Optimizer::adam;
  cfg.seed = 4;
  auto a = train(spec, X, y, cfg);
  auto b = train(spec, X, y, cfg);
  CHECK(a.weights.flat == b.weights.flat);
  CHECK(a.epoch_loss.back() < a.epoch_loss.front());
}

TEST_CASE("encrypted training refuses adam", "[nnet]") {
  MlpSpec spec = MlpSpec::classifier(2, {2});
  hecore::SecretKey key = hecore::keygen({.seed = 1});
  std::mt19937_64 g(1);
  auto X = encrypt_rows(key, {{0.1, 0.2}}, g);
  auto y = encrypt_values(key, {1.0}, g);
  TrainConfig cfg;
  cfg.optimizer = Optimizer::adam;
  CHECK_THROWS_AS(train_encrypted(spec, key, X, y, cfg, g), config_error);
}

TEST_CASE("encrypted SGD training matches plaintext after decryption",
          "[nnet]") {
  MlpSpec spec = MlpSpec::classifier(3, {4});
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  make_fixture(24, 3, true, 6, X, y);

  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  cfg.seed = 12;

  auto plain = train(spec, X, y, cfg);

  hecore::SecretKey key = hecore::keygen({.seed = 2});
  std::mt19937_64 enc_rng(55);
  auto encX = encrypt_rows(key, X, enc_rng);
  auto ency = encrypt_values(key, y, enc_rng);
  auto enc = train_encrypted(spec, key, encX, ency, cfg, enc_rng);
  Weights dec = decrypt_weights(key, enc.weights);

  double worst = 0.0;
  for (std::size_t i = 0; i < dec.flat.size(); ++i) {
    worst = std::max(worst, std::abs(dec.flat[i] - plain.weights.flat[i]));
  }
  CHECK(worst < 1e-6);

  for (std::size_t e = 0; e < enc.epoch_loss.size(); ++e) {
    CHECK(std::abs(hecore::decrypt(key, enc.epoch_loss[e]) -
                   plain.epoch_loss[e]) < 1e-6);
  }
}

TEST_CASE("grad_check validates backprop on a random 3-layer net", "[nnet]") {
  MlpSpec spec;
  spec.layer_sizes = {5, 7, 4, 1};
  spec.hidden_activation = Activation::tanh_act;
  spec.output_activation = OutputActivation::linear;
  spec.loss = Loss::mse;
  Weights w = init_weights(spec, 21);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  make_fixture(12, 5, false, 7, X, y);
  CHECK(grad_check(spec, w, X, y, 1e-5) < 1e-4);
}

TEST_CASE("gradients vanish on an exactly fitted linear net", "[nnet]") {
  MlpSpec lin;
  lin.layer_sizes = {2, 1};
  lin.output_activation = OutputActivation::linear;
  lin.loss = Loss::mse;
  Weights w;
  w.layer_sizes = lin.layer_sizes;
  w.flat = {1.0, 2.0, 0.5};  // y = x0 + 2 x1 + 0.5
  std::vector<std::vector<double>> X = {{0.3, -1.2}, {2.0, 0.25}, {-0.7, 0.0}};
  std::vector<double> y;
  for (const auto& row : X) y.push_back(row[0] + 2.0 * row[1] + 0.5);
  for (double g : loss_gradient(lin, w, X, y)) {
    CHECK(std::abs(g) < 1e-12);
  }
}

TEST_CASE("single-weight net matches the symbolic derivative", "[nnet]") {
  MlpSpec lin;
  lin.layer_sizes = {1, 1};
  lin.output_activation = OutputActivation::linear;
  lin.loss = Loss::mse;
  Weights w;
  w.layer_sizes = lin.layer_sizes;
  w.flat = {1.7, -0.3};
  std::vector<std::vector<double>> X = {{0.8}};
  std::vector<double> y = {2.5};
  auto grad = loss_gradient(lin, w, X, y);
  double err = 1.7 * 0.8 - 0.3 - 2.5;
  CHECK(std::abs(grad[0] - 2.0 * err * 0.8) < 1e-9);
  CHECK(std::abs(grad[1] - 2.0 * err) < 1e-9);
}

TEST_CASE("paper topologies are constructible", "[nnet]") {
  MlpSpec cls = MlpSpec::classifier(46);
  cls.validate();
  CHECK(cls.layer_sizes == std::vector<int>{46, 64, 32, 16, 1});

  MlpSpec reg = MlpSpec::regressor(30);
  reg.validate();
  CHECK(reg.layer_sizes.size() == 7);  // input + five hidden + output
  for (int l = 1; l <= 5; ++l) CHECK(reg.layer_sizes[l] == 100);

  MlpSpec fed = MlpSpec::federated_regressor(30);
  fed.validate();
  CHECK(fed.layer_sizes.size() == 12);  // input + ten hidden + output
  for (int l = 1; l <= 10; ++l) CHECK(fed.layer_sizes[l] == 40);
}

TEST_CASE("spec validation rejects bad configurations", "[nnet]") {
  MlpSpec bad;
  bad.layer_sizes = {4};
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad.layer_sizes = {4, 2};
  CHECK_THROWS_AS(bad.validate(), config_error);  // output size must be 1
  bad.layer_sizes = {4, 1};
  bad.output_activation = OutputActivation::linear;
  bad.loss = Loss::cross_entropy;
  CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("weights files round trip in both forms", "[nnet]") {
  MlpSpec spec = MlpSpec::classifier(6, {5, 3});
  Weights w = init_weights(spec, 77);
  save_weights_text(w, "weights_rt.txt");
  Weights t = load_weights_text("weights_rt.txt");
  CHECK(t.layer_sizes == w.layer_sizes);
  CHECK(t.flat == w.flat);

  save_weights_binary(w, "weights_rt.bin");
  Weights b = load_weights_binary("weights_rt.bin");
  CHECK(b.layer_sizes == w.layer_sizes);
  CHECK(b.flat == w.flat);
}
