#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fedqol/hecore.hpp"

using namespace fedqol;
using namespace fedqol::hecore;

namespace {

SecretKey test_key(std::uint64_t seed = 7) {
  KeyGenConfig cfg;
  cfg.seed = seed;
  return keygen(cfg);
}

// Replays the randomizer derivation so tests can predict the hidden r slot.
double replay_r(const SecretKey& key, double m, std::mt19937_64 g) {
  double draw;
  do {
    draw = key.r_dist.draw(g);
  } while (std::abs(draw) < 1e-6);
  return draw * (m != 0.0 ? std::abs(m) : 1.0);
}

}  // namespace

TEST_CASE("keygen is deterministic and seed sensitive", "[hecore]") {
  KeyGenConfig cfg;
  cfg.seed = 7;
  SecretKey a = keygen(cfg);
  SecretKey b = keygen(cfg);
  CHECK(a.s == b.s);
  CHECK(a.s_inv == b.s_inv);

  cfg.seed = 8;
  SecretKey c = keygen(cfg);
  CHECK(a.s != c.s);
}

TEST_CASE("keygen output satisfies the key invariants", "[hecore]") {
  for (std::uint64_t seed : {0ull, 1ull, 7ull, 42ull, 123456789ull}) {
    KeyGenConfig cfg;
    cfg.seed = seed;
    SecretKey k = keygen(cfg);
    CHECK(std::abs(k.s.det()) >= 1e-6);
    CHECK(k.s.cond() <= cfg.cond_bound);
    Mat2 prod = k.s * k.s_inv;
    CHECK(std::abs(prod.m00 - 1.0) < 1e-12);
    CHECK(std::abs(prod.m11 - 1.0) < 1e-12);
    CHECK(std::abs(prod.m01) < 1e-12);
    CHECK(std::abs(prod.m10) < 1e-12);
  }
}

TEST_CASE("keygen rejects bad configs", "[hecore]") {
  KeyGenConfig cfg;
  cfg.cond_bound = 1.0;
  CHECK_THROWS_AS(keygen(cfg), config_error);
  cfg = KeyGenConfig{};
  cfg.entry_lo = 2.0;
  cfg.entry_hi = 2.0;
  CHECK_THROWS_AS(keygen(cfg), config_error);
}

TEST_CASE("identity key exposes the diagonal construction", "[hecore]") {
  SecretKey id;  // s = s_inv = I
  std::mt19937_64 g(1);
  Ciphertext c = encrypt(id, 5.0, g);
  CHECK(c.c.m00 == 5.0);
  CHECK(c.c.m01 == 0.0);
  CHECK(c.c.m10 == 0.0);
  CHECK(c.c.m11 != 0.0);  // the randomizer slot
  CHECK(decrypt(id, c) == 5.0);
}

TEST_CASE("round trip recovers the plaintext", "[hecore]") {
  SecretKey key = test_key();
  std::mt19937_64 g(99);
  for (double m : {-1e6, 0.0, 1e-9, 3.14}) {
    double got = decrypt(key, encrypt(key, m, g));
    if (m == 0.0) {
      CHECK(std::abs(got) < 1e-10);
    } else {
      CHECK(std::abs(got - m) < 1e-10 * std::abs(m));
    }
  }
}

TEST_CASE("encryption is randomized", "[hecore]") {
  SecretKey key = test_key();
  std::mt19937_64 g(5);
  Ciphertext a = encrypt(key, 5.0, g);
  Ciphertext b = encrypt(key, 5.0, g);
  CHECK(a.c != b.c);
  CHECK(std::abs(decrypt(key, a) - 5.0) < 1e-9);
  CHECK(std::abs(decrypt(key, b) - 5.0) < 1e-9);
}

TEST_CASE("encrypt rejects non-finite plaintext", "[hecore]") {
  SecretKey key = test_key();
  std::mt19937_64 g(5);
  CHECK_THROWS_AS(encrypt(key, std::nan(""), g), data_error);
  CHECK_THROWS_AS(encrypt(key, INFINITY, g), data_error);
}

TEST_CASE("ciphertext arithmetic matches plaintext arithmetic", "[hecore]") {
  SecretKey key = test_key();
  std::mt19937_64 g(11);

  Ciphertext two = encrypt(key, 2.0, g);
  Ciphertext three = encrypt(key, 3.0, g);
  CHECK(std::abs(decrypt(key, add(two, three)) - 5.0) < 1e-9);
  CHECK(std::abs(decrypt(key, mul(two, three)) - 6.0) < 1e-9);
  CHECK(decrypt(key, sub(two, two)) == 0.0);  // exact cancellation

  // Oracle: plaintext arithmetic over 1000 random pairs.
  std::mt19937_64 draws(20260809);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double x = uniform_in(draws, -10.0, 10.0);
    double y = uniform_in(draws, -10.0, 10.0);
    Ciphertext cx = encrypt(key, x, g);
    Ciphertext cy = encrypt(key, y, g);
    auto rel = [](double got, double want) {
      return std::abs(got - want) / std::max(std::abs(want), 1e-9);
    };
    worst = std::max(worst, rel(decrypt(key, add(cx, cy)), x + y));
    worst = std::max(worst, rel(decrypt(key, sub(cx, cy)), x - y));
    worst = std::max(worst, rel(decrypt(key, mul(cx, cy)), x * y));
    worst = std::max(worst, rel(decrypt(key, div(cx, cy)), x / y));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("division by a singular ciphertext fails", "[hecore]") {
  SecretKey key = test_key();
  std::mt19937_64 g(3);
  Ciphertext a = encrypt(key, 4.0, g);
  Ciphertext zero{Mat2::diagonal(0.0, 0.0)};
  CHECK_THROWS_AS(div(a, zero), arithmetic_error);
}

TEST_CASE("constants fold into ciphertexts", "[hecore]") {
  SecretKey key = test_key();
  std::mt19937_64 g(17);
  Ciphertext two = encrypt(key, 2.0, g);
  CHECK(std::abs(decrypt(key, add_const(two, 3.0)) - 5.0) < 1e-12);
  CHECK(std::abs(decrypt(key, mul_const(two, -1.0)) + 2.0) < 1e-12);
  CHECK(std::abs(decrypt(key, mul_const(two, 0.0))) < 1e-12);
  // Embedded constants decrypt to themselves under any key.
  CHECK(std::abs(decrypt(key, Ciphertext::from_constant(7.5)) - 7.5) < 1e-12);
}

TEST_CASE("apply_fn evaluates named functions on the hidden slots", "[hecore]") {
  SecretKey key = test_key();
  std::mt19937_64 g(23);

  CHECK(std::abs(decrypt(key, apply_fn(encrypt(key, 0.0, g), ScalarFn::sigmoid)) -
                 0.5) < 1e-10);
  CHECK(std::abs(decrypt(key, apply_fn(encrypt(key, -3.0, g), ScalarFn::relu))) <
        1e-10);
  CHECK(std::abs(decrypt(key, apply_fn(encrypt(key, 3.0, g), ScalarFn::relu)) -
                 3.0) < 1e-10);

  // Oracle: scalar tanh over 1000 random plaintexts.
  std::mt19937_64 draws(424242);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double m = uniform_in(draws, -6.0, 6.0);
    double got = decrypt(key, apply_fn(encrypt(key, m, g), ScalarFn::tanh_fn));
    worst = std::max(worst, std::abs(got - std::tanh(m)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("apply_fn near-degenerate slots use the first-order fallback",
          "[hecore]") {
  SecretKey key = test_key();
  for (double m : {0.75, -1.25, 2.0}) {
    Ciphertext c{key.s * Mat2::diagonal(m, m + 1e-9) * key.s_inv};
    double got = decrypt(key, apply_fn(c, ScalarFn::tanh_fn));
    CHECK(std::abs(got - std::tanh(m)) < 1e-6);
  }
}

TEST_CASE("sqrt of a negative hidden value is a domain error", "[hecore]") {
  SecretKey key = test_key();
  std::mt19937_64 g(31);
  Ciphertext neg = encrypt(key, -2.0, g);
  CHECK_THROWS_AS(apply_fn(neg, ScalarFn::sqrt_fn), arithmetic_error);
  // Positive plaintexts keep a positive randomizer, so sqrt works.
  Ciphertext pos = encrypt(key, 9.0, g);
  CHECK(std::abs(decrypt(key, apply_fn(pos, ScalarFn::sqrt_fn)) - 3.0) < 1e-9);
}

TEST_CASE("ciphertext eigenvalues leak the plaintext and randomizer",
          "[hecore]") {
  // The scheme's documented weakness: anyone can read {m, r} off a
  // ciphertext without the key. Asserted, not fixed.
  SecretKey key = test_key();
  for (double m : {4.0, -0.5, 123.456}) {
    std::mt19937_64 g(77);
    double r = replay_r(key, m, g);
    Ciphertext c = encrypt(key, m, g);
    auto [hi, lo] = eigenvalues(c);
    double want_hi = std::max(m, r);
    double want_lo = std::min(m, r);
    CHECK(std::abs(hi - want_hi) < 1e-9 * std::max(1.0, std::abs(want_hi)));
    CHECK(std::abs(lo - want_lo) < 1e-9 * std::max(1.0, std::abs(want_lo)));
  }
}

TEST_CASE("key and ciphertext serialization round trips", "[hecore]") {
  SecretKey key = test_key(99);
  SecretKey back = key_from_text(key_to_text(key));
  CHECK(back.s == key.s);
  CHECK(back.s_inv == key.s_inv);

  SecretKey back2 = key_from_bytes(key_to_bytes(key));
  CHECK(back2.s == key.s);
  CHECK(back2.s_inv == key.s_inv);

  std::mt19937_64 g(1);
  Ciphertext c = encrypt(key, -17.25, g);
  CHECK(ciphertext_from_text(ciphertext_to_text(c)) == c);

  CHECK_THROWS_AS(key_from_text("1 2 3"), data_error);
  CHECK_THROWS_AS(ciphertext_from_text("1 2 3 x"), data_error);
}

TEST_CASE("homomorphism survives long mixed chains", "[hecore]") {
  // Noise-free scheme: depth does not degrade accuracy beyond float rounding.
  SecretKey key = test_key();
  std::mt19937_64 g(13);
  double plain = 1.0;
  Ciphertext enc = encrypt(key, plain, g);
  std::mt19937_64 draws(8);
  for (int i = 0; i < 500; ++i) {
    double v = uniform_in(draws, -1.5, 1.5);
    plain = plain * 0.9 + v;
    enc = add_const(mul_const(enc, 0.9), v);
    plain = std::tanh(plain);
    enc = apply_fn(enc, ScalarFn::tanh_fn);
  }
  CHECK(std::abs(decrypt(key, enc) - plain) < 1e-8);
}
