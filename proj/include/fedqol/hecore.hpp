#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedqol/error.hpp"
#include "fedqol/matrix2.hpp"
#include "fedqol/numstr.hpp"
#include "fedqol/rng.hpp"
#include "fedqol/scalar_fn.hpp"

// Symmetric homomorphic encryption over floating point by matrix similarity.
// A plaintext m and a fresh randomizer r are hidden as the eigenvalue pair of
// C = S * diag(m, r) * S^-1 under a secret invertible key S. Ring operations
// on ciphertexts are plain 2x2 matrix arithmetic; nonlinear functions are
// evaluated on the eigenvalues and reconstructed. The scheme is noise-free,
// so arbitrarily long operation chains stay exact up to float rounding. It is
// NOT semantically secure (the eigenvalues of C are exactly {m, r}); see the
// weakness demonstration in the test suite before trusting it with anything.

namespace fedqol::hecore {

struct RDist {
  enum class Kind { uniform, gaussian };
  Kind kind = Kind::uniform;
  double a = 0.5;  // uniform lo / gaussian mean
  double b = 2.0;  // uniform hi / gaussian stddev

  static RDist uniform(double lo, double hi) {
    return {Kind::uniform, lo, hi};
  }
  static RDist gaussian(double mu, double sigma) {
    return {Kind::gaussian, mu, sigma};
  }

  double draw(std::mt19937_64& g) const {
    return kind == Kind::uniform ? uniform_in(g, a, b) : fedqol::gaussian(g, a, b);
  }

  bool operator==(const RDist&) const = default;
};

struct KeyGenConfig {
  std::uint64_t seed = 0;
  double entry_lo = -1.0;
  double entry_hi = 1.0;
  double cond_bound = 50.0;
  RDist r_dist = RDist::uniform(0.5, 2.0);
};

struct SecretKey {
  Mat2 s = Mat2::identity();
  Mat2 s_inv = Mat2::identity();
  RDist r_dist = RDist::uniform(0.5, 2.0);
};

struct Ciphertext {
  Mat2 c;

  // Embeds a public constant: S * (v I) * S^-1 == v I for every key, so
  // constants are ciphertext-compatible without knowing the key.
  static Ciphertext from_constant(double v) { return {Mat2::scalar(v)}; }

  bool operator==(const Ciphertext&) const = default;
};

inline SecretKey keygen(const KeyGenConfig& cfg) {
  if (!(cfg.cond_bound > 1.0)) {
    throw config_error("keygen: cond_bound must exceed 1");
  }
  if (!(cfg.entry_lo < cfg.entry_hi)) {
    throw config_error("keygen: empty entry range");
  }
  std::mt19937_64 g(cfg.seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Mat2 s{uniform_in(g, cfg.entry_lo, cfg.entry_hi),
           uniform_in(g, cfg.entry_lo, cfg.entry_hi),
           uniform_in(g, cfg.entry_lo, cfg.entry_hi),
           uniform_in(g, cfg.entry_lo, cfg.entry_hi)};
    if (std::abs(s.det()) < 1e-6) continue;
    if (s.cond() > cfg.cond_bound) continue;
    return SecretKey{s, s.inverse(), cfg.r_dist};
  }
  throw config_error("keygen: no invertible well-conditioned key in 1000 draws");
}

inline Ciphertext encrypt(const SecretKey& key, double m, std::mt19937_64& g) {
  if (!std::isfinite(m)) {
    throw data_error("encrypt: plaintext must be finite");
  }
  double draw;
  do {
    draw = key.r_dist.draw(g);
  } while (std::abs(draw) < 1e-6);  // r must stay away from zero
  // Scale the randomizer to the plaintext magnitude; keeps the hidden pair
  // comparable so long operation chains stay well conditioned.
  double r = draw * (m != 0.0 ? std::abs(m) : 1.0);
  return {key.s * Mat2::diagonal(m, r) * key.s_inv};
}

inline double decrypt(const SecretKey& key, const Ciphertext& x) {
  return (key.s_inv * x.c * key.s).m00;
}

inline Ciphertext add(const Ciphertext& a, const Ciphertext& b) {
  return {a.c + b.c};
}

inline Ciphertext sub(const Ciphertext& a, const Ciphertext& b) {
  return {a.c - b.c};
}

inline Ciphertext mul(const Ciphertext& a, const Ciphertext& b) {
  return {a.c * b.c};
}

inline Ciphertext div(const Ciphertext& a, const Ciphertext& b) {
  double d = b.c.det();
  if (d == 0.0 || !std::isfinite(d)) {
    throw arithmetic_error("ciphertext division by singular matrix");
  }
  return {a.c * b.c.inverse()};
}

inline Ciphertext add_const(const Ciphertext& a, double v) {
  return {a.c + Mat2::scalar(v)};
}

inline Ciphertext mul_const(const Ciphertext& a, double v) {
  return {v * a.c};
}

// Hidden eigenvalue pair, descending. By construction this is {m, r} up to
// rounding, which is precisely the scheme's known weakness.
inline std::pair<double, double> eigenvalues(const Ciphertext& x) {
  double tr = x.c.trace();
  double disc = 0.25 * tr * tr - x.c.det();
  double sq = std::sqrt(disc < 0.0 ? 0.0 : disc);
  return {0.5 * tr + sq, 0.5 * tr - sq};
}

namespace detail {

struct Vec2 {
  double x, y;
};

inline Vec2 eigenvector_for(const Mat2& c, double lambda) {
  // Rows of (C - lambda I) give two candidate null vectors; take the better
  // conditioned one and normalize.
  Vec2 u{c.m01, lambda - c.m00};
  Vec2 v{lambda - c.m11, c.m10};
  double nu = u.x * u.x + u.y * u.y;
  double nv = v.x * v.x + v.y * v.y;
  Vec2 w = nu >= nv ? u : v;
  double n = std::sqrt(nu >= nv ? nu : nv);
  if (n == 0.0) return {1.0, 0.0};  // scalar matrix; caller uses fallback
  return {w.x / n, w.y / n};
}

}  // namespace detail

inline constexpr double kDegenerateEigenGap = 1e-8;

// Evaluates f on both hidden slots: diagonalize, map the eigenvalues,
// reconstruct. Near a repeated eigenvalue the eigenvector basis is ill
// conditioned, so below kDegenerateEigenGap we switch to the first-order
// expansion f(l) I + f'(l) (C - l I).
inline Ciphertext apply_fn(const Ciphertext& x, ScalarFn f) {
  auto [l1, l2] = eigenvalues(x);
  // Tiny negative slots are rounding artifacts of a zero plaintext; clamp
  // them rather than reject sqrt(E(0)).
  double tol = 1e-12 * (1.0 + std::abs(x.c.trace()));
  if (fn_requires_nonnegative(f) || fn_requires_positive(f)) {
    if (l1 < 0.0 && l1 > -tol) l1 = 0.0;
    if (l2 < 0.0 && l2 > -tol) l2 = 0.0;
    double lo = std::min(l1, l2);
    if (lo < 0.0 || (fn_requires_positive(f) && lo == 0.0)) {
      throw arithmetic_error(std::string(fn_name(f)) +
                             " on a negative or zero hidden value");
    }
  }
  if (std::abs(l1 - l2) < kDegenerateEigenGap) {
    double l = 0.5 * x.c.trace();
    return {Mat2::scalar(fn_value(f, l)) +
            fn_derivative(f, l) * (x.c - Mat2::scalar(l))};
  }
  detail::Vec2 v1 = detail::eigenvector_for(x.c, l1);
  detail::Vec2 v2 = detail::eigenvector_for(x.c, l2);
  Mat2 basis{v1.x, v2.x, v1.y, v2.y};
  return {basis * Mat2::diagonal(fn_value(f, l1), fn_value(f, l2)) *
          basis.inverse()};
}

// --- serialization ------------------------------------------------------
// Key: 8 row-major numbers (s then s_inv) on one text line. Ciphertext: 4
// row-major numbers. Binary forms are little-endian float64 in field order.

namespace detail {

inline void split_numbers(std::string_view text, std::vector<double>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\n' ||
                               text[i] == '\t' || text[i] == '\r')) {
      ++i;
    }
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ' && text[j] != '\n' &&
           text[j] != '\t' && text[j] != '\r') {
      ++j;
    }
    if (j > i) out.push_back(parse_double(text.substr(i, j - i)));
    i = j;
  }
}

inline void put_le64(std::vector<unsigned char>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int k = 0; k < 8; ++k) {
    out.push_back(static_cast<unsigned char>(bits >> (8 * k)));
  }
}

inline double get_le64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) {
    bits |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  }
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace detail

inline std::string key_to_text(const SecretKey& k) {
  const double vals[8] = {k.s.m00, k.s.m01, k.s.m10, k.s.m11,
                          k.s_inv.m00, k.s_inv.m01, k.s_inv.m10, k.s_inv.m11};
  std::string out;
  for (int i = 0; i < 8; ++i) {
    if (i) out += ' ';
    out += fmt_double(vals[i]);
  }
  return out;
}

inline SecretKey key_from_text(std::string_view text) {
  std::vector<double> v;
  detail::split_numbers(text, v);
  if (v.size() != 8) {
    throw data_error("key record must hold exactly 8 numbers");
  }
  return {{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]},
          RDist::uniform(0.5, 2.0)};
}

inline std::vector<unsigned char> key_to_bytes(const SecretKey& k) {
  std::vector<unsigned char> out;
  out.reserve(64);
  for (double v : {k.s.m00, k.s.m01, k.s.m10, k.s.m11, k.s_inv.m00,
                   k.s_inv.m01, k.s_inv.m10, k.s_inv.m11}) {
    detail::put_le64(out, v);
  }
  return out;
}

inline SecretKey key_from_bytes(const std::vector<unsigned char>& bytes) {
  if (bytes.size() != 64) throw data_error("key blob must be 64 bytes");
  double v[8];
  for (int i = 0; i < 8; ++i) v[i] = detail::get_le64(bytes.data() + 8 * i);
  return {{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]},
          RDist::uniform(0.5, 2.0)};
}

inline std::string ciphertext_to_text(const Ciphertext& x) {
  return fmt_double(x.c.m00) + ' ' + fmt_double(x.c.m01) + ' ' +
         fmt_double(x.c.m10) + ' ' + fmt_double(x.c.m11);
}

inline Ciphertext ciphertext_from_text(std::string_view text) {
  std::vector<double> v;
  detail::split_numbers(text, v);
  if (v.size() != 4) {
    throw data_error("ciphertext record must hold exactly 4 numbers");
  }
  return {{v[0], v[1], v[2], v[3]}};
}

}  // namespace fedqol::hecore
