#pragma once

#include <cmath>
#include <string_view>

#include "fedqol/error.hpp"

namespace fedqol {

// Named scalar functions shared by the plaintext and encrypted rings.
// Ciphertexts evaluate them on the hidden eigenvalue pair. Derivatives are
// first-class names so gradient code never leaves the ring interface.
enum class ScalarFn {
  identity,
  relu,
  sigmoid,
  tanh_fn,
  sqrt_fn,
  log_fn,
  identity_grad,
  relu_grad,
  sigmoid_grad,
  tanh_grad,
  sqrt_grad,
  log_grad,
};

inline double fn_value(ScalarFn f, double x) {
  switch (f) {
    case ScalarFn::identity: return x;
    case ScalarFn::relu: return x > 0.0 ? x : 0.0;
    case ScalarFn::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case ScalarFn::tanh_fn: return std::tanh(x);
    case ScalarFn::sqrt_fn: return std::sqrt(x);
    case ScalarFn::log_fn: return std::log(x);
    case ScalarFn::identity_grad: return 1.0;
    case ScalarFn::relu_grad: return x > 0.0 ? 1.0 : 0.0;  // relu'(0) = 0
    case ScalarFn::sigmoid_grad: {
      double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case ScalarFn::tanh_grad: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ScalarFn::sqrt_grad: return 0.5 / std::sqrt(x);
    case ScalarFn::log_grad: return 1.0 / x;
  }
  throw error("unreachable scalar function");
}

// d/dx of the named function; used by the repeated-eigenvalue fallback.
inline double fn_derivative(ScalarFn f, double x) {
  switch (f) {
    case ScalarFn::identity: return 1.0;
    case ScalarFn::relu: return x > 0.0 ? 1.0 : 0.0;
    case ScalarFn::sigmoid: return fn_value(ScalarFn::sigmoid_grad, x);
    case ScalarFn::tanh_fn: return fn_value(ScalarFn::tanh_grad, x);
    case ScalarFn::sqrt_fn: return 0.5 / std::sqrt(x);
    case ScalarFn::log_fn: return 1.0 / x;
    case ScalarFn::identity_grad: return 0.0;
    case ScalarFn::relu_grad: return 0.0;
    case ScalarFn::sigmoid_grad: {
      double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case ScalarFn::tanh_grad: {
      double t = std::tanh(x);
      return -2.0 * t * (1.0 - t * t);
    }
    case ScalarFn::sqrt_grad: return -0.25 / (x * std::sqrt(x));
    case ScalarFn::log_grad: return -1.0 / (x * x);
  }
  throw error("unreachable scalar function");
}

inline bool fn_requires_nonnegative(ScalarFn f) {
  return f == ScalarFn::sqrt_fn || f == ScalarFn::sqrt_grad;
}

inline bool fn_requires_positive(ScalarFn f) {
  return f == ScalarFn::log_fn || f == ScalarFn::log_grad;
}

inline std::string_view fn_name(ScalarFn f) {
  switch (f) {
    case ScalarFn::identity: return "identity";
    case ScalarFn::relu: return "relu";
    case ScalarFn::sigmoid: return "sigmoid";
    case ScalarFn::tanh_fn: return "tanh";
    case ScalarFn::sqrt_fn: return "sqrt";
    case ScalarFn::log_fn: return "log";
    case ScalarFn::identity_grad: return "identity_grad";
    case ScalarFn::relu_grad: return "relu_grad";
    case ScalarFn::sigmoid_grad: return "sigmoid_grad";
    case ScalarFn::tanh_grad: return "tanh_grad";
    case ScalarFn::sqrt_grad: return "sqrt_grad";
    case ScalarFn::log_grad: return "log_grad";
  }
  return "?";
}

}  // namespace fedqol
