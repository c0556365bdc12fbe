#pragma once

#include "fedqol/hecore.hpp"
#include "fedqol/scalar_fn.hpp"

namespace fedqol {

// The two scalar instantiations of the network engine. Code written against
// this interface runs the exact same operation sequence for both, which is
// what makes decrypted encrypted-mode results line up with plaintext runs.

struct PlainRing {
  using Value = double;
  static Value constant(double c) { return c; }
  static Value add(Value a, Value b) { return a + b; }
  static Value sub(Value a, Value b) { return a - b; }
  static Value mul(Value a, Value b) { return a * b; }
  static Value div(Value a, Value b) { return a / b; }
  static Value add_const(Value a, double c) { return a + c; }
  static Value mul_const(Value a, double c) { return a * c; }
  static Value apply(ScalarFn f, Value x) { return fn_value(f, x); }
};

struct CipherRing {
  using Value = hecore::Ciphertext;
  static Value constant(double c) { return Value::from_constant(c); }
  static Value add(const Value& a, const Value& b) { return hecore::add(a, b); }
  static Value sub(const Value& a, const Value& b) { return hecore::sub(a, b); }
  static Value mul(const Value& a, const Value& b) { return hecore::mul(a, b); }
  static Value div(const Value& a, const Value& b) { return hecore::div(a, b); }
  static Value add_const(const Value& a, double c) {
    return hecore::add_const(a, c);
  }
  static Value mul_const(const Value& a, double c) {
    return hecore::mul_const(a, c);
  }
  static Value apply(ScalarFn f, const Value& x) {
    return hecore::apply_fn(x, f);
  }
};

}  // namespace fedqol
