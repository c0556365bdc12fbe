#pragma once

#include <stdexcept>

namespace fedqol {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration or parameter combinations. CLI exit code 2.
struct config_error : error {
  using error::error;
};

// Malformed or unusable data: files, schemas, tables. CLI exit code 3.
struct data_error : error {
  using error::error;
};

// Wire protocol violations and session failures. CLI exit code 4.
struct protocol_error : error {
  using error::error;
};

// Domain violations in ciphertext arithmetic: singular divisor, sqrt of a
// negative hidden slot.
struct arithmetic_error : error {
  using error::error;
};

}  // namespace fedqol
