#pragma once
#include <stdexcept>
#include <string>

namespace qr {

// bad user input: syntax, dimensions, violated preconditions
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// a desk-scale cap would be exceeded
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// numerical self-check failed (fast path vs oracle etc.)
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qr
