#pragma once

#include <stdexcept>
#include <string>

#include "charsub/numeric.hpp"

namespace charsub {

struct Error : std::runtime_error {
  explicit Error(const std::string& m) : std::runtime_error(m) {}
};

/// DSL syntax errors; position is a byte offset into the source text.
struct ParseError : Error {
  std::size_t pos;
  ParseError(const std::string& m, std::size_t p) : Error(m + " (at offset " + std::to_string(p) + ")"), pos(p) {}
};

/// Argument outside an operation's domain (negative target, x outside [0,1), ...).
struct DomainError : Error {
  using Error::Error;
};

/// A certified comparison stayed undecidable at the precision cap.
struct PrecisionError : Error {
  using Error::Error;
};

/// A lazy generator or stream was asked for more indices than the budget allows.
struct BudgetError : Error {
  using Error::Error;
};

/// A constructed term exceeded the magnitude cap.
struct CapError : Error {
  using Error::Error;
};

/// Required metadata (divergence witness, boundedness flag, ...) is missing.
struct CapabilityError : Error {
  using Error::Error;
};

/// A lazily checked structural invariant failed (non-monotone generator, bad run structure).
struct StructureError : Error {
  using Error::Error;
};

/// A certificate failed re-verification.
struct VerifyError : Error {
  using Error::Error;
};

/// Global tunables. Every cap the artifact honors lives here; the CLI can
/// override any field from a key=value config file.
struct Config {
  unsigned prec_start = 64;         // starting bits for certified evaluation
  unsigned prec_cap = 1u << 14;     // refinement stops here -> PrecisionError
  Int generator_budget = 1000000;   // max generator indices / stream steps
  unsigned magnitude_cap_bits = 4096;
  unsigned window_num = 1;          // final-window fraction for verdicts
  unsigned window_den = 4;
  Rat null_tol = Rat(1, 1000);      // null-at-scale: window values below this
  Rat pos_threshold = Rat(1, 100);  // positive-at-scale: window values above this
  Rat gshape_bound = Rat(1, 2);     // per-decade lower bound evidence for n/g(n)
  unsigned canon_window = 64;       // digits per canonicality inspection window
  unsigned tail_guard = 8;          // extra tail digits over requested precision
};

inline const Config& default_config() {
  static const Config cfg{};
  return cfg;
}

}  // namespace charsub
