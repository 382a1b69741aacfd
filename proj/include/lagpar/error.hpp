#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lagpar {

/// Every failure the library reports, grouped so the CLI can map them to
/// exit codes without string matching.
enum class Errc {
  parse_error,
  invalid_argument,
  duplicate_x,
  index_out_of_range,
  empty_input,
  limit_exceeded,
  insufficient_blocks,
  mixed_dataset,
  inconsistent,
  ambiguity,
  insufficient_redundancy,
  missing_input,
  zero_denominator,
  invalid_definition,
  duplicate_dataset,
  store_unwritable,
  unknown_dataset,
  unknown_block,
  unrecoverable,
  manifest_missing,
  manifest_conflict,
  validation_failed,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::parse_error: return "parse-error";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::duplicate_x: return "duplicate-x";
    case Errc::index_out_of_range: return "index-out-of-range";
    case Errc::empty_input: return "empty-input";
    case Errc::limit_exceeded: return "limit-exceeded";
    case Errc::insufficient_blocks: return "insufficient-blocks";
    case Errc::mixed_dataset: return "mixed-dataset";
    case Errc::inconsistent: return "inconsistent";
    case Errc::ambiguity: return "ambiguity";
    case Errc::insufficient_redundancy: return "insufficient-redundancy";
    case Errc::missing_input: return "missing-input";
    case Errc::zero_denominator: return "zero-denominator";
    case Errc::invalid_definition: return "invalid-definition";
    case Errc::duplicate_dataset: return "duplicate-dataset";
    case Errc::store_unwritable: return "store-unwritable";
    case Errc::unknown_dataset: return "unknown-dataset";
    case Errc::unknown_block: return "unknown-block";
    case Errc::unrecoverable: return "unrecoverable";
    case Errc::manifest_missing: return "manifest-missing";
    case Errc::manifest_conflict: return "manifest-conflict";
    case Errc::validation_failed: return "validation-failed";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace lagpar
