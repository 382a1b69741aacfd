#pragma once

#include <lagpar/error.hpp>
#include <lagpar/polynomial.hpp>
#include <lagpar/rational.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lagpar {

enum class BlockRole { original, parity };

constexpr std::string_view to_string(BlockRole role) noexcept {
  return role == BlockRole::original ? "original" : "parity";
}

/// One evaluation (index, P(index)) of a dataset's interpolating polynomial.
/// Originals sit at x = 0..k-1 and parity blocks at x = k, k+1, ...
struct CodedBlock {
  std::uint64_t index = 0;
  Rational value;
  BlockRole role = BlockRole::original;
  std::uint64_t k = 1;
  std::string dataset_id;

  friend bool operator==(const CodedBlock&, const CodedBlock&) = default;
};

inline BlockRole role_for(std::uint64_t index, std::uint64_t k) noexcept {
  return index < k ? BlockRole::original : BlockRole::parity;
}

/// Blocks offered for reconstruction of a single dataset with threshold k.
struct RecoverySet {
  std::vector<CodedBlock> blocks;
  std::uint64_t k = 1;
};

struct ConsistencyReport {
  bool consistent = true;
  std::vector<std::uint64_t> residual_indices;
};

struct CorrectionResult {
  std::vector<Rational> recovered;
  std::vector<std::uint64_t> suspects;
};

inline constexpr std::size_t kDefaultParityLimit = 1024;

/// Builds the k original blocks for `values` (index i carries values[i]).
inline std::vector<CodedBlock> make_original_blocks(std::span<const Rational> values,
                                                    const std::string& dataset_id) {
  std::vector<CodedBlock> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back({i, values[i], BlockRole::original, values.size(), dataset_id});
  }
  return out;
}

/// Interpolates P through (i, values[i]) and samples m parity blocks at
/// x = k..k+m-1.
inline std::vector<CodedBlock> encode(std::span<const Rational> values, std::size_t m,
                                      const std::string& dataset_id,
                                      std::size_t parity_limit = kDefaultParityLimit) {
  if (values.empty()) throw Error(Errc::empty_input, "cannot encode an empty value list");
  if (m > parity_limit) {
    throw Error(Errc::limit_exceeded, "m = " + std::to_string(m) + " exceeds limit " +
                                          std::to_string(parity_limit));
  }
  const std::uint64_t k = values.size();
  std::vector<Point> points;
  points.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) points.push_back({Rational(std::int64_t(i)), values[i]});
  const Polynomial p = interpolate(points);

  std::vector<CodedBlock> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::uint64_t index = k + j;
    out.push_back({index, evaluate(p, Rational(static_cast<std::int64_t>(index))), BlockRole::parity, k,
                   dataset_id});
  }
  return out;
}

namespace detail {

inline Point to_point(const CodedBlock& b) {
  return {Rational(static_cast<std::int64_t>(b.index)), b.value};
}

/// Checks the RecoverySet invariants and returns its blocks sorted by index.
inline std::vector<CodedBlock> checked_sorted(const RecoverySet& set, std::size_t minimum,
                                              Errc shortfall) {
  if (set.k == 0) throw Error(Errc::invalid_argument, "threshold k must be at least 1");
  if (set.blocks.size() < minimum) {
    throw Error(shortfall, "have " + std::to_string(set.blocks.size()) + " blocks, need " +
                               std::to_string(minimum));
  }
  const std::string& id = set.blocks.front().dataset_id;
  for (const auto& b : set.blocks) {
    if (b.dataset_id != id || b.k != set.k) {
      throw Error(Errc::mixed_dataset, "block " + std::to_string(b.index) + " belongs to dataset '" +
                                           b.dataset_id + "' k=" + std::to_string(b.k));
    }
  }
  std::vector<CodedBlock> sorted = set.blocks;
  std::sort(sorted.begin(), sorted.end(),
            [](const CodedBlock& a, const CodedBlock& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].index == sorted[i - 1].index) {
      throw Error(Errc::duplicate_x, "block index " + std::to_string(sorted[i].index) + " repeated");
    }
  }
  return sorted;
}

inline Polynomial interpolate_blocks(std::span<const CodedBlock> blocks) {
  std::vector<Point> points;
  points.reserve(blocks.size());
  for (const auto& b : blocks) points.push_back(to_point(b));
  return interpolate(points);
}

inline std::vector<Rational> originals_of(const Polynomial& p, std::uint64_t k) {
  std::vector<Rational> out;
  out.reserve(k);
  for (std::uint64_t i = 0; i < k; ++i) out.push_back(evaluate(p, Rational(static_cast<std::int64_t>(i))));
  return out;
}

inline bool on_curve(const Polynomial& p, const CodedBlock& b) {
  return evaluate(p, Rational(static_cast<std::int64_t>(b.index))) == b.value;
}

}  // namespace detail

/// Reconstructs the k original values from the k lowest-index blocks. Any
/// surplus block that does not lie on that interpolant raises `inconsistent`;
/// callers should then fall back to locate_corruption.
inline std::vector<Rational> recover(const RecoverySet& set) {
  const auto sorted = detail::checked_sorted(set, set.k, Errc::insufficient_blocks);
  const auto basis = std::span(sorted).first(set.k);
  const Polynomial p = detail::interpolate_blocks(basis);
  for (std::size_t i = set.k; i < sorted.size(); ++i) {
    if (!detail::on_curve(p, sorted[i])) {
      throw Error(Errc::inconsistent,
                  "block " + std::to_string(sorted[i].index) + " disagrees with the interpolant");
    }
  }
  return detail::originals_of(p, set.k);
}

/// Lists every block that misses the interpolant of the k lowest-index blocks.
inline ConsistencyReport verify(const RecoverySet& set) {
  const auto sorted = detail::checked_sorted(set, set.k, Errc::insufficient_blocks);
  const Polynomial p = detail::interpolate_blocks(std::span(sorted).first(set.k));
  ConsistencyReport report;
  for (std::size_t i = set.k; i < sorted.size(); ++i) {
    if (!detail::on_curve(p, sorted[i])) report.residual_indices.push_back(sorted[i].index);
  }
  report.consistent = report.residual_indices.empty();
  return report;
}

/// Maximum-agreement decoding: tries the interpolant of every k-subset and
/// keeps the one matched by the most blocks. Exhaustive, so only meant for
/// small sets (n <= 16). The answer is unique whenever n >= k + 2e for e
/// corrupted blocks; a tie between distinct candidates raises `ambiguity`.
inline CorrectionResult locate_corruption(const RecoverySet& set) {
  const auto sorted = detail::checked_sorted(set, set.k + 1, Errc::insufficient_redundancy);
  const std::size_t n = sorted.size();
  const std::size_t k = set.k;

  struct Candidate {
    Polynomial poly;
    std::vector<bool> agrees;
    std::size_t support = 0;
  };
  std::vector<Candidate> candidates;

  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  std::vector<CodedBlock> subset(k);
  while (true) {
    // A subset wholly inside a known candidate's agreement set reproduces it.
    const bool seen = std::any_of(candidates.begin(), candidates.end(), [&](const Candidate& c) {
      return std::all_of(pick.begin(), pick.end(), [&](std::size_t i) { return c.agrees[i]; });
    });
    if (!seen) {
      for (std::size_t i = 0; i < k; ++i) subset[i] = sorted[pick[i]];
      Candidate c{detail::interpolate_blocks(subset), std::vector<bool>(n), 0};
      for (std::size_t i = 0; i < n; ++i) {
        c.agrees[i] = detail::on_curve(c.poly, sorted[i]);
        c.support += c.agrees[i] ? 1 : 0;
      }
      // Distinct candidates share at most k-1 blocks, so support s with
      // 2s > n + k - 1 cannot be matched by any other candidate.
      const bool decisive = 2 * c.support > n + k - 1;
      candidates.push_back(std::move(c));
      if (decisive) break;
    }

    // Next k-combination of 0..n-1 in lexicographic order.
    std::size_t pos = k;
    while (pos > 0 && pick[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++pick[pos - 1];
    for (std::size_t i = pos; i < k; ++i) pick[i] = pick[i - 1] + 1;
  }

  const auto best = std::max_element(candidates.begin(), candidates.end(),
                                     [](const Candidate& a, const Candidate& b) { return a.support < b.support; });
  const auto ties = std::count_if(candidates.begin(), candidates.end(),
                                  [&](const Candidate& c) { return c.support == best->support; });
  if (ties > 1) {
    throw Error(Errc::ambiguity, std::to_string(ties) + " candidate polynomials each agree with " +
                                     std::to_string(best->support) + " of " + std::to_string(n) + " blocks");
  }

  CorrectionResult result{detail::originals_of(best->poly, k), {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (!best->agrees[i]) result.suspects.push_back(sorted[i].index);
  }
  return result;
}

}  // namespace lagpar
