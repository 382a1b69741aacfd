#include <lagpar/parity_codec.hpp>

#include "generators.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

using lagpar::BlockRole;
using lagpar::CodedBlock;
using lagpar::Errc;
using lagpar::Error;
using lagpar::Rational;
using lagpar::RecoverySet;

namespace {

std::vector<Rational> ints(std::initializer_list<std::int64_t> xs) {
  std::vector<Rational> out;
  for (const auto x : xs) out.emplace_back(x);
  return out;
}

template <typename Fn>
Errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected lagpar::Error";
  return Errc::invalid_argument;
}

/// Originals followed by parity for a dataset.
std::vector<CodedBlock> all_blocks(const std::vector<Rational>& values, std::size_t m, const std::string& id = "d") {
  auto out = lagpar::make_original_blocks(values, id);
  const auto parity = lagpar::encode(values, m, id);
  out.insert(out.end(), parity.begin(), parity.end());
  return out;
}

std::vector<std::pair<std::uint64_t, oracle::Q>> as_pairs(const std::vector<CodedBlock>& blocks) {
  std::vector<std::pair<std::uint64_t, oracle::Q>> out;
  for (const auto& b : blocks) out.emplace_back(b.index, oracle::to_q(b.value));
  return out;
}

TEST(EncodeTest, CarbonParityMatchesOracle) {
  // Oracle: Vandermonde solve at x = 0..3, then evaluate term by term at 4.
  const auto values = ints({300, 400, 300, 3000});
  std::vector<std::pair<oracle::Q, oracle::Q>> pts;
  for (std::size_t i = 0; i < values.size(); ++i) pts.emplace_back(oracle::Q(i), oracle::to_q(values[i]));
  const auto coeffs = oracle::vandermonde_solve(pts);
  EXPECT_EQ(coeffs, (std::vector<oracle::Q>{300, 1200, -1600, 500}));
  ASSERT_EQ(oracle::from_q(oracle::brute_evaluate(coeffs, 4)), Rational(11500));

  const auto parity = lagpar::encode(values, 1, "carbon");
  ASSERT_EQ(parity.size(), 1u);
  EXPECT_EQ(parity[0], (CodedBlock{4, 11500, BlockRole::parity, 4, "carbon"}));
}

TEST(EncodeTest, ConstantAndZeroDatasets) {
  const auto constant = lagpar::encode(ints({7}), 3, "c");
  ASSERT_EQ(constant.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(constant[j].index, j + 1);
    EXPECT_EQ(constant[j].value, Rational(7));
    EXPECT_EQ(constant[j].role, BlockRole::parity);
    EXPECT_EQ(constant[j].k, 1u);
  }
  const auto zero = lagpar::encode(ints({0, 0, 0}), 2, "z");
  ASSERT_EQ(zero.size(), 2u);
  EXPECT_EQ(zero[0].index, 3u);
  EXPECT_EQ(zero[1].index, 4u);
  EXPECT_EQ(zero[0].value, Rational(0));
  EXPECT_EQ(zero[1].value, Rational(0));
}

TEST(EncodeTest, ErrorsAndLimits) {
  EXPECT_EQ(code_of([] { lagpar::encode(std::vector<Rational>{}, 1, "e"); }), Errc::empty_input);
  EXPECT_TRUE(lagpar::encode(ints({1, 2}), 0, "e").empty());
  EXPECT_EQ(code_of([] { lagpar::encode(ints({1}), 1025, "e"); }), Errc::limit_exceeded);
  EXPECT_EQ(lagpar::encode(ints({1, 2}), 1025, "e", 2048).size(), 1025u);
}

TEST(EncodeTest, Deterministic) {
  std::mt19937_64 rng(3);
  const auto values = testgen::rationals(rng, 9);
  EXPECT_EQ(lagpar::encode(values, 6, "x"), lagpar::encode(values, 6, "x"));
}

TEST(RecoverTest, Examples) {
  EXPECT_EQ(lagpar::recover({{{5, 7, BlockRole::parity, 1, "c"}}, 1}), ints({7}));

  const auto carbon = ints({300, 400, 300, 3000});
  const auto parity = lagpar::encode(carbon, 4, "carbon");
  EXPECT_EQ(lagpar::recover({parity, 4}), carbon);
  // The oracle agrees that parity alone pins down the originals.
  std::vector<Rational> from_oracle;
  for (const auto& v : oracle::originals_from(as_pairs(parity), 4)) from_oracle.push_back(oracle::from_q(v));
  EXPECT_EQ(from_oracle, carbon);

  const auto small = ints({2, 3, 5});
  EXPECT_EQ(lagpar::recover({lagpar::make_original_blocks(small, "s"), 3}), small);
}

TEST(RecoverTest, Errors) {
  const auto blocks = all_blocks(ints({2, 3, 5}), 2);
  EXPECT_EQ(code_of([&] { lagpar::recover({{blocks[0], blocks[1]}, 3}); }), Errc::insufficient_blocks);

  auto foreign = blocks;
  foreign[4].dataset_id = "other";
  EXPECT_EQ(code_of([&] { lagpar::recover({foreign, 3}); }), Errc::mixed_dataset);

  auto other_k = blocks;
  other_k[0].k = 4;
  EXPECT_EQ(code_of([&] { lagpar::recover({other_k, 3}); }), Errc::mixed_dataset);

  auto duplicated = blocks;
  duplicated[1].index = 0;
  EXPECT_EQ(code_of([&] { lagpar::recover({duplicated, 3}); }), Errc::duplicate_x);

  auto corrupted = blocks;
  corrupted[4].value += 1;
  EXPECT_EQ(code_of([&] { lagpar::recover({corrupted, 3}); }), Errc::inconsistent);
}

TEST(VerifyTest, Examples) {
  auto blocks = all_blocks(ints({2, 3, 5}), 1);
  EXPECT_EQ(blocks[3].value, Rational(8));
  auto report = lagpar::verify({blocks, 3});
  EXPECT_TRUE(report.consistent);
  EXPECT_TRUE(report.residual_indices.empty());

  blocks[3].value += 1;
  report = lagpar::verify({blocks, 3});
  EXPECT_FALSE(report.consistent);
  EXPECT_EQ(report.residual_indices, (std::vector<std::uint64_t>{3}));

  report = lagpar::verify({{{0, 9, BlockRole::original, 1, "one"}}, 1});
  EXPECT_TRUE(report.consistent);
  EXPECT_TRUE(report.residual_indices.empty());

  EXPECT_EQ(code_of([] { lagpar::verify({{{0, 9, BlockRole::original, 2, "x"}}, 2}); }), Errc::insufficient_blocks);
}

TEST(LocateCorruptionTest, SingleCorruptionOnLine) {
  std::vector<CodedBlock> blocks;
  for (std::uint64_t i = 0; i < 4; ++i) {
    blocks.push_back({i, static_cast<std::int64_t>(i), lagpar::role_for(i, 2), 2, "line"});
  }
  blocks[2].value = 99;
  const auto brute = oracle::brute_locate(as_pairs(blocks), 2);
  ASSERT_FALSE(brute.ambiguous);
  ASSERT_EQ(brute.suspects, (std::vector<std::uint64_t>{2}));

  const auto result = lagpar::locate_corruption({blocks, 2});
  EXPECT_EQ(result.recovered, ints({0, 1}));
  EXPECT_EQ(result.suspects, (std::vector<std::uint64_t>{2}));
}

TEST(LocateCorruptionTest, CleanSetHasNoSuspects) {
  const auto result = lagpar::locate_corruption({all_blocks(ints({2, 3, 5}), 2), 3});
  EXPECT_EQ(result.recovered, ints({2, 3, 5}));
  EXPECT_TRUE(result.suspects.empty());
}

TEST(LocateCorruptionTest, TieIsAmbiguous) {
  const std::vector<CodedBlock> blocks{{0, 0, BlockRole::original, 2, "t"},
                                       {1, 1, BlockRole::original, 2, "t"},
                                       {2, 99, BlockRole::parity, 2, "t"}};
  ASSERT_TRUE(oracle::brute_locate(as_pairs(blocks), 2).ambiguous);
  EXPECT_EQ(code_of([&] { lagpar::locate_corruption({blocks, 2}); }), Errc::ambiguity);
}

TEST(LocateCorruptionTest, NeedsRedundancy) {
  const auto blocks = all_blocks(ints({2, 3, 5}), 0);
  EXPECT_EQ(code_of([&] { lagpar::locate_corruption({blocks, 3}); }), Errc::insufficient_redundancy);
}

TEST(CodecProperty, RoundTripUnderErasures) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t k = testgen::uniform(rng, 1, 12);
    const std::size_t m = testgen::uniform(rng, 0, 8);
    const auto values = testgen::rationals(rng, k);
    const auto blocks = all_blocks(values, m);
    const std::size_t erased = testgen::uniform(rng, 0, m);
    const auto survivors_at = testgen::sample_positions(rng, k + m, k + m - erased);
    std::vector<CodedBlock> survivors;
    for (const auto i : survivors_at) survivors.push_back(blocks[i]);
    std::shuffle(survivors.begin(), survivors.end(), rng);
    EXPECT_EQ(lagpar::recover({survivors, k}), values);
  }
}

TEST(CodecProperty, EveryKSubsetRecoversTheSameValues) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = testgen::uniform(rng, 1, 4);
    const std::size_t n = testgen::uniform(rng, k + 1, 8);
    const auto values = testgen::rationals(rng, k);
    const auto blocks = all_blocks(values, n - k);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
      std::vector<CodedBlock> subset;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask >> i & 1) subset.push_back(blocks[i]);
      }
      ASSERT_EQ(lagpar::recover({subset, k}), values);
    }
  }
}

TEST(CodecProperty, ThresholdIsSharp) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = testgen::uniform(rng, 1, 10);
    const std::size_t m = testgen::uniform(rng, 0, 6);
    const auto blocks = all_blocks(testgen::rationals(rng, k), m);
    std::vector<CodedBlock> survivors;
    for (const auto i : testgen::sample_positions(rng, k + m, k - 1)) survivors.push_back(blocks[i]);
    EXPECT_EQ(code_of([&] { lagpar::recover({survivors, k}); }), Errc::insufficient_blocks);
  }
}

TEST(CodecProperty, CorrectionWithinDistanceBoundMatchesBruteForce) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t e = testgen::uniform(rng, 1, 2);
    const std::size_t k = testgen::uniform(rng, 1, 4);
    const std::size_t n = testgen::uniform(rng, k + 2 * e, std::min<std::size_t>(10, k + 2 * e + 3));
    const auto values = testgen::rationals(rng, k);
    auto blocks = all_blocks(values, n - k);
    const auto bad = testgen::sample_positions(rng, n, e);
    std::vector<std::uint64_t> expected;
    for (const auto i : bad) {
      blocks[i].value += testgen::uniform(rng, 1, 50);
      expected.push_back(blocks[i].index);
    }
    const auto result = lagpar::locate_corruption({blocks, k});
    EXPECT_EQ(result.suspects, expected);
    EXPECT_EQ(result.recovered, values);

    const auto brute = oracle::brute_locate(as_pairs(blocks), k);
    ASSERT_FALSE(brute.ambiguous);
    EXPECT_EQ(brute.suspects, expected);
  }
}

}  // namespace
