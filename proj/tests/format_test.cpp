#include <lagpar/format.hpp>

#include "generators.hpp"

#include <gtest/gtest.h>

#include <random>

using lagpar::BlockRole;
using lagpar::CodedBlock;
using lagpar::DatasetManifest;
using lagpar::Errc;
using lagpar::Error;
using lagpar::Rational;
using lagpar::StoredBlock;

namespace {

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

TEST(FormatTest, BlockFileBytes) {
  const StoredBlock sb{{4, Rational(lagpar::BigInt(-1), lagpar::BigInt(2)), BlockRole::parity, 4, "carbon"}, 2};
  EXPECT_EQ(lagpar::encode_block_file(sb),
            "PLYD1\n"
            "dataset=carbon k=4 m=2\n"
            "block index=4 role=parity value=-1/2\n");
  EXPECT_EQ(lagpar::parse_block_file(lagpar::encode_block_file(sb)), sb);
}

TEST(FormatTest, Sha256KnownAnswer) {
  EXPECT_EQ(lagpar::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(lagpar::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(FormatTest, BlockFileRejectsVariants) {
  const std::string good = "PLYD1\ndataset=d k=2 m=1\nblock index=2 role=parity value=5/1\n";
  ASSERT_NO_THROW(lagpar::parse_block_file(good));
  for (const std::string bad : {
           "PLYD2\ndataset=d k=2 m=1\nblock index=2 role=parity value=5/1\n",
           "PLYD1\ndataset=d k=2 m=1\nblock index=2 role=parity value=5/1",       // no final LF
           "PLYD1\r\ndataset=d k=2 m=1\nblock index=2 role=parity value=5/1\n",   // CRLF
           "PLYD1\ndataset=d k=2 m=1\nblock index=2 role=original value=5/1\n",  // role vs index
           "PLYD1\ndataset=d k=2 m=1\nblock index=3 role=parity value=5/1\n",    // beyond k+m
           "PLYD1\ndataset=d k=2 m=1\nblock index=2 role=parity value=10/2\n",
           "PLYD1\ndataset=d  k=2 m=1\nblock index=2 role=parity value=5/1\n",
           "PLYD1\ndataset=d k=02 m=1\nblock index=2 role=parity value=5/1\n",
           "PLYD1\ndataset=d k=0 m=1\nblock index=0 role=parity value=5/1\n",
           "PLYD1\ndataset=d k=2 m=1\nblock role=parity index=2 value=5/1\n",
           "PLYD1\ndataset=d k=2 m=1\nblock index=2 role=parity value=5/1\n\n",
       }) {
    EXPECT_EQ(code_of([&] { lagpar::parse_block_file(bad); }), Errc::parse_error) << bad;
  }
}

TEST(FormatTest, ManifestBytesAndValidation) {
  DatasetManifest mf{"d1", 1, 1, {}, "2026-01-02T03:04:05Z"};
  mf.block_digests[0] = std::string(64, 'a');
  mf.block_digests[1] = std::string(64, 'b');
  const std::string text = lagpar::encode_manifest(mf);
  EXPECT_EQ(text, "PLYM1\ndataset=d1 k=1 m=1\ndigest index=0 sha256=" + std::string(64, 'a') +
                      "\ndigest index=1 sha256=" + std::string(64, 'b') + "\ncreated=2026-01-02T03:04:05Z\n");
  EXPECT_EQ(lagpar::parse_manifest(text), mf);

  auto missing = mf;
  missing.block_digests.erase(1);
  EXPECT_EQ(code_of([&] { lagpar::validate_manifest(missing); }), Errc::invalid_argument);
  auto upper = mf;
  upper.block_digests[0] = std::string(64, 'A');
  EXPECT_EQ(code_of([&] { lagpar::validate_manifest(upper); }), Errc::invalid_argument);
  auto bad_time = mf;
  bad_time.created_at = "yesterday";
  EXPECT_EQ(code_of([&] { lagpar::validate_manifest(bad_time); }), Errc::invalid_argument);
  auto bad_id = mf;
  bad_id.dataset_id = "has space";
  EXPECT_EQ(code_of([&] { lagpar::validate_manifest(bad_id); }), Errc::invalid_argument);
}

TEST(FormatTest, DatasetIdRule) {
  EXPECT_TRUE(lagpar::valid_dataset_id("carbon_2024-Q1"));
  EXPECT_TRUE(lagpar::valid_dataset_id(std::string(64, 'x')));
  EXPECT_FALSE(lagpar::valid_dataset_id(std::string(65, 'x')));
  EXPECT_FALSE(lagpar::valid_dataset_id(""));
  EXPECT_FALSE(lagpar::valid_dataset_id("a/b"));
  EXPECT_FALSE(lagpar::valid_dataset_id(".."));
}

TEST(FormatTest, LineGrammar) {
  const auto f = lagpar::parse_line("recovered dataset=x provenance=primary suspects=");
  EXPECT_EQ(f.tag, "recovered");
  ASSERT_EQ(f.fields.size(), 3u);
  EXPECT_EQ(f.get("suspects"), std::optional<std::string_view>(""));
  EXPECT_FALSE(f.get("missing").has_value());
  EXPECT_TRUE(lagpar::parse_line("dataset=d k=1 m=0").tag.empty());
  EXPECT_EQ(code_of([] { lagpar::parse_line("two tags=x bare"); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { lagpar::parse_line("a  b=c"); }), Errc::parse_error);
}

TEST(FormatTest, IndicatorFile) {
  const std::string text =
      "PLYI1\n"
      "indicator id=footprint kind=ratio_of_sums num=carbon:0,carbon:1,carbon:2 den=carbon:3 range=0/1..1/1\n"
      "indicator id=total kind=sum num=carbon:0,carbon:1 den=\n";
  const auto defs = lagpar::parse_indicator_file(text);
  ASSERT_EQ(defs.size(), 2u);
  EXPECT_EQ(defs[0].kind, lagpar::IndicatorKind::ratio_of_sums);
  EXPECT_EQ(defs[0].numerator_inputs.size(), 3u);
  ASSERT_TRUE(defs[0].valid_range.has_value());
  EXPECT_EQ(defs[0].valid_range->hi, Rational(1));
  EXPECT_FALSE(defs[1].valid_range.has_value());
  EXPECT_EQ(lagpar::encode_indicator_line(defs[0]) + "\n",
            "indicator id=footprint kind=ratio_of_sums num=carbon:0,carbon:1,carbon:2 den=carbon:3 range=0/1..1/1\n");

  EXPECT_EQ(code_of([] { lagpar::parse_indicator_file("PLYI1\nindicator id=s kind=sum num=a:0 den=a:1\n"); }),
            Errc::parse_error);
  EXPECT_EQ(code_of([] { lagpar::parse_indicator_file("PLYI1\nindicator id=s kind=sum num=nocolon den=\n"); }),
            Errc::parse_error);
}

TEST(FormatProperty, BlockFilesRoundTrip) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint64_t k = testgen::uniform(rng, 1, 20);
    const std::uint64_t m = testgen::uniform(rng, 0, 20);
    const std::uint64_t index = testgen::uniform(rng, 0, k + m - 1);
    const StoredBlock sb{{index, testgen::rational(rng, 1'000'000'000, 1'000'000), lagpar::role_for(index, k), k, "ds"}, m};
    const std::string text = lagpar::encode_block_file(sb);
    EXPECT_EQ(lagpar::parse_block_file(text), sb);
    EXPECT_NO_THROW(lagpar::parse_block_line(lagpar::block_line(sb.block)));
  }
}

}  // namespace
