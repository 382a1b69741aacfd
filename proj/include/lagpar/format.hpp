#pragma once

// Text formats shared by the stores and the CLI. Every line is
// `<tag> key=value key=value ...` (or a run of key=value tokens with no tag),
// single-space separated, LF terminated. Writers emit exactly one spelling
// of each record and readers reject anything that does not re-encode to the
// same bytes.

#include <lagpar/error.hpp>
#include <lagpar/indicator.hpp>
#include <lagpar/parity_codec.hpp>
#include <lagpar/rational.hpp>

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lagpar {

inline constexpr std::string_view kBlockMagic = "PLYD1";
inline constexpr std::string_view kManifestMagic = "PLYM1";
inline constexpr std::string_view kIndicatorMagic = "PLYI1";

/// A block as it lives in a store: the coded block plus the parity count of
/// its dataset.
struct StoredBlock {
  CodedBlock block;
  std::uint64_t m = 0;

  friend bool operator==(const StoredBlock&, const StoredBlock&) = default;
};

struct DatasetManifest {
  std::string dataset_id;
  std::uint64_t k = 1;
  std::uint64_t m = 0;
  std::map<std::uint64_t, std::string> block_digests;  // index -> lowercase hex SHA-256
  std::string created_at;                              // ISO-8601 UTC, second precision

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// ---------------------------------------------------------------------------
// Line grammar

struct LineFields {
  std::string tag;  // empty when the line starts with a key=value token
  std::vector<std::pair<std::string, std::string>> fields;

  [[nodiscard]] std::optional<std::string_view> get(std::string_view key) const {
    for (const auto& [k, v] : fields) {
      if (k == key) return v;
    }
    return std::nullopt;
  }
};

inline LineFields parse_line(std::string_view line) {
  static const std::regex tag_re("[a-z][a-z0-9_-]*");
  static const std::regex key_re("[a-z_][a-z0-9_]*");
  LineFields out;
  if (line.empty()) throw Error(Errc::parse_error, "empty line");
  std::size_t pos = 0;
  bool first = true;
  while (pos <= line.size()) {
    const std::size_t next = line.find(' ', pos);
    const std::string token(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (token.empty()) throw Error(Errc::parse_error, "empty token in '" + std::string(line) + "'");
    const std::size_t eq = token.find('=');
    if (eq == std::string::npos) {
      if (!first || !std::regex_match(token, tag_re)) {
        throw Error(Errc::parse_error, "unexpected bare token '" + token + "'");
      }
      out.tag = token;
    } else {
      std::string key = token.substr(0, eq);
      if (!std::regex_match(key, key_re)) throw Error(Errc::parse_error, "bad key '" + key + "'");
      out.fields.emplace_back(std::move(key), token.substr(eq + 1));
    }
    first = false;
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  if (text.empty() || text.back() != '\n') throw Error(Errc::parse_error, "text must end with LF");
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

inline std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty() || (text.size() > 1 && text.front() == '0')) {
    throw Error(Errc::parse_error, "bad unsigned integer '" + std::string(text) + "'");
  }
  return value;
}

inline bool valid_dataset_id(std::string_view id) {
  static const std::regex re("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(id.begin(), id.end(), re);
}

inline void require_dataset_id(std::string_view id) {
  if (!valid_dataset_id(id)) {
    throw Error(Errc::invalid_argument, "dataset id '" + std::string(id) + "' must match [A-Za-z0-9_-]{1,64}");
  }
}

// ---------------------------------------------------------------------------
// Digests

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::invalid_argument, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0f]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Block records

/// `block index=<i> role=<original|parity> value=<num>/<den>`
inline std::string block_line(const CodedBlock& b) {
  return "block index=" + std::to_string(b.index) + " role=" + std::string(to_string(b.role)) +
         " value=" + b.value.to_string();
}

inline std::string header_line(std::string_view dataset_id, std::uint64_t k, std::uint64_t m) {
  return "dataset=" + std::string(dataset_id) + " k=" + std::to_string(k) + " m=" + std::to_string(m);
}

inline std::string encode_block_file(const StoredBlock& sb) {
  std::string out(kBlockMagic);
  out += '\n';
  out += header_line(sb.block.dataset_id, sb.block.k, sb.m);
  out += '\n';
  out += block_line(sb.block);
  out += '\n';
  return out;
}

inline std::string block_digest(const StoredBlock& sb) { return sha256_hex(encode_block_file(sb)); }

/// Parses a block line on its own; dataset id and k are not part of it.
inline CodedBlock parse_block_line(std::string_view line) {
  const LineFields f = parse_line(line);
  if (f.tag != "block" || f.fields.size() != 3 || f.fields[0].first != "index" ||
      f.fields[1].first != "role" || f.fields[2].first != "value") {
    throw Error(Errc::parse_error, "not a block line: '" + std::string(line) + "'");
  }
  CodedBlock b;
  b.index = parse_u64(f.fields[0].second);
  if (f.fields[1].second == "original") {
    b.role = BlockRole::original;
  } else if (f.fields[1].second == "parity") {
    b.role = BlockRole::parity;
  } else {
    throw Error(Errc::parse_error, "unknown role '" + f.fields[1].second + "'");
  }
  b.value = Rational::parse(f.fields[2].second);
  return b;
}

namespace detail {

struct Header {
  std::string dataset_id;
  std::uint64_t k;
  std::uint64_t m;
};

inline Header parse_header(std::string_view line) {
  const LineFields f = parse_line(line);
  if (!f.tag.empty() || f.fields.size() != 3 || f.fields[0].first != "dataset" || f.fields[1].first != "k" ||
      f.fields[2].first != "m") {
    throw Error(Errc::parse_error, "bad dataset header '" + std::string(line) + "'");
  }
  Header h{f.fields[0].second, parse_u64(f.fields[1].second), parse_u64(f.fields[2].second)};
  if (!valid_dataset_id(h.dataset_id)) throw Error(Errc::parse_error, "bad dataset id in header");
  if (h.k == 0) throw Error(Errc::parse_error, "header k must be positive");
  return h;
}

}  // namespace detail

inline StoredBlock parse_block_file(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.size() != 3 || lines[0] != kBlockMagic) throw Error(Errc::parse_error, "not a PLYD1 block file");
  const auto header = detail::parse_header(lines[1]);
  StoredBlock sb{parse_block_line(lines[2]), header.m};
  sb.block.dataset_id = header.dataset_id;
  sb.block.k = header.k;
  if (sb.block.role != role_for(sb.block.index, sb.block.k)) {
    throw Error(Errc::parse_error, "block role disagrees with its index");
  }
  if (sb.block.index >= header.k + header.m) throw Error(Errc::parse_error, "block index beyond k+m");
  if (encode_block_file(sb) != text) throw Error(Errc::parse_error, "block file is not in canonical form");
  return sb;
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string encode_manifest(const DatasetManifest& mf) {
  std::string out(kManifestMagic);
  out += '\n';
  out += header_line(mf.dataset_id, mf.k, mf.m);
  out += '\n';
  for (const auto& [index, digest] : mf.block_digests) {
    out += "digest index=" + std::to_string(index) + " sha256=" + digest + "\n";
  }
  out += "created=" + mf.created_at + "\n";
  return out;
}

inline void validate_manifest(const DatasetManifest& mf) {
  static const std::regex hex_re("[0-9a-f]{64}");
  static const std::regex time_re("[0-9]{4}-[0-9]{2}-[0-9]{2}T[0-9]{2}:[0-9]{2}:[0-9]{2}Z");
  require_dataset_id(mf.dataset_id);
  if (mf.k == 0) throw Error(Errc::invalid_argument, "manifest k must be positive");
  if (mf.block_digests.size() != mf.k + mf.m ||
      (!mf.block_digests.empty() && mf.block_digests.rbegin()->first != mf.k + mf.m - 1)) {
    throw Error(Errc::invalid_argument, "manifest digests must cover indices 0..k+m-1 exactly");
  }
  for (const auto& [index, digest] : mf.block_digests) {
    if (!std::regex_match(digest, hex_re)) {
      throw Error(Errc::invalid_argument, "digest for block " + std::to_string(index) + " is not 64 hex chars");
    }
  }
  if (!std::regex_match(mf.created_at, time_re)) {
    throw Error(Errc::invalid_argument, "created_at '" + mf.created_at + "' is not ISO-8601 UTC");
  }
}

inline DatasetManifest parse_manifest(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.size() < 3 || lines[0] != kManifestMagic) throw Error(Errc::parse_error, "not a PLYM1 manifest");
  const auto header = detail::parse_header(lines[1]);
  DatasetManifest mf{header.dataset_id, header.k, header.m, {}, {}};
  for (std::size_t i = 2; i + 1 < lines.size(); ++i) {
    const LineFields f = parse_line(lines[i]);
    if (f.tag != "digest" || f.fields.size() != 2 || f.fields[0].first != "index" ||
        f.fields[1].first != "sha256") {
      throw Error(Errc::parse_error, "bad digest line '" + std::string(lines[i]) + "'");
    }
    mf.block_digests[parse_u64(f.fields[0].second)] = f.fields[1].second;
  }
  const std::string_view footer = lines.back();
  if (!footer.starts_with("created=")) throw Error(Errc::parse_error, "manifest lacks created= footer");
  mf.created_at = std::string(footer.substr(8));
  try {
    validate_manifest(mf);
  } catch (const Error& e) {
    throw Error(Errc::parse_error, e.what());
  }
  if (encode_manifest(mf) != text) throw Error(Errc::parse_error, "manifest is not in canonical form");
  return mf;
}

// ---------------------------------------------------------------------------
// Indicator definitions
//
//   PLYI1
//   indicator id=<id> kind=<sum|ratio_of_sums> num=<ref,...> den=<ref,...> [range=<lo>..<hi>]
//
// A reference is `<dataset_id>:<index>`, naming one stored data point.

namespace detail {

inline std::vector<std::string> split_refs(std::string_view list) {
  static const std::regex ref_re("[A-Za-z0-9_-]{1,64}:(0|[1-9][0-9]*)");
  std::vector<std::string> out;
  if (list.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = list.find(',', pos);
    std::string ref(list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!std::regex_match(ref, ref_re)) throw Error(Errc::parse_error, "bad data-point reference '" + ref + "'");
    out.push_back(std::move(ref));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::string join_refs(const std::vector<std::string>& refs) {
  std::string out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i != 0) out += ",";
    out += refs[i];
  }
  return out;
}

}  // namespace detail

inline std::string encode_indicator_line(const IndicatorDef& def) {
  std::string out = "indicator id=" + def.id + " kind=" + std::string(to_string(def.kind)) +
                    " num=" + detail::join_refs(def.numerator_inputs) +
                    " den=" + detail::join_refs(def.denominator_inputs);
  if (def.valid_range) out += " range=" + def.valid_range->lo.to_string() + ".." + def.valid_range->hi.to_string();
  return out;
}

inline std::vector<IndicatorDef> parse_indicator_file(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != kIndicatorMagic) throw Error(Errc::parse_error, "not a PLYI1 indicator file");
  std::vector<IndicatorDef> defs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const LineFields f = parse_line(lines[i]);
    if (f.tag != "indicator" || f.fields.size() < 4 || f.fields.size() > 5 || f.fields[0].first != "id" ||
        f.fields[1].first != "kind" || f.fields[2].first != "num" || f.fields[3].first != "den" ||
        (f.fields.size() == 5 && f.fields[4].first != "range")) {
      throw Error(Errc::parse_error, "bad indicator line '" + std::string(lines[i]) + "'");
    }
    IndicatorDef def;
    def.id = f.fields[0].second;
    if (!valid_dataset_id(def.id)) throw Error(Errc::parse_error, "bad indicator id '" + def.id + "'");
    if (f.fields[1].second == "sum") {
      def.kind = IndicatorKind::sum;
    } else if (f.fields[1].second == "ratio_of_sums") {
      def.kind = IndicatorKind::ratio_of_sums;
    } else {
      throw Error(Errc::parse_error, "unknown indicator kind '" + f.fields[1].second + "'");
    }
    def.numerator_inputs = detail::split_refs(f.fields[2].second);
    def.denominator_inputs = detail::split_refs(f.fields[3].second);
    if (f.fields.size() == 5) {
      const std::string& range = f.fields[4].second;
      const auto dots = range.find("..");
      if (dots == std::string::npos) throw Error(Errc::parse_error, "range must be <lo>..<hi>");
      def.valid_range = ValidRange{Rational::parse(range.substr(0, dots)), Rational::parse(range.substr(dots + 2))};
    }
    try {
      validate_definition(def);
    } catch (const Error& e) {
      throw Error(Errc::parse_error, e.what());
    }
    defs.push_back(std::move(def));
  }
  return defs;
}

}  // namespace lagpar
