#pragma once

// Directory-backed primary and secondary stores.
//
// Layout under a store root:
//   <root>/<dataset_id>/block_<index>.plyd
//   <root>/<dataset_id>/manifest.plym
//   <root>/.unreachable        fault flag, the store reports itself down
//   <root>/.lock               advisory writer lock
//   <root>/.staging-<id>/      in-flight writes, renamed into place on commit
//
// Originals go to the primary store, parity blocks to the secondary, and the
// manifest to both so either store alone can drive a recovery.

#include <lagpar/error.hpp>
#include <lagpar/format.hpp>
#include <lagpar/parity_codec.hpp>
#include <lagpar/rational.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

namespace lagpar {

namespace fs = std::filesystem;

class FileStore {
 public:
  explicit FileStore(fs::path root) : root_(std::move(root)) {}

  [[nodiscard]] const fs::path& root() const noexcept { return root_; }
  [[nodiscard]] fs::path dataset_dir(std::string_view id) const { return root_ / std::string(id); }
  [[nodiscard]] fs::path block_path(std::string_view id, std::uint64_t index) const {
    return dataset_dir(id) / ("block_" + std::to_string(index) + ".plyd");
  }
  [[nodiscard]] fs::path manifest_path(std::string_view id) const { return dataset_dir(id) / "manifest.plym"; }
  [[nodiscard]] fs::path unreachable_flag() const { return root_ / ".unreachable"; }
  [[nodiscard]] fs::path lock_path() const { return root_ / ".lock"; }
  [[nodiscard]] fs::path staging_dir(std::string_view id) const { return root_ / (".staging-" + std::string(id)); }

 private:
  fs::path root_;
};

struct StoreStatus {
  bool reachable = false;
  std::vector<std::string> datasets_present;
  std::vector<fs::path> corrupt_files;
};

enum class Provenance { primary, reconstructed };

constexpr std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::primary ? "primary" : "reconstructed";
}

struct RecoveryOutcome {
  std::vector<Rational> values;
  Provenance provenance = Provenance::primary;
  std::vector<std::uint64_t> suspects;
};

struct DatasetCheck {
  DatasetManifest manifest;
  ConsistencyReport consistency;
  std::vector<std::uint64_t> digest_invalid;
};

namespace fault {
struct Unreachable {};
struct DeleteBlock {
  std::string dataset_id;
  std::uint64_t index = 0;
};
struct FlipByte {
  std::string dataset_id;
  std::uint64_t index = 0;
  std::uint64_t offset = 0;
};
}  // namespace fault

using Fault = std::variant<fault::Unreachable, fault::DeleteBlock, fault::FlipByte>;

struct StoreOptions {
  std::size_t parity_limit = kDefaultParityLimit;
  /// Manifest timestamp; the current UTC time when empty.
  std::string created_at;
  /// Called before each write step with a label such as "primary:block:2",
  /// "secondary:manifest" or "primary:commit". Throwing aborts the store.
  std::function<void(std::string_view)> on_step;
};

namespace detail {

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::unknown_block, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(Errc::store_unwritable, "failed writing " + path.string());
}

inline std::string utc_now_iso8601() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline bool is_reachable(const FileStore& store) {
  std::error_code ec;
  return fs::is_directory(store.root(), ec) && !fs::exists(store.unreachable_flag(), ec);
}

/// Exclusive flock on <root>/.lock for the lifetime of the object.
class StoreLock {
 public:
  explicit StoreLock(const FileStore& store) {
    fd_ = ::open(store.lock_path().c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
      if (fd_ >= 0) ::close(fd_);
      throw Error(Errc::store_unwritable, "cannot lock " + store.lock_path().string());
    }
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;
  ~StoreLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

 private:
  int fd_ = -1;
};

inline std::optional<DatasetManifest> load_manifest(const FileStore& store, std::string_view id) {
  if (!is_reachable(store)) return std::nullopt;
  std::error_code ec;
  if (!fs::is_regular_file(store.manifest_path(id), ec)) return std::nullopt;
  try {
    auto mf = parse_manifest(read_file(store.manifest_path(id)));
    if (mf.dataset_id != id) return std::nullopt;
    return mf;
  } catch (const Error&) {
    return std::nullopt;
  }
}

inline DatasetManifest resolve_manifest(std::string_view id, const FileStore& primary, const FileStore& secondary) {
  const auto a = load_manifest(primary, id);
  const auto b = load_manifest(secondary, id);
  if (!a && !b) throw Error(Errc::manifest_missing, "no readable manifest for dataset '" + std::string(id) + "'");
  if (a && b && *a != *b) {
    throw Error(Errc::manifest_conflict, "primary and secondary manifests of '" + std::string(id) + "' differ");
  }
  return a ? *a : *b;
}

enum class BlockState { absent, valid, invalid };

/// A block is valid when it parses, carries the manifest's dataset header, and
/// its bytes hash to the manifest digest.
inline BlockState read_block(const FileStore& store, const DatasetManifest& mf, std::uint64_t index,
                             CodedBlock& out) {
  if (!is_reachable(store)) return BlockState::absent;
  std::error_code ec;
  const fs::path path = store.block_path(mf.dataset_id, index);
  if (!fs::exists(path, ec)) return BlockState::absent;
  try {
    const std::string bytes = read_file(path);
    if (sha256_hex(bytes) != mf.block_digests.at(index)) return BlockState::invalid;
    const StoredBlock sb = parse_block_file(bytes);
    if (sb.block.dataset_id != mf.dataset_id || sb.block.k != mf.k || sb.m != mf.m || sb.block.index != index) {
      return BlockState::invalid;
    }
    out = sb.block;
    return BlockState::valid;
  } catch (const Error&) {
    return BlockState::invalid;
  }
}

struct Gathered {
  std::vector<CodedBlock> valid;
  std::vector<std::uint64_t> invalid;
};

inline Gathered gather_blocks(const DatasetManifest& mf, const FileStore& primary, const FileStore& secondary) {
  Gathered g;
  for (std::uint64_t index = 0; index < mf.k + mf.m; ++index) {
    bool found = false;
    bool bad = false;
    for (const FileStore* store : {&primary, &secondary}) {
      CodedBlock b;
      const BlockState state = read_block(*store, mf, index, b);
      if (state == BlockState::valid && !found) {
        g.valid.push_back(std::move(b));
        found = true;
      }
      bad = bad || state == BlockState::invalid;
    }
    if (bad) g.invalid.push_back(index);
  }
  return g;
}

inline void write_dataset(const FileStore& store, const DatasetManifest& mf, const std::vector<StoredBlock>& blocks,
                          const StoreOptions& opts, std::string_view label) {
  const auto step = [&](const std::string& what) {
    if (opts.on_step) opts.on_step(std::string(label) + ":" + what);
  };
  const fs::path staging = store.staging_dir(mf.dataset_id);
  std::error_code ec;
  fs::remove_all(staging, ec);
  if (!fs::create_directory(staging, ec) || ec) {
    throw Error(Errc::store_unwritable, "cannot create " + staging.string());
  }
  for (const auto& sb : blocks) {
    step("block:" + std::to_string(sb.block.index));
    write_file(staging / store.block_path(mf.dataset_id, sb.block.index).filename(), encode_block_file(sb));
  }
  step("manifest");
  write_file(staging / "manifest.plym", encode_manifest(mf));
  step("commit");
  fs::rename(staging, store.dataset_dir(mf.dataset_id), ec);
  if (ec) throw Error(Errc::store_unwritable, "cannot commit " + store.dataset_dir(mf.dataset_id).string());
}

inline void prepare_root(const FileStore& store) {
  std::error_code ec;
  fs::create_directories(store.root(), ec);
  if (ec || !fs::is_directory(store.root(), ec)) {
    throw Error(Errc::store_unwritable, "store root " + store.root().string() + " is not a writable directory");
  }
  if (fs::exists(store.unreachable_flag(), ec)) {
    throw Error(Errc::store_unwritable, "store " + store.root().string() + " is flagged unreachable");
  }
}

}  // namespace detail

/// Encodes `values` into m parity blocks and writes originals to `primary`,
/// parity to `secondary`, and the manifest to both. Each store is committed
/// with a single directory rename, so a crash leaves either the complete
/// dataset or nothing under its name; if the second store fails the first is
/// rolled back.
inline DatasetManifest store_dataset(std::span<const Rational> values, std::size_t m, const std::string& dataset_id,
                                     const FileStore& primary, const FileStore& secondary,
                                     const StoreOptions& opts = {}) {
  require_dataset_id(dataset_id);
  const auto parity = encode(values, m, dataset_id, opts.parity_limit);
  const auto originals = make_original_blocks(values, dataset_id);

  detail::prepare_root(primary);
  detail::prepare_root(secondary);
  if (fs::equivalent(primary.root(), secondary.root())) {
    throw Error(Errc::invalid_argument, "primary and secondary stores must be different directories");
  }
  const detail::StoreLock primary_lock(primary);
  const detail::StoreLock secondary_lock(secondary);

  std::error_code ec;
  for (const FileStore* store : {&primary, &secondary}) {
    if (fs::exists(store->dataset_dir(dataset_id), ec)) {
      throw Error(Errc::duplicate_dataset, "dataset '" + dataset_id + "' already exists in " + store->root().string());
    }
  }

  DatasetManifest mf{dataset_id, values.size(), m, {}, opts.created_at.empty() ? detail::utc_now_iso8601() : opts.created_at};
  std::vector<StoredBlock> primary_blocks;
  std::vector<StoredBlock> secondary_blocks;
  for (const auto& b : originals) primary_blocks.push_back({b, m});
  for (const auto& b : parity) secondary_blocks.push_back({b, m});
  for (const auto* list : {&primary_blocks, &secondary_blocks}) {
    for (const auto& sb : *list) mf.block_digests[sb.block.index] = block_digest(sb);
  }
  validate_manifest(mf);

  detail::write_dataset(primary, mf, primary_blocks, opts, "primary");
  try {
    detail::write_dataset(secondary, mf, secondary_blocks, opts, "secondary");
  } catch (...) {
    fs::remove_all(primary.dataset_dir(dataset_id), ec);
    throw;
  }
  return mf;
}

/// Reachability plus a digest audit of every dataset. Never throws.
inline StoreStatus health_check(const FileStore& store) noexcept {
  StoreStatus status;
  try {
    if (!detail::is_reachable(store)) return status;
    status.reachable = true;
    for (const auto& entry : fs::directory_iterator(store.root())) {
      const std::string name = entry.path().filename().string();
      if (!entry.is_directory() || name.starts_with('.')) continue;
      status.datasets_present.push_back(name);

      std::optional<DatasetManifest> mf;
      const fs::path manifest = store.manifest_path(name);
      if (fs::exists(manifest)) {
        try {
          mf = parse_manifest(detail::read_file(manifest));
          if (mf->dataset_id != name) mf.reset();
        } catch (const Error&) {
        }
        if (!mf) status.corrupt_files.push_back(manifest);
      }
      if (!mf) continue;

      for (const auto& file : fs::directory_iterator(entry.path())) {
        const std::string fname = file.path().filename().string();
        if (!fname.starts_with("block_") || !fname.ends_with(".plyd")) continue;
        bool ok = false;
        try {
          const std::uint64_t index = parse_u64(fname.substr(6, fname.size() - 11));
          const auto it = mf->block_digests.find(index);
          ok = it != mf->block_digests.end() && sha256_hex(detail::read_file(file.path())) == it->second;
        } catch (const Error&) {
        }
        if (!ok) status.corrupt_files.push_back(file.path());
      }
    }
    std::sort(status.datasets_present.begin(), status.datasets_present.end());
    std::sort(status.corrupt_files.begin(), status.corrupt_files.end());
  } catch (...) {
    return StoreStatus{};
  }
  return status;
}

/// Four-step recovery:
///  1. If the primary is reachable and every original block matches its
///     digest, return those values.
///  2. Otherwise collect every digest-valid block from both stores.
///  3. Interpolate from any k of them, falling back to maximum-agreement
///     decoding when surplus blocks disagree.
///  4. Re-encode the reconstructed originals and compare with the manifest
///     digests.
/// Blocks that are present but fail their digest are reported as suspects.
inline RecoveryOutcome recover_dataset(const std::string& dataset_id, const FileStore& primary,
                                       const FileStore& secondary) {
  const DatasetManifest mf = detail::resolve_manifest(dataset_id, primary, secondary);

  if (detail::is_reachable(primary)) {
    RecoveryOutcome out{{}, Provenance::primary, {}};
    for (std::uint64_t i = 0; i < mf.k; ++i) {
      CodedBlock b;
      if (detail::read_block(primary, mf, i, b) != detail::BlockState::valid) break;
      out.values.push_back(b.value);
    }
    if (out.values.size() == mf.k) return out;
  }

  const auto gathered = detail::gather_blocks(mf, primary, secondary);
  if (gathered.valid.size() < mf.k) {
    throw Error(Errc::unrecoverable, "dataset '" + dataset_id + "' has " + std::to_string(gathered.valid.size()) +
                                         " valid blocks, needs " + std::to_string(mf.k));
  }

  RecoveryOutcome out{{}, Provenance::reconstructed, gathered.invalid};
  const RecoverySet set{gathered.valid, mf.k};
  try {
    out.values = recover(set);
  } catch (const Error& e) {
    if (e.code() != Errc::inconsistent) throw;
    auto corrected = locate_corruption(set);
    out.values = std::move(corrected.recovered);
    out.suspects.insert(out.suspects.end(), corrected.suspects.begin(), corrected.suspects.end());
  }

  std::vector<std::uint64_t> mismatched;
  for (const auto& b : make_original_blocks(out.values, dataset_id)) {
    if (block_digest({b, mf.m}) != mf.block_digests.at(b.index)) mismatched.push_back(b.index);
  }
  if (!mismatched.empty()) {
    std::string list;
    for (const auto i : mismatched) list += (list.empty() ? "" : ",") + std::to_string(i);
    throw Error(Errc::validation_failed, "reconstructed originals " + list + " do not match the manifest digests");
  }

  std::sort(out.suspects.begin(), out.suspects.end());
  out.suspects.erase(std::unique(out.suspects.begin(), out.suspects.end()), out.suspects.end());
  return out;
}

/// Consistency of every digest-valid block of a dataset across both stores.
inline DatasetCheck check_dataset(const std::string& dataset_id, const FileStore& primary,
                                  const FileStore& secondary) {
  DatasetCheck check{detail::resolve_manifest(dataset_id, primary, secondary), {}, {}};
  const auto gathered = detail::gather_blocks(check.manifest, primary, secondary);
  check.digest_invalid = gathered.invalid;
  if (gathered.valid.size() < check.manifest.k) {
    throw Error(Errc::unrecoverable, "dataset '" + dataset_id + "' has fewer than k valid blocks");
  }
  check.consistency = verify(RecoverySet{gathered.valid, check.manifest.k});
  return check;
}

/// Applies a deterministic fault for testing: mark the store unreachable,
/// delete a block file, or xor one byte of a block file with 0x01.
inline void inject_fault(const FileStore& store, const Fault& f) {
  std::error_code ec;
  if (!fs::is_directory(store.root(), ec)) {
    throw Error(Errc::unknown_dataset, "store root " + store.root().string() + " does not exist");
  }
  const detail::StoreLock lock(store);
  const auto block_file = [&](const std::string& id, std::uint64_t index) {
    if (!fs::is_directory(store.dataset_dir(id), ec)) {
      throw Error(Errc::unknown_dataset, "no dataset '" + id + "' in " + store.root().string());
    }
    const fs::path path = store.block_path(id, index);
    if (!fs::is_regular_file(path, ec)) {
      throw Error(Errc::unknown_block, "no block " + std::to_string(index) + " of '" + id + "' in " +
                                           store.root().string());
    }
    return path;
  };

  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, fault::Unreachable>) {
          detail::write_file(store.unreachable_flag(), "unreachable\n");
        } else if constexpr (std::is_same_v<T, fault::DeleteBlock>) {
          fs::remove(block_file(v.dataset_id, v.index));
        } else {
          const fs::path path = block_file(v.dataset_id, v.index);
          std::string bytes = detail::read_file(path);
          if (v.offset >= bytes.size()) {
            throw Error(Errc::index_out_of_range, "offset " + std::to_string(v.offset) + " beyond " +
                                                      std::to_string(bytes.size()) + "-byte block file");
          }
          bytes[v.offset] = static_cast<char>(bytes[v.offset] ^ 0x01);
          detail::write_file(path, bytes);
        }
      },
      f);
}

}  // namespace lagpar
