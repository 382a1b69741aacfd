#pragma once

// `lagpar` command-line driver. Kept in a header so the test suites can run
// commands in-process and capture their output.
//
// Exit codes: 0 success, 2 usage or validation error, 3 unrecoverable,
// 4 ambiguous correction.

#include <lagpar/error.hpp>
#include <lagpar/format.hpp>
#include <lagpar/indicator.hpp>
#include <lagpar/parity_codec.hpp>
#include <lagpar/rational.hpp>
#include <lagpar/storage.hpp>

#include <CLI11.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lagpar::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kUnrecoverable = 3, kAmbiguous = 4 };

constexpr int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::unrecoverable:
    case Errc::manifest_missing:
    case Errc::insufficient_blocks:
    case Errc::insufficient_redundancy:
      return kUnrecoverable;
    case Errc::ambiguity:
      return kAmbiguous;
    default:
      return kUsage;
  }
}

enum class OutputMode { human, machine };

struct CliConfig {
  std::filesystem::path primary_root;
  std::filesystem::path secondary_root;
  OutputMode output_mode = OutputMode::human;
};

inline std::vector<Rational> parse_values(std::string_view list) {
  std::vector<Rational> out;
  if (list.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = list.find(',', pos);
    out.push_back(Rational::parse_value(
        list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::string join_values(const std::vector<Rational>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ",";
    out += values[i].to_string();
  }
  return out;
}

inline std::string join_indices(const std::vector<std::uint64_t>& indices) {
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i != 0) out += ",";
    out += std::to_string(indices[i]);
  }
  return out;
}

namespace detail {

class Session {
 public:
  Session(CliConfig config, std::ostream& out) : cfg_(std::move(config)), out_(out) {}

  [[nodiscard]] bool machine() const { return cfg_.output_mode == OutputMode::machine; }
  [[nodiscard]] FileStore primary() const { return FileStore(cfg_.primary_root); }
  [[nodiscard]] FileStore secondary() const { return FileStore(cfg_.secondary_root); }

  int encode(const std::string& values, std::size_t m, const std::string& id) {
    const auto parsed = parse_values(values);
    const auto blocks = lagpar::encode(parsed, m, id);
    if (!machine()) out_ << "dataset " << id << ": k=" << parsed.size() << " m=" << m << "\n";
    for (const auto& b : blocks) {
      if (machine()) {
        out_ << block_line(b) << "\n";
      } else {
        out_ << "  parity index=" << b.index << " value=" << b.value << "\n";
      }
    }
    return kOk;
  }

  int store(const std::string& values, std::size_t m, const std::string& id) {
    require_distinct_roots();
    const auto parsed = parse_values(values);
    const auto mf = store_dataset(parsed, m, id, primary(), secondary());
    if (machine()) {
      out_ << "stored " << header_line(id, mf.k, mf.m) << "\n";
      for (const auto& [index, digest] : mf.block_digests) {
        out_ << "digest index=" << index << " sha256=" << digest << "\n";
      }
    } else {
      out_ << "stored dataset " << id << ": " << mf.k << " original blocks in primary, " << mf.m
           << " parity blocks in secondary, manifest in both\n";
    }
    return kOk;
  }

  int recover(const std::string& id) {
    const auto outcome = recover_dataset(id, primary(), secondary());
    if (machine()) {
      for (const auto& b : make_original_blocks(outcome.values, id)) out_ << block_line(b) << "\n";
      out_ << "recovered dataset=" << id << " provenance=" << to_string(outcome.provenance)
           << " suspects=" << join_indices(outcome.suspects) << "\n";
    } else {
      out_ << "dataset " << id << "\n"
           << "  values=" << join_values(outcome.values) << "\n"
           << "  provenance=" << to_string(outcome.provenance) << "\n"
           << "  suspects=" << (outcome.suspects.empty() ? "none" : join_indices(outcome.suspects)) << "\n";
    }
    return kOk;
  }

  int verify(const std::string& id) {
    const auto check = check_dataset(id, primary(), secondary());
    const bool ok = check.consistency.consistent && check.digest_invalid.empty();
    if (machine()) {
      out_ << "verify dataset=" << id << " consistent=" << (check.consistency.consistent ? "true" : "false")
           << " residuals=" << join_indices(check.consistency.residual_indices)
           << " digest_invalid=" << join_indices(check.digest_invalid) << "\n";
    } else {
      out_ << "dataset " << id << "\n"
           << "  consistent=" << (check.consistency.consistent ? "true" : "false") << "\n";
      if (!check.consistency.residual_indices.empty()) {
        out_ << "  residuals=" << join_indices(check.consistency.residual_indices) << "\n";
      }
      if (!check.digest_invalid.empty()) out_ << "  digest_invalid=" << join_indices(check.digest_invalid) << "\n";
    }
    return ok ? kOk : kUsage;
  }

  int health() {
    for (const auto& [label, store] : {std::pair{"primary", primary()}, std::pair{"secondary", secondary()}}) {
      const StoreStatus status = health_check(store);
      std::string datasets;
      for (const auto& d : status.datasets_present) datasets += (datasets.empty() ? "" : ",") + d;
      if (machine()) {
        out_ << "health store=" << label << " reachable=" << (status.reachable ? "true" : "false")
             << " datasets=" << datasets << " corrupt=" << status.corrupt_files.size() << "\n";
        for (const auto& path : status.corrupt_files) {
          out_ << "corrupt store=" << label << " file=" << path.lexically_relative(store.root()).generic_string()
               << "\n";
        }
      } else {
        out_ << label << ": " << (status.reachable ? "reachable" : "UNREACHABLE");
        if (status.reachable) {
          out_ << ", " << status.datasets_present.size() << " dataset(s)"
               << (datasets.empty() ? "" : " [" + datasets + "]");
        }
        out_ << "\n";
        for (const auto& path : status.corrupt_files) {
          out_ << "  corrupt: " << path.lexically_relative(store.root()).generic_string() << "\n";
        }
      }
    }
    return kOk;
  }

  int inject(const std::string& which, const std::string& kind, const std::string& id, std::uint64_t index,
             std::uint64_t offset) {
    const FileStore store = which == "primary" ? primary() : secondary();
    std::string detail;
    if (kind == "unreachable") {
      inject_fault(store, fault::Unreachable{});
    } else if (kind == "delete") {
      inject_fault(store, fault::DeleteBlock{id, index});
      detail = " dataset=" + id + " index=" + std::to_string(index);
    } else {
      inject_fault(store, fault::FlipByte{id, index, offset});
      detail = " dataset=" + id + " index=" + std::to_string(index) + " offset=" + std::to_string(offset);
    }
    out_ << "injected store=" << which << " fault=" << kind << detail << "\n";
    return kOk;
  }

  int indicator(const std::string& defs_path) {
    std::string text;
    try {
      text = lagpar::detail::read_file(defs_path);
    } catch (const Error&) {
      throw Error(Errc::invalid_argument, "cannot read indicator file " + defs_path);
    }
    const auto defs = parse_indicator_file(text);

    std::map<std::string, std::vector<Rational>> datasets;
    ValueMap values;
    for (const auto& def : defs) {
      for (const auto* refs : {&def.numerator_inputs, &def.denominator_inputs}) {
        for (const auto& ref : *refs) {
          const auto colon = ref.find(':');
          const std::string id = ref.substr(0, colon);
          const auto index = parse_u64(ref.substr(colon + 1));
          auto it = datasets.find(id);
          if (it == datasets.end()) it = datasets.emplace(id, recover_dataset(id, primary(), secondary()).values).first;
          if (index < it->second.size()) values.emplace(ref, it->second[index]);
        }
      }
    }

    bool all_ok = true;
    for (const auto& def : defs) {
      const Rational value = compute_indicator(def, values);
      const RangeVerdict verdict = validate_range(value, def);
      all_ok = all_ok && verdict.ok;
      out_ << "indicator id=" << def.id << " value=" << value << " range=" << (verdict.ok ? "ok" : "violation");
      if (verdict.bounds) out_ << " bounds=" << verdict.bounds->lo << ".." << verdict.bounds->hi;
      out_ << "\n";
    }
    return all_ok ? kOk : kUsage;
  }

 private:
  void require_distinct_roots() const {
    const auto a = std::filesystem::weakly_canonical(cfg_.primary_root);
    const auto b = std::filesystem::weakly_canonical(cfg_.secondary_root);
    if (a == b) throw Error(Errc::invalid_argument, "--primary and --secondary must differ");
  }

  CliConfig cfg_;
  std::ostream& out_;
};

/// Scratch pair of stores for the demos, removed on scope exit.
class ScratchStores {
 public:
  explicit ScratchStores(std::string_view name) {
    root_ = std::filesystem::temp_directory_path() /
            ("lagpar-" + std::string(name) + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(root_);
    std::filesystem::create_directories(root_);
  }
  ScratchStores(const ScratchStores&) = delete;
  ScratchStores& operator=(const ScratchStores&) = delete;
  ~ScratchStores() {
    std::error_code ec;
    std::filesystem::remove_all(root_, ec);
  }

  [[nodiscard]] FileStore primary() const { return FileStore(root_ / "primary"); }
  [[nodiscard]] FileStore secondary() const { return FileStore(root_ / "secondary"); }

 private:
  std::filesystem::path root_;
};

inline constexpr std::string_view kDemoTimestamp = "1970-01-01T00:00:00Z";

inline void print_parity(std::ostream& out, const DatasetManifest& mf, const FileStore& secondary) {
  for (std::uint64_t i = mf.k; i < mf.k + mf.m; ++i) {
    const auto sb = parse_block_file(lagpar::detail::read_file(secondary.block_path(mf.dataset_id, i)));
    out << "  " << block_line(sb.block) << "\n";
  }
}

/// Three companies' scope emissions plus the portfolio value, encoded with as
/// many parity blocks as data points so the originals survive a total loss of
/// the primary store.
inline int demo_carbon(std::ostream& out) {
  const std::vector<Rational> emissions{300, 400, 300};
  const Rational total_value = 3000;
  std::vector<Rational> data = emissions;
  data.push_back(total_value);
  const std::size_t m = data.size();

  ScratchStores scratch("carbon");
  StoreOptions opts;
  opts.created_at = std::string(kDemoTimestamp);

  out << "demo carbon-footprint\n";
  out << "step 1 prepare: emissions A=300/1 B=400/1 C=300/1 tonnes, total value 3000/1 EUR\n";
  out << "step 1 values=" << join_values(data) << " k=" << data.size() << " m=" << m << "\n";
  const auto mf = store_dataset(data, m, "carbon", scratch.primary(), scratch.secondary(), opts);
  out << "step 2 interpolate and sample parity blocks:\n";
  print_parity(out, mf, scratch.secondary());
  out << "step 3 originals stored in primary, parity and manifest in secondary\n";

  for (std::uint64_t i = 0; i < mf.k; ++i) inject_fault(scratch.primary(), fault::DeleteBlock{"carbon", i});
  out << "step 4 simulated loss of all " << mf.k << " original blocks\n";

  const auto outcome = recover_dataset("carbon", scratch.primary(), scratch.secondary());
  out << "step 4 provenance=" << to_string(outcome.provenance) << " recovered=" << join_values(outcome.values)
      << "\n";

  IndicatorDef footprint{"footprint", IndicatorKind::ratio_of_sums, {"carbon:0", "carbon:1", "carbon:2"},
                         {"carbon:3"}, std::nullopt};
  ValueMap values;
  for (std::size_t i = 0; i < outcome.values.size(); ++i) values.emplace("carbon:" + std::to_string(i), outcome.values[i]);
  const Rational result = compute_indicator(footprint, values);
  out << "step 5 total scope emissions / total value of investments\n";
  out << "footprint=" << result << "\n";
  return kOk;
}

/// Coefficients (a, b, c, d) of a forecasting curve F(t) = a*e^(bt) + c*sin(dt)
/// treated as a 4-value dataset with two parity blocks.
inline int demo_forecast(std::ostream& out, const std::string& scenario) {
  const std::vector<Rational> coefficients{1, 2, 3, 4};
  ScratchStores scratch("forecast");
  StoreOptions opts;
  opts.created_at = std::string(kDemoTimestamp);

  out << "demo forecast-coefficients scenario=" << scenario << "\n";
  out << "fixture a,b,c,d=" << join_values(coefficients)
      << " (arbitrary demo values for F(t) = a*exp(b*t) + c*sin(d*t))\n";
  const auto mf = store_dataset(coefficients, 2, "forecast", scratch.primary(), scratch.secondary(), opts);
  out << "stored k=" << mf.k << " m=" << mf.m << "; parity blocks:\n";
  print_parity(out, mf, scratch.secondary());

  if (scenario == "primary-failure") {
    inject_fault(scratch.primary(), fault::DeleteBlock{"forecast", 0});
    inject_fault(scratch.primary(), fault::FlipByte{"forecast", 1, 40});
    out << "primary failure: block 0 lost, block 1 corrupted\n";
  } else if (scenario == "total-loss") {
    inject_fault(scratch.primary(), fault::Unreachable{});
    inject_fault(scratch.secondary(), fault::DeleteBlock{"forecast", 4});
    out << "primary unreachable and parity block 4 lost\n";
  }

  const bool primary_up = health_check(scratch.primary()).reachable;
  out << "step 1 primary reachable=" << (primary_up ? "true" : "false") << "\n";
  const auto outcome = recover_dataset("forecast", scratch.primary(), scratch.secondary());
  out << "step 2-3 provenance=" << to_string(outcome.provenance)
      << " suspects=" << join_indices(outcome.suspects) << "\n";
  out << "step 4 validated against manifest digests\n";
  out << "recovered=" << join_values(outcome.values) << "\n";
  return kOk;
}

inline std::filesystem::path default_root(const char* leaf) {
  const char* env = std::getenv("LAGPAR_ROOT");
  return std::filesystem::path(env != nullptr && *env != '\0' ? env : "lagpar-stores") / leaf;
}

}  // namespace detail

/// Parses `args` (without the program name) and runs one command.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact Lagrange-interpolation parity blocks for data recovery", "lagpar"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string primary_root;
  std::string secondary_root;
  bool machine = false;
  app.add_option("--primary", primary_root, "Primary store root (default $LAGPAR_ROOT/primary)");
  app.add_option("--secondary", secondary_root, "Secondary store root (default $LAGPAR_ROOT/secondary)");
  app.add_flag("--machine", machine, "Emit machine-parseable key=value lines");

  std::string values;
  std::size_t m = 0;
  std::string id;
  const auto add_dataset_opts = [&](CLI::App* sub, bool with_values) {
    if (with_values) {
      sub->add_option("--values", values, "Comma-separated rationals, e.g. 2,3,5 or 1/2,-3/4")->required();
      sub->add_option("--m", m, "Number of parity blocks")->required();
    }
    sub->add_option("--id", id, "Dataset id [A-Za-z0-9_-]{1,64}")->required();
  };

  auto* encode = app.add_subcommand("encode", "Print the parity blocks for a value list");
  add_dataset_opts(encode, true);
  auto* store = app.add_subcommand("store", "Store originals in primary, parity in secondary");
  add_dataset_opts(store, true);
  auto* recover = app.add_subcommand("recover", "Recover a dataset's original values");
  add_dataset_opts(recover, false);
  auto* verify = app.add_subcommand("verify", "Check a dataset's blocks for consistency");
  add_dataset_opts(verify, false);
  auto* health = app.add_subcommand("health", "Report store reachability and corrupt files");

  auto* inject = app.add_subcommand("inject", "Apply a test fault to a store");
  std::string which = "primary";
  std::string kind;
  std::uint64_t index = 0;
  std::uint64_t offset = 0;
  inject->add_option("--store", which, "primary or secondary")->check(CLI::IsMember({"primary", "secondary"}));
  inject->add_option("--fault", kind, "unreachable, delete or flip")
      ->required()
      ->check(CLI::IsMember({"unreachable", "delete", "flip"}));
  inject->add_option("--id", id, "Dataset id (delete, flip)");
  inject->add_option("--index", index, "Block index (delete, flip)");
  inject->add_option("--offset", offset, "Byte offset within the block file (flip)");

  auto* indicator = app.add_subcommand("indicator", "Compute indicators over stored datasets");
  std::string defs;
  indicator->add_option("--defs", defs, "PLYI1 indicator definition file")->required();

  auto* demo_carbon = app.add_subcommand("demo-carbon", "Carbon-footprint store and total-loss recovery walkthrough");
  auto* demo_forecast = app.add_subcommand("demo-forecast", "Forecast-coefficient recovery walkthrough");
  std::string scenario = "primary-failure";
  demo_forecast->add_option("--scenario", scenario, "healthy, primary-failure or total-loss")
      ->check(CLI::IsMember({"healthy", "primary-failure", "total-loss"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  CliConfig cfg{primary_root.empty() ? detail::default_root("primary") : std::filesystem::path(primary_root),
                secondary_root.empty() ? detail::default_root("secondary") : std::filesystem::path(secondary_root),
                machine ? OutputMode::machine : OutputMode::human};
  detail::Session session(cfg, out);
  try {
    if (inject->parsed() && kind != "unreachable" && id.empty()) {
      throw Error(Errc::invalid_argument, "--id is required for " + kind + " faults");
    }
    if (encode->parsed()) return session.encode(values, m, id);
    if (store->parsed()) return session.store(values, m, id);
    if (recover->parsed()) return session.recover(id);
    if (verify->parsed()) return session.verify(id);
    if (health->parsed()) return session.health();
    if (inject->parsed()) return session.inject(which, kind, id, index, offset);
    if (indicator->parsed()) return session.indicator(defs);
    if (demo_carbon->parsed()) return detail::demo_carbon(out);
    if (demo_forecast->parsed()) return detail::demo_forecast(out, scenario);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace lagpar::cli
