#pragma once

// Run configurations: build (alpha, beta, phi) from a JSON config, run the
// named checks, and assemble a deterministic report. Used by the gabm tool
// and by the acceptance harness.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gabm/kernels.hpp"

namespace gabm {

using json = nlohmann::json;

/// Schema violation; `where` is a JSON path (or "line N" for parse errors).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

struct CheckRecord {
  std::string name;
  std::string reference;  // the identity being checked, as formula text
  std::size_t samples = 0;
  double max = 0.0, mean = 0.0, tol = 0.0;
  bool expect_violation = false;  // pass iff max > tol
  bool pass = false;
  std::optional<double> fd_error;
  std::vector<double> witness;
};

struct RunResult {
  std::string name;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;
  double wall_seconds = 0.0;

  bool pass() const;
  /// Timing goes under "meta" so the rest is reproducible bit for bit.
  json to_json(bool with_timing = true) const;
};

std::uint64_t fnv1a64(std::string_view bytes);
/// FNV-1a of the compact dump of the config (keys sorted by json).
std::string config_hash(const json& cfg);

/// Parse a file; ConfigError with the line number on malformed text.
json load_json(const std::filesystem::path& path);

/// One config -> one run. Throws ConfigError (bad schema), InvalidInput
/// (precondition of a construction fails), DomainError (evaluation left a
/// domain; carries the witness).
RunResult run_config(const json& cfg, Exec exec = Exec::parallel);

/// A scenario file is either a single config or {"name", "defaults", "cases": [...]};
/// each case is merge-patched onto the defaults.
std::vector<json> expand_scenario(const json& scenario);

struct SweepTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  void write_csv(std::ostream& os) const;
};

/// quantity: pde1 | pde2 | regularity | einstein | spray.
/// grid (nb, ns) overrides the phi grid; points overrides the sample count.
SweepTable sweep(const json& cfg, const std::string& quantity, std::optional<std::pair<int, int>> grid = {},
                 std::optional<int> points = {}, Exec exec = Exec::parallel);

/// Families, backends, one-forms, deformations and checks with their parameters.
std::string list_families();

}  // namespace gabm
