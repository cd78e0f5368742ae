#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewsim/core.hpp"

namespace skewsim::cli {

/// Bad flags, bad config keys or values. Maps to exit status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

enum class Kind { integer, real, text, real_list, int_list };

struct KeySpec {
  std::string name;
  Kind kind;
  nlohmann::ordered_json fallback;  // null = unset
  std::string help;
};

/// Accepted keys of a command, common keys (seed, workers, output, report) included.
const std::vector<KeySpec>& command_keys(const std::string& command);
const std::vector<std::string>& commands();

struct RunConfig {
  std::string command;
  /// Every key of the command, resolved (defaults filled in).
  nlohmann::ordered_json params;

  std::optional<std::uint64_t> seed() const;
  unsigned workers() const;
};

/// Strict merge: `file` (may be null) then `flags`, both flat objects keyed like the flags.
/// Unknown keys and ill-typed values raise UsageError naming the key.
RunConfig resolve_config(const std::string& command, const nlohmann::json& file, const nlohmann::json& flags,
                         const std::optional<std::string>& env_seed);

/// Parses argv (subcommand first). Reads --config and the SKEWSIM_SEED fallback through `getenv`.
RunConfig parse_command_line(int argc, const char* const* argv,
                             const std::function<const char*(const char*)>& getenv);

/// Runs the command. Returns 0 on success, 1 when a validation report fails.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full entry point with exit-code mapping.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "%.17g" formatting used in CSV output.
std::string csv_number(double v);

}  // namespace skewsim::cli
