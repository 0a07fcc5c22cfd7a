#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace pathctl::cli {

/// Malformed input: YAML syntax, a missing or unknown field, a bad value or
/// an expression that does not parse. line and column are 1-based; 0 means
/// the position is unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(what), line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_, column_;
};

struct RunOptions {
    /// Highest precedence; then the PATHCTL_SEED environment variable, then
    /// the config's seed, then 0.
    std::optional<std::uint64_t> seed;
    /// Replaces the config's output directory.
    std::optional<std::string> out;
    /// false writes wall_ms = 0 so the manifest is byte-stable too.
    bool timings = true;
    /// Consulted only when seed is unset; nullopt reads the environment.
    std::optional<std::optional<std::string>> seed_env;
};

enum ExitCode : int { exit_ok = 0, exit_assertion = 1, exit_config = 2 };

/// Parses the whole config, runs every scenario and writes
/// <out>/<name>.csv per scenario plus manifest.json and a copy of the config.
/// Progress goes to log, errors and failed assertions to err.
int run_config(const std::string& text, const std::string& source, const RunOptions& options, std::ostream& log,
               std::ostream& err);

/// Reads the file, then run_config. An unreadable file is a config error.
int run_file(const std::string& path, const RunOptions& options, std::ostream& log, std::ostream& err);

/// Table of the bundled problems, one line per entry.
void print_catalog(std::ostream& out);

/// Seed precedence as documented on RunOptions. Throws ConfigError when the
/// environment value is not an unsigned integer.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const std::optional<std::string>& env,
                           const std::optional<std::uint64_t>& config);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace pathctl::cli
