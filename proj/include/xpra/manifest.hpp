#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace xpra {

inline constexpr const char *kToolVersion = "0.1.0";

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path &path);

/// Record of one CLI invocation, written next to its outputs.
class RunManifest {
public:
  explicit RunManifest(std::string subcommand);

  void set_flags(nlohmann::json flags) { flags_ = std::move(flags); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_input(const std::filesystem::path &path);
  void add_output(const std::filesystem::path &path);

  nlohmann::json to_json() const;
  void write(const std::filesystem::path &path) const;

private:
  std::string subcommand_;
  nlohmann::json flags_ = nlohmann::json::object();
  std::optional<std::uint64_t> seed_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point started_mono_;
};

} // namespace xpra
