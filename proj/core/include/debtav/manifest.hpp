#pragma once

// Run manifests written next to every CLI output.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace debtav {

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

class Manifest {
 public:
  explicit Manifest(std::string command);

  void input(const std::filesystem::path& path);
  void output(const std::filesystem::path& path);
  void seed(std::uint64_t value) { seed_ = value; }
  /// Free-form settings (shrinkage, grid, CV settings, ...).
  nlohmann::json& settings() { return settings_; }

  nlohmann::json to_json() const;
  /// Fills in output digests and wall time, then writes the JSON document.
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  std::optional<std::uint64_t> seed_;
  nlohmann::json settings_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point start_;
};

}  // namespace debtav
