#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

namespace scorelab {

inline constexpr const char* kToolName = "scorelab";
inline constexpr const char* kToolVersion = "0.1.0";

/// Machine-readable record of one CLI invocation.
///
/// `result` holds only values computed from the inputs and seeds, so two runs
/// with the same inputs serialize it to identical bytes. Paths live in
/// `inputs` / `outputs` next to FNV-1a digests of the file contents.
struct RunReport {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::array();
  nlohmann::json outputs = nlohmann::json::array();
  nlohmann::json result = nlohmann::json::object();

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  /// Compact serialization of `result` alone.
  std::string result_payload() const;
};

}  // namespace scorelab
