#include "scorelab/report.hpp"

#include "scorelab/io.hpp"

namespace scorelab {

namespace {

nlohmann::json file_entry(const std::filesystem::path& path) {
  return {{"path", path.string()}, {"fnv1a64", io::digest_hex(io::fnv1a64(io::read_file(path)))}};
}

}  // namespace

void RunReport::add_input(const std::filesystem::path& path) { inputs.push_back(file_entry(path)); }

void RunReport::add_output(const std::filesystem::path& path) { outputs.push_back(file_entry(path)); }

nlohmann::json RunReport::to_json() const {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"subcommand", subcommand},
          {"config", config},  {"seeds", seeds},          {"inputs", inputs},
          {"outputs", outputs}, {"result", result}};
}

std::string RunReport::result_payload() const { return result.dump(); }

}  // namespace scorelab
