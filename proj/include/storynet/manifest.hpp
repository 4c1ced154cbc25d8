#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace storynet {

std::string sha256_hex(std::string_view data);

// Digest of a file's bytes. For a directory: digest over the sorted
// "name  sha256" lines of its regular files.
std::string sha256_path(const std::filesystem::path& path);

// Current UTC time, ISO 8601 with seconds.
std::string utc_timestamp();

// Run record for one command. Each command owns one entry under "commands"
// in <out>/manifest.json; rerunning a command replaces its entry.
struct RunRecord {
  std::string command;
  nlohmann::json config = nlohmann::json::object();  // option name -> value, replayable via --config
  std::map<std::string, std::filesystem::path> inputs;
  std::vector<std::string> outputs;  // relative to the out directory
  nlohmann::json details = nlohmann::json::object();
  std::string started_at;
  std::string finished_at;
};

std::filesystem::path manifest_path(const std::filesystem::path& out_dir);

void record_run(const std::filesystem::path& out_dir, const RunRecord& run);

}  // namespace storynet
