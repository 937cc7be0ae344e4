#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace safe::cli {

std::string sha256_file(const std::filesystem::path& path);  // IoError, FileMissing
std::string sha256_hex(std::string_view data);

struct FileRecord {
  std::string path;
  std::string sha256;
};

// Everything needed to rerun a command: the subcommand, its non-setting
// arguments, the fully resolved settings and checksums of inputs and outputs.
struct Manifest {
  std::string tool_version;
  std::string command;
  std::vector<std::string> arguments;
  std::map<std::string, std::string> settings;
  std::map<std::string, FileRecord> inputs;
  std::map<std::string, FileRecord> outputs;

  std::string to_json() const;
  static Manifest from_json(std::string_view text);  // ParseError
  static Manifest load(const std::filesystem::path& path);

  // ChecksumMismatch when an input file changed since the manifest was written.
  void verify_inputs() const;
};

}  // namespace safe::cli
