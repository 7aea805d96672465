#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace crowdrel {

inline constexpr const char* kToolVersion = "0.1.0";

// Raised for malformed or inconsistent input data. Messages carry file and
// line context where available.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace io {

// Calls fn(line_number, record) for every non-blank line of a JSON Lines
// file. Line numbers are 1-based. Parse failures raise DataError naming the
// file and line.
void for_each_jsonl_record(
    const std::string& path,
    const std::function<void(size_t, const nlohmann::json&)>& fn);

// Writes lines joined with '\n', with a trailing newline when non-empty.
void write_lines(const std::string& path, const std::vector<std::string>& lines);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

uint64_t fnv1a64(std::string_view bytes);

// Hex FNV-1a digest of a file's bytes; raises DataError if unreadable.
std::string file_digest(const std::string& path);

// Writes the run manifest sidecar <artifact_path>.manifest.json recording the
// subcommand, resolved parameters, input digests, tool version and timestamp.
void write_manifest(const std::string& artifact_path,
                    const std::string& subcommand,
                    const nlohmann::json& parameters,
                    const std::vector<std::string>& input_paths);

}  // namespace io
}  // namespace crowdrel
