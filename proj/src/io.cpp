#include "crowdrel/io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace crowdrel::io {

void for_each_jsonl_record(
    const std::string& path,
    const std::function<void(size_t, const nlohmann::json&)>& fn) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path);
  }
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path + ":" + std::to_string(line_number) +
                      ": malformed record: " + e.what());
    }
    if (!record.is_object()) {
      throw DataError(path + ":" + std::to_string(line_number) +
                      ": record is not an object");
    }
    fn(line_number, record);
  }
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw DataError("cannot write " + path);
  }
  for (const auto& line : lines) {
    out << line << '\n';
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw DataError("cannot write " + path);
  }
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string file_digest(const std::string& path) {
  uint64_t hash = fnv1a64(read_text(path));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

void write_manifest(const std::string& artifact_path,
                    const std::string& subcommand,
                    const nlohmann::json& parameters,
                    const std::vector<std::string>& input_paths) {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& p : input_paths) {
    inputs[p] = file_digest(p);
  }
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  nlohmann::json manifest = {
      {"subcommand", subcommand},
      {"parameters", parameters},
      {"inputs", inputs},
      {"tool_version", kToolVersion},
      {"timestamp", stamp},
  };
  write_text(artifact_path + ".manifest.json", manifest.dump(2) + "\n");
}

}  // namespace crowdrel::io
