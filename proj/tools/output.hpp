#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tools {

using nlohmann::json;

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Wall clock unless SOURCE_DATE_EPOCH pins it.
inline std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(e, nullptr, 10));
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct RunManifest {
  RunManifest(std::string command, json parameters) : command(std::move(command)), parameters(std::move(parameters)) {}
  std::string command;
  json parameters = json::object();
  std::string tool_version = GAUSSPHASE_VERSION;
  std::optional<std::uint64_t> seed;
  std::string timestamp = tools::timestamp();

  // everything except the timestamp, so identical runs hash identically
  json hashed() const {
    json j{{"command", command}, {"parameters", parameters}, {"tool_version", tool_version}};
    j["seed"] = seed ? json(*seed) : json(nullptr);
    return j;
  }
  std::string hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(hashed().dump())));
    return buf;
  }
  json full() const {
    json j = hashed();
    j["timestamp"] = timestamp;
    j["manifest_hash"] = hash();
    return j;
  }
};

inline std::filesystem::path output_dir() {
  const char* e = std::getenv("GAUSSPHASE_OUT_DIR");
  return e && *e ? std::filesystem::path(e) : std::filesystem::path(".");
}

inline std::filesystem::path resolve(const std::string& given, const std::string& fallback) {
  if (!given.empty()) return given;
  return output_dir() / fallback;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

inline void write_manifest(const std::filesystem::path& data_path, const RunManifest& m) {
  write_text(data_path.string() + ".manifest.json", m.full().dump(2) + "\n");
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string render(const RunManifest& m) const {
    std::string out = "# manifest_hash=" + m.hash() + "\n";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
      out += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

inline void write_csv(const std::filesystem::path& path, const Table& t, const RunManifest& m) {
  write_text(path, t.render(m));
  write_manifest(path, m);
}

}  // namespace tools
