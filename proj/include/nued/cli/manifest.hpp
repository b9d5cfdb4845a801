#pragma once

#include <cstdint>
#include <ctime>
#include <string>

#include <json.hpp>

namespace nued::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit over raw bytes; stable input fingerprint for manifests.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

inline std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Every report embeds one of these. The timestamp lives here and only here:
/// payloads stay byte-identical across reruns of the same command.
struct RunManifest {
  std::string command;
  nlohmann::json config;  // full effective configuration
  std::uint64_t seed = 0;
  std::string input_hash;  // fnv1a64 hex of the system description bytes
  std::string timestamp;
  std::string version = kToolVersion;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["input_hash"] = input_hash;
    j["timestamp"] = timestamp;
    j["version"] = version;
    return j;
  }
};

}  // namespace nued::cli
