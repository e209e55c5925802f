#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace duet {

// Reserved padding token. Empty string never survives normalization, so it
// can never collide with a real term.
inline const std::string kPadToken;

inline bool is_pad(const std::string& term) { return term.empty(); }

// Raised for malformed or inconsistent input data. The CLI maps this to
// exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a, used for config digests and feature-cache keys.
inline uint64_t fnv1a64(std::string_view s, uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> split(std::string_view line, char sep);

// Reads a whole text file or throws DataError naming the path.
std::string read_text_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace duet
