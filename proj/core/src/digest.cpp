#include "partpose/digest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "partpose/errors.hpp"

namespace partpose {

namespace {
constexpr std::uint64_t kOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kPrime = 0x100000001b3ull;
}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= kPrime;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view bytes) { return fnv1a64(bytes, kOffset); }

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("file_digest: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

std::string digest_hex(std::uint64_t digest) {
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(digest));
  return std::string(out);
}

}  // namespace partpose
