#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace partpose {

/// FNV-1a over a byte string. Used for cache keys and determinism checks.
std::uint64_t fnv1a64(std::string_view bytes);

/// Fold more bytes into an existing digest.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed);

/// Digest of a whole file's bytes. Throws InputError if unreadable.
std::uint64_t file_digest(const std::string& path);

std::string digest_hex(std::uint64_t digest);

}  // namespace partpose
