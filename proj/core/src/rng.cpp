#include "partpose/rng.hpp"

#include <cmath>
#include <numbers>

#include "partpose/digest.hpp"

namespace partpose {

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Modulo bias is irrelevant at the small ranges used here.
  return n == 0 ? 0 : gen_() % n;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
  std::uint64_t h = fnv1a64(tag);
  char bytes[16];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((base >> (8 * i)) & 0xff);
  for (int i = 0; i < 8; ++i) bytes[8 + i] = static_cast<char>((index >> (8 * i)) & 0xff);
  return fnv1a64(std::string_view(bytes, sizeof(bytes)), h);
}

}  // namespace partpose
