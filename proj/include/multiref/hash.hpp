#ifndef MULTIREF_HASH_HPP
#define MULTIREF_HASH_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include "multiref/errors.hpp"
#include "multiref/rng.hpp"

namespace multiref {

// FNV-1a64 content hashes, hex-encoded. Used in manifests to tie outputs to
// their exact inputs; not a cryptographic digest.
inline std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline std::string hash_bytes(std::string_view bytes) {
  return hash_hex(rng::fnv1a(bytes));
}

inline std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for hashing: " + path);
  std::uint64_t h = rng::kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = rng::fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return hash_hex(h);
}

}  // namespace multiref

#endif  // MULTIREF_HASH_HPP
