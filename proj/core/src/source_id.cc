#include "wildcut/source_id.h"

#include <sodium.h>

#include <array>
#include <fstream>
#include <vector>

#include "wildcut/error.h"

namespace wildcut {
namespace {

constexpr std::size_t kDigestBytes = 16;

void ensure_sodium() {
  static const int rc = sodium_init();
  (void)rc;
}

std::string to_hex(const unsigned char* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(n * 2, '0');
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = kDigits[data[i] >> 4];
    out[2 * i + 1] = kDigits[data[i] & 0x0F];
  }
  return out;
}

}  // namespace

std::string hash128_hex(std::string_view bytes) {
  ensure_sodium();
  std::array<unsigned char, kDigestBytes> digest{};
  crypto_generichash(digest.data(), digest.size(),
                     reinterpret_cast<const unsigned char*>(bytes.data()),
                     bytes.size(), nullptr, 0);
  return to_hex(digest.data(), digest.size());
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");
  ensure_sodium();
  crypto_generichash_state state;
  crypto_generichash_init(&state, nullptr, 0, kDigestBytes);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) {
      crypto_generichash_update(
          &state, reinterpret_cast<const unsigned char*>(buf.data()),
          static_cast<unsigned long long>(got));
    }
  }
  std::array<unsigned char, kDigestBytes> digest{};
  crypto_generichash_final(&state, digest.data(), digest.size());
  return to_hex(digest.data(), digest.size());
}

std::string make_source_id(const std::filesystem::path& canonical_path,
                           const std::filesystem::path& base) {
  auto rel = canonical_path.lexically_relative(base);
  if (rel.empty()) rel = canonical_path;
  return hash128_hex(rel.generic_string());
}

}  // namespace wildcut
