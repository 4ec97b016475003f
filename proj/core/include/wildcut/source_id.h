#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace wildcut {

// Lower-case hex of a 128-bit BLAKE2b digest.
std::string hash128_hex(std::string_view bytes);

// Digest of a file's contents; throws IoError when unreadable.
std::string hash_file(const std::filesystem::path& path);

// Identifier for an input file, derived only from its path relative to
// `base` (generic form, forward slashes). Stable under resume and does not
// read file contents.
std::string make_source_id(const std::filesystem::path& canonical_path,
                           const std::filesystem::path& base);

}  // namespace wildcut
