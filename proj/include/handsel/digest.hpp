#pragma once

#include <string>
#include <string_view>

namespace handsel {

// Lowercase hex SHA-256; the file variant streams in 64 KiB chunks.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

} // namespace handsel
