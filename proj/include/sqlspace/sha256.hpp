#pragma once

#include <string>
#include <string_view>

namespace sqlspace {

/// Lowercase hex SHA-256 digest (OpenSSL EVP backend).
std::string sha256_hex(std::string_view data);

}  // namespace sqlspace
