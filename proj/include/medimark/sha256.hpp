#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace medimark {

/// SHA-256 digest of a byte sequence.
std::vector<std::uint8_t> sha256(const std::uint8_t* data, std::size_t len);

/// SHA-256 digest as 64 lowercase hex characters.
std::string sha256_hex(const std::vector<std::uint8_t>& data);

} // namespace medimark
