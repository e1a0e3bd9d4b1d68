#pragma once

#include <cstddef>
#include <cstdint>

namespace medimark {

/// CRC-32 (IEEE 802.3): polynomial 0x04C11DB7 reflected, init 0xFFFFFFFF,
/// final xor 0xFFFFFFFF. crc32("123456789") == 0xCBF43926.
std::uint32_t crc32(const std::uint8_t* data, std::size_t len);

} // namespace medimark
