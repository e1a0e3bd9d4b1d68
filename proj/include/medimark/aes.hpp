#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace medimark {

/// AES-256 block cipher, encryption direction only (CTR mode never needs the
/// inverse cipher).
class Aes256 {
public:
    explicit Aes256(const std::array<std::uint8_t, 32>& key);

    /// Encrypts one 16-byte block in place.
    void encrypt_block(std::uint8_t block[16]) const;

private:
    // 15 round keys of 16 bytes each.
    std::array<std::uint8_t, 240> roundKeys_{};
};

/// AES-256-CTR keystream application. The counter block starts as the nonce
/// interpreted as a 128-bit big-endian integer and increments by one per
/// 16-byte block (wrapping mod 2^128). Encryption and decryption are the same
/// operation.
std::vector<std::uint8_t> aes256_ctr(const std::vector<std::uint8_t>& data,
                                     const std::array<std::uint8_t, 32>& key,
                                     const std::array<std::uint8_t, 16>& nonce);

} // namespace medimark
