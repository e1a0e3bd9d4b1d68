#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "medimark/feature.hpp"
#include "medimark/scramble.hpp"

namespace medimark {

/// Patient metadata carried inside the watermark. Keys are unique and
/// nonempty; the canonical serialized form must stay within 65535 bytes.
using PatientRecord = std::map<std::string, std::string>;

/// AES-256 key.
struct SecretKey {
    std::array<std::uint8_t, 32> bytes{};
};

/// Per-embedding 128-bit CTR nonce.
using Nonce = std::array<std::uint8_t, 16>;

/// Parse a 64-hex-character string into a key. Throws KeyFormatError.
SecretKey parse_key_hex(const std::string& hex);

/// Canonical JSON object: keys sorted bytewise ascending, no insignificant
/// whitespace, UTF-8. Deterministic. Throws RecordTooLarge above 65535 bytes.
std::vector<std::uint8_t> serialize_record(const PatientRecord& record);

/// Exact inverse of serialize_record. Throws MalformedRecord on anything that
/// is not a JSON object of string values with nonempty keys.
PatientRecord parse_record(const std::vector<std::uint8_t>& bytes);

/// Plaintext layout (all fields contiguous):
///   u16 recordLen (big-endian) || record bytes || 64-byte signature
///   (phi1..phi7 + average, binary64 little-endian) || packed map bits
///   (row-major, MSB-first, zero padded to whole bytes) || u32 crc32
///   (big-endian, over all preceding bytes).
std::vector<std::uint8_t> build_plaintext(const PatientRecord& record,
                                          const MomentSignature& sig,
                                          const PaddedMap& map);

/// Inverse of build_plaintext. Map dimensions are not self-describing and
/// must be supplied by the caller (the watermark header carries them).
/// Throws CrcMismatch when the trailing checksum fails or the buffer cannot
/// hold the stated layout; MalformedRecord when the record bytes do not parse.
struct PlaintextParts {
    PatientRecord record;
    MomentSignature signature;
    PaddedMap map;
};
PlaintextParts parse_plaintext(const std::vector<std::uint8_t>& plain,
                               std::size_t mapWidth, std::size_t mapHeight,
                               std::size_t origWidth, std::size_t origHeight);

/// AES-256-CTR. Length preserving; decryption is the same keystream, so
/// corruption is only detectable through the embedded crc32.
std::vector<std::uint8_t> encrypt(const std::vector<std::uint8_t>& plain,
                                  const SecretKey& key, const Nonce& nonce);
std::vector<std::uint8_t> decrypt(const std::vector<std::uint8_t>& cipher,
                                  const SecretKey& key, const Nonce& nonce);

/// Bit packing helpers shared by the payload layout and the LSB embedder:
/// bit i of the sequence lives in byte i/8 at position 7-(i%8).
std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& bytes,
                                      std::size_t bitCount);

} // namespace medimark
