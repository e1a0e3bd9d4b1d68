#include "medimark/payload.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "medimark/aes.hpp"
#include "medimark/crc32.hpp"

namespace medimark {

namespace {

constexpr std::size_t kMaxRecordBytes = 65535;
constexpr std::size_t kSignatureBytes = 64; // 8 binary64 values

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

void put_u16_be(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_f64_le(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
}

double get_f64_le(const std::uint8_t* p) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
        bits = (bits << 8) | p[i];
    }
    return std::bit_cast<double>(bits);
}

} // namespace

SecretKey parse_key_hex(const std::string& hex) {
    if (hex.size() != 64) {
        throw KeyFormatError("key must be exactly 64 hex characters");
    }
    SecretKey key;
    for (std::size_t i = 0; i < 32; ++i) {
        const int hi = hex_nibble(hex[2 * i]);
        const int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw KeyFormatError("key contains a non-hex character");
        }
        key.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return key;
}

std::vector<std::uint8_t> serialize_record(const PatientRecord& record) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [k, v] : record) {
        if (k.empty()) {
            throw MalformedRecord("record keys must be nonempty");
        }
        obj[k] = v;
    }
    // nlohmann stores object keys in a std::map, so dump() is already the
    // canonical bytewise-sorted compact form.
    std::string text;
    try {
        text = obj.dump();
    } catch (const nlohmann::json::type_error&) {
        throw MalformedRecord("record contains invalid UTF-8");
    }
    if (text.size() > kMaxRecordBytes) {
        throw RecordTooLarge("serialized record exceeds 65535 bytes");
    }
    return {text.begin(), text.end()};
}

PatientRecord parse_record(const std::vector<std::uint8_t>& bytes) {
    const nlohmann::json obj = nlohmann::json::parse(bytes.begin(), bytes.end(),
                                                     /*cb=*/nullptr,
                                                     /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw MalformedRecord("record is not a JSON object");
    }
    PatientRecord record;
    for (const auto& [k, v] : obj.items()) {
        if (k.empty() || !v.is_string()) {
            throw MalformedRecord("record values must be strings with nonempty keys");
        }
        record[k] = v.get<std::string>();
    }
    return record;
}

std::vector<std::uint8_t> build_plaintext(const PatientRecord& record,
                                          const MomentSignature& sig,
                                          const PaddedMap& map) {
    const std::vector<std::uint8_t> recordBytes = serialize_record(record);

    std::vector<std::uint8_t> out;
    out.reserve(2 + recordBytes.size() + kSignatureBytes + (map.bits.size() + 7) / 8 + 4);

    put_u16_be(out, static_cast<std::uint16_t>(recordBytes.size()));
    out.insert(out.end(), recordBytes.begin(), recordBytes.end());

    for (double phi : sig.phi) {
        put_f64_le(out, phi);
    }
    put_f64_le(out, sig.average);

    const std::vector<std::uint8_t> packed = pack_bits(map.bits);
    out.insert(out.end(), packed.begin(), packed.end());

    put_u32_be(out, crc32(out.data(), out.size()));
    return out;
}

PlaintextParts parse_plaintext(const std::vector<std::uint8_t>& plain,
                               std::size_t mapWidth, std::size_t mapHeight,
                               std::size_t origWidth, std::size_t origHeight) {
    const std::size_t mapBytes = (mapWidth * mapHeight + 7) / 8;
    if (plain.size() < 2 + kSignatureBytes + mapBytes + 4) {
        throw CrcMismatch("plaintext shorter than its fixed layout");
    }

    const std::uint32_t stored = (static_cast<std::uint32_t>(plain[plain.size() - 4]) << 24) |
                                 (static_cast<std::uint32_t>(plain[plain.size() - 3]) << 16) |
                                 (static_cast<std::uint32_t>(plain[plain.size() - 2]) << 8) |
                                 static_cast<std::uint32_t>(plain[plain.size() - 1]);
    if (crc32(plain.data(), plain.size() - 4) != stored) {
        throw CrcMismatch("plaintext crc32 check failed");
    }

    const std::size_t recordLen = (static_cast<std::size_t>(plain[0]) << 8) | plain[1];
    if (2 + recordLen + kSignatureBytes + mapBytes + 4 != plain.size()) {
        throw CrcMismatch("plaintext length does not match its layout");
    }

    PlaintextParts parts;
    parts.record = parse_record({plain.begin() + 2,
                                 plain.begin() + 2 + static_cast<std::ptrdiff_t>(recordLen)});

    const std::uint8_t* sigBase = plain.data() + 2 + recordLen;
    for (std::size_t i = 0; i < 7; ++i) {
        parts.signature.phi[i] = get_f64_le(sigBase + 8 * i);
    }
    parts.signature.average = get_f64_le(sigBase + 56);

    parts.map.width = mapWidth;
    parts.map.height = mapHeight;
    parts.map.origWidth = origWidth;
    parts.map.origHeight = origHeight;
    parts.map.bits = unpack_bits({plain.begin() + static_cast<std::ptrdiff_t>(2 + recordLen + kSignatureBytes),
                                  plain.begin() + static_cast<std::ptrdiff_t>(2 + recordLen + kSignatureBytes + mapBytes)},
                                 mapWidth * mapHeight);
    return parts;
}

std::vector<std::uint8_t> encrypt(const std::vector<std::uint8_t>& plain,
                                  const SecretKey& key, const Nonce& nonce) {
    return aes256_ctr(plain, key.bytes, nonce);
}

std::vector<std::uint8_t> decrypt(const std::vector<std::uint8_t>& cipher,
                                  const SecretKey& key, const Nonce& nonce) {
    return aes256_ctr(cipher, key.bytes, nonce);
}

std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
        }
    }
    return bytes;
}

std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& bytes,
                                      std::size_t bitCount) {
    std::vector<std::uint8_t> bits(bitCount, 0);
    for (std::size_t i = 0; i < bitCount; ++i) {
        bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    }
    return bits;
}

} // namespace medimark
