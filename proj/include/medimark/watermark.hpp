#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "medimark/image.hpp"
#include "medimark/payload.hpp"

namespace medimark {

/// Embedding parameters. The downscale factor travels in the image header;
/// sigma and t_rel are configuration the verifier must match.
struct EmbedParams {
    std::size_t scale = 2;  // 2 or 4
    double sigma = 2.0;
    double t_rel = 0.04;
};

/// Feature parameters the verifier recomputes with (scale comes from the
/// extracted header, not from here).
struct VerifyParams {
    double sigma = 2.0;
    double t_rel = 0.04;
};

/// Self-describing header written into the LSBs of the last 320 raster
/// positions. 40 bytes:
///   magic 0x57 0x4D | version u8 | roi x,y,w,h as 4 x u16 BE | scale u8 |
///   payloadLenBytes u32 BE | nonce 16 bytes | crc32 u32 BE over the
///   preceding 32 bytes | 4 zero pad bytes
struct HeaderBlock {
    RoiRect roi;
    std::size_t scale = 2;
    std::uint32_t payloadLenBytes = 0;
    Nonce nonce{};
};

constexpr std::size_t kHeaderBytes = 40;
constexpr std::size_t kHeaderBits = 320;

std::vector<std::uint8_t> encode_header(const HeaderBlock& header);
/// Throws NotWatermarked on bad magic, version, or crc.
HeaderBlock decode_header(const std::vector<std::uint8_t>& bytes);

/// Verification outcome.
enum class VerifyStatus {
    Intact,
    Tampered,
    PayloadUnreadable,
    NotWatermarked,
};

const char* to_string(VerifyStatus status);

/// Full-resolution rectangle, image coordinates.
struct Region {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t w = 0;
    std::size_t h = 0;

    bool operator==(const Region&) const = default;
};

struct TamperReport {
    VerifyStatus status = VerifyStatus::NotWatermarked;
    bool momentMatch = false;
    std::size_t mapMismatchCells = 0;
    std::vector<Region> regions;
    std::optional<MomentSignature> extractedSignature;
    std::optional<MomentSignature> recomputedSignature;
};

/// Available payload bits: W*H - roi area - 320 header bits. Throws
/// RoiOutOfBounds, or RoiOverlapsHeader when the ROI touches the header's
/// raster positions.
std::size_t capacity(std::size_t width, std::size_t height, const RoiRect& roi,
                     std::size_t scale);

/// Construct the watermarked image. Only LSBs outside the ROI change; the
/// signature and edge map are computed on the LSB-zeroed input. A fixed nonce
/// makes the result fully deterministic; by default a random nonce is drawn.
PixelGrid embed(const PixelGrid& image, const RoiRect& roi, const PatientRecord& record,
                const SecretKey& key, const EmbedParams& params = {},
                const std::optional<Nonce>& nonce = std::nullopt);

/// Everything recovered from a watermarked image. The map is the scrambled
/// padded map as embedded unless unscrambled was requested.
struct ExtractResult {
    PatientRecord record;
    MomentSignature signature;
    PaddedMap map;
    RoiRect roi;
    std::size_t scale = 2;
    Nonce nonce{};
    std::size_t payloadBytes = 0;
};

/// Throws NotWatermarked (no/corrupt header) or PayloadUnreadable (payload
/// crc failure: wrong key or damaged payload LSBs).
ExtractResult extract(const PixelGrid& image, const SecretKey& key,
                      bool unscrambled = false);

/// Recompute the signature and edge map and compare against the embedded
/// ones. Never throws for watermark-related failures; the status field
/// carries them.
TamperReport verify(const PixelGrid& image, const SecretKey& key,
                    const VerifyParams& params = {});

/// Tamper localization: mismatch cells mapped back to full-resolution
/// footprints plus 8-connected bounding rectangles. Throws NothingToLocate
/// when verify does not report Tampered.
struct LocateResult {
    BitPlane mask; // 1 exactly on mismatch-cell footprints
    std::vector<Region> regions;
};
LocateResult locate(const PixelGrid& image, const SecretKey& key,
                    const VerifyParams& params = {});

} // namespace medimark
