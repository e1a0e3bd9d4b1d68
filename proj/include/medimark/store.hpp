#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "medimark/watermark.hpp"

namespace medimark {

/// One line of index.jsonl.
struct StoreEntry {
    std::string id;        // 64 lowercase hex chars, SHA-256 of the original PGM bytes
    std::string patientId; // record["id"] if present
    RoiRect roi;
    std::string createdAt; // ISO 8601 UTC
    std::size_t scale = 2;
};

/// Observation points inside ingest, used by tests to simulate a crash at a
/// specific step by throwing from the callback.
enum class IngestStage {
    ArchiveTempWritten,
    ArchiveRenamed,
    ObjectTempWritten,
    ObjectRenamed,
    IndexAppended,
};
using IngestHook = std::function<void(IngestStage)>;

/// Filesystem-backed record store: objects/ holds watermarked PGMs,
/// archive/ holds originals, index.jsonl lists one JSON record per ingest.
/// Writers take an exclusive index.lock for the duration of a mutation; all
/// file creation is write-to-temp-then-rename.
class Store {
public:
    /// Opens a store rooted at `root`, creating the layout if absent.
    explicit Store(std::filesystem::path root);

    /// Watermark `image` and persist it. Computes the record id from the
    /// original image bytes, optionally archives the original, then writes the
    /// watermarked object and appends the index line (in that order). Throws
    /// DuplicateRecord when the id is already indexed, plus any embed error.
    std::string ingest(const PixelGrid& image, const RoiRect& roi,
                       const PatientRecord& record, const SecretKey& key,
                       const EmbedParams& params = {}, bool archiveOriginal = false,
                       const IngestHook& hook = {});

    /// Watermarked object by id. Throws UnknownId or CorruptObject.
    PixelGrid fetch(const std::string& id) const;

    /// Archived original by id. Throws UnknownId or NotArchived.
    PixelGrid fetch_original(const std::string& id) const;

    /// Index entries in insertion order. Throws CorruptIndex naming the
    /// offending line number.
    std::vector<StoreEntry> list() const;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path objects_dir() const { return root_ / "objects"; }
    std::filesystem::path archive_dir() const { return root_ / "archive"; }
    std::filesystem::path index_path() const { return root_ / "index.jsonl"; }
    std::filesystem::path lock_path() const { return root_ / "index.lock"; }

    std::filesystem::path root_;
};

} // namespace medimark
