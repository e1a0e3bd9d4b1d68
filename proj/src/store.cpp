#include "medimark/store.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "medimark/sha256.hpp"

namespace medimark {

namespace fs = std::filesystem;

namespace {

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StoreIoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

// Unique temp path next to the target so rename stays on one filesystem.
fs::path temp_sibling(const fs::path& target) {
    static std::mt19937_64 rng{std::random_device{}()};
    std::ostringstream name;
    name << target.filename().string() << ".tmp." << std::hex << rng();
    return target.parent_path() / name.str();
}

void write_file_atomic(const fs::path& target, const std::vector<std::uint8_t>& bytes,
                       const std::function<void()>& betweenWriteAndRename = {}) {
    const fs::path tmp = temp_sibling(target);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw StoreIoError("cannot create " + tmp.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            throw StoreIoError("short write to " + tmp.string());
        }
    }
    if (betweenWriteAndRename) {
        betweenWriteAndRename();
    }
    fs::rename(tmp, target);
}

// Exclusive advisory lock held for the duration of a store mutation.
class LockFile {
public:
    explicit LockFile(const fs::path& path) : path_(path) {
        std::FILE* f = std::fopen(path.c_str(), "wx");
        if (!f) {
            throw StoreLocked("store is locked by another writer: " + path.string());
        }
        std::fclose(f);
    }
    ~LockFile() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    fs::path path_;
};

bool is_hex_id(const std::string& id) {
    if (id.size() != 64) {
        return false;
    }
    for (char c : id) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
            return false;
        }
    }
    return true;
}

} // namespace

Store::Store(fs::path root) : root_(std::move(root)) {
    fs::create_directories(objects_dir());
    fs::create_directories(archive_dir());
    if (!fs::exists(index_path())) {
        std::ofstream touch(index_path(), std::ios::app);
        if (!touch) {
            throw StoreIoError("cannot create " + index_path().string());
        }
    }
}

std::string Store::ingest(const PixelGrid& image, const RoiRect& roi,
                          const PatientRecord& record, const SecretKey& key,
                          const EmbedParams& params, bool archiveOriginal,
                          const IngestHook& hook) {
    const std::vector<std::uint8_t> originalBytes = write_pgm(image);
    const std::string id = sha256_hex(originalBytes);

    LockFile lock(lock_path());
    for (const StoreEntry& entry : list()) {
        if (entry.id == id) {
            throw DuplicateRecord("store already holds record " + id);
        }
    }

    // Embed before touching the filesystem so embed errors leave no trace.
    const PixelGrid watermarked = embed(image, roi, record, key, params);
    const std::vector<std::uint8_t> objectBytes = write_pgm(watermarked);

    auto notify = [&hook](IngestStage stage) {
        if (hook) {
            hook(stage);
        }
    };

    if (archiveOriginal) {
        write_file_atomic(archive_dir() / (id + ".pgm"), originalBytes,
                          [&] { notify(IngestStage::ArchiveTempWritten); });
        notify(IngestStage::ArchiveRenamed);
    }
    write_file_atomic(objects_dir() / (id + ".pgm"), objectBytes,
                      [&] { notify(IngestStage::ObjectTempWritten); });
    notify(IngestStage::ObjectRenamed);

    nlohmann::json line = {
        {"id", id},
        {"patient", record.count("id") ? record.at("id") : ""},
        {"roi", {{"x", roi.x}, {"y", roi.y}, {"w", roi.w}, {"h", roi.h}}},
        {"created_at", iso8601_utc_now()},
        {"s", params.scale},
    };
    {
        std::ofstream out(index_path(), std::ios::app);
        if (!out) {
            throw StoreIoError("cannot append to " + index_path().string());
        }
        out << line.dump() << "\n";
        out.flush();
        if (!out) {
            throw StoreIoError("short write to " + index_path().string());
        }
    }
    notify(IngestStage::IndexAppended);
    return id;
}

PixelGrid Store::fetch(const std::string& id) const {
    bool known = false;
    for (const StoreEntry& entry : list()) {
        if (entry.id == id) {
            known = true;
            break;
        }
    }
    if (!known) {
        throw UnknownId("store has no record " + id);
    }
    const fs::path path = objects_dir() / (id + ".pgm");
    if (!fs::exists(path)) {
        throw CorruptObject("indexed object file is missing: " + path.string());
    }
    try {
        return read_pgm(read_file(path));
    } catch (const Error& e) {
        throw CorruptObject("object " + id + " does not decode: " + e.what());
    }
}

PixelGrid Store::fetch_original(const std::string& id) const {
    bool known = false;
    for (const StoreEntry& entry : list()) {
        if (entry.id == id) {
            known = true;
            break;
        }
    }
    if (!known) {
        throw UnknownId("store has no record " + id);
    }
    const fs::path path = archive_dir() / (id + ".pgm");
    if (!fs::exists(path)) {
        throw NotArchived("record " + id + " was ingested without archival");
    }
    try {
        return read_pgm(read_file(path));
    } catch (const Error& e) {
        throw CorruptObject("archived original " + id + " does not decode: " + e.what());
    }
}

std::vector<StoreEntry> Store::list() const {
    std::ifstream in(index_path());
    if (!in) {
        throw StoreIoError("cannot open " + index_path().string());
    }
    std::vector<StoreEntry> entries;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) {
            continue;
        }
        const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() ||
            !is_hex_id(j["id"].get<std::string>()) || !j.contains("roi") ||
            !j["roi"].is_object()) {
            throw CorruptIndex("index line " + std::to_string(lineNo) + " is not a valid entry");
        }
        StoreEntry entry;
        entry.id = j["id"].get<std::string>();
        entry.patientId = j.value("patient", "");
        entry.roi.x = j["roi"].value("x", 0u);
        entry.roi.y = j["roi"].value("y", 0u);
        entry.roi.w = j["roi"].value("w", 0u);
        entry.roi.h = j["roi"].value("h", 0u);
        entry.createdAt = j.value("created_at", "");
        entry.scale = j.value("s", 2u);
        entries.push_back(std::move(entry));
    }
    return entries;
}

} // namespace medimark
