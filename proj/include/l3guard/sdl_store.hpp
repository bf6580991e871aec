#pragma once

#include <cstdint>
#include <filesystem>
#include <shared_mutex>
#include <vector>

#include "l3guard/hypoglyph.hpp"
#include "l3guard/message.hpp"

namespace l3guard {

struct SdlRecord {
    Layer3Message message;
    std::uint64_t version = 1;
};

/// Position of one reader in the store. Each reader owns its cursor.
struct ReaderCursor {
    std::uint64_t position = 0;
};

// Shared Data Layer stand-in. There is deliberately no caller identity on any
// operation: any xApp holding a reference can append, read and rewrite.
class SdlStore {
public:
    SdlStore() = default;
    SdlStore(const SdlStore&) = delete;
    SdlStore& operator=(const SdlStore&) = delete;

    /// Throws OrderingError unless message.seq == count().
    void append(Layer3Message message);

    /// Views of every record at or after the cursor; advances the cursor.
    std::vector<MessageView> poll_new(ReaderCursor& cursor) const;

    /// Rewrites the stored name through the substitution map and bumps the
    /// record version. Throws NotFoundError for an unknown seq.
    void mutate(std::uint64_t seq, const SubstitutionMap& map);

    std::uint64_t count() const;
    SdlRecord record(std::uint64_t seq) const;

    /// Full messages including ground truth; for the scenario driver only.
    std::vector<Layer3Message> messages() const;

    /// Dataset JSON-lines format plus a "version" key per record.
    void snapshot(const std::filesystem::path& path) const;

private:
    mutable std::shared_mutex mutex_;
    std::vector<SdlRecord> records_;
};

} // namespace l3guard
