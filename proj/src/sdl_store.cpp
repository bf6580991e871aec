#include "l3guard/sdl_store.hpp"

#include <fstream>
#include <mutex>

#include "l3guard/errors.hpp"

namespace l3guard {

void SdlStore::append(Layer3Message message)
{
    std::unique_lock lock(mutex_);
    if (message.seq != records_.size())
        throw OrderingError("append of seq " + std::to_string(message.seq) + " to store holding "
                            + std::to_string(records_.size()) + " records");
    records_.push_back({std::move(message), 1});
}

std::vector<MessageView> SdlStore::poll_new(ReaderCursor& cursor) const
{
    std::shared_lock lock(mutex_);
    std::vector<MessageView> out;
    if (cursor.position < records_.size()) {
        out.reserve(records_.size() - cursor.position);
        for (auto i = cursor.position; i < records_.size(); ++i)
            out.push_back(view_of(records_[i].message));
    }
    cursor.position = records_.size();
    return out;
}

void SdlStore::mutate(std::uint64_t seq, const SubstitutionMap& map)
{
    std::unique_lock lock(mutex_);
    if (seq >= records_.size())
        throw NotFoundError("no record with seq " + std::to_string(seq));
    auto& rec = records_[seq];
    auto altered = apply_hypoglyphs(rec.message.name, map);
    if (altered != rec.message.name) {
        rec.message.name = std::move(altered);
        rec.message.manipulated = true;
    }
    ++rec.version;
}

std::uint64_t SdlStore::count() const
{
    std::shared_lock lock(mutex_);
    return records_.size();
}

SdlRecord SdlStore::record(std::uint64_t seq) const
{
    std::shared_lock lock(mutex_);
    if (seq >= records_.size())
        throw NotFoundError("no record with seq " + std::to_string(seq));
    return records_[seq];
}

std::vector<Layer3Message> SdlStore::messages() const
{
    std::shared_lock lock(mutex_);
    std::vector<Layer3Message> out;
    out.reserve(records_.size());
    for (const auto& r : records_)
        out.push_back(r.message);
    return out;
}

void SdlStore::snapshot(const std::filesystem::path& path) const
{
    std::shared_lock lock(mutex_);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << kDatasetHeader << '\n';
    for (const auto& r : records_) {
        auto j = to_json(r.message);
        j["version"] = r.version;
        out << j.dump() << '\n';
    }
    if (!out)
        throw IoError("write failed: " + path.string());
}

} // namespace l3guard
