#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <atomic>
#include <thread>
#include <type_traits>

#include "l3guard/errors.hpp"
#include "l3guard/forge.hpp"
#include "l3guard/sdl_store.hpp"
#include "l3guard/utf8.hpp"

using namespace l3guard;

namespace {

Layer3Message msg(std::uint64_t seq, std::string name = "RRCSetupRequest")
{
    Layer3Message m;
    m.seq = seq;
    m.ue_id = static_cast<std::uint32_t>(seq / 12);
    m.name = std::move(name);
    m.tmsi = Tmsi{static_cast<std::uint32_t>(seq / 12 + 1)};
    m.rnti = 5;
    return m;
}

} // namespace

// mutate is callable with just (seq, map): there is no credential to present.
static_assert(std::is_invocable_v<decltype(&SdlStore::mutate), SdlStore&, std::uint64_t, const SubstitutionMap&>);
static_assert(std::is_invocable_v<decltype(&SdlStore::append), SdlStore&, Layer3Message>);

TEST_CASE("append enforces seq order")
{
    SdlStore s;
    s.append(msg(0));
    CHECK(s.count() == 1);
    for (std::uint64_t i = 1; i < 5; ++i)
        s.append(msg(i));
    s.append(msg(5));
    CHECK_THROWS_AS(s.append(msg(7)), OrderingError);
    CHECK_THROWS_AS(s.append(msg(3)), OrderingError);
    CHECK(s.count() == 6);
}

TEST_CASE("forged dataset fills the store")
{
    SdlStore s;
    for (auto& m : forge_dataset(ForgeConfig{}).messages)
        s.append(std::move(m));
    CHECK(s.count() == 1016);
}

TEST_CASE("poll_new advances independent cursors")
{
    SdlStore s;
    ReaderCursor a, b;
    CHECK(s.poll_new(a).empty());
    for (std::uint64_t i = 0; i < 3; ++i)
        s.append(msg(i));
    const auto first = s.poll_new(a);
    REQUIRE(first.size() == 3);
    for (std::uint64_t i = 0; i < 3; ++i)
        CHECK(first[i].seq == i);
    CHECK(a.position == 3);
    CHECK(s.poll_new(a).empty());
    s.append(msg(3));
    CHECK(s.poll_new(a).size() == 1);
    CHECK(s.poll_new(b).size() == 4);
}

TEST_CASE("mutate rewrites the name and bumps the version")
{
    SdlStore s;
    s.append(msg(0));
    s.append(msg(1, "RRCSetup"));
    s.mutate(0, SubstitutionMap::builtin_default());
    const auto rec = s.record(0);
    CHECK(rec.version == 2);
    CHECK(rec.message.manipulated);
    CHECK(rec.message.name != "RRCSetupRequest");
    const auto cps = utf8::decode(rec.message.name);
    CHECK(std::count(cps.begin(), cps.end(), U'С') == 1);
    CHECK(std::count(cps.begin(), cps.end(), U'е') == 3);
    CHECK(std::count(cps.begin(), cps.end(), U'՛') == 1);
    CHECK(rec.message.tmsi == msg(0).tmsi);
    CHECK(rec.message.rnti == msg(0).rnti);

    ReaderCursor c;
    const auto views = s.poll_new(c);
    CHECK(views[0].name == rec.message.name);
    CHECK(views[1].name == "RRCSetup");
}

TEST_CASE("empty map mutation only bumps the version")
{
    SdlStore s;
    s.append(msg(0));
    s.mutate(0, SubstitutionMap{});
    CHECK(s.record(0).version == 2);
    CHECK(s.record(0).message.name == "RRCSetupRequest");
    CHECK_FALSE(s.record(0).message.manipulated);
    CHECK_THROWS_AS(s.mutate(9, SubstitutionMap{}), NotFoundError);
}

TEST_CASE("interleaved appends and mutations keep a gapless history")
{
    SdlStore s;
    for (std::uint64_t i = 0; i < 200; ++i) {
        s.append(msg(i, "SecurityModeCommand"));
        if (i % 7 == 3)
            s.mutate(i / 2, SubstitutionMap::builtin_default());
    }
    ReaderCursor c;
    const auto all = s.poll_new(c);
    REQUIRE(all.size() == s.count());
    for (std::size_t i = 0; i < all.size(); ++i)
        CHECK(all[i].seq == i);
}

TEST_CASE("concurrent readers see a consistent prefix")
{
    SdlStore s;
    std::atomic<bool> done{false};
    std::atomic<int> violations{0};
    auto reader = [&] {
        ReaderCursor c;
        std::uint64_t expect = 0;
        while (!done || c.position < s.count()) {
            for (const auto& v : s.poll_new(c)) {
                if (v.seq != expect)
                    ++violations;
                ++expect;
            }
        }
    };
    std::thread r1(reader), r2(reader);
    for (std::uint64_t i = 0; i < 2000; ++i) {
        s.append(msg(i));
        if (i % 10 == 0)
            s.mutate(i, SubstitutionMap::builtin_default());
    }
    done = true;
    r1.join();
    r2.join();
    CHECK(violations == 0);
}

TEST_CASE("snapshot carries the record version")
{
    SdlStore s;
    s.append(msg(0));
    s.mutate(0, SubstitutionMap::builtin_default());
    const auto path = std::filesystem::temp_directory_path() / "l3guard_snapshot.jsonl";
    s.snapshot(path);
    std::ifstream in(path);
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("version") == 2);
    CHECK(j.at("manipulated") == true);
    CHECK(read_dataset(path).front().name == s.record(0).message.name);
}
