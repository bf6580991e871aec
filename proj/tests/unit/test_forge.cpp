#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <unordered_map>

#include "l3guard/errors.hpp"
#include "l3guard/forge.hpp"
#include "l3guard/hypoglyph.hpp"

using namespace l3guard;

TEST_CASE("generate_benign defaults")
{
    const auto b = generate_benign(ForgeConfig{});
    CHECK(b.size() == 996);
    std::set<std::uint32_t> tmsis;
    std::uint32_t last_ue = 0;
    std::set<std::uint32_t> finished;
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(b[i].seq == i);
        CHECK(b[i].label == Label::Normal);
        if (b[i].ue_id != last_ue) {
            // UE-grouped: a UE never reappears once another has started
            CHECK(finished.insert(last_ue).second);
            CHECK_FALSE(finished.contains(b[i].ue_id));
            last_ue = b[i].ue_id;
        }
        tmsis.insert(b[i].tmsi.value);
    }
    CHECK(tmsis.size() == 83);
}

TEST_CASE("generate_benign small config and truncation")
{
    ForgeConfig c;
    c.n_ue = 1;
    c.target_total = 13;
    c.n_attacks = 1;
    c.n_hypoglyph_attacks = 0;
    c.n_hypoglyph_normals = 0;
    const auto b = generate_benign(c);
    CHECK(b.size() == 12);
    for (const auto& m : b)
        CHECK(m.ue_id == 0);

    c.n_ue = 2;
    c.target_total = 20;
    c.n_attacks = 0;
    const auto t = generate_benign(c);
    CHECK(t.size() == 20);
    CHECK(t.back().ue_id == 1);

    c.n_ue = 3; // 20 messages cannot fill 3 sessions
    CHECK_THROWS_AS(generate_benign(c), ConfigError);
    c.n_ue = 1;
    CHECK_THROWS_AS(generate_benign(c), ConfigError);
    c.n_ue = 0;
    CHECK(generate_benign(c).size() == 20);
}

TEST_CASE("config validation")
{
    ForgeConfig c;
    c.n_attacks = c.target_total;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ForgeConfig{};
    c.n_hypoglyph_attacks = 21;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("inject_blind_dos defaults")
{
    ForgeConfig c;
    const auto benign = generate_benign(c);
    std::unordered_map<std::uint32_t, std::uint32_t> ue_of_tmsi;
    for (const auto& m : benign)
        ue_of_tmsi[m.tmsi.value] = m.ue_id;

    const auto out = inject_blind_dos(benign, c);
    REQUIRE(out.size() == 1016);
    int attacks = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].seq == i);
        if (out[i].label != Label::BlindDoS)
            continue;
        ++attacks;
        CHECK(out[i].name == "RRCSetupRequest");
        REQUIRE(ue_of_tmsi.contains(out[i].tmsi.value)); // an existing identity
        CHECK(ue_of_tmsi[out[i].tmsi.value] < out[i].ue_id);
        // strictly inside the host UE's session
        REQUIRE(i > 0);
        REQUIRE(i + 1 < out.size());
        CHECK(out[i - 1].ue_id == out[i].ue_id);
        CHECK(out[i + 1].ue_id == out[i].ue_id);
        CHECK(out[i].rnti >= 1);
    }
    CHECK(attacks == 20);
    CHECK(static_cast<double>(attacks) / out.size() == doctest::Approx(0.0197).epsilon(0.01));

    c.n_attacks = 0;
    const auto same = inject_blind_dos(benign, c);
    CHECK(same == benign);
}

TEST_CASE("injected messages are never first in their UE's stream")
{
    for (std::uint64_t seed : {1u, 2u, 3u, 77u}) {
        ForgeConfig c;
        c.seed = seed;
        const auto out = forge_dataset(c).messages;
        std::set<std::uint32_t> seen;
        for (const auto& m : out) {
            if (m.label == Label::BlindDoS)
                CHECK(seen.contains(m.ue_id));
            seen.insert(m.ue_id);
        }
    }
}

TEST_CASE("select_hypoglyph_targets")
{
    ForgeConfig c;
    const auto ds = inject_blind_dos(generate_benign(c), c);
    const auto seqs = select_hypoglyph_targets(ds, c);
    REQUIRE(seqs.size() == 5);
    int attacks = 0;
    for (auto s : seqs) {
        CHECK(s > 700);
        attacks += ds[s].label == Label::BlindDoS;
    }
    CHECK(attacks == 2);
    CHECK(std::is_sorted(seqs.begin(), seqs.end()));

    c.n_hypoglyph_attacks = 0;
    c.n_hypoglyph_normals = 0;
    CHECK(select_hypoglyph_targets(ds, c).empty());

    c.n_hypoglyph_attacks = 20; // most attacks sit before seq 700
    CHECK_THROWS_AS(select_hypoglyph_targets(ds, c), ConfigError);
}

TEST_CASE("forge_dataset is deterministic and marks manipulated records")
{
    const auto a = forge_dataset(ForgeConfig{});
    const auto b = forge_dataset(ForgeConfig{});
    CHECK(serialize_dataset(a.messages) == serialize_dataset(b.messages));
    ForgeConfig other;
    other.seed = 2;
    CHECK(serialize_dataset(forge_dataset(other).messages) != serialize_dataset(a.messages));

    int manipulated = 0;
    for (const auto& m : a.messages) {
        if (m.manipulated) {
            ++manipulated;
            CHECK(contains_hypoglyph(m.name));
            CHECK(std::find(a.hypoglyphed.begin(), a.hypoglyphed.end(), m.seq) != a.hypoglyphed.end());
        } else {
            CHECK_FALSE(contains_hypoglyph(m.name));
        }
    }
    CHECK(manipulated == 5);
}
