#include "l3guard/forge.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "l3guard/errors.hpp"
#include "l3guard/rng.hpp"
#include "l3guard/sdl_store.hpp"

namespace l3guard {

namespace {

// Independent streams per forge stage, so changing one count does not
// reshuffle the others.
Rng stage_rng(std::uint64_t seed, std::uint64_t stage)
{
    return Rng(seed ^ (0x9E3779B97F4A7C15ULL * (stage + 1)));
}

std::uint32_t session_length() { return static_cast<std::uint32_t>(message_catalog().size()); }

std::uint32_t effective_ues(const ForgeConfig& c)
{
    const std::uint32_t benign = c.target_total - c.n_attacks;
    if (c.n_ue != 0)
        return c.n_ue;
    return (benign + session_length() - 1) / session_length();
}

// Draws k distinct indices from [0, n) in random order.
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + rng.below(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

void renumber(std::vector<Layer3Message>& messages)
{
    for (std::size_t i = 0; i < messages.size(); ++i)
        messages[i].seq = i;
}

} // namespace

void ForgeConfig::validate() const
{
    if (n_attacks >= target_total)
        throw ConfigError("n_attacks must be smaller than target_total");
    if (n_hypoglyph_attacks > n_attacks)
        throw ConfigError("n_hypoglyph_attacks exceeds n_attacks");
    const std::uint32_t benign = target_total - n_attacks;
    const std::uint32_t ues = effective_ues(*this);
    if (ues == 0)
        throw ConfigError("at least one UE is required");
    const std::uint64_t len = session_length();
    if (static_cast<std::uint64_t>(ues - 1) * len >= benign || static_cast<std::uint64_t>(ues) * len < benign)
        throw ConfigError(std::to_string(benign) + " benign messages cannot be split into "
                          + std::to_string(ues) + " sessions of " + std::to_string(len)
                          + " (last one possibly truncated)");
}

std::vector<Layer3Message> generate_benign(const ForgeConfig& config)
{
    config.validate();
    auto rng = stage_rng(config.seed, 0);
    const std::uint32_t benign = config.target_total - config.n_attacks;
    const std::uint32_t ues = effective_ues(config);

    std::vector<Layer3Message> out;
    out.reserve(benign);
    std::unordered_set<std::uint32_t> used_tmsi;
    for (std::uint32_t ue = 0; ue < ues && out.size() < benign; ++ue) {
        std::uint32_t tmsi;
        do {
            tmsi = static_cast<std::uint32_t>(rng.next() >> 32);
        } while (!used_tmsi.insert(tmsi).second);
        const auto rnti = static_cast<std::uint16_t>(rng.between(1, 65535));
        for (auto& m : canonical_session(ue, Tmsi{tmsi}, rnti)) {
            if (out.size() == benign)
                break;
            out.push_back(std::move(m));
        }
    }
    renumber(out);
    return out;
}

std::vector<Layer3Message> inject_blind_dos(std::vector<Layer3Message> benign, const ForgeConfig& config)
{
    if (config.n_attacks == 0)
        return benign;
    if (benign.empty())
        throw ConfigError("cannot inject attacks into an empty dataset");

    // TMSIs of every UE whose session began before a given UE's session.
    std::vector<Tmsi> earlier_tmsis;
    std::vector<std::size_t> earlier_count_at; // per benign index
    std::unordered_set<std::uint32_t> seen_ue;
    earlier_count_at.reserve(benign.size());
    for (const auto& m : benign) {
        if (seen_ue.insert(m.ue_id).second)
            earlier_tmsis.push_back(m.tmsi);
        // the current UE's own TMSI is the last one pushed; exclude it
        earlier_count_at.push_back(earlier_tmsis.size() - 1);
    }

    // A gap g means "insert before benign[g]"; it must lie inside a session
    // and some other UE must already exist to steal an identity from.
    std::vector<std::size_t> gaps;
    for (std::size_t g = 1; g < benign.size(); ++g)
        if (benign[g - 1].ue_id == benign[g].ue_id && earlier_count_at[g] > 0)
            gaps.push_back(g);
    if (gaps.size() < config.n_attacks)
        throw ConfigError("only " + std::to_string(gaps.size()) + " in-session positions for "
                          + std::to_string(config.n_attacks) + " attacks");

    auto rng = stage_rng(config.seed, 1);
    std::vector<std::size_t> chosen;
    for (auto i : sample_indices(rng, gaps.size(), config.n_attacks))
        chosen.push_back(gaps[i]);
    std::sort(chosen.begin(), chosen.end());

    std::vector<Layer3Message> out;
    out.reserve(benign.size() + chosen.size());
    std::size_t next = 0;
    for (std::size_t g = 0; g < benign.size(); ++g) {
        if (next < chosen.size() && chosen[next] == g) {
            Layer3Message attack;
            attack.ue_id = benign[g].ue_id;
            attack.protocol = Protocol::RRC;
            attack.name = "RRCSetupRequest";
            attack.tmsi = earlier_tmsis[rng.below(earlier_count_at[g])];
            attack.rnti = static_cast<std::uint16_t>(rng.between(1, 65535));
            attack.label = Label::BlindDoS;
            out.push_back(std::move(attack));
            ++next;
        }
        out.push_back(std::move(benign[g]));
    }
    renumber(out);
    return out;
}

std::vector<std::uint64_t> select_hypoglyph_targets(std::span<const Layer3Message> dataset,
                                                    const ForgeConfig& config,
                                                    const SubstitutionMap& map)
{
    std::vector<std::uint64_t> attacks, normals;
    for (const auto& m : dataset) {
        if (m.seq <= config.hypoglyph_after_seq || apply_hypoglyphs(m.name, map) == m.name)
            continue;
        (m.label == Label::BlindDoS ? attacks : normals).push_back(m.seq);
    }
    if (attacks.size() < config.n_hypoglyph_attacks)
        throw ConfigError("only " + std::to_string(attacks.size()) + " attack candidates after seq "
                          + std::to_string(config.hypoglyph_after_seq));
    if (normals.size() < config.n_hypoglyph_normals)
        throw ConfigError("only " + std::to_string(normals.size()) + " normal candidates after seq "
                          + std::to_string(config.hypoglyph_after_seq));

    auto rng = stage_rng(config.seed, 2);
    std::vector<std::uint64_t> out;
    for (auto i : sample_indices(rng, attacks.size(), config.n_hypoglyph_attacks))
        out.push_back(attacks[i]);
    for (auto i : sample_indices(rng, normals.size(), config.n_hypoglyph_normals))
        out.push_back(normals[i]);
    std::sort(out.begin(), out.end());
    return out;
}

ForgeResult forge_dataset(const ForgeConfig& config, const SubstitutionMap& map)
{
    config.validate();
    auto dataset = inject_blind_dos(generate_benign(config), config);

    SdlStore sdl;
    for (auto& m : dataset)
        sdl.append(std::move(m));

    ForgeResult result;
    result.hypoglyphed = select_hypoglyph_targets(sdl.messages(), config, map);
    for (auto seq : result.hypoglyphed)
        sdl.mutate(seq, map);
    result.messages = sdl.messages();
    return result;
}

} // namespace l3guard
