#pragma once

#include <cstdint>
#include <vector>

#include "l3guard/hypoglyph.hpp"
#include "l3guard/message.hpp"

namespace l3guard {

struct ForgeConfig {
    std::uint64_t seed = 1;
    std::uint32_t n_ue = 83; // 0 = derive from target_total
    std::uint32_t target_total = 1016;
    std::uint32_t n_attacks = 20;
    std::uint32_t n_hypoglyph_attacks = 2;
    std::uint32_t n_hypoglyph_normals = 3;
    /// Hypoglyph targets are drawn from seq > this (the baseline's test region).
    std::uint64_t hypoglyph_after_seq = 700;

    /// Throws ConfigError on inconsistent counts.
    void validate() const;
};

/// UE-grouped benign sessions, target_total - n_attacks messages, seq 0..N-1.
std::vector<Layer3Message> generate_benign(const ForgeConfig& config);

/// Inserts n_attacks RRCSetupRequest messages labeled BlindDoS. Each sits
/// between two messages of an ongoing session, carries that session's ue_id,
/// the TMSI of a UE whose session started earlier, and a random RNTI.
std::vector<Layer3Message> inject_blind_dos(std::vector<Layer3Message> benign, const ForgeConfig& config);

/// Seqs to hypoglyph: n_hypoglyph_attacks BlindDoS then n_hypoglyph_normals
/// Normal messages, all after hypoglyph_after_seq, returned in ascending order.
std::vector<std::uint64_t> select_hypoglyph_targets(std::span<const Layer3Message> dataset,
                                                    const ForgeConfig& config,
                                                    const SubstitutionMap& map = SubstitutionMap::builtin_default());

struct ForgeResult {
    std::vector<Layer3Message> messages;
    std::vector<std::uint64_t> hypoglyphed;
};

/// Full scenario: benign producer appends to an SDL store, attacks are
/// injected, then the malicious xApp rewrites the selected records in place.
ForgeResult forge_dataset(const ForgeConfig& config,
                          const SubstitutionMap& map = SubstitutionMap::builtin_default());

} // namespace l3guard
