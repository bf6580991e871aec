#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "l3guard/autoencoder.hpp"
#include "l3guard/forge.hpp"
#include "l3guard/harness.hpp"
#include "l3guard/llm_detector.hpp"

namespace l3guard {

/// Everything a CLI run depends on. Loaded from a JSON file, then the
/// L3GUARD_* environment variables, then command-line flags.
struct RunConfig {
    ForgeConfig forge;
    BackendConfig backend;
    AeHyperparameters ae;
    std::uint64_t test_split_start = 700;
    bool align_splits = false;
    int jobs = 1;
    std::string template_path;
    std::string fixture_path;

    static RunConfig load(const std::filesystem::path& path);
    static RunConfig from_json(const nlohmann::json& j);
    void apply_environment();
    nlohmann::ordered_json to_json() const;
};

} // namespace l3guard
