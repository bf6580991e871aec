#include "l3guard/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include "l3guard/errors.hpp"

namespace l3guard {

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

} // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j)
{
    RunConfig c;
    try {
        if (j.contains("forge")) {
            const auto& f = j.at("forge");
            read_field(f, "seed", c.forge.seed);
            read_field(f, "n_ue", c.forge.n_ue);
            read_field(f, "target_total", c.forge.target_total);
            read_field(f, "n_attacks", c.forge.n_attacks);
            read_field(f, "n_hypoglyph_attacks", c.forge.n_hypoglyph_attacks);
            read_field(f, "n_hypoglyph_normals", c.forge.n_hypoglyph_normals);
            read_field(f, "hypoglyph_after_seq", c.forge.hypoglyph_after_seq);
        }
        if (j.contains("backend"))
            c.backend = BackendConfig::from_json(j.at("backend"));
        if (j.contains("ae")) {
            const auto& a = j.at("ae");
            read_field(a, "epochs", c.ae.epochs);
            read_field(a, "learning_rate", c.ae.learning_rate);
            read_field(a, "threshold_percentile", c.ae.threshold_percentile);
            read_field(a, "seed", c.ae.seed);
        }
        read_field(j, "test_split_start", c.test_split_start);
        read_field(j, "align_splits", c.align_splits);
        read_field(j, "jobs", c.jobs);
        read_field(j, "template_path", c.template_path);
        read_field(j, "fixture_path", c.fixture_path);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void RunConfig::apply_environment()
{
    backend.apply_environment();
    if (const char* v = std::getenv("L3GUARD_TEMPLATE"))
        template_path = v;
}

nlohmann::ordered_json RunConfig::to_json() const
{
    nlohmann::ordered_json j;
    j["forge"] = {{"seed", forge.seed},
                  {"n_ue", forge.n_ue},
                  {"target_total", forge.target_total},
                  {"n_attacks", forge.n_attacks},
                  {"n_hypoglyph_attacks", forge.n_hypoglyph_attacks},
                  {"n_hypoglyph_normals", forge.n_hypoglyph_normals},
                  {"hypoglyph_after_seq", forge.hypoglyph_after_seq}};
    j["backend"] = backend.to_json();
    j["ae"] = {{"epochs", ae.epochs},
               {"learning_rate", ae.learning_rate},
               {"threshold_percentile", ae.threshold_percentile},
               {"seed", ae.seed}};
    j["test_split_start"] = test_split_start;
    j["align_splits"] = align_splits;
    j["jobs"] = jobs;
    j["template_path"] = template_path;
    j["fixture_path"] = fixture_path;
    return j;
}

} // namespace l3guard
