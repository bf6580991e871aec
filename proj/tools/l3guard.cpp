// l3guard: forge datasets, run the SDL attacker, train the baseline and
// evaluate detectors from the command line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "l3guard/errors.hpp"
#include "l3guard/forge.hpp"
#include "l3guard/harness.hpp"
#include "l3guard/run_config.hpp"
#include "l3guard/sdl_store.hpp"

namespace fs = std::filesystem;
using namespace l3guard;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kBackend = 3 };

struct CommonOptions {
    std::string config_path;
};

RunConfig load_config(const std::string& path)
{
    RunConfig cfg = path.empty() ? RunConfig{} : RunConfig::load(path);
    cfg.apply_environment();
    return cfg;
}

SubstitutionMap substitution_map(const std::string& table_path)
{
    if (table_path.empty())
        return SubstitutionMap::builtin_default();
    return SubstitutionMap::from_table(ConfusableTable::load(table_path));
}

fs::path model_path(const fs::path& dir, int w) { return dir / ("ae_w" + std::to_string(w) + ".model"); }

std::vector<int> window_list(bool all, int w)
{
    if (all) {
        std::vector<int> ws;
        for (int i = kMinWindow; i <= kMaxWindow; ++i)
            ws.push_back(i);
        return ws;
    }
    check_window_size(w);
    return {w};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Layer-3 SDL manipulation testbed: dataset forge, attacker, AutoEncoder baseline and LLM detector"};
    app.require_subcommand(1);
    CommonOptions common;
    app.add_option("--config", common.config_path, "JSON run configuration")->check(CLI::ExistingFile);

    // forge
    auto* forge = app.add_subcommand("forge", "Synthesize the evaluation dataset");
    std::string forge_out, forge_snapshot, forge_table;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> ues, total, attacks, hyp_attacks, hyp_normals;
    forge->add_option("--out,-o", forge_out, "Dataset file to write (JSON lines)")->required();
    forge->add_option("--seed", seed, "Forge seed");
    forge->add_option("--ues", ues, "Number of UEs (0 derives it from --total)");
    forge->add_option("--total", total, "Total messages including attacks");
    forge->add_option("--attacks", attacks, "Blind DoS messages to inject");
    forge->add_option("--hypoglyph-attacks", hyp_attacks, "Attack messages to hypoglyph");
    forge->add_option("--hypoglyph-normals", hyp_normals, "Normal messages to hypoglyph");
    forge->add_option("--table", forge_table, "Confusable table file; default is the C/e/q map")
        ->check(CLI::ExistingFile);
    forge->add_option("--snapshot", forge_snapshot, "Also write the SDL snapshot (with record versions)");

    // attack
    auto* attack = app.add_subcommand("attack", "Hypoglyph records of an existing dataset through the SDL");
    std::string attack_in, attack_out, attack_table;
    std::vector<std::uint64_t> attack_seqs;
    attack->add_option("--dataset,-d", attack_in, "Input dataset")->required()->check(CLI::ExistingFile);
    attack->add_option("--out,-o", attack_out, "Output dataset")->required();
    attack->add_option("--seq", attack_seqs, "Seqs to rewrite")->required();
    attack->add_option("--table", attack_table, "Confusable table file")->check(CLI::ExistingFile);

    // train-ae
    auto* train = app.add_subcommand("train-ae", "Train AutoEncoder baselines on the normal prefix");
    std::string train_dataset, train_out = "models";
    int train_w = 1;
    bool train_all = false;
    std::size_t train_count = 700;
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<std::uint64_t> ae_seed;
    train->add_option("--dataset,-d", train_dataset, "Dataset file")->required()->check(CLI::ExistingFile);
    auto* train_w_opt = train->add_option("--window,-w", train_w, "Window size 1..10");
    train->add_flag("--all", train_all, "Train every window size 1..10")->excludes(train_w_opt);
    train->add_option("--out-dir", train_out, "Directory for model files")->capture_default_str();
    train->add_option("--train-count", train_count, "Normal messages used for training")->capture_default_str();
    train->add_option("--epochs", epochs, "Gradient descent epochs");
    train->add_option("--lr", lr, "Learning rate");
    train->add_option("--seed", ae_seed, "Weight initialization seed");

    // detect
    auto* detect = app.add_subcommand("detect", "Run a detector over a dataset and write reports");
    std::string detect_dataset, detector = "llm", backend = "mock", fixture, tmpl_path, model_dir = "models",
                                out_dir = "reports", endpoint, model_name;
    int detect_w = 1;
    bool detect_all = false, align = false, det_clock = false;
    std::optional<int> jobs;
    std::optional<double> timeout;
    detect->add_option("--dataset,-d", detect_dataset, "Dataset file")->required()->check(CLI::ExistingFile);
    detect->add_option("--detector", detector, "ae or llm")->capture_default_str()->check(CLI::IsMember({"ae", "llm"}));
    detect->add_option("--backend", backend, "LLM backend: scripted, mock or remote")->capture_default_str()
        ->check(CLI::IsMember({"scripted", "mock", "remote"}));
    detect->add_option("--fixture", fixture, "Scripted backend responses (JSON array of strings)");
    detect->add_option("--template", tmpl_path, "Prompt template (JSON)")->check(CLI::ExistingFile);
    detect->add_option("--model-dir", model_dir, "Directory holding ae_w<w>.model files")->capture_default_str();
    auto* detect_w_opt = detect->add_option("--window,-w", detect_w, "Window size 1..10");
    detect->add_flag("--all", detect_all, "Sweep window sizes 1..10")->excludes(detect_w_opt);
    detect->add_option("--out-dir", out_dir, "Report directory")->capture_default_str();
    detect->add_flag("--align-splits", align, "Evaluate the LLM on the baseline's test split only");
    detect->add_flag("--deterministic-clock", det_clock, "Fixed-tick timing for reproducible report files");
    detect->add_option("--jobs", jobs, "Window sizes run concurrently");
    detect->add_option("--endpoint", endpoint, "Remote chat-completion URL");
    detect->add_option("--model-name", model_name, "Remote model identifier");
    detect->add_option("--timeout", timeout, "Remote request timeout, seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        auto cfg = load_config(common.config_path);

        if (*forge) {
            if (seed) cfg.forge.seed = *seed;
            if (ues) cfg.forge.n_ue = *ues;
            if (total) cfg.forge.target_total = *total;
            if (attacks) cfg.forge.n_attacks = *attacks;
            if (hyp_attacks) cfg.forge.n_hypoglyph_attacks = *hyp_attacks;
            if (hyp_normals) cfg.forge.n_hypoglyph_normals = *hyp_normals;
            if (attacks && *attacks == 0 && !hyp_attacks)
                cfg.forge.n_hypoglyph_attacks = 0;
            const auto result = forge_dataset(cfg.forge, substitution_map(forge_table));
            write_dataset(result.messages, forge_out);
            if (!forge_snapshot.empty()) {
                SdlStore sdl;
                for (const auto& m : result.messages)
                    sdl.append(m);
                sdl.snapshot(forge_snapshot);
            }
            std::size_t n_attack = 0, n_manip = 0;
            for (const auto& m : result.messages) {
                n_attack += m.label == Label::BlindDoS;
                n_manip += m.manipulated;
            }
            std::printf("wrote %s: total=%zu attacks=%zu hypoglyphed=%zu\n", forge_out.c_str(),
                        result.messages.size(), n_attack, n_manip);
            return kOk;
        }

        if (*attack) {
            SdlStore sdl;
            for (auto& m : read_dataset(attack_in))
                sdl.append(std::move(m));
            const auto map = substitution_map(attack_table);
            for (auto s : attack_seqs)
                sdl.mutate(s, map);
            write_dataset(sdl.messages(), attack_out);
            std::printf("rewrote %zu record(s) into %s\n", attack_seqs.size(), attack_out.c_str());
            return kOk;
        }

        if (*train) {
            if (epochs) cfg.ae.epochs = *epochs;
            if (lr) cfg.ae.learning_rate = *lr;
            if (ae_seed) cfg.ae.seed = *ae_seed;
            const auto dataset = read_dataset(train_dataset);
            const auto training = normal_training_prefix(dataset, train_count);
            fs::create_directories(train_out);
            for (int w : window_list(train_all, train_w)) {
                const auto model = train_autoencoder(training, w, cfg.ae);
                model.save(model_path(train_out, w));
                std::printf("w=%d |V|=%zu loss %.6g -> %.6g threshold=%.9g\n", w, model.vocab.size(),
                            model.initial_loss, model.final_loss, model.threshold);
            }
            return kOk;
        }

        if (*detect) {
            if (!endpoint.empty()) cfg.backend.endpoint = endpoint;
            if (!model_name.empty()) cfg.backend.model = model_name;
            if (timeout) cfg.backend.timeout_s = *timeout;
            if (jobs) cfg.jobs = *jobs;
            if (align) cfg.align_splits = true;
            if (!tmpl_path.empty()) cfg.template_path = tmpl_path;
            if (!fixture.empty()) cfg.fixture_path = fixture;

            const auto dataset = read_dataset(detect_dataset);
            ExperimentOptions opts;
            opts.test_split_start = cfg.test_split_start;
            opts.align_splits = cfg.align_splits;
            opts.deterministic_clock = det_clock;
            opts.seed = cfg.forge.seed;
            opts.provenance = cfg.to_json();
            const auto ws = window_list(detect_all, detect_w);

            std::vector<EvalReport> reports;
            if (detector == "ae") {
                std::vector<AeModel> models;
                for (int w : ws) {
                    const auto path = model_path(model_dir, w);
                    if (!fs::exists(path))
                        throw ConfigError("missing model " + path.string() + " (run train-ae first)");
                    models.push_back(AeModel::load(path));
                }
                for (const auto& m : models)
                    reports.push_back(run_ae_experiment(dataset, m, opts));
            } else {
                const auto tmpl = cfg.template_path.empty() ? PromptTemplate{} : PromptTemplate::load(cfg.template_path);
                std::vector<std::string> responses;
                if (backend == "scripted") {
                    if (cfg.fixture_path.empty())
                        throw ConfigError("--backend scripted needs --fixture");
                    responses = ScriptedBackend::load_fixture(cfg.fixture_path);
                }
                BackendFactory make = [&]() -> std::unique_ptr<ClassificationBackend> {
                    if (backend == "scripted")
                        return std::make_unique<ScriptedBackend>(responses);
                    if (backend == "remote")
                        return std::make_unique<RemoteHttpBackend>(cfg.backend);
                    return std::make_unique<MockRuleBackend>();
                };
                if (detect_all) {
                    reports = sweep_llm(dataset, make, tmpl, opts, cfg.jobs);
                } else {
                    auto b = make();
                    reports.push_back(run_llm_experiment(dataset, *b, tmpl, ws.front(), opts));
                }
            }

            write_reports(reports, out_dir);
            std::fputs(render_table(reports).c_str(), stdout);
            for (const auto& r : reports)
                if (r.error)
                    std::fprintf(stderr, "w=%d: %s\n", r.window_size, r.error->c_str());

            if (backend == "remote" && detector == "llm") {
                bool unreachable = !reports.empty();
                for (const auto& r : reports)
                    unreachable = unreachable && r.evaluated > 0 && r.backend_failures == r.evaluated;
                if (unreachable) {
                    std::fprintf(stderr, "backend %s unreachable for every message\n", cfg.backend.endpoint.c_str());
                    return kBackend;
                }
            }
            return kOk;
        }
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIo;
    } catch (const BackendError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kBackend;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    }
    return kOk;
}
