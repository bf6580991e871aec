#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "l3guard/errors.hpp"
#include "l3guard/forge.hpp"
#include "l3guard/harness.hpp"

using namespace l3guard;

namespace {

const ForgeResult& forged()
{
    static const auto r = forge_dataset(ForgeConfig{});
    return r;
}

std::filesystem::path data_file(const char* name) { return std::filesystem::path(L3GUARD_TEST_DATA) / name; }

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

AeHyperparameters quick()
{
    AeHyperparameters hp;
    hp.epochs = 300;
    return hp;
}

} // namespace

TEST_CASE("baseline stops at the first hypoglyphed message")
{
    const auto& f = forged();
    const auto model = train_autoencoder(normal_training_prefix(f.messages, 700), 2, quick());
    const auto r = run_ae_experiment(f.messages, model, {});
    REQUIRE(r.terminated_early);
    CHECK(*r.terminated_early == f.hypoglyphed.front());
    CHECK(r.termination_reason.find("U+") != std::string::npos);
    CHECK(r.split_size == 316);
    CHECK(r.evaluated == f.hypoglyphed.front() - 700);
    CHECK(r.skipped_after_crash == r.split_size - r.evaluated);
    CHECK(r.evaluated + r.skipped_after_crash == r.split_size);
    CHECK(r.confusion.total() == r.evaluated);
}

TEST_CASE("baseline on clean data evaluates the whole test split")
{
    ForgeConfig c;
    c.n_hypoglyph_attacks = 0;
    c.n_hypoglyph_normals = 0;
    const auto ds = forge_dataset(c).messages;
    const auto model = train_autoencoder(normal_training_prefix(ds, 700), 1, quick());
    const auto r = run_ae_experiment(ds, model, {});
    CHECK_FALSE(r.terminated_early);
    CHECK(r.evaluated == 316);
    CHECK(r.skipped_after_crash == 0);
    REQUIRE(r.metrics);
}

TEST_CASE("LLM run classifies every message")
{
    MockRuleBackend mock;
    const auto r = run_llm_experiment(forged().messages, mock, PromptTemplate{}, 3, {});
    CHECK(r.evaluated == 1016);
    CHECK(r.confusion.total() == 1016);
    CHECK(r.confusion.tp == 20);
    CHECK(r.confusion.fn == 0);
    CHECK(r.confusion.fp == 3);
    CHECK(r.detector == "llm/mock");
    CHECK(r.template_version == "l3-detect-v1");
    CHECK_FALSE(r.terminated_early);
}

TEST_CASE("aligned LLM run covers the test split only")
{
    MockRuleBackend mock;
    ExperimentOptions o;
    o.align_splits = true;
    const auto r = run_llm_experiment(forged().messages, mock, PromptTemplate{}, 1, o);
    CHECK(r.evaluated == 316);
}

TEST_CASE("scripted fixtures")
{
    const auto& ds = forged().messages;
    ScriptedBackend normal(ScriptedBackend::load_fixture(data_file("scripted_all_normal.json")));
    const auto r = run_llm_experiment(ds, normal, PromptTemplate{}, 2, {});
    CHECK(r.confusion == ConfusionMatrix{0, 0, 996, 20});
    CHECK(r.metrics->recall == 0.0);
    CHECK(r.metrics->f1 == 0.0);

    ScriptedBackend third(ScriptedBackend::load_fixture(data_file("scripted_every_third.json")));
    ConfusionMatrix want;
    for (const auto& m : ds)
        want.add(m.label == Label::BlindDoS, m.seq % 3 == 2);
    CHECK(run_llm_experiment(ds, third, PromptTemplate{}, 2, {}).confusion == want);
}

TEST_CASE("indeterminate responses count as normal")
{
    ScriptedBackend b({"maybe"});
    const auto r = run_llm_experiment(forged().messages, b, PromptTemplate{}, 1, {});
    CHECK(r.indeterminate == 1016);
    CHECK(r.confusion == ConfusionMatrix{0, 0, 996, 20});
}

TEST_CASE("sweeps record failures per window")
{
    const std::vector<Layer3Message> empty;
    const auto reports = sweep_llm(empty, [] { return std::make_unique<MockRuleBackend>(); }, PromptTemplate{}, {}, 4);
    REQUIRE(reports.size() == 10);
    for (int w = 1; w <= 10; ++w) {
        CHECK(reports[w - 1].window_size == w);
        CHECK(reports[w - 1].error);
    }
    const auto table = render_table(reports);
    CHECK(table.find("error:") != std::string::npos);
}

TEST_CASE("deterministic clock gives byte-identical reports")
{
    ExperimentOptions o;
    o.deterministic_clock = true;
    const auto make = [] { return std::make_unique<MockRuleBackend>(); };
    const auto tmp = std::filesystem::temp_directory_path();
    const auto a = tmp / "l3guard_reports_a";
    const auto b = tmp / "l3guard_reports_b";
    write_reports(sweep_llm(forged().messages, make, PromptTemplate{}, o, 4), a);
    write_reports(sweep_llm(forged().messages, make, PromptTemplate{}, o, 1), b);
    for (const auto& entry : std::filesystem::directory_iterator(a))
        CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    CHECK(std::filesystem::exists(a / "llm-mock_w10.json"));
    const auto csv = slurp(a / "combined.csv");
    CHECK(csv.starts_with(std::string(kCsvHeader)));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("over-budget messages are flagged")
{
    ScriptedBackend b({"Normal"});
    ExperimentOptions o;
    o.latency_budget_s = 0.0;
    const auto r = run_llm_experiment(forged().messages, b, PromptTemplate{}, 1, o);
    CHECK(r.latency.over_budget.size() == 1016);
    const std::vector<EvalReport> one{r};
    CHECK(render_table(one).find("WARNING") != std::string::npos);
}

TEST_CASE("model of the wrong shape is rejected")
{
    auto model = train_autoencoder(normal_training_prefix(forged().messages, 100), 1, quick());
    model.window_size = 2;
    CHECK_THROWS_AS(run_ae_experiment(forged().messages, model, {}), ConfigError);
}
