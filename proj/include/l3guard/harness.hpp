#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "l3guard/autoencoder.hpp"
#include "l3guard/llm_detector.hpp"
#include "l3guard/message.hpp"
#include "l3guard/metrics.hpp"

namespace l3guard {

struct ExperimentOptions {
    /// First seq of the baseline's test split.
    std::uint64_t test_split_start = 700;
    /// Restrict the LLM run to the test split as well.
    bool align_splits = false;
    /// Messages slower than this are listed in the report.
    double latency_budget_s = 1.0;
    RetryPolicy retry;
    /// Replace wall-clock timing with a fixed 100 us tick so report files
    /// are byte-reproducible.
    bool deterministic_clock = false;
    std::uint64_t seed = 0;
    nlohmann::ordered_json provenance; // serialized RunConfig
};

struct LatencySummary {
    double mean_s = 0.0;
    double max_s = 0.0;
    double total_s = 0.0;
    double mean_prompt_s = 0.0;
    double wall_s = 0.0; // whole run
    std::vector<std::uint64_t> over_budget;
};

struct EvalReport {
    std::string detector; // "ae", "llm/mock", ...
    int window_size = 0;
    std::uint64_t split_start = 0;
    std::uint64_t split_size = 0;
    std::uint64_t evaluated = 0;
    std::uint64_t skipped_after_crash = 0;
    ConfusionMatrix confusion;
    std::optional<Metrics> metrics;
    LatencySummary latency;
    std::uint64_t indeterminate = 0;
    std::uint64_t backend_failures = 0;
    std::vector<std::uint64_t> retried;
    std::optional<std::uint64_t> terminated_early;
    std::string termination_reason;
    std::string template_version;
    std::uint64_t seed = 0;
    std::optional<std::string> error;
    nlohmann::ordered_json config;

    nlohmann::ordered_json to_json() const;
};

/// Streams the dataset through an SDL store, scoring the baseline on the test
/// split. An EncodingError ends the run and is recorded in terminated_early.
EvalReport run_ae_experiment(std::span<const Layer3Message> dataset, const AeModel& model,
                             const ExperimentOptions& options);

/// Streams every message through an SDL store and classifies each one.
/// Indeterminate verdicts count as Normal in the confusion matrix.
EvalReport run_llm_experiment(std::span<const Layer3Message> dataset, ClassificationBackend& backend,
                              const PromptTemplate& tmpl, int window_size, const ExperimentOptions& options);

using BackendFactory = std::function<std::unique_ptr<ClassificationBackend>()>;

/// One run per window size 1..10, each with a fresh backend. Failures are
/// recorded per report and never stop the sweep.
std::vector<EvalReport> sweep_llm(std::span<const Layer3Message> dataset, const BackendFactory& make_backend,
                                  const PromptTemplate& tmpl, const ExperimentOptions& options, int jobs = 1);

/// Trains (or takes) one model per window size and runs each.
std::vector<EvalReport> sweep_ae(std::span<const Layer3Message> dataset, const AeHyperparameters& hp,
                                 const ExperimentOptions& options, int jobs = 1,
                                 const std::vector<AeModel>* models = nullptr);

/// Models for w = 1..10 trained on the normal prefix before the test split.
std::vector<AeModel> train_all_windows(std::span<const Layer3Message> dataset, const AeHyperparameters& hp,
                                       std::size_t training_count = 700, int jobs = 1);

inline constexpr std::string_view kCsvHeader =
    "detector,window_size,accuracy,precision,recall,f1,fpr,fnr,mean_latency_s,max_latency_s,"
    "indeterminate,terminated_early";

std::string combined_csv(std::span<const EvalReport> reports);
std::string render_table(std::span<const EvalReport> reports);

/// <detector>_w<w>.json per run, plus combined.csv and table.txt.
void write_reports(std::span<const EvalReport> reports, const std::filesystem::path& out_dir,
                   const std::string& prefix = "");
void write_text(const std::filesystem::path& path, std::string_view text);

} // namespace l3guard
