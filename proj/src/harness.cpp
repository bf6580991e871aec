#include "l3guard/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "l3guard/errors.hpp"
#include "l3guard/sdl_store.hpp"

namespace l3guard {

namespace {

Clock make_clock(const ExperimentOptions& options)
{
    return options.deterministic_clock ? stepping_clock(1e-4) : steady_clock_seconds();
}

std::uint64_t count_from(std::span<const Layer3Message> dataset, std::uint64_t start)
{
    return static_cast<std::uint64_t>(
        std::count_if(dataset.begin(), dataset.end(), [&](const auto& m) { return m.seq >= start; }));
}

// Producer appends each record to the SDL, the detector polls right after.
// `on_view` returns false to stop the replay.
template <typename OnView>
void replay_through_sdl(std::span<const Layer3Message> dataset, OnView&& on_view)
{
    SdlStore sdl;
    ReaderCursor cursor;
    for (const auto& m : dataset) {
        sdl.append(m);
        for (const auto& v : sdl.poll_new(cursor))
            if (!on_view(v))
                return;
    }
}

void finish(EvalReport& r, const std::vector<double>& latencies, double prompt_total)
{
    auto& l = r.latency;
    for (double x : latencies) {
        l.total_s += x;
        l.max_s = std::max(l.max_s, x);
    }
    if (!latencies.empty()) {
        l.mean_s = l.total_s / static_cast<double>(latencies.size());
        l.mean_prompt_s = prompt_total / static_cast<double>(latencies.size());
    }
    if (r.confusion.total() > 0)
        r.metrics = compute_metrics(r.confusion);
    else if (!r.terminated_early)
        throw EmptyEvaluation("no messages received a verdict");
}

template <typename Fn>
void run_parallel(int count, int jobs, Fn&& fn)
{
    jobs = std::clamp(jobs, 1, count);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < count; i = next++)
            fn(i);
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
}

} // namespace

EvalReport run_ae_experiment(std::span<const Layer3Message> dataset, const AeModel& model,
                             const ExperimentOptions& options)
{
    if (model.network.input_dim() != input_dim(model.vocab, model.window_size))
        throw ConfigError("model for w=" + std::to_string(model.window_size)
                          + " has input dimension inconsistent with its vocabulary");
    validate_dataset(dataset);

    EvalReport r;
    r.detector = "ae";
    r.window_size = model.window_size;
    r.split_start = options.test_split_start;
    r.split_size = count_from(dataset, r.split_start);
    r.seed = options.seed;
    r.config = options.provenance;

    const auto clock = make_clock(options);
    TmsiReuseTracker reuse;
    WindowStreamer streamer(model.window_size);
    std::vector<double> latencies;
    const double wall_start = clock();

    replay_through_sdl(dataset, [&](const MessageView& v) {
        reuse.observe(v);
        if (v.seq < r.split_start) {
            streamer.accept(v);
            return true;
        }
        const auto window = streamer.peek(v);
        const double t0 = clock();
        AeVerdict verdict;
        try {
            verdict = model.score(window, reuse);
        } catch (const EncodingError& e) {
            r.terminated_early = v.seq;
            r.termination_reason = e.what();
            return false;
        }
        const double latency = clock() - t0;
        latencies.push_back(latency);
        if (latency > options.latency_budget_s)
            r.latency.over_budget.push_back(v.seq);
        r.confusion.add(dataset[v.seq].label == Label::BlindDoS, verdict.anomalous);
        ++r.evaluated;
        // Flagged messages are kept out of later windows' context.
        if (!verdict.anomalous)
            streamer.accept(v);
        return true;
    });

    r.latency.wall_s = clock() - wall_start;
    r.skipped_after_crash = r.split_size - r.evaluated;
    finish(r, latencies, 0.0);
    return r;
}

EvalReport run_llm_experiment(std::span<const Layer3Message> dataset, ClassificationBackend& backend,
                              const PromptTemplate& tmpl, int window_size, const ExperimentOptions& options)
{
    check_window_size(window_size);
    validate_dataset(dataset);

    EvalReport r;
    r.detector = "llm/" + backend.id();
    r.window_size = window_size;
    r.split_start = options.align_splits ? options.test_split_start : 0;
    r.split_size = count_from(dataset, r.split_start);
    r.template_version = tmpl.version;
    r.seed = options.seed;
    r.config = options.provenance;

    const auto clock = make_clock(options);
    WindowStreamer streamer(window_size);
    std::vector<double> latencies;
    double prompt_total = 0.0;
    const double wall_start = clock();

    replay_through_sdl(dataset, [&](const MessageView& v) {
        const auto window = streamer.push(v);
        if (v.seq < r.split_start)
            return true;
        const double p0 = clock();
        const auto prompt = build_prompt(window, tmpl);
        prompt_total += clock() - p0;

        const auto verdict = classify(prompt, window, backend, options.retry, clock);
        latencies.push_back(verdict.latency_s);
        if (verdict.latency_s > options.latency_budget_s)
            r.latency.over_budget.push_back(v.seq);
        if (verdict.attempts > 1)
            r.retried.push_back(v.seq);
        if (!verdict.error.empty())
            ++r.backend_failures;
        if (verdict.kind == VerdictKind::Indeterminate)
            ++r.indeterminate;
        r.confusion.add(dataset[v.seq].label == Label::BlindDoS, verdict.kind == VerdictKind::Anomalous);
        ++r.evaluated;
        return true;
    });

    r.latency.wall_s = clock() - wall_start;
    finish(r, latencies, prompt_total);
    return r;
}

std::vector<EvalReport> sweep_llm(std::span<const Layer3Message> dataset, const BackendFactory& make_backend,
                                  const PromptTemplate& tmpl, const ExperimentOptions& options, int jobs)
{
    std::vector<EvalReport> reports(kMaxWindow);
    run_parallel(kMaxWindow, jobs, [&](int i) {
        const int w = i + 1;
        try {
            auto backend = make_backend();
            reports[i] = run_llm_experiment(dataset, *backend, tmpl, w, options);
        } catch (const std::exception& e) {
            auto& r = reports[i];
            r.detector = "llm";
            r.window_size = w;
            r.template_version = tmpl.version;
            r.seed = options.seed;
            r.config = options.provenance;
            r.error = e.what();
        }
    });
    return reports;
}

std::vector<AeModel> train_all_windows(std::span<const Layer3Message> dataset, const AeHyperparameters& hp,
                                       std::size_t training_count, int jobs)
{
    const auto training = normal_training_prefix(dataset, training_count);
    std::vector<AeModel> models(kMaxWindow);
    std::vector<std::string> errors(kMaxWindow);
    run_parallel(kMaxWindow, jobs, [&](int i) {
        try {
            models[i] = train_autoencoder(training, i + 1, hp);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (int i = 0; i < kMaxWindow; ++i)
        if (!errors[i].empty())
            throw ConfigError("training w=" + std::to_string(i + 1) + ": " + errors[i]);
    return models;
}

std::vector<EvalReport> sweep_ae(std::span<const Layer3Message> dataset, const AeHyperparameters& hp,
                                 const ExperimentOptions& options, int jobs, const std::vector<AeModel>* models)
{
    std::vector<EvalReport> reports(kMaxWindow);
    const auto training = normal_training_prefix(dataset, options.test_split_start);
    run_parallel(kMaxWindow, jobs, [&](int i) {
        const int w = i + 1;
        try {
            if (models) {
                const auto& m = models->at(i);
                if (m.window_size != w)
                    throw ConfigError("model list is not ordered by window size");
                reports[i] = run_ae_experiment(dataset, m, options);
            } else {
                reports[i] = run_ae_experiment(dataset, train_autoencoder(training, w, hp), options);
            }
        } catch (const std::exception& e) {
            auto& r = reports[i];
            r.detector = "ae";
            r.window_size = w;
            r.seed = options.seed;
            r.config = options.provenance;
            r.error = e.what();
        }
    });
    return reports;
}

nlohmann::ordered_json EvalReport::to_json() const
{
    nlohmann::ordered_json j;
    j["detector"] = detector;
    j["window_size"] = window_size;
    j["split_start"] = split_start;
    j["split_size"] = split_size;
    j["evaluated"] = evaluated;
    j["skipped_after_crash"] = skipped_after_crash;
    j["confusion"] = {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn}, {"fn", confusion.fn}};
    if (metrics) {
        j["metrics"] = {{"accuracy", metrics->accuracy}, {"precision", metrics->precision},
                        {"recall", metrics->recall},     {"f1", metrics->f1},
                        {"fpr", metrics->fpr},           {"fnr", metrics->fnr}};
    } else {
        j["metrics"] = nullptr;
    }
    j["latency"] = {{"mean_s", latency.mean_s},
                    {"max_s", latency.max_s},
                    {"total_s", latency.total_s},
                    {"mean_prompt_s", latency.mean_prompt_s},
                    {"wall_s", latency.wall_s},
                    {"over_budget", latency.over_budget}};
    j["indeterminate"] = indeterminate;
    j["backend_failures"] = backend_failures;
    j["retried"] = retried;
    j["terminated_early"] = terminated_early ? nlohmann::ordered_json(*terminated_early) : nullptr;
    j["termination_reason"] = termination_reason;
    j["template_version"] = template_version;
    j["seed"] = seed;
    j["error"] = error ? nlohmann::ordered_json(*error) : nullptr;
    j["config"] = config;
    return j;
}

namespace {

std::string fixed(double v, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

std::string combined_csv(std::span<const EvalReport> reports)
{
    std::string out(kCsvHeader);
    out.push_back('\n');
    for (const auto& r : reports) {
        out += csv_field(r.detector) + ',' + std::to_string(r.window_size) + ',';
        if (r.metrics) {
            const auto& m = *r.metrics;
            for (double v : {m.accuracy, m.precision, m.recall, m.f1, m.fpr, m.fnr})
                out += fixed(v) + ',';
        } else {
            out += ",,,,,,";
        }
        out += fixed(r.latency.mean_s) + ',' + fixed(r.latency.max_s) + ',';
        out += std::to_string(r.indeterminate) + ',';
        if (r.terminated_early)
            out += std::to_string(*r.terminated_early);
        out.push_back('\n');
    }
    return out;
}

std::string render_table(std::span<const EvalReport> reports)
{
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %3s %8s %9s %8s %8s %8s %8s %12s %12s %6s %s\n", "detector", "w",
                  "accuracy", "precision", "recall", "f1", "fpr", "fnr", "mean_lat_s", "max_lat_s", "indet",
                  "terminated/error");
    out += line;
    for (const auto& r : reports) {
        std::string tail = r.error ? "error: " + *r.error
                                   : (r.terminated_early ? "at seq " + std::to_string(*r.terminated_early) : "-");
        if (r.metrics) {
            const auto& m = *r.metrics;
            std::snprintf(line, sizeof line, "%-10s %3d %8.4f %9.4f %8.4f %8.4f %8.4f %8.4f %12.6f %12.6f %6llu %s\n",
                          r.detector.c_str(), r.window_size, m.accuracy, m.precision, m.recall, m.f1, m.fpr, m.fnr,
                          r.latency.mean_s, r.latency.max_s, static_cast<unsigned long long>(r.indeterminate),
                          tail.c_str());
        } else {
            std::snprintf(line, sizeof line, "%-10s %3d %8s %9s %8s %8s %8s %8s %12s %12s %6s %s\n",
                          r.detector.c_str(), r.window_size, "-", "-", "-", "-", "-", "-", "-", "-", "-", tail.c_str());
        }
        out += line;
    }
    std::size_t slow = 0;
    for (const auto& r : reports)
        slow += r.latency.over_budget.size();
    if (slow > 0)
        out += "WARNING: " + std::to_string(slow) + " message(s) exceeded the 1 s near-RT budget\n";
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

void write_reports(std::span<const EvalReport> reports, const std::filesystem::path& out_dir,
                   const std::string& prefix)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    for (const auto& r : reports) {
        std::string stem = r.detector;
        std::replace(stem.begin(), stem.end(), '/', '-');
        write_text(out_dir / (prefix + stem + "_w" + std::to_string(r.window_size) + ".json"),
                   r.to_json().dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n");
    }
    write_text(out_dir / (prefix + "combined.csv"), combined_csv(reports));
    write_text(out_dir / (prefix + "table.txt"), render_table(reports));
}

} // namespace l3guard
