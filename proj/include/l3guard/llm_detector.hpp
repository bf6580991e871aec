#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "l3guard/window.hpp"

namespace l3guard {

// Prompt wording lives in data so it can be swapped without a rebuild.
struct PromptTemplate {
    std::string version = "l3-detect-v1";
    std::string task_description =
        "You are a security monitor inside an O-RAN near-RT RIC. You read 5G Layer-3 control-plane "
        "messages (RRC and NAS) taken from the shared data layer and decide whether the newest "
        "message is part of normal UE signalling or an attack such as a Blind DoS, where an "
        "RRCSetupRequest reuses the TMSI of another subscriber. Each message is written as "
        "\"protocol | name | tmsi | rnti\".";
    std::string context_header = "Preceding messages in the stream (oldest first):";
    std::string no_context_note = "(no preceding messages)";
    std::string ue_previous_header = "Previous message from the same UE:";
    std::string ue_previous_absent = "(none: this is the first message seen from this UE)";
    std::string latest_header = "Message to classify:";
    std::string output_instruction = "Answer with exactly one word: Normal or Anomalous.";

    static PromptTemplate load(const std::filesystem::path& path);
    static PromptTemplate from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
};

/// "protocol | name | tmsi | rnti"; the name bytes are copied unchanged.
std::string render_message(const MessageView& m);

struct Prompt {
    std::string system; // task description
    std::string user;   // rendered window + output instruction

    std::string text() const { return system + "\n\n" + user; }
};

Prompt build_prompt(const DetectionWindow& window, const PromptTemplate& tmpl);

enum class VerdictKind { Normal, Anomalous, Indeterminate };
std::string_view to_string(VerdictKind v);

/// Case-insensitive: "anomal" wins, then "normal", otherwise Indeterminate.
VerdictKind parse_verdict(std::string_view raw);

struct Verdict {
    VerdictKind kind = VerdictKind::Indeterminate;
    std::string raw_response;
    double latency_s = 0.0; // backend call(s) only
    int attempts = 0;
    std::string error; // set when the backend could not be reached
};

class ClassificationBackend {
public:
    virtual ~ClassificationBackend() = default;

    /// Returns the model's raw text. Throws BackendError on transport failure.
    virtual std::string complete(const Prompt& prompt, const DetectionWindow& window) = 0;
    virtual std::string id() const = 0;
};

/// Replays a fixed list of responses in order, wrapping around at the end.
class ScriptedBackend : public ClassificationBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses);

    /// JSON array of strings.
    static std::vector<std::string> load_fixture(const std::filesystem::path& path);

    std::string complete(const Prompt& prompt, const DetectionWindow& window) override;
    std::string id() const override { return "scripted"; }

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

// Deterministic stand-in for a model. Flags an RRCSetupRequest whose TMSI
// differs from the TMSI its UE used before (identity reuse), and any message
// whose name is not a catalog name byte for byte (look-alike or unknown).
class MockRuleBackend : public ClassificationBackend {
public:
    std::string complete(const Prompt& prompt, const DetectionWindow& window) override;
    std::string id() const override { return "mock"; }
};

struct BackendConfig {
    std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
    std::string model = "meta-llama/Llama-3.1-8B-Instruct";
    double temperature = 0.0;
    int max_tokens = 8;
    double timeout_s = 10.0;

    /// Overrides from L3GUARD_ENDPOINT, L3GUARD_MODEL, L3GUARD_MAX_TOKENS, L3GUARD_TIMEOUT_S.
    void apply_environment();
    static BackendConfig from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
};

/// Chat-completion request body: model, temperature, max_tokens, messages.
nlohmann::json chat_request_body(const Prompt& prompt, const BackendConfig& config);
/// First choice's message content, or the whole body when it is not shaped
/// like a chat-completion response.
std::string chat_response_text(std::string_view body);

class RemoteHttpBackend : public ClassificationBackend {
public:
    explicit RemoteHttpBackend(BackendConfig config);

    std::string complete(const Prompt& prompt, const DetectionWindow& window) override;
    std::string id() const override { return "remote"; }

private:
    BackendConfig config_;
    std::string base_url_;
    std::string path_;
};

struct RetryPolicy {
    int max_retries = 2;
    std::chrono::duration<double> initial_backoff{0.05};
};

/// Monotonic seconds. Injectable so reports can be made reproducible.
using Clock = std::function<double()>;
Clock steady_clock_seconds();
/// Advances by `tick` seconds on every reading.
Clock stepping_clock(double tick);

/// Never throws on response content. Transport errors are retried with
/// exponential backoff; when retries run out the verdict is Indeterminate.
Verdict classify(const Prompt& prompt, const DetectionWindow& window, ClassificationBackend& backend,
                 const RetryPolicy& retry = {}, const Clock& clock = steady_clock_seconds());

} // namespace l3guard
