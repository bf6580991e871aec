#include "l3guard/llm_detector.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "l3guard/errors.hpp"
#include "l3guard/hypoglyph.hpp"

namespace l3guard {

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

} // namespace

PromptTemplate PromptTemplate::from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw ConfigError("prompt template must be a JSON object");
    PromptTemplate t;
    try {
        read_field(j, "version", t.version);
        read_field(j, "task_description", t.task_description);
        read_field(j, "context_header", t.context_header);
        read_field(j, "no_context_note", t.no_context_note);
        read_field(j, "ue_previous_header", t.ue_previous_header);
        read_field(j, "ue_previous_absent", t.ue_previous_absent);
        read_field(j, "latest_header", t.latest_header);
        read_field(j, "output_instruction", t.output_instruction);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("prompt template: ") + e.what());
    }
    return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path)
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

nlohmann::ordered_json PromptTemplate::to_json() const
{
    nlohmann::ordered_json j;
    j["version"] = version;
    j["task_description"] = task_description;
    j["context_header"] = context_header;
    j["no_context_note"] = no_context_note;
    j["ue_previous_header"] = ue_previous_header;
    j["ue_previous_absent"] = ue_previous_absent;
    j["latest_header"] = latest_header;
    j["output_instruction"] = output_instruction;
    return j;
}

std::string render_message(const MessageView& m)
{
    std::string out(to_string(m.protocol));
    out += " | ";
    out += m.name;
    out += " | ";
    out += m.tmsi.hex();
    out += " | ";
    out += std::to_string(m.rnti);
    return out;
}

Prompt build_prompt(const DetectionWindow& window, const PromptTemplate& tmpl)
{
    Prompt p;
    p.system = tmpl.task_description;

    std::string& u = p.user;
    u += tmpl.context_header;
    u += '\n';
    if (window.context.empty()) {
        u += tmpl.no_context_note;
        u += '\n';
    }
    for (const auto& m : window.context) {
        u += render_message(m);
        u += '\n';
    }
    u += '\n';
    u += tmpl.ue_previous_header;
    u += '\n';
    u += window.ue_previous ? render_message(*window.ue_previous) : tmpl.ue_previous_absent;
    u += "\n\n";
    u += tmpl.latest_header;
    u += '\n';
    u += render_message(window.latest);
    u += "\n\n";
    u += tmpl.output_instruction;
    return p;
}

std::string_view to_string(VerdictKind v)
{
    switch (v) {
    case VerdictKind::Normal:
        return "Normal";
    case VerdictKind::Anomalous:
        return "Anomalous";
    case VerdictKind::Indeterminate:
        break;
    }
    return "Indeterminate";
}

VerdictKind parse_verdict(std::string_view raw)
{
    std::string lower(raw);
    for (auto& c : lower)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower.find("anomal") != std::string::npos)
        return VerdictKind::Anomalous;
    if (lower.find("normal") != std::string::npos)
        return VerdictKind::Normal;
    return VerdictKind::Indeterminate;
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses) : responses_(std::move(responses))
{
    if (responses_.empty())
        throw ConfigError("scripted backend needs at least one response");
}

std::vector<std::string> ScriptedBackend::load_fixture(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in).get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": fixture must be a JSON array of strings (" + e.what() + ")");
    }
}

std::string ScriptedBackend::complete(const Prompt&, const DetectionWindow&)
{
    const auto& r = responses_[next_];
    next_ = (next_ + 1) % responses_.size();
    return r;
}

std::string MockRuleBackend::complete(const Prompt&, const DetectionWindow& window)
{
    const auto& latest = window.latest;
    const auto shape = skeleton(latest.name);
    if (!in_catalog(latest.name)) {
        if (in_catalog(shape))
            return "Anomalous: name imitates " + shape + " with look-alike characters";
        return "Anomalous: '" + latest.name + "' is not a known Layer-3 message";
    }
    if (shape == "RRCSetupRequest" && window.ue_previous && window.ue_previous->tmsi != latest.tmsi)
        return "Anomalous: RRCSetupRequest presents TMSI " + latest.tmsi.hex()
               + " while this UE's session uses " + window.ue_previous->tmsi.hex();
    return "Normal";
}

void BackendConfig::apply_environment()
{
    if (const char* v = std::getenv("L3GUARD_ENDPOINT"))
        endpoint = v;
    if (const char* v = std::getenv("L3GUARD_MODEL"))
        model = v;
    try {
        if (const char* v = std::getenv("L3GUARD_MAX_TOKENS"))
            max_tokens = std::stoi(v);
        if (const char* v = std::getenv("L3GUARD_TIMEOUT_S"))
            timeout_s = std::stod(v);
    } catch (const std::exception&) {
        throw ConfigError("L3GUARD_MAX_TOKENS / L3GUARD_TIMEOUT_S must be numeric");
    }
}

BackendConfig BackendConfig::from_json(const nlohmann::json& j)
{
    BackendConfig c;
    try {
        read_field(j, "endpoint", c.endpoint);
        read_field(j, "model", c.model);
        read_field(j, "temperature", c.temperature);
        read_field(j, "max_tokens", c.max_tokens);
        read_field(j, "timeout_s", c.timeout_s);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("backend config: ") + e.what());
    }
    if (c.temperature != 0.0)
        throw ConfigError("backend temperature must be 0 for experiment runs");
    return c;
}

nlohmann::ordered_json BackendConfig::to_json() const
{
    nlohmann::ordered_json j;
    j["endpoint"] = endpoint;
    j["model"] = model;
    j["temperature"] = temperature;
    j["max_tokens"] = max_tokens;
    j["timeout_s"] = timeout_s;
    return j;
}

nlohmann::json chat_request_body(const Prompt& prompt, const BackendConfig& config)
{
    nlohmann::json body;
    body["model"] = config.model;
    body["temperature"] = 0;
    body["max_tokens"] = config.max_tokens;
    body["messages"] = nlohmann::json::array({
        {{"role", "system"}, {"content", prompt.system}},
        {{"role", "user"}, {"content", prompt.user}},
    });
    return body;
}

std::string chat_response_text(std::string_view body)
{
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded())
        return std::string(body);
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        return std::string(body);
    }
}

RemoteHttpBackend::RemoteHttpBackend(BackendConfig config) : config_(std::move(config))
{
    const std::string_view url = config_.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos || url.substr(0, scheme_end) != "http")
        throw ConfigError("endpoint must be an http:// URL: " + config_.endpoint);
    const auto path_start = url.find('/', scheme_end + 3);
    base_url_ = std::string(url.substr(0, path_start));
    path_ = path_start == std::string_view::npos ? "/v1/chat/completions" : std::string(url.substr(path_start));
}

std::string RemoteHttpBackend::complete(const Prompt& prompt, const DetectionWindow&)
{
    httplib::Client client(base_url_);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(config_.timeout_s));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    // Replacement keeps invalid UTF-8 in a manipulated name from aborting the request.
    const auto body = chat_request_body(prompt, config_).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    auto res = client.Post(path_, body, "application/json");
    if (!res)
        throw BackendError("POST " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
    if (res->status >= 500 || res->status == 429)
        throw BackendError("POST " + config_.endpoint + " returned HTTP " + std::to_string(res->status));
    return chat_response_text(res->body);
}

Clock steady_clock_seconds()
{
    return [] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
    };
}

Clock stepping_clock(double tick)
{
    auto t = std::make_shared<double>(0.0);
    return [t, tick] {
        *t += tick;
        return *t;
    };
}

Verdict classify(const Prompt& prompt, const DetectionWindow& window, ClassificationBackend& backend,
                 const RetryPolicy& retry, const Clock& clock)
{
    Verdict v;
    auto backoff = retry.initial_backoff;
    const double start = clock();
    for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
        v.attempts = attempt + 1;
        try {
            v.raw_response = backend.complete(prompt, window);
            v.kind = parse_verdict(v.raw_response);
            v.error.clear();
            break;
        } catch (const BackendError& e) {
            v.error = std::string(e.what()) + " (attempt " + std::to_string(v.attempts) + ")";
        } catch (const std::exception& e) {
            // A misbehaving backend still must not stop the stream.
            v.error = e.what();
            break;
        }
        if (attempt < retry.max_retries && backoff.count() > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    v.latency_s = std::max(0.0, clock() - start);
    if (!v.error.empty())
        v.kind = VerdictKind::Indeterminate;
    return v;
}

} // namespace l3guard
