#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "silicrowd/core.hpp"
#include "silicrowd/store.hpp"

namespace silicrowd {

enum class TemplateId { study1, study2_initial, study2_intervention };
std::string template_token(TemplateId t);

// Fails (MissingPlaceholder) when the median is supplied for a template that
// has no slot for it, or omitted for the intervention that requires it.
std::string render_prompt(TemplateId id, const Question& q,
                          std::optional<Probability> human_median);

struct BackendPolicy {
    int repetitions = 3;
    long technical_retry_delay_seconds = 24 * 3600;
    int max_technical_retries = 1;
    int refusal_retries = 3;
    // bound on the continued-querying pass that re-runs failed repetitions
    // once at least one repetition has succeeded
    int persistence_cap = 25;
};

struct ChatTurn {
    std::string prompt;
    std::string response;
};

struct ChatRequest {
    std::vector<ChatTurn> history;
    std::string prompt;
};

struct BackendResult {
    bool ok = false;
    std::string text;   // response when ok
    std::string error;  // failure detail when not
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    virtual BackendResult complete(const ChatRequest& request) = 0;
    virtual bool is_replay() const { return false; }
    // all recorded entries for a key, in log order
    virtual std::vector<TranscriptEntry> replay_key(const std::string& question_id,
                                                    int repetition, Phase phase);
};

class ScriptedBackend : public Backend {
public:
    using Script = std::function<BackendResult(const ChatRequest&)>;
    ScriptedBackend(std::string name, Script script)
        : name_(std::move(name)), script_(std::move(script)) {}
    std::string name() const override { return name_; }
    BackendResult complete(const ChatRequest& request) override { return script_(request); }

private:
    std::string name_;
    Script script_;
};

class ReplayBackend : public Backend {
public:
    ReplayBackend(std::string name, const std::vector<TranscriptEntry>& entries);
    static ReplayBackend from_log(std::string name, const std::string& log_path);
    std::string name() const override { return name_; }
    BackendResult complete(const ChatRequest& request) override;
    bool is_replay() const override { return true; }
    std::vector<TranscriptEntry> replay_key(const std::string& question_id, int repetition,
                                            Phase phase) override;

private:
    std::string name_;
    std::map<std::tuple<std::string, int, Phase>, std::vector<TranscriptEntry>> by_key_;
};

// OpenAI-style chat completions adapter. Reads SILICROWD_<NAME>_KEY,
// SILICROWD_<NAME>_URL and optional SILICROWD_<NAME>_MODEL, where <NAME> is
// the backend name uppercased with non-alphanumerics mapped to '_'.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(std::string name);
    HttpBackend(std::string name, std::string base_url, std::string api_key,
                std::string model);
    std::string name() const override { return name_; }
    BackendResult complete(const ChatRequest& request) override;

private:
    std::string name_, base_url_, api_key_, model_;
};

std::string backend_env_name(const std::string& backend, const std::string& suffix);

struct CollectContext {
    std::function<Timestamp()> now;
    std::function<void(long)> sleep_seconds;
    std::function<void(const TranscriptEntry&)> sink;  // called once per exchange
    static CollectContext real(const std::string& log_path);
};

// Runs the repetition/retry/refusal policy for one question against one
// backend. template_id study1 collects phase s1; study2_initial collects the
// initial and intervention exchanges in one conversation per repetition.
std::vector<TranscriptEntry> collect(Backend& backend, const Question& q,
                                     TemplateId template_id, const BackendPolicy& policy,
                                     CollectContext& ctx);

}  // namespace silicrowd
