#include "silicrowd/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "silicrowd/csv.hpp"
#include "silicrowd/parser.hpp"

namespace silicrowd {

std::string template_token(TemplateId t) {
    switch (t) {
        case TemplateId::study1: return "study1";
        case TemplateId::study2_initial: return "study2_initial";
        case TemplateId::study2_intervention: return "study2_intervention";
    }
    throw DomainError("unknown template id");
}

namespace {

const char* kStudy1Body =
    "In this chat, you are a superforecaster that has a strong track record of accurate "
    "forecasts of the future. As an experienced forecaster, you evaluate past data and "
    "trends carefully and aim to predict future events as accurately as you can, even "
    "though you cannot know the answer. This means you put probabilities on outcomes that "
    "you are uncertain about (ranging from 0 to 100%). You aim to provide as accurate "
    "predictions as you can, ensuring that they are consistent with how you predict the "
    "future to be. You also outline your reasons for this forecasting. In your reasons, "
    "you will carefully consider the reasons for and against your probability estimate, "
    "you will make use of comparison classes of similar events and probabilities and take "
    "into account base rates and past events as well as other forecasts and predictions. "
    "In your reasons, you will also consider different perspectives. Once you have "
    "written your reasons, ensure that they directly inform your forecast.\n"
    "\n"
    "Then, you will provide me with a number between 0 and 100 (up to 2 decimal places) "
    "that is your best prediction of the event. Take a deep breath and work on this "
    "problem step-by-step.\n"
    "\n"
    "The question that you are forecasting as well as some background information and "
    "resolution details are below. Read them carefully before making your prediction.\n"
    "\n";

const char* kStudy2InitialBody =
    "In this chat, you are a superforecaster who has a strong track record of accurate "
    "forecasting. You evaluate past data and trends carefully for potential clues to "
    "future events, while recognising that the past is an imperfect guide to the future "
    "so you will need to put probabilities on possible future outcomes (ranging from 0 to "
    "100%). Your specific goal is to maximize the accuracy of these probability judgments "
    "by minimising the Brier scores that your probability judgments receive once future "
    "outcomes are known. Brier scores have two key components: calibration (across all "
    "questions you answer, the probability estimates you assign to possible future "
    "outcomes should correspond as closely as possible to the objective frequency with "
    "which outcomes occur) and resolution (across all questions, aim to assign higher "
    "probabilities to events that occur than to events that do not occur).\n"
    "\n"
    "You outline your reasons for each forecast: list the strongest evidence and "
    "arguments for making lower or higher estimates and explain how you balance the "
    "evidence to make your own forecast. You begin this analytic process by looking for "
    "reference or comparison classes of similar events and grounding your initial "
    "estimates in base rates of occurrence (how often do events of this sort occur in "
    "situations that look like the present one?). You then adjust that initial estimate "
    "in response to the latest news and distinctive features of the present situation, "
    "recognising the need for flexible adjustments but also the risks of over-adjusting "
    "and excessive volatility. Superforecasting requires weighing the risks of opposing "
    "errors: e.g., of failing to learn from useful historical patterns vs. over-relying "
    "on misleading patterns. In this process of error balancing, you draw on the 10 "
    "commandments of superforecasting (Tetlock & Gardner, 2015) as well as on other "
    "peer-reviewed research on superforecasting:\n"
    "\n"
    "1. Triage\n"
    "2. Break seemingly intractable problems into tractable sub-problems\n"
    "3. Strike the right balance between inside and outside views\n"
    "4. Strike the right balance between under- and overreacting to evidence\n"
    "5. Look for the clashing causal forces at work in each problem\n"
    "6. Strive to distinguish as many degrees of doubt as the problem permits but no "
    "more\n"
    "7. Strike the right balance between under- and overconfidence, between prudence and "
    "decisiveness\n"
    "8. Look for the errors behind your mistakes but beware of rearview-mirror hindsight "
    "biases\n"
    "9. Bring out the best in others and let others bring out the best in you\n"
    "10. Master the error-balancing bicycle\n"
    "\n"
    "Once you have written your reasons, ensure that they directly inform you "
    "forecast.\n"
    "\n"
    "Then, you will provide me with your forecast that is a range between two numbers, "
    "each between between 0 and 100 (up to 2 decimal places) that is your best range of "
    "prediction of the event. Output your prediction as \"My Prediction: Between XX.XX% "
    "and YY.YY%\". Take a deep breath and work on this problem step-by-step.\n"
    "\n"
    "The question that you are forecasting as well as some background information and "
    "resolution criteria are below. Read them carefully before making your prediction.\n"
    "\n";

const char* kInterventionA =
    "You have made your forecast based on careful reasoning and analysis. Now consider "
    "the following new piece of information: The median crowd prediction in the "
    "forecasting tournament where this question was posed was ";

const char* kInterventionB =
    "%.\n"
    "\n"
    "Please adjust your reasoning and forecast based on this information, as you deem "
    "appropriate. The large research literature on the \"wisdom of the crowd\" suggests "
    "it is difficult for any single forecaster to out-predict crowd medians or averages. "
    "But there are occasions when the crowd has proven to be wrong. In considering "
    "whether/how much to revise your earlier forecast, keep in mind the theme of "
    "error-balancing: the need to balance the risk of giving too little weight to the "
    "crowd judgment vs. the risk of over-relying on the crowd. Please explain how you "
    "balanced these risks. Please also make this prediction be in the same format as "
    "before: \"My Prediction: Between XX.XX% and YY.YY%\".";

}  // namespace

std::string render_prompt(TemplateId id, const Question& q,
                          std::optional<Probability> human_median) {
    if (id == TemplateId::study2_intervention) {
        if (!human_median)
            throw MissingPlaceholder("question " + q.id +
                                     ": intervention prompt needs a human median");
        return std::string(kInterventionA) + format_pct2(human_median->percent()) +
               kInterventionB;
    }
    if (human_median)
        throw MissingPlaceholder("template " + template_token(id) +
                                 " has no slot for a human median");
    std::string out = id == TemplateId::study1 ? kStudy1Body : kStudy2InitialBody;
    out += "Background:\n" + q.background + "\n\n";
    out += id == TemplateId::study1 ? "Resolution:\n" : "Resolution Criteria:\n";
    out += q.resolution_criteria + "\n\n";
    out += "Question:\n" + q.title;
    return out;
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

std::vector<TranscriptEntry> Backend::replay_key(const std::string&, int, Phase) {
    throw MissingTranscript("backend " + name() + " does not replay transcripts");
}

ReplayBackend::ReplayBackend(std::string name, const std::vector<TranscriptEntry>& entries)
    : name_(std::move(name)) {
    for (const auto& e : entries) {
        if (e.model_id != name_) continue;
        by_key_[{e.question_id, e.repetition, e.phase}].push_back(e);
    }
}

ReplayBackend ReplayBackend::from_log(std::string name, const std::string& log_path) {
    return ReplayBackend(std::move(name), read_transcript(log_path));
}

BackendResult ReplayBackend::complete(const ChatRequest&) {
    throw MissingTranscript("replay backend " + name_ + " answers only by recorded key");
}

std::vector<TranscriptEntry> ReplayBackend::replay_key(const std::string& question_id,
                                                       int repetition, Phase phase) {
    const auto it = by_key_.find({question_id, repetition, phase});
    if (it == by_key_.end())
        throw MissingTranscript("no transcript for " + question_id + "/" + name_ + "/" +
                                std::to_string(repetition) + "/" + phase_token(phase));
    return it->second;
}

std::string backend_env_name(const std::string& backend, const std::string& suffix) {
    std::string out = "SILICROWD_";
    for (char c : backend)
        out += std::isalnum(static_cast<unsigned char>(c))
                   ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                   : '_';
    return out + "_" + suffix;
}

namespace {

std::string env_or(const std::string& name, const std::string& fallback) {
    const char* v = std::getenv(name.c_str());
    return v ? std::string(v) : fallback;
}

}  // namespace

HttpBackend::HttpBackend(std::string name) : name_(std::move(name)) {
    api_key_ = env_or(backend_env_name(name_, "KEY"), "");
    base_url_ = env_or(backend_env_name(name_, "URL"), "");
    model_ = env_or(backend_env_name(name_, "MODEL"), name_);
    if (api_key_.empty())
        throw BackendUnavailable("backend " + name_ + ": " +
                                 backend_env_name(name_, "KEY") + " is not set");
    if (base_url_.empty())
        throw BackendUnavailable("backend " + name_ + ": " +
                                 backend_env_name(name_, "URL") + " is not set");
}

HttpBackend::HttpBackend(std::string name, std::string base_url, std::string api_key,
                         std::string model)
    : name_(std::move(name)),
      base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      model_(std::move(model)) {}

BackendResult HttpBackend::complete(const ChatRequest& request) {
    nlohmann::json body;
    body["model"] = model_;
    body["messages"] = nlohmann::json::array();
    for (const auto& turn : request.history) {
        body["messages"].push_back({{"role", "user"}, {"content", turn.prompt}});
        body["messages"].push_back({{"role", "assistant"}, {"content", turn.response}});
    }
    body["messages"].push_back({{"role", "user"}, {"content", request.prompt}});

    httplib::Client client(base_url_);
    client.set_connection_timeout(30);
    client.set_read_timeout(300);
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
    const auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                                 "application/json");
    BackendResult out;
    if (!res) {
        out.error = "connection failed (" + httplib::to_string(res.error()) + ")";
        return out;
    }
    if (res->status != 200) {
        out.error = "http status " + std::to_string(res->status);
        return out;
    }
    try {
        const auto j = nlohmann::json::parse(res->body);
        out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = std::string("malformed response body: ") + e.what();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Collection policy
// ---------------------------------------------------------------------------

CollectContext CollectContext::real(const std::string& log_path) {
    CollectContext ctx;
    ctx.now = [] {
        const auto t = std::chrono::system_clock::now();
        return Timestamp{std::chrono::duration_cast<std::chrono::seconds>(
                             t.time_since_epoch())
                             .count()};
    };
    ctx.sleep_seconds = [](long s) { std::this_thread::sleep_for(std::chrono::seconds(s)); };
    ctx.sink = [log_path](const TranscriptEntry& e) { append_transcript(log_path, e); };
    return ctx;
}

namespace {

struct AttemptOutcome {
    Status status = Status::technical_failure;
    std::string text;
};

// One prompt with the technical-retry ladder; every exchange is recorded.
AttemptOutcome run_exchange(Backend& backend, const Question& q, int repetition,
                            Phase phase, const std::string& prompt,
                            const std::vector<ChatTurn>& history,
                            const BackendPolicy& policy, CollectContext& ctx,
                            std::vector<TranscriptEntry>& out) {
    AttemptOutcome result;
    for (int attempt = 0; attempt <= policy.max_technical_retries; ++attempt) {
        BackendResult res = backend.complete({history, prompt});
        TranscriptEntry entry;
        entry.question_id = q.id;
        entry.model_id = backend.name();
        entry.repetition = repetition;
        entry.phase = phase;
        entry.prompt_fingerprint = fnv1a_hex(prompt);
        entry.request_time = ctx.now();
        if (!res.ok) {
            entry.status = Status::technical_failure;
            entry.response_text = res.error;
        } else {
            const ParseOutcome parsed = phase == Phase::s1 ? parse_point(res.text)
                                                           : parse_interval(res.text);
            entry.status = parsed.kind == ParseKind::unparseable ? Status::refusal
                                                                 : Status::ok;
            entry.response_text = res.text;
        }
        if (ctx.sink) ctx.sink(entry);
        out.push_back(entry);
        if (res.ok) {
            result.status = entry.status;
            result.text = res.text;
            return result;
        }
        if (attempt < policy.max_technical_retries && ctx.sleep_seconds)
            ctx.sleep_seconds(policy.technical_retry_delay_seconds);
    }
    return result;  // technical failure after all retries
}

// Repeats an exchange through the refusal ladder. Refusal retries restart the
// conversation for opening prompts and re-ask within it for the intervention.
AttemptOutcome run_with_refusals(Backend& backend, const Question& q, int repetition,
                                 Phase phase, const std::string& prompt,
                                 const std::vector<ChatTurn>& history,
                                 const BackendPolicy& policy, CollectContext& ctx,
                                 std::vector<TranscriptEntry>& out) {
    AttemptOutcome result;
    for (int ask = 0; ask <= policy.refusal_retries; ++ask) {
        result = run_exchange(backend, q, repetition, phase, prompt, history, policy, ctx,
                              out);
        if (result.status != Status::refusal) return result;
    }
    return result;  // persistent refusal
}

struct RepetitionOutcome {
    bool complete = false;
};

RepetitionOutcome run_repetition(Backend& backend, const Question& q, int repetition,
                                 TemplateId template_id, const BackendPolicy& policy,
                                 CollectContext& ctx, std::vector<TranscriptEntry>& out) {
    RepetitionOutcome result;
    if (template_id == TemplateId::study1) {
        const std::string prompt = render_prompt(TemplateId::study1, q, std::nullopt);
        const AttemptOutcome a = run_with_refusals(backend, q, repetition, Phase::s1,
                                                   prompt, {}, policy, ctx, out);
        result.complete = a.status == Status::ok;
        return result;
    }
    // study 2: initial and intervention share one conversation
    const std::string initial_prompt =
        render_prompt(TemplateId::study2_initial, q, std::nullopt);
    const AttemptOutcome initial =
        run_with_refusals(backend, q, repetition, Phase::s2_initial, initial_prompt, {},
                          policy, ctx, out);
    if (initial.status != Status::ok) return result;
    const auto median = latest_human_median(q);
    if (!median)
        throw MissingPlaceholder("question " + q.id +
                                 ": no human median for the intervention prompt");
    const std::string intervention_prompt =
        render_prompt(TemplateId::study2_intervention, q, median);
    const std::vector<ChatTurn> history = {{initial_prompt, initial.text}};
    const AttemptOutcome updated =
        run_with_refusals(backend, q, repetition, Phase::s2_updated, intervention_prompt,
                          history, policy, ctx, out);
    result.complete = updated.status == Status::ok;
    return result;
}

std::vector<TranscriptEntry> collect_replay(Backend& backend, const Question& q,
                                            TemplateId template_id,
                                            const BackendPolicy& policy) {
    std::vector<TranscriptEntry> out;
    for (int rep = 1; rep <= policy.repetitions; ++rep) {
        if (template_id == TemplateId::study1) {
            const auto entries = backend.replay_key(q.id, rep, Phase::s1);
            out.insert(out.end(), entries.begin(), entries.end());
            continue;
        }
        const auto initial = backend.replay_key(q.id, rep, Phase::s2_initial);
        out.insert(out.end(), initial.begin(), initial.end());
        if (initial.back().status == Status::ok) {
            const auto updated = backend.replay_key(q.id, rep, Phase::s2_updated);
            out.insert(out.end(), updated.begin(), updated.end());
        }
    }
    return out;
}

}  // namespace

std::vector<TranscriptEntry> collect(Backend& backend, const Question& q,
                                     TemplateId template_id, const BackendPolicy& policy,
                                     CollectContext& ctx) {
    if (policy.repetitions < 1) throw DomainError("policy.repetitions must be >= 1");
    if (template_id == TemplateId::study2_intervention)
        throw DomainError("collect starts from study1 or study2_initial");
    if (backend.is_replay()) return collect_replay(backend, q, template_id, policy);

    std::vector<TranscriptEntry> out;
    std::vector<bool> complete(static_cast<std::size_t>(policy.repetitions), false);
    for (int rep = 1; rep <= policy.repetitions; ++rep)
        complete[rep - 1] =
            run_repetition(backend, q, rep, template_id, policy, ctx, out).complete;

    // The tournament rule: once the model has shown it can answer, keep
    // querying failed repetitions until the full set is in hand (bounded).
    int extra = 0;
    const bool any_ok = std::any_of(complete.begin(), complete.end(),
                                    [](bool b) { return b; });
    if (any_ok) {
        bool all_done = std::all_of(complete.begin(), complete.end(),
                                    [](bool b) { return b; });
        while (!all_done && extra < policy.persistence_cap) {
            for (int rep = 1; rep <= policy.repetitions && extra < policy.persistence_cap;
                 ++rep) {
                if (complete[rep - 1]) continue;
                ++extra;
                complete[rep - 1] =
                    run_repetition(backend, q, rep, template_id, policy, ctx, out).complete;
            }
            all_done = std::all_of(complete.begin(), complete.end(),
                                   [](bool b) { return b; });
        }
    }
    return out;
}

}  // namespace silicrowd
