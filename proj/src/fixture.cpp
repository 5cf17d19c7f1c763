#include "silicrowd/fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>

#include "silicrowd/csv.hpp"
#include "silicrowd/gateway.hpp"

namespace silicrowd {

namespace {

// ---------------------------------------------------------------------------
// Deterministic randomness. No libm transcendentals and no std distributions
// (both vary across implementations); normals come from an Irwin-Hall sum.
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal(double mu, double sigma) {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += uniform();
        return mu + sigma * (s - 6.0);
    }
    int pick(int n) { return static_cast<int>(gen() % static_cast<std::uint64_t>(n)); }
};

constexpr std::uint64_t kBaseSeed = 0x51c0c0d5117ull;

Rng key_rng(int question, int model, int rep, int phase) {
    std::uint64_t s = kBaseSeed;
    s = splitmix64(s ^ (static_cast<std::uint64_t>(question) * 0x100000001b3ull));
    s = splitmix64(s ^ (static_cast<std::uint64_t>(model) * 0x9e3779b9ull));
    s = splitmix64(s ^ (static_cast<std::uint64_t>(rep) * 0x85ebca77ull));
    s = splitmix64(s ^ (static_cast<std::uint64_t>(phase) * 0xc2b2ae3dull));
    return Rng(s);
}

double round2(double percent) { return std::round(percent * 100.0) / 100.0; }

double clamp_pct(double percent) {
    return std::min(99.5, std::max(0.1, percent));
}

// ---------------------------------------------------------------------------
// Question list
// ---------------------------------------------------------------------------

struct QuestionSeed {
    const char* title;
    bool yes;
};

const std::array<QuestionSeed, 31> kQuestions = {{
    {"Will a nearly continuous human chain stretch across the length of the Forth and "
     "Clyde Canal on 14 October 2023?",
     true},
    {"Will Hamas lose control of Gaza before 2024?", false},
    {"Will Yahya Sinwar cease to act as Hamas Chief in the Gaza Strip before 2024?",
     false},
    {"Will Israel carry out and explicitly acknowledge a deadly attack on Iran before "
     "2024?",
     false},
    {"Will the Conservatives hold on to their seat in the Mid Bedfordshire by-election?",
     false},
    {"Will it be determined that Israel was responsible for the attack on the Al-Ahli "
     "Baptist Hospital in Gaza City before 2024?",
     false},
    {"Will the Federal Funds Rate be raised before December 14, 2023?", false},
    {"Will Peter Bone MP be suspended from Parliament in 2023?", true},
    {"Will George Weah win re-election in the 2023 Liberian General Election?", false},
    {"Will India request that another Canadian diplomat be recalled before 2024?", false},
    {"Will New Delhi experience a \"Very Unhealthy\" or worse air quality index on at "
     "least four of the seven days for the week starting October 29?",
     true},
    {"Will Mike Johnson remain Speaker until 2024?", true},
    {"Will there be an additional Russian IPO on the MICEX in 2023?", true},
    {"Will Donald Trump spend at least one hour confined in a jail cell before January "
     "1, 2024?",
     false},
    {"Will the second Starship integrated flight test achieve liftoff before January 1, "
     "2024?",
     true},
    {"Will Sarah Bernstein or Chetna Maroo win the 2023 Booker Prize?", false},
    {"Will Bitcoin reach $40,000 before January 1, 2024?", true},
    {"Will Volodymyr Zelenskyy visit Israel before 2024?", false},
    {"Will Delhi perform cloud seeding before December 1, 2023?", false},
    {"Will the MONUSCO UN peacekeeping mission to the Democratic Republic of the Congo "
     "be extended with a military personnel ceiling above 11,000 before January 1, "
     "2024?",
     true},
    {"Will OpenAI report having \xE2\x89\xA5"
     "99% uptime for ChatGPT and the OpenAI API in December 2023?",
     true},
    {"Will the November 2023 Israel-Hamas humanitarian pause be extended?", true},
    {"Will a majority of voters approve Venezuela's referendum on incorporating Guayana "
     "Esequiba into Venezuela?",
     true},
    {"Will any additional Republican candidates for president drop out before 2024?",
     true},
    {"Will there be a white Christmas in at least 4 of these 9 large European cities in "
     "2023?",
     false},
    {"Will the US Supreme Court issue a decision on hearing the case about presidential "
     "immunity before January 1, 2024?",
     false},
    {"Before 2024, will it be announced that either of the Harvard or MIT presidents "
     "will vacate their positions?",
     false},
    {"Will a major shipping company announce that they are resuming shipments through "
     "the Red Sea before 2024?",
     true},
    {"Will the ban on imports of Apple watches with blood oxygen sensors take effect "
     "before December 27, 2023?",
     true},
    {"Will there be a US military combat death in the Red Sea before 2024?", false},
    {"Will NASA re-establish communications with Voyager 1 before 1 Jan 2024?", false},
}};

// ---------------------------------------------------------------------------
// Model roster
// ---------------------------------------------------------------------------

struct ModelSeed {
    const char* id;
    const char* display;
    const char* provider;
    bool internet;
    bool open_source;
    const char* country;
    double bias;   // percent points added to the question anchor
    double sigma;  // response noise, percent points
};

const std::array<ModelSeed, 12> kModels = {{
    {"gpt-4", "GPT-4", "OpenAI", false, false, "United States", -1.0, 6.0},
    {"gpt-4-bing", "GPT-4 Bing", "OpenAI", true, false, "United States", 0.0, 7.0},
    {"claude-2", "Claude 2", "Anthropic", false, false, "United States", -1.0, 7.0},
    {"gpt-3.5-turbo-instruct", "GPT-3.5-Turbo-Instruct", "OpenAI", false, false,
     "United States", 3.0, 10.0},
    {"solar-0-70b", "Solar-0-70B", "Upstage", false, true, "South Korea", 4.0, 11.0},
    {"llama-2-70b", "Llama-2-70B", "Meta", false, true, "United States", 5.0, 12.0},
    {"palm-2-bison", "PaLM 2 (Chat-Bison@002)", "Google", false, false, "United States",
     6.0, 12.0},
    {"coral-command", "Coral (Command)", "Cohere", true, false, "Canada", 14.0, 16.0},
    {"mistral-7b-instruct", "Mistral-7B-Instruct", "Mistral", false, true, "France", 6.0,
     13.0},
    {"bard-palm-2", "Bard (PaLM 2)", "Google", true, false, "United States", 4.0, 10.0},
    {"falcon-180b", "Falcon 180B", "Technology Innovation Institute", false, false,
     "United Arab Emirates", 8.0, 14.0},
    {"qwen-7b-chat", "Qwen-7B-Chat", "Alibaba Cloud", false, true, "China", 9.0, 15.0},
}};

// Cells (1-based question numbers) with no usable forecast in any repetition.
const std::set<int> kFalconMissing = {2, 5, 8, 12, 15, 18, 22, 25, 29};
const std::set<int> kPalmMissing = {3, 6, 10, 13, 20, 23, 27};
const std::set<int> kCoralMissing = {1, 4, 7, 11, 16, 19, 24, 28};   // refusals
const std::set<int> kQwenMissing = {5, 9, 14, 17, 21, 26};           // refusals
const std::set<int> kBardMissing = {26, 27, 28, 29, 30, 31};

bool cell_missing(const std::string& model_id, int qnum, bool& refusal) {
    refusal = false;
    if (model_id == "falcon-180b") return kFalconMissing.count(qnum) > 0;
    if (model_id == "palm-2-bison") return kPalmMissing.count(qnum) > 0;
    if (model_id == "coral-command") {
        refusal = true;
        return kCoralMissing.count(qnum) > 0;
    }
    if (model_id == "qwen-7b-chat") {
        refusal = true;
        return kQwenMissing.count(qnum) > 0;
    }
    if (model_id == "bard-palm-2") return kBardMissing.count(qnum) > 0;
    return false;
}

std::string qid(int qnum) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "q%02d", qnum);
    return buf;
}

double question_anchor(int qnum) {
    Rng rng = key_rng(qnum, 990, 0, 0);
    return kQuestions[qnum - 1].yes ? 64.0 + rng.uniform(-10.0, 14.0)
                                    : 47.0 + rng.uniform(-16.0, 10.0);
}

double human_median_pct(int qnum) {
    Rng rng = key_rng(qnum, 991, 0, 0);
    const double anchor = question_anchor(qnum);
    const double shift = 8.0 + rng.uniform(0.0, 12.0);
    const double v = kQuestions[qnum - 1].yes ? anchor + shift : anchor - shift;
    return round2(std::min(99.0, std::max(1.0, v)));
}

const char* kReasonBits[] = {
    "Base rates for events of this kind sit near 40 percent in comparable periods.",
    "Recent reporting points in both directions, so the outside view carries weight.",
    "The reference class of similar announcements suggests caution.",
    "Past tournaments resolved questions like this one unevenly.",
    "The trend over the last month has been stable.",
};

std::string study1_response(double pct, Rng& rng) {
    std::string out = kReasonBits[rng.pick(5)];
    out += " ";
    out += kReasonBits[rng.pick(5)];
    out += "\n\nMy best prediction of the event is " + format_pct2(pct) + ".";
    return out;
}

std::string interval_response(double lo, double hi, bool swapped, Rng& rng) {
    std::string out = kReasonBits[rng.pick(5)];
    out += " Balancing the evidence on both sides leads to the range below.\n\n";
    out += "My Prediction: Between ";
    out += format_pct2(swapped ? hi : lo) + "% and " + format_pct2(swapped ? lo : hi) + "%";
    return out;
}

struct Override {
    const char* model;
    int qnum;
    int rep;
};

// pins the forecast range endpoints the tournament reports
const Override kFloorSlot = {"gpt-3.5-turbo-instruct", 14, 3};
const Override kCeilSlot = {"coral-command", 23, 1};

const std::array<Override, 5> kBareSlots = {{
    {"llama-2-70b", 12, 2},
    {"qwen-7b-chat", 18, 3},
    {"mistral-7b-instruct", 22, 1},
    {"solar-0-70b", 14, 2},
    {"falcon-180b", 17, 1},
}};

bool matches(const Override& o, const std::string& model, int qnum, int rep) {
    return model == o.model && qnum == o.qnum && rep == o.rep;
}

constexpr std::int64_t kStudy1Base = 1696161600;  // 2023-10-01T12:00:00Z
constexpr std::int64_t kStudy2Base = 1698753600;  // 2023-10-31T12:00:00Z

}  // namespace

TournamentBundle fixture_bundle() {
    TournamentBundle bundle;
    for (int qnum = 1; qnum <= 31; ++qnum) {
        Question q;
        q.id = qid(qnum);
        q.title = kQuestions[qnum - 1].title;
        q.background =
            "This question was posed in a public real-time forecasting tournament. "
            "Forecasters followed the linked sources and prior resolutions for context "
            "while the question was open.";
        q.resolution_criteria =
            std::string("Resolves Yes if the event described in the title occurs before "
                        "the close date, as determined by credible public reporting; "
                        "otherwise resolves No.");
        q.open_time = Timestamp{kStudy1Base + (qnum - 1) * 3 * 86400};
        q.close_time = Timestamp{q.open_time.unix_seconds + 30 * 86400};
        q.outcome = kQuestions[qnum - 1].yes ? Outcome::yes : Outcome::no;
        Rng rng = key_rng(qnum, 992, 0, 0);
        const double final_median = human_median_pct(qnum);
        const double early = round2(std::min(99.0, std::max(
            1.0, final_median + rng.uniform(-9.0, 9.0))));
        q.human_median_timeline.push_back(
            {Timestamp{q.open_time.unix_seconds + 86400},
             make_probability(early, Unit::percent)});
        q.human_median_timeline.push_back(
            {Timestamp{q.open_time.unix_seconds + 2 * 86400},
             make_probability(final_median, Unit::percent)});
        bundle.questions.push_back(std::move(q));
    }
    for (const auto& m : kModels) {
        ModelSpec spec;
        spec.model_id = m.id;
        spec.display_name = m.display;
        spec.provider = m.provider;
        spec.internet_access = m.internet;
        spec.open_source = m.open_source;
        spec.country = m.country;
        bundle.models.push_back(std::move(spec));
    }
    return bundle;
}

namespace {

TranscriptEntry base_entry(const std::string& model_id, int qnum, int rep, Phase phase,
                           std::int64_t when, const std::string& prompt_fp) {
    TranscriptEntry e;
    e.question_id = qid(qnum);
    e.model_id = model_id;
    e.repetition = rep;
    e.phase = phase;
    e.prompt_fingerprint = prompt_fp;
    e.request_time = Timestamp{when};
    return e;
}

}  // namespace

FixturePaths generate_fixture(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const TournamentBundle bundle = fixture_bundle();
    FixturePaths paths;
    paths.bundle = out_dir + "/bundle.json";
    paths.study1_log = out_dir + "/study1.jsonl";
    paths.study2_log = out_dir + "/study2.jsonl";
    save_bundle(paths.bundle, bundle);

    // Study 1 transcripts
    std::string log1;
    for (int qnum = 1; qnum <= 31; ++qnum) {
        const Question& q = bundle.questions[qnum - 1];
        const double anchor = question_anchor(qnum);
        const std::string s1_fp =
            fnv1a_hex(render_prompt(TemplateId::study1, q, std::nullopt));
        for (int mi = 0; mi < 12; ++mi) {
            const ModelSeed& m = kModels[mi];
            bool refusal = false;
            const bool missing_cell = cell_missing(m.id, qnum, refusal);
            for (int rep = 1; rep <= 3; ++rep) {
                Rng rng = key_rng(qnum, mi, rep, 1);
                const std::int64_t when =
                    kStudy1Base + (qnum - 1) * 86400 + mi * 3600 + (rep - 1) * 300;
                TranscriptEntry e = base_entry(m.id, qnum, rep, Phase::s1, when, s1_fp);
                const bool falcon_extra =
                    m.id == "falcon-180b" && qnum == 1 && rep == 3;
                if (missing_cell || falcon_extra) {
                    if (refusal) {
                        e.status = Status::refusal;
                        e.response_text =
                            "I am not able to provide a probability for this event. "
                            "Speculating about it would go beyond what I can help with.";
                    } else {
                        e.status = Status::technical_failure;
                        e.response_text = "request timed out before a response arrived";
                    }
                    log1 += render_transcript_line(e) + "\n";
                    continue;
                }
                bool bare = false;
                for (const auto& slot : kBareSlots)
                    if (matches(slot, m.id, qnum, rep)) bare = true;
                e.status = Status::ok;
                if (bare) {
                    e.response_text = kQuestions[qnum - 1].yes ? "Yes." : "No.";
                } else {
                    double pct = anchor + m.bias + rng.normal(0.0, m.sigma);
                    pct = round2(clamp_pct(pct));
                    if (matches(kFloorSlot, m.id, qnum, rep)) pct = 0.10;
                    if (matches(kCeilSlot, m.id, qnum, rep)) pct = 99.50;
                    e.response_text = study1_response(pct, rng);
                }
                log1 += render_transcript_line(e) + "\n";
            }
        }
    }
    write_file(paths.study1_log, log1);

    // Study 2 transcripts: gpt-4 and claude-2, intervals, two phases per rep
    std::string log2;
    const std::array<int, 2> study2_models = {0, 2};
    for (int qnum = 1; qnum <= 31; ++qnum) {
        const Question& q = bundle.questions[qnum - 1];
        const double anchor = question_anchor(qnum);
        const double human = latest_human_median(q)->percent();
        const std::string s2i_fp =
            fnv1a_hex(render_prompt(TemplateId::study2_initial, q, std::nullopt));
        const std::string s2u_fp = fnv1a_hex(
            render_prompt(TemplateId::study2_intervention, q, latest_human_median(q)));
        for (int smi = 0; smi < 2; ++smi) {
            const int mi = study2_models[smi];
            const ModelSeed& m = kModels[mi];
            const double base_width = mi == 0 ? 17.75 : 11.7;
            const double width_sd = mi == 0 ? 5.0 : 3.6;
            for (int rep = 1; rep <= 3; ++rep) {
                Rng rng = key_rng(qnum, mi, rep, 2);
                double center = anchor + m.bias + rng.normal(0.0, m.sigma);
                double width = std::max(3.0, rng.normal(base_width, width_sd));
                center = std::min(99.5 - width / 2.0,
                                  std::max(0.1 + width / 2.0, center));
                const double pre_lo = round2(clamp_pct(center - width / 2.0));
                const double pre_hi = round2(clamp_pct(center + width / 2.0));

                const double lambda = rng.uniform(0.45, 0.85);
                double post_center = center + lambda * (human - center) +
                                     rng.normal(0.0, 2.0);
                double post_width = width * rng.uniform(0.55, 0.95);
                post_width = std::max(2.0, post_width);
                post_center = std::min(99.5 - post_width / 2.0,
                                       std::max(0.1 + post_width / 2.0, post_center));
                const double post_lo = round2(clamp_pct(post_center - post_width / 2.0));
                const double post_hi = round2(clamp_pct(post_center + post_width / 2.0));

                const bool swap_pre = m.id == "claude-2" && qnum == 9 && rep == 2;
                const bool swap_post = m.id == "gpt-4" && qnum == 25 && rep == 3;
                const std::int64_t when =
                    kStudy2Base + (qnum - 1) * 86400 + smi * 7200 + (rep - 1) * 600;

                TranscriptEntry pre =
                    base_entry(m.id, qnum, rep, Phase::s2_initial, when, s2i_fp);
                pre.status = Status::ok;
                pre.response_text = interval_response(pre_lo, pre_hi, swap_pre, rng);
                log2 += render_transcript_line(pre) + "\n";

                TranscriptEntry post =
                    base_entry(m.id, qnum, rep, Phase::s2_updated, when + 120, s2u_fp);
                post.status = Status::ok;
                post.response_text = interval_response(post_lo, post_hi, swap_post, rng);
                log2 += render_transcript_line(post) + "\n";
            }
        }
    }
    write_file(paths.study2_log, log2);
    return paths;
}

}  // namespace silicrowd
