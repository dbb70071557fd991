#pragma once

// Domain types shared by every module. All of them are plain values:
// immutable once built, comparable, and safe to share across threads.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace prefine {

enum class Aspect { Interestingness, Surprise, Adaptability, CharacterQuality, EndingSatisfaction };

inline constexpr std::array<Aspect, 5> kAllAspects = {
    Aspect::Interestingness, Aspect::Surprise, Aspect::Adaptability, Aspect::CharacterQuality,
    Aspect::EndingSatisfaction};

// Stable serialized name ("CharacterQuality").
std::string_view to_string(Aspect aspect);
// Human-readable name bound into prompts ("Character Quality").
std::string_view display_name(Aspect aspect);
// Accepts either form, case-insensitively. Throws InvalidArgument.
Aspect parse_aspect(std::string_view text);

enum class Dataset { PerDOC, PerMPST };

std::string_view to_string(Dataset dataset);
Dataset parse_dataset(std::string_view text);

struct Premise {
    std::string id;
    std::string text;
    Dataset dataset = Dataset::PerMPST;

    bool operator==(const Premise&) const = default;
};

// Throws InvalidArgument when the text is empty.
Premise make_premise(std::string id, std::string text, Dataset dataset);

enum class Choice { A, B };

std::string_view to_string(Choice choice);
Choice parse_choice(std::string_view text);

struct PerDocInteraction {
    std::string plot_a;
    std::string plot_b;
    Aspect aspect = Aspect::Interestingness;
    Choice choice = Choice::A;

    bool operator==(const PerDocInteraction&) const = default;
};

struct PerMpstInteraction {
    std::string synopsis;
    std::string review;
    int score = 0;

    bool operator==(const PerMpstInteraction&) const = default;
};

struct UserHistory {
    std::string user_id;
    std::variant<std::vector<PerDocInteraction>, std::vector<PerMpstInteraction>> interactions;

    Dataset dataset() const;
    std::size_t size() const;
    const std::vector<PerDocInteraction>& perdoc() const;
    const std::vector<PerMpstInteraction>& permpst() const;

    bool operator==(const UserHistory&) const = default;
};

enum class PersonaKind { Explicit, Implicit };

// Estimated user preference: either an expert-written natural-language
// summary (explicit) or the raw history handed to the agent as-is (implicit).
class Persona {
public:
    // Throws EmptyPersona when the text is blank.
    static Persona from_text(std::string ep_text, std::size_t observation_count);
    static Persona from_history(UserHistory history);

    PersonaKind kind() const noexcept { return kind_; }
    const std::optional<std::string>& ep_text() const noexcept { return ep_text_; }
    const std::optional<UserHistory>& history() const noexcept { return history_; }
    std::size_t observation_count() const noexcept { return observation_count_; }

    bool operator==(const Persona&) const = default;

private:
    Persona() = default;

    PersonaKind kind_ = PersonaKind::Implicit;
    std::optional<std::string> ep_text_;
    std::optional<UserHistory> history_;
    std::size_t observation_count_ = 0;
};

enum class RubricKind { UserSpecific, FixedGeneral, None };

inline constexpr std::array<std::string_view, 6> kGeneralCriteria = {
    "Relevance", "Coherence", "Empathy", "Surprise", "Engagement", "Complexity"};

inline constexpr std::size_t kMinRubricCriteria = 3;
inline constexpr std::size_t kMaxRubricCriteria = 5;

class Rubric {
public:
    // Throws RubricArityError outside [3,5], InvalidArgument on blank criteria.
    static Rubric user_specific(std::vector<std::string> criteria);
    static Rubric fixed_general();
    static Rubric none();

    RubricKind kind() const noexcept { return kind_; }
    const std::vector<std::string>& criteria() const noexcept { return criteria_; }

    bool operator==(const Rubric&) const = default;

private:
    Rubric() = default;

    RubricKind kind_ = RubricKind::None;
    std::vector<std::string> criteria_;
};

std::string_view to_string(RubricKind kind);

struct CriterionFeedback {
    std::string criterion;
    int score = 0;
    std::string explanation;
    std::string suggestion;

    bool operator==(const CriterionFeedback&) const = default;
};

enum class FeedbackForm { Structured, Freeform };

struct Feedback {
    FeedbackForm form = FeedbackForm::Structured;
    int iteration = 0;
    std::vector<CriterionFeedback> items;  // Structured only
    std::string positives;                 // Freeform only
    std::string improvements;
    std::string suggestions;
    std::string raw_text;  // the critique as the model wrote it; fed to refinement

    bool all_scores_at_least(int threshold) const;

    bool operator==(const Feedback&) const = default;
};

enum class Method { ZP, PP, PEP, SR, IPIR, IPER, EPIR, EPER };

inline constexpr std::array<Method, 8> kAllMethods = {Method::ZP,   Method::PP,   Method::PEP,
                                                      Method::SR,   Method::IPIR, Method::IPER,
                                                      Method::EPIR, Method::EPER};

std::string_view to_string(Method method);
// Throws InvalidArgument naming the valid methods.
Method parse_method(std::string_view text);
std::string valid_method_names();

enum class InitFrom { ZP, PEP };

std::string_view to_string(InitFrom init);
InitFrom parse_init_from(std::string_view text);

inline constexpr int kDefaultIterations = 7;

struct MethodConfig {
    Method method = Method::EPER;
    int max_iterations = kDefaultIterations;
    InitFrom init_from = InitFrom::ZP;
    bool early_stop = false;

    // Validates the method/T pairing: ZP, PP and PEP take T = 0, every
    // refining method 1 <= T <= ceiling. A missing T picks the default.
    static MethodConfig make(Method method, std::optional<int> iterations = std::nullopt,
                             InitFrom init_from = InitFrom::ZP, bool early_stop = false,
                             int iteration_ceiling = kDefaultIterations);

    // Directory/table label, e.g. "EPER" or "EPER-initPEP".
    std::string label() const;

    bool operator==(const MethodConfig&) const = default;
};

struct Capabilities {
    bool uses_explicit_persona = false;
    bool uses_explicit_rubric = false;
    bool iterates = false;

    bool operator==(const Capabilities&) const = default;
};

Capabilities method_capabilities(Method method);
Capabilities method_capabilities(const MethodConfig& config);
// The rubric kind a method critiques against.
RubricKind rubric_kind_for(Method method);

enum class Stage { Init, Persona, Rubric, Feedback, Refine };

inline constexpr std::array<Stage, 5> kAllStages = {Stage::Init, Stage::Persona, Stage::Rubric,
                                                    Stage::Feedback, Stage::Refine};

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

class StoryDraft {
public:
    // Counts tokens with the named tokenizer.
    StoryDraft(std::string text, int iteration, std::string_view tokenizer = "approx");

    // Rebuilds a draft from persisted fields without recounting.
    static StoryDraft restore(std::string text, int iteration, std::size_t token_count);

    const std::string& text() const noexcept { return text_; }
    int iteration() const noexcept { return iteration_; }
    std::size_t token_count() const noexcept { return token_count_; }

    bool operator==(const StoryDraft&) const = default;

private:
    StoryDraft() = default;

    std::string text_;
    int iteration_ = 0;
    std::size_t token_count_ = 0;
};

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct TranscriptEntry {
    std::string prompt_id;
    Stage stage = Stage::Init;
    int iteration = 0;
    int attempt = 0;
    long long seed = 0;
    double temperature = 0.0;
    std::vector<ChatMessage> messages;
    std::string response;

    bool operator==(const TranscriptEntry&) const = default;
};

struct TraceWarning {
    Stage stage = Stage::Init;
    int iteration = 0;
    std::string code;
    std::string message;

    bool operator==(const TraceWarning&) const = default;
};

struct TraceFailure {
    Stage stage = Stage::Init;
    int iteration = 0;
    std::string code;
    std::string message;

    bool operator==(const TraceFailure&) const = default;
};

// Complete audited record of one (record, method) run.
struct RefinementTrace {
    std::string record_id;
    Premise premise;
    UserHistory history;
    std::optional<Aspect> aspect;
    MethodConfig config;
    std::string backend;
    long long seed = 42;
    double temperature = 0.7;

    std::optional<Persona> persona;
    std::optional<Rubric> rubric;
    std::vector<StoryDraft> drafts;
    std::vector<Feedback> feedbacks;
    std::vector<TranscriptEntry> transcript;
    std::vector<TraceWarning> warnings;
    std::optional<TraceFailure> failure;
    bool stopped_early = false;

    const StoryDraft& final_draft() const;
    bool succeeded() const noexcept { return !failure.has_value(); }

    // |drafts| = |feedbacks| + 1 and iteration monotonicity. A failed trace
    // may hold no drafts at all. Throws InvariantViolation.
    void check_invariants() const;

    bool operator==(const RefinementTrace&) const = default;
};

}  // namespace prefine
