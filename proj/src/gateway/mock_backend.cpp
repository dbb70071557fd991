#include "prefine/gateway/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "prefine/core/tokenizer.hpp"
#include "prefine/errors.hpp"
#include "prefine/util/hash.hpp"
#include "prefine/util/text.hpp"

namespace prefine::gateway {

namespace {

// Raw engine output only: std::uniform_int_distribution is not portable
// across standard libraries, and mock output must be.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine_() % n); }

    template <typename T, std::size_t N>
    const T& pick(const std::array<T, N>& items) {
        return items[below(N)];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

constexpr std::array<std::string_view, 12> kNames = {
    "Mara Quinlan", "Elias Thorne", "Noor Haddad",  "Tomas Reyes",   "Ines Calder",  "Owen Blake",
    "Priya Natarajan", "Felix Amsel", "June Okafor", "Leo Varga", "Hana Sato", "Rafael Duarte"};

constexpr std::array<std::string_view, 8> kPlaces = {
    "the fading harbor town",      "the old observatory",     "the crowded night market",
    "the mountain rail station",   "the flooded city archive", "the lighthouse on the northern cape",
    "the shuttered textile mill",  "the border village"};

constexpr std::array<std::string_view, 8> kObjects = {
    "a sealed letter",       "an unfinished map",     "a stolen ledger",   "a cracked pocket watch",
    "a forgotten recording", "a deed to the old farm", "a coded diary",    "a photograph with a missing face"};

constexpr std::array<std::string_view, 8> kRoles = {
    "harbor pilot", "retired detective", "young archivist", "traveling musician",
    "schoolteacher", "disgraced engineer", "night-shift nurse", "local journalist"};

constexpr std::array<std::string_view, 8> kTraits = {
    "keeps every promise even when it costs them dearly",
    "hides a quiet fear of being forgotten behind a sharp sense of humor",
    "trusts evidence more than people and is often proven right",
    "left town years ago and has returned with unfinished business",
    "is fiercely loyal to family but resents the weight of that loyalty",
    "wants to be seen as brave and takes risks to prove it",
    "knows more about the town's past than they admit",
    "is searching for a way to make amends for an old mistake"};

constexpr std::array<std::string_view, 8> kEras = {
    "during a long, wet autumn",       "in the last years before the railway closed",
    "at the height of a harsh winter", "over one sweltering summer",
    "in the months after a great flood", "on the eve of a contested election",
    "while the town prepares for its centennial", "as a drought tests everyone's patience"};

constexpr std::array<std::string_view, 8> kHeadlines = {
    "{A} discovers {O} hidden in {P}.",
    "{A} and {B} follow the trail of {O}.",
    "Tension rises as {B} questions the motives of {A}.",
    "The truth about {O} surfaces at the worst possible moment.",
    "{B} makes a costly bargain to protect a secret.",
    "{A} faces the people who once trusted them at {P}.",
    "An unexpected ally offers {A} a way forward.",
    "The community must live with the choices that were made."};

constexpr std::array<std::string_view, 16> kEvents = {
    "{A} notices that the records kept at {P} were altered years ago, and the discovery raises questions nobody wants to answer.",
    "When {B} refuses to keep quiet about {O}, the fragile alliance between the two begins to fracture in public.",
    "A sudden storm cuts off {P}, forcing {A} and {B} to rely on each other despite their growing mistrust.",
    "{B} confronts the town council and demands answers about {O}, but the council closes ranks against them.",
    "Old loyalties are tested as {A} weighs personal ambition against the people who raised them.",
    "The meaning of {O} becomes clear, revealing that {B} has been protecting someone for a very long time.",
    "With time running out, {A} makes a decision that cannot be undone and that changes every relationship in the story.",
    "The confrontation takes place at {P}, where each hidden motive is finally dragged into the light.",
    "In the aftermath, {A} and {B} must decide what kind of future they are still willing to fight for.",
    "A rival from the past of {B} returns with an offer that is difficult to refuse and impossible to trust.",
    "Rumors spread quickly through {P}, and {A} becomes the main target of suspicion and anger.",
    "{A} learns that the only witness to the old accident was {B}, who has kept silent ever since.",
    "A letter arrives for {A} that was posted decades earlier, and its author is someone everyone believed long dead.",
    "{B} quietly sabotages the search for {O}, hoping to spare the town from a painful reckoning.",
    "The journey across the valley exposes how little {A} and {B} truly know about each other.",
    "An attempt to sell {O} to an outsider backfires, putting {A} in real danger for the first time."};

constexpr std::array<std::string_view, 6> kShortSetting = {
    "The air smells of salt and smoke.", "Winters there are long and quiet.",
    "Few outsiders ever stay for long.", "Old rivalries shape daily life.",
    "News travels faster than the trains.", "Every street carries a rumor."};

constexpr std::array<std::string_view, 14> kObservations = {
    "The individual values stories in which characters face meaningful moral choices.",
    "They appear drawn to emotional depth rather than spectacle.",
    "They show a preference for narratives with clear cause and effect.",
    "They seem to enjoy surprises that are earned rather than arbitrary.",
    "They respond well to protagonists who challenge authority.",
    "They are likely analytical and notice inconsistencies quickly.",
    "They appreciate settings that feel lived-in and specific.",
    "They seem motivated by curiosity and a desire for novelty.",
    "They prefer endings that resolve the central conflict while leaving room for reflection.",
    "They tend to dislike melodrama and overly sentimental turns.",
    "They appear to value authenticity in dialogue and relationships.",
    "They enjoy stories with high personal stakes for the main characters.",
    "They are drawn to themes of loyalty, ambition and identity.",
    "They show patience for slow-building tension when the payoff is strong."};

constexpr std::array<std::string_view, 10> kCriteria = {
    "The story features complex, high-stakes situations that drive the narrative forward.",
    "Characters are authentic, multi-dimensional and make choices that matter.",
    "The narrative includes surprising yet plausible turns of events.",
    "The story explores moral dilemmas with nuance.",
    "The setting is vivid and shapes the central conflict.",
    "The ending resolves the central conflict in a satisfying way.",
    "Relationships between characters evolve believably over the story.",
    "The pacing sustains tension from beginning to end.",
    "Characters act with autonomy and take responsibility for their decisions.",
    "Emotional themes are handled with restraint and honesty."};

constexpr std::array<std::string_view, 6> kExplanations = {
    "The draft addresses this only in part.", "This is present but underdeveloped.",
    "The current version handles this reasonably well.", "This element feels predictable in places.",
    "The idea is strong but the execution is thin.", "This is the clearest strength of the draft."};

constexpr std::array<std::string_view, 6> kSuggestions = {
    "Add a concrete scene that sharpens this.", "Raise the stakes tied to this element.",
    "Give a character a decisive choice here.", "Replace generic lines with specific detail.",
    "Foreshadow this earlier in the story.", "Let a secondary character push back on this."};

constexpr std::array<std::string_view, 6> kPositives = {
    "The central conflict is easy to follow and has clear stakes.",
    "The characters have distinct voices and believable motives.",
    "The setting gives the story a strong and specific atmosphere.",
    "The opening moves quickly and establishes the premise well.",
    "The relationship between the leads carries real emotional weight.",
    "Several scenes build tension effectively."};

constexpr std::array<std::string_view, 6> kImprovements = {
    "The middle section loses momentum before the climax.",
    "Some turns of events feel convenient rather than earned.",
    "The antagonist remains vague and underused.",
    "The ending resolves too quickly to feel fully satisfying.",
    "Secondary characters rarely influence the outcome.",
    "The moral stakes could be sharper."};

constexpr std::array<std::string_view, 6> kFixes = {
    "Introduce an external pressure that forces the leads to act sooner.",
    "Give the antagonist a clear and sympathetic goal.",
    "Plant an early clue that makes the final reveal feel inevitable.",
    "Let the protagonist pay a visible price for their final choice.",
    "Add a scene where a secondary character changes the course of events.",
    "Slow the ending down so its consequences can land."};

struct Cast {
    std::string a;
    std::string b;
    std::string place;
    std::string object;
};

Cast make_cast(Rng& rng) {
    std::vector<std::string_view> names(kNames.begin(), kNames.end());
    rng.shuffle(names);
    return Cast{std::string(names[0]), std::string(names[1]), std::string(rng.pick(kPlaces)),
                std::string(rng.pick(kObjects))};
}

std::string fill(std::string_view pattern, const Cast& cast) {
    std::string out;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] == '{' && i + 2 < pattern.size() && pattern[i + 2] == '}') {
            switch (pattern[i + 1]) {
                case 'A': out += cast.a; i += 2; continue;
                case 'B': out += cast.b; i += 2; continue;
                case 'P': out += cast.place; i += 2; continue;
                case 'O': out += cast.object; i += 2; continue;
                default: break;
            }
        }
        out.push_back(pattern[i]);
    }
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

const std::string& last_user_content(const ChatRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == Role::User) return it->content;
    }
    throw InvalidArgument("chat request has no user message");
}

const std::string* last_assistant_content(const ChatRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == Role::Assistant) return &it->content;
    }
    return nullptr;
}

std::string after_last(const std::string& text, std::string_view marker) {
    auto pos = text.rfind(marker);
    if (pos == std::string::npos) return {};
    return std::string(util::trim(std::string_view(text).substr(pos + marker.size())));
}

std::string between(const std::string& text, std::string_view open, std::string_view close) {
    auto start = text.find(open);
    if (start == std::string::npos) return {};
    start += open.size();
    auto end = text.find(close, start);
    if (end == std::string::npos) end = text.size();
    return std::string(util::trim(std::string_view(text).substr(start, end - start)));
}

// Premise of an init prompt: the [Premise] block when present, else the
// final paragraph.
std::string init_premise(const std::string& prompt) {
    auto p = after_last(prompt, "[Premise]\n");
    if (!p.empty()) return p;
    p = after_last(prompt, "\n\n");
    return p.empty() ? std::string(util::trim(prompt)) : p;
}

struct Plot {
    std::string premise;
    std::vector<std::string> setting;
    std::vector<std::string> characters;
    std::array<std::string, 4> items;
    std::array<std::vector<std::string>, 4> subs;

    std::string render() const {
        std::string out = "Premise:\n" + premise + "\n\nSetting:\n" + util::join(setting, " ") +
                          "\n\nCharacters:\n" + util::join(characters, "\n") + "\n\nOutline:";
        for (std::size_t i = 0; i < 4; ++i) {
            out += "\n" + std::to_string(i + 1) + ". " + items[i];
            for (std::size_t j = 0; j < subs[i].size(); ++j) {
                out += "\n   ";
                out.push_back(static_cast<char>('a' + j));
                out += ". " + subs[i][j];
            }
        }
        return out;
    }
};

std::string make_plot(const std::string& premise, Rng& rng, std::size_t lo, std::size_t hi) {
    Cast cast = make_cast(rng);
    Plot plot;
    plot.premise = premise;
    plot.setting.push_back("The story is set in " + cast.place + " " + std::string(rng.pick(kEras)) + ".");

    std::vector<std::string_view> names(kNames.begin(), kNames.end());
    rng.shuffle(names);
    std::vector<std::string> cast_names = {cast.a, cast.b};
    for (auto n : names) {
        if (cast_names.size() >= 4) break;
        if (n != cast.a && n != cast.b) cast_names.emplace_back(n);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        plot.characters.push_back(cast_names[i] + ": a " + std::string(rng.pick(kRoles)) + " who " +
                                  std::string(rng.pick(kTraits)) + ".");
    }

    std::vector<std::string_view> headlines(kHeadlines.begin(), kHeadlines.end());
    std::vector<std::string_view> events(kEvents.begin(), kEvents.end());
    rng.shuffle(events);
    std::size_t next_event = 0;
    auto take_event = [&]() {
        auto e = fill(events[next_event % events.size()], cast);
        ++next_event;
        return e;
    };
    for (std::size_t i = 0; i < 4; ++i) {
        plot.items[i] = fill(headlines[2 * i + rng.below(2)], cast);
        plot.subs[i].push_back(take_event());
    }

    auto count = [&plot] { return approx_token_count(plot.render()); };
    std::size_t extra_char = 3;
    while (count() < lo) {
        // Grow the thinnest outline item first.
        std::size_t target = 0;
        for (std::size_t i = 1; i < 4; ++i) {
            if (plot.subs[i].size() < plot.subs[target].size()) target = i;
        }
        if (plot.subs[target].size() < 4) {
            plot.subs[target].push_back(take_event());
            if (count() <= hi) continue;
            plot.subs[target].pop_back();
        } else if (extra_char < cast_names.size()) {
            plot.characters.push_back(cast_names[extra_char++] + ": a " + std::string(rng.pick(kRoles)) +
                                      " who " + std::string(rng.pick(kTraits)) + ".");
            if (count() <= hi) continue;
            plot.characters.pop_back();
        }
        plot.setting.emplace_back(rng.pick(kShortSetting));
        if (count() > hi) {
            plot.setting.pop_back();
            break;
        }
    }
    return plot.render();
}

std::string make_synopsis(const std::string& premise, Rng& rng) {
    Cast cast = make_cast(rng);
    std::vector<std::string_view> events(kEvents.begin(), kEvents.end());
    rng.shuffle(events);
    const std::size_t target = 10 + rng.below(4);
    const std::size_t have = std::max<std::size_t>(1, util::count_sentences(premise));
    const std::size_t add = target > have ? target - have : 1;
    std::string out = premise;
    for (std::size_t i = 0; i < add; ++i) out += " " + fill(events[i % events.size()], cast);
    return out;
}

std::string make_persona(Rng& rng) {
    std::vector<std::string_view> obs(kObservations.begin(), kObservations.end());
    rng.shuffle(obs);
    const std::size_t n = 5 + rng.below(6);
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < n; ++i) lines.push_back(std::to_string(i + 1) + ". " + std::string(obs[i]));
    return util::join(lines, "\n");
}

std::string make_rubric(Rng& rng) {
    std::vector<std::string_view> crit(kCriteria.begin(), kCriteria.end());
    rng.shuffle(crit);
    const std::size_t n = 3 + rng.below(3);
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < n; ++i) lines.push_back(std::to_string(i + 1) + ". " + std::string(crit[i]));
    return util::join(lines, "\n");
}

std::vector<std::string> rubric_lines(const std::string& prompt) {
    std::vector<std::string> out;
    auto block = between(prompt, "[Rubric]\n", "\n\n");
    for (const auto& line : util::split_lines(block)) {
        auto t = util::trim(util::strip_list_marker(util::trim(line)));
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

std::string make_structured_feedback(const std::string& prompt, Rng& rng) {
    auto criteria = rubric_lines(prompt);
    if (criteria.empty()) criteria.emplace_back("Overall quality");
    std::vector<std::string> blocks;
    for (const auto& c : criteria) {
        blocks.push_back("Criterion: " + c + "\nScore: " + std::to_string(4 + rng.below(6)) +
                         "\nExplanation: " + std::string(rng.pick(kExplanations)) +
                         "\nSuggestion: " + std::string(rng.pick(kSuggestions)));
    }
    return util::join(blocks, "\n\n");
}

std::string make_freeform_feedback(Rng& rng) {
    return "1. Positive Aspects\n" + std::string(rng.pick(kPositives)) +
           "\n\n2. Areas for Improvement\n" + std::string(rng.pick(kImprovements)) + " " +
           std::string(rng.pick(kImprovements)) + "\n\n3. Suggestions for Improvement\n" +
           std::string(rng.pick(kFixes)) + " " + std::string(rng.pick(kFixes));
}

std::string make_pairwise_verdict(const std::string& prompt, Rng& rng) {
    auto s1 = between(prompt, "[Story 1]\n", "\n\n[Story 2]\n");
    auto s2 = between(prompt, "\n\n[Story 2]\n", "\n\nAnswer with");
    if (s1.empty() || s2.empty()) return rng.below(2) == 0 ? "Preferred: Story 1" : "Preferred: Story 2";
    // Content-based, so the preferred story does not depend on position.
    return util::sha256_hex(s1) <= util::sha256_hex(s2) ? "Preferred: Story 1"
                                                        : "Preferred: Story 2";
}

std::string make_quality(Rng& rng) {
    constexpr std::array<std::string_view, 6> names = {"Relevance", "Coherence", "Empathy",
                                                       "Surprise",  "Engagement", "Complexity"};
    std::vector<std::string> lines;
    for (auto n : names) lines.push_back(std::string(n) + ": " + std::to_string(5 + rng.below(5)));
    return util::join(lines, "\n");
}

}  // namespace

std::optional<std::string> request_kind(const ChatRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == Role::User) return detect_sentinel(it->content);
    }
    return std::nullopt;
}

std::string mock_generate(const ChatRequest& request) {
    auto kind = request_kind(request);
    if (!kind) throw UnknownPromptKind("request carries no prompt-kind sentinel");
    const std::string prompt = strip_sentinels(last_user_content(request));
    Rng rng(util::sha256_u64(cache_key(request)));

    if (*kind == "init.permpst") return make_synopsis(init_premise(prompt), rng);
    if (*kind == "init.perdoc") {
        const std::size_t lo = 470 + rng.below(120);
        return make_plot(init_premise(prompt), rng, lo, lo + 40);
    }
    if (*kind == "refine.perdoc") {
        std::string premise;
        if (const auto* draft = last_assistant_content(request)) {
            premise = between(*draft, "Premise:\n", "\n\nSetting:");
        }
        if (premise.empty()) premise = "An untitled story.";
        return make_plot(premise, rng, 505 + rng.below(20), 545);
    }
    if (*kind == "refine.permpst") {
        auto premise = between(prompt, "premise -> ", "\n- Apply the necessary");
        if (premise.empty()) premise = "An untitled story.";
        return make_synopsis(premise, rng);
    }
    if (*kind == "persona.perdoc" || *kind == "persona.permpst") return make_persona(rng);
    if (*kind == "rubric") return make_rubric(rng);
    if (*kind == "feedback.structured") return make_structured_feedback(prompt, rng);
    if (*kind == "feedback.freeform") return make_freeform_feedback(rng);
    if (*kind == "judge.pairwise") return make_pairwise_verdict(prompt, rng);
    if (*kind == "judge.score") return "Score: " + std::to_string(4 + rng.below(6));
    if (*kind == "judge.quality") return make_quality(rng);
    throw UnknownPromptKind("mock backend cannot answer prompt kind '" + *kind + "'");
}

MockFixtures MockFixtures::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open mock fixture file " + path.string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_object()) throw InvalidArgument("mock fixture file is not a JSON object");
    MockFixtures f;
    if (j.contains("overrides")) f.overrides = j["overrides"].get<std::map<std::string, std::string>>();
    if (j.contains("transientFailures")) {
        f.transient_failures = j["transientFailures"].get<std::map<std::string, int>>();
    }
    if (j.contains("default")) f.default_response = j["default"].get<std::string>();
    return f;
}

MockBackend::MockBackend(std::string id, MockFixtures fixtures)
    : id_(std::move(id)), fixtures_(std::move(fixtures)) {}

ChatResponse MockBackend::send(const ChatRequest& request) {
    auto kind = request_kind(request);
    if (kind) {
        auto fail = fixtures_.transient_failures.find(*kind);
        if (fail != fixtures_.transient_failures.end()) {
            std::lock_guard lock(mutex_);
            int& served = failures_served_[cache_key(request)];
            if (served < fail->second) {
                ++served;
                throw TransientBackendError("scripted transient failure for " + *kind);
            }
        }
    }

    ChatResponse r;
    if (kind && fixtures_.overrides.count(*kind)) {
        r.text = fixtures_.overrides.at(*kind);
    } else if (!kind && fixtures_.default_response) {
        r.text = *fixtures_.default_response;
    } else {
        r.text = mock_generate(request);
    }
    std::size_t prompt_tokens = 0;
    for (const auto& m : request.messages) prompt_tokens += approx_token_count(m.content);
    r.prompt_tokens = static_cast<int>(prompt_tokens);
    r.completion_tokens = static_cast<int>(approx_token_count(r.text));
    return r;
}

}  // namespace prefine::gateway
