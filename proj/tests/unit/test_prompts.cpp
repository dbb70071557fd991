#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "prefine/errors.hpp"
#include "prefine/gateway/chat.hpp"
#include "prefine/gateway/mock_backend.hpp"
#include "prefine/prompts/parsers.hpp"
#include "prefine/prompts/template.hpp"
#include "prefine/util/text.hpp"
#include "support.hpp"

using namespace prefine;
using namespace prefine::prompts;

namespace {

const TemplateRegistry& reg() { return TemplateRegistry::builtin(); }

Binding bind_all(const Template& t, const std::string& value = "V") {
    Binding b;
    for (const auto& p : t.placeholders) b[p] = value + "_" + p;
    return b;
}

// Independent legality table for (method, stage).
bool legal(Method m, Stage s) {
    const std::set<Method> explicit_persona = {Method::PEP, Method::EPIR, Method::EPER};
    const std::set<Method> rubric = {Method::IPER, Method::EPER};
    const std::set<Method> iterating = {Method::SR, Method::IPIR, Method::IPER, Method::EPIR,
                                        Method::EPER};
    switch (s) {
        case Stage::Init: return true;
        case Stage::Persona: return explicit_persona.count(m) > 0;
        case Stage::Rubric: return rubric.count(m) > 0;
        case Stage::Feedback:
        case Stage::Refine: return iterating.count(m) > 0;
    }
    return false;
}

MethodConfig default_config(Method m) { return MethodConfig::make(m); }

const std::vector<std::string> kWorkedScores = {"6", "7", "5", "8", "7"};

}  // namespace

TEST_SUITE("prompts") {

TEST_CASE("builtin registry holds every template with a consistent header") {
    CHECK(reg().size() == 28);
    for (const auto& id : reg().ids()) {
        const auto& t = reg().get(id);
        CAPTURE(id);
        CHECK(scan_placeholders(t.body) == t.placeholders);
        CHECK_FALSE(t.sentinel_kind.empty());
        CHECK(t.body.back() != '\n');
    }
    CHECK(reg().hash() == TemplateRegistry::builtin().hash());
    CHECK(reg().hash().size() == 64);
    CHECK_THROWS_AS(reg().get("nope"), TemplateError);
}

TEST_CASE("template origin flags") {
    const std::set<std::string> invented = {
        "init.perdoc",          "init.perdoc.pp",         "init.perdoc.pep",      "init.permpst.pp",
        "init.permpst.pep",     "feedback.perdoc.sr",     "feedback.permpst.sr",  "judge.pairwise.perdoc",
        "judge.pairwise.permpst", "judge.score.permpst",  "judge.quality"};
    for (const auto& id : reg().ids()) {
        CAPTURE(id);
        CHECK((reg().get(id).origin == TemplateOrigin::Invented) == (invented.count(id) > 0));
    }
}

TEST_CASE("the on-disk template directory matches the embedded registry") {
    auto disk = TemplateRegistry::load_directory(testing::source_dir() / "templates");
    CHECK(disk.hash() == reg().hash());
}

TEST_CASE("template census over all method x stage x dataset cells") {
    std::set<std::string> reached;
    int legal_cells = 0;
    for (Method m : kAllMethods) {
        for (Stage s : kAllStages) {
            for (Dataset d : {Dataset::PerDOC, Dataset::PerMPST}) {
                CAPTURE(to_string(m));
                CAPTURE(to_string(s));
                CAPTURE(to_string(d));
                if (legal(m, s)) {
                    ++legal_cells;
                    const auto& t = select_template(reg(), default_config(m), s, d);
                    REQUIRE(t.dataset.has_value());
                    CHECK(*t.dataset == d);
                    reached.insert(t.id);
                } else {
                    CHECK_THROWS_AS(select_template_id(default_config(m), s, d), IllegalStage);
                }
            }
        }
    }
    CHECK(legal_cells == 2 * (8 + 3 + 2 + 5 + 5));
    // initFrom=PEP adds the persona stage and the PEP generator.
    auto pep_init = MethodConfig::make(Method::EPER, 7, InitFrom::PEP);
    CHECK(select_template_id(pep_init, Stage::Init, Dataset::PerDOC) == "init.perdoc.pep");
    auto ipir_pep = MethodConfig::make(Method::IPIR, 7, InitFrom::PEP);
    CHECK(select_template_id(ipir_pep, Stage::Persona, Dataset::PerMPST) == "persona.permpst");
    reached.insert("init.perdoc.pep");

    for (const auto& id : reg().ids()) {
        if (id.rfind("judge.", 0) == 0) continue;
        CAPTURE(id);
        CHECK(reached.count(id) == 1);
    }
}

TEST_CASE("select_template examples") {
    CHECK(select_template_id(default_config(Method::EPER), Stage::Feedback, Dataset::PerDOC) ==
          "feedback.perdoc.eper");
    CHECK_THROWS_AS(select_template_id(default_config(Method::IPIR), Stage::Rubric, Dataset::PerMPST),
                    IllegalStage);
    CHECK_THROWS_AS(select_template_id(default_config(Method::EPIR), Stage::Rubric, Dataset::PerDOC),
                    IllegalStage);
    CHECK(select_template_id(default_config(Method::SR), Stage::Feedback, Dataset::PerMPST) ==
          "feedback.permpst.sr");
    CHECK(select_template_id(default_config(Method::EPER), Stage::Rubric, Dataset::PerMPST) ==
          "rubric.permpst.ep");
    CHECK(select_template_id(default_config(Method::IPER), Stage::Rubric, Dataset::PerDOC) ==
          "rubric.perdoc.ip");
    CHECK(reg().get("rubric.perdoc.ip").placeholders ==
          std::set<std::string>{"user_history", "aspect", "choice"});
}

TEST_CASE("render substitutes placeholders and nothing else") {
    const auto& init = reg().get("init.permpst");
    auto out = render(init, {{"premise", "X"}});
    CHECK(out.find("between 10 and 13 sentences") != std::string::npos);
    CHECK(out.back() == 'X');
    CHECK(out == render(init, {{"premise", "X"}}));

    const auto& eper = reg().get("feedback.perdoc.eper");
    auto b = bind_all(eper);
    b.erase("aspect");
    try {
        render(eper, b);
        FAIL("expected MissingPlaceholder");
    } catch (const MissingPlaceholder& e) {
        CHECK(e.name() == "aspect");
    }
    b = bind_all(eper);
    b["extra"] = "x";
    CHECK_THROWS_AS(render(eper, b), UnknownPlaceholder);
    b = bind_all(eper);
    b["story_plot"] = "";
    CHECK_THROWS_AS(render(eper, b), MissingPlaceholder);
}

TEST_CASE("rendered prompts keep literal double braces and leave no placeholders") {
    for (const auto& id : reg().ids()) {
        const auto& t = reg().get(id);
        auto out = render(t, bind_all(t));
        CAPTURE(id);
        for (const auto& p : t.placeholders) CHECK(out.find("{" + p + "}") == std::string::npos);
        // Everything outside placeholders is byte-identical to the body.
        std::string rebuilt = t.body;
        for (const auto& p : t.placeholders) {
            std::string token = "{" + p + "}";
            std::string value = "V_" + p;
            for (auto pos = rebuilt.find(token); pos != std::string::npos; pos = rebuilt.find(token, pos)) {
                if (pos > 0 && rebuilt[pos - 1] == '{') {
                    pos += token.size();
                    continue;
                }
                rebuilt.replace(pos, token.size(), value);
                pos += value.size();
            }
        }
        CHECK(out == rebuilt);
    }
    auto fb = render(reg().get("feedback.permpst.eper"), bind_all(reg().get("feedback.permpst.eper")));
    CHECK(fb.find("Criterion: {{criterion_text}}\n") != std::string::npos);
}

TEST_CASE("appendix templates are transcribed exactly") {
    const auto& eper = reg().get("feedback.perdoc.eper").body;
    CHECK(eper.rfind("You are a simulated literary critic who is thoroughly familiar with a specific "
                     "user's narrative preferences.\n\n[User Persona]\n",
                     0) == 0);
    CHECK(eper.find("In this scale, 5 represents a typical or average fulfillment of the criterion.\n"
                    "Scores of 9 or 10 should be reserved for truly exceptional cases.\n") !=
          std::string::npos);
    CHECK(eper.find("[Story to Evaluate]\n{story_plot}") != std::string::npos);

    const auto& refine = reg().get("refine.permpst").body;
    CHECK(refine.find("- Modifications to the Premise are not permitted. premise -> {premise}\n") !=
          std::string::npos);
    CHECK(refine.find("[Feedback End]\n\n---\n\n[Instructions for Refinement]") != std::string::npos);

    const auto& refine_doc = reg().get("refine.perdoc").body;
    CHECK(refine_doc.find("1. **The refined plot must be between 500-550 tokens in length.**") !=
          std::string::npos);
    CHECK(refine_doc.find("Information about the story\xE2\x80\x99s setting.") != std::string::npos);

    const auto& persona = reg().get("persona.perdoc").body;
    CHECK(persona.find("individual's choice.)\n\n{user_preference}\n[Aspect]\n{aspect}\n[Preference]\n"
                       "{user_preference_answer}\n\nFollow the instructions") != std::string::npos);
    CHECK(persona.find("observations/reflections") != std::string::npos);

    CHECK(reg().get("feedback.permpst.ipir").body.find("\npremise: {premise}\n") != std::string::npos);
    CHECK(reg().get("feedback.permpst.epir").body.find("\nPremise: {premise}\n") != std::string::npos);
    CHECK(reg().get("rubric.permpst.ep").body.find("Based on this Persona, construct") != std::string::npos);
}

TEST_CASE("tagged renders end in the sentinel, which strips back to the plain render") {
    const auto& t = reg().get("rubric.permpst.ip");
    auto b = bind_all(t);
    auto tagged = render_tagged(t, b);
    CHECK(gateway::detect_sentinel(tagged) == std::optional<std::string>("rubric"));
    CHECK(gateway::strip_sentinels(tagged) == render(t, b));
}

TEST_CASE("template file parsing rejects inconsistent headers") {
    CHECK_THROWS_AS(parse_template_file("no front matter"), TemplateError);
    CHECK_THROWS_AS(parse_template_file("---\nid: x\nplaceholders: a\nsentinel: k\n---\nbody {b}"),
                    TemplateError);
    CHECK_THROWS_AS(parse_template_file("---\nid: x\nplaceholders: a, b\nsentinel: k\n---\n{a}"),
                    TemplateError);
    CHECK_THROWS_AS(parse_template_file("---\nid: x\nplaceholders:\n---\nbody"), TemplateError);
    auto t = parse_template_file(
        "---\nid: x\ndataset: any\nplaceholders: a\noptional: a\nsentinel: k\norigin: invented\n---\n"
        "A {a} and {{lit}}\n\n");
    CHECK(t.body == "A {a} and {{lit}}");
    CHECK_FALSE(t.dataset.has_value());
    CHECK(render(t, {{"a", ""}}) == "A  and {{lit}}");
}

TEST_CASE("parse_rubric on the worked five-criterion rubric") {
    auto r = parse_rubric(testing::read_test_data("worked_rubric.txt"));
    REQUIRE(r.criteria().size() == 5);
    CHECK(r.criteria()[0] == "The story features complex, high-stakes situations that drive the plot forward.");
    CHECK(r.criteria()[4] ==
          "The story has a strong sense of autonomy and self-determination in its characters' actions.");
    CHECK(r.kind() == RubricKind::UserSpecific);
}

TEST_CASE("parse_rubric marker forms and arity") {
    auto numbered = parse_rubric("1. Alpha is good.\n2. Beta matters.\n3) Gamma counts.\n");
    auto dashed = parse_rubric("- Alpha is good.\n- Beta matters.\n- Gamma counts.");
    auto bulleted = parse_rubric("\xE2\x80\xA2 Alpha is good.\n* Beta matters.\n+ Gamma counts.");
    CHECK(numbered == dashed);
    CHECK(bulleted == dashed);
    auto with_preamble = parse_rubric("[Your Rubric]\nHere are the criteria:\n1. Alpha is good.\n"
                                      "2. Beta matters.\n3. Gamma counts.");
    CHECK(with_preamble == dashed);
    CHECK(parse_rubric("Alpha\nBeta\nGamma").criteria().size() == 3);
    try {
        parse_rubric("1. one\n2. two");
        FAIL("expected RubricArityError");
    } catch (const RubricArityError& e) {
        CHECK(e.count() == 2);
    }
    CHECK_THROWS_AS(parse_rubric("\n \n"), EmptyRubric);
}

TEST_CASE("render then parse reproduces a rubric") {
    auto r = Rubric::user_specific({"First criterion.", "Second: with a colon.", "Third one"});
    CHECK(parse_rubric(render_rubric_list(r)) == r);
    const auto& t = reg().get("rubric.permpst.ep");
    (void)t;
}

TEST_CASE("parse_structured_feedback on the worked feedback block") {
    auto rubric = parse_rubric(testing::read_test_data("worked_rubric.txt"));
    auto fb = parse_structured_feedback(testing::read_test_data("worked_feedback.txt"), rubric);
    REQUIRE(fb.items.size() == 5);
    std::vector<int> scores;
    for (const auto& item : fb.items) scores.push_back(item.score);
    CHECK(scores == std::vector<int>{6, 7, 5, 8, 7});
    CHECK(fb.items[2].explanation ==
          "The narrative is straightforward and lacks unique storytelling elements.");
    CHECK(fb.items[0].suggestion.rfind("Introduce external conflicts", 0) == 0);
    for (std::size_t i = 0; i < 5; ++i) CHECK(fb.items[i].criterion == rubric.criteria()[i]);
}

TEST_CASE("structured feedback blocks are reported in rubric order") {
    auto rubric = parse_rubric(testing::read_test_data("worked_rubric.txt"));
    auto text = testing::read_test_data("worked_feedback.txt");
    // Split into blocks on the criterion label and reverse them.
    std::vector<std::string> blocks;
    for (auto pos = text.find("Criterion:"); pos != std::string::npos;) {
        auto next = text.find("Criterion:", pos + 1);
        blocks.push_back(text.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        pos = next;
    }
    REQUIRE(blocks.size() == 5);
    std::reverse(blocks.begin(), blocks.end());
    std::string permuted;
    for (auto& b : blocks) permuted += b + "\n";
    auto fb = parse_structured_feedback(permuted, rubric);
    std::vector<int> scores;
    for (const auto& item : fb.items) scores.push_back(item.score);
    CHECK(scores == std::vector<int>{6, 7, 5, 8, 7});
}

TEST_CASE("structured feedback errors") {
    auto rubric = Rubric::user_specific({"Alpha.", "Beta.", "Gamma."});
    auto block = [](const std::string& c, const std::string& score) {
        return "Criterion: " + c + "\nScore: " + score + "\nExplanation: e\nSuggestion: s\n\n";
    };
    auto good = block("Alpha.", "5") + block("Beta.", "6") + block("Gamma.", "7");
    CHECK(parse_structured_feedback(good, rubric).items.size() == 3);

    try {
        parse_structured_feedback(block("Alpha.", "11") + block("Beta.", "6") + block("Gamma.", "7"),
                                  rubric);
        FAIL("expected ScoreOutOfRange");
    } catch (const ScoreOutOfRange& e) {
        CHECK(e.value() == 11);
    }
    CHECK_THROWS_AS(parse_structured_feedback(block("Alpha.", "0") + block("Beta.", "6") +
                                                  block("Gamma.", "7"),
                                              rubric),
                    ScoreOutOfRange);
    CHECK_THROWS_AS(parse_structured_feedback(block("Alpha.", "5") + block("Delta.", "6") +
                                                  block("Gamma.", "7"),
                                              rubric),
                    CriterionMismatch);
    try {
        parse_structured_feedback(block("Alpha.", "5") + block("Beta.", "6"), rubric);
        FAIL("expected MissingField");
    } catch (const MissingField& e) {
        CHECK(e.block() == 2);
        CHECK(e.field() == "Criterion");
    }
    try {
        parse_structured_feedback("Criterion: Alpha.\nScore: 5\nExplanation: e\n\n" +
                                      block("Beta.", "6") + block("Gamma.", "7"),
                                  rubric);
        FAIL("expected MissingField");
    } catch (const MissingField& e) {
        CHECK(e.block() == 0);
        CHECK(e.field() == "Suggestion");
    }
    CHECK_THROWS_AS(parse_structured_feedback(good, Rubric::none()), PreconditionViolation);
}

TEST_CASE("structured feedback tolerates markdown and matches by normalized prefix") {
    auto rubric = Rubric::fixed_general();
    std::string text;
    int score = 3;
    for (const auto& c : rubric.criteria()) {
        text += "**Criterion:** " + c + " of the story\n**Score:** " + std::to_string(score++) +
                "/10\n- Explanation: fine\n  continues here\n- Suggestion: more\n\n";
    }
    auto fb = parse_structured_feedback(text, rubric);
    REQUIRE(fb.items.size() == 6);
    CHECK(fb.items[0].criterion == "Relevance");
    CHECK(fb.items[0].score == 3);
    CHECK(fb.items[5].score == 8);
    CHECK(fb.items[0].explanation == "fine continues here");
    CHECK(fb.all_scores_at_least(3));
    CHECK_FALSE(fb.all_scores_at_least(4));
}

TEST_CASE("parse_freeform_feedback") {
    const std::string full =
        "1. Positive Aspects\nGood start.\n\n2. Areas for Improvement\nWeak middle.\n\n"
        "3. Suggestions for Improvement\nAdd a twist.";
    auto fb = parse_freeform_feedback(full);
    CHECK(fb.form == FeedbackForm::Freeform);
    CHECK(fb.positives == "Good start.");
    CHECK(fb.improvements == "Weak middle.");
    CHECK(fb.suggestions == "Add a twist.");

    try {
        parse_freeform_feedback("1. Positive Aspects\nGood.\n2. Areas for Improvement\nWeak.");
        FAIL("expected MissingSection");
    } catch (const MissingSection& e) {
        CHECK(e.name() == "Suggestions for Improvement");
    }
    CHECK_THROWS_AS(parse_freeform_feedback("1. Positive Aspects\n\n2. Areas for Improvement\nx\n"
                                            "3. Suggestions for Improvement\ny"),
                    MissingSection);

    std::string mutated = full;
    for (auto pos = mutated.find(". "); pos != std::string::npos; pos = mutated.find(". ", pos + 1)) {
        if (pos > 0 && std::isdigit(static_cast<unsigned char>(mutated[pos - 1]))) mutated[pos] = ')';
    }
    CHECK(mutated.find("1) Positive") != std::string::npos);
    auto reparsed = parse_freeform_feedback(mutated);
    CHECK(reparsed.positives == fb.positives);
    CHECK(reparsed.improvements == fb.improvements);
    CHECK(reparsed.suggestions == fb.suggestions);

    auto inline_form = parse_freeform_feedback(
        "**1. Positive Aspects:** Good start.\n### 2: Areas for Improvement\nWeak middle.\n"
        "(3) Suggestions for Improvement - Add a twist.");
    CHECK(inline_form.positives == "Good start.");
    CHECK(inline_form.suggestions == "- Add a twist.");
}

TEST_CASE("parse_persona counts observation lines") {
    std::string seven;
    for (int i = 0; i < 7; ++i) seven += "Observation " + std::to_string(i) + ".\n";
    auto p = parse_persona(seven);
    CHECK(p.persona.observation_count() == 7);
    CHECK_FALSE(p.warning.has_value());
    CHECK(p.persona.kind() == PersonaKind::Explicit);

    auto few = parse_persona("One.\nTwo.\n\nThree.");
    CHECK(few.persona.observation_count() == 3);
    CHECK(few.warning.has_value());
    CHECK(few.persona.ep_text().value() == "One.\nTwo.\n\nThree.");

    CHECK_THROWS_AS(parse_persona("   "), EmptyPersona);
}

TEST_CASE("every mock artifact parses") {
    using gateway::ChatRequest;
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
        ChatRequest req;
        req.backend = "mock";
        req.seed = i;
        const int kind = i % 4;
        try {
            if (kind == 0) {
                req.messages = {{Role::User, "h\n\n" + gateway::sentinel_line("rubric")}};
                parse_rubric(gateway::mock_generate(req));
            } else if (kind == 1) {
                req.messages = {{Role::User, "h\n\n" + gateway::sentinel_line("persona.permpst")}};
                if (parse_persona(gateway::mock_generate(req)).warning) ++failures;
            } else if (kind == 2) {
                req.messages = {{Role::User, "h\n\n" + gateway::sentinel_line("rubric")}};
                auto rubric = parse_rubric(gateway::mock_generate(req));
                ChatRequest fb = req;
                fb.messages = {{Role::User, "[Rubric]\n" + render_rubric_list(rubric) + "\n\nStory\n\n" +
                                                gateway::sentinel_line("feedback.structured")}};
                parse_structured_feedback(gateway::mock_generate(fb), rubric);
            } else {
                req.messages = {{Role::User, "h\n\n" + gateway::sentinel_line("feedback.freeform")}};
                parse_freeform_feedback(gateway::mock_generate(req));
            }
        } catch (const Error& e) {
            ++failures;
            MESSAGE(e.what());
        }
    }
    CHECK(failures == 0);
}

}  // TEST_SUITE
