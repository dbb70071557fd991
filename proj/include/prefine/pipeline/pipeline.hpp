#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prefine/core/types.hpp"
#include "prefine/dataset/records.hpp"
#include "prefine/gateway/gateway.hpp"
#include "prefine/pipeline/run_config.hpp"
#include "prefine/prompts/template.hpp"

namespace prefine::pipeline {

// Transcript entries and warnings collected while a trace is built.
struct StageLog {
    std::vector<TranscriptEntry> transcript;
    std::vector<TraceWarning> warnings;
};

// The draft keeps the premise: a PerMPST story opens with it at t = 0 and
// contains it afterwards; a PerDOC plot carries it in its Premise section.
// Throws PremiseMutation.
void check_premise(const StoryDraft& draft, const Premise& premise);

// Stage runner over a gateway. Parse and structure failures get exactly one
// retry with the same prompt and seed + 1; both attempts are logged.
class Pipeline {
public:
    explicit Pipeline(gateway::Gateway& gateway,
                      const prompts::TemplateRegistry& registry = prompts::TemplateRegistry::builtin());

    // s(0). `persona` must be explicit when the PEP generator is used.
    StoryDraft generate_initial(const dataset::ExperimentRecord& record,
                                const std::optional<Persona>& persona, const RunConfig& config,
                                StageLog& log) const;

    Persona extract_persona(const dataset::ExperimentRecord& record, const RunConfig& config,
                            StageLog& log) const;

    // User-specific rubric from an explicit (EPER) or implicit (IPER) persona.
    Rubric generate_rubric(const dataset::ExperimentRecord& record, const Persona& persona,
                           const RunConfig& config, StageLog& log) const;

    // F(t) for draft s(t). Structured when `rubric` has criteria, else freeform.
    Feedback critique(const dataset::ExperimentRecord& record, const Persona& persona,
                      const std::optional<Rubric>& rubric, const StoryDraft& draft,
                      const RunConfig& config, StageLog& log) const;

    // s(t+1) from s(t) and F(t).
    StoryDraft refine(const dataset::ExperimentRecord& record, const StoryDraft& draft,
                      const Feedback& feedback, const RunConfig& config, StageLog& log) const;

    // Full method run. Stage errors end the trace with a recorded failure
    // instead of propagating; invalid configuration still throws.
    RefinementTrace run_method(const dataset::ExperimentRecord& record, const RunConfig& config) const;

    const prompts::TemplateRegistry& registry() const noexcept { return registry_; }

private:
    std::string call(const RunConfig& config, Stage stage, int iteration, const std::string& prompt_id,
                     std::vector<ChatMessage> messages, int attempt, StageLog& log) const;

    gateway::Gateway& gateway_;
    const prompts::TemplateRegistry& registry_;
};

}  // namespace prefine::pipeline
