#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace prefine {

// Base of every error the library throws. `code()` is the stable name that
// shows up in CLI error lines and REST error payloads.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define PREFINE_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                                 \
    public:                                                                     \
        explicit Name(const std::string& message) : Error(#Name, message) {}    \
    }

// core
PREFINE_DEFINE_ERROR(InvalidArgument);
PREFINE_DEFINE_ERROR(PreconditionViolation);
PREFINE_DEFINE_ERROR(UnknownTokenizer);
PREFINE_DEFINE_ERROR(InvariantViolation);

// llm_gateway
PREFINE_DEFINE_ERROR(BackendUnreachable);
PREFINE_DEFINE_ERROR(MalformedResponse);
PREFINE_DEFINE_ERROR(ContextOverflow);
PREFINE_DEFINE_ERROR(UnknownPromptKind);
PREFINE_DEFINE_ERROR(UnknownBackend);

// Raised by a backend for failures worth retrying (network, 5xx, 429).
PREFINE_DEFINE_ERROR(TransientBackendError);

// prompt_forge
PREFINE_DEFINE_ERROR(IllegalStage);
PREFINE_DEFINE_ERROR(TemplateError);
PREFINE_DEFINE_ERROR(EmptyRubric);
PREFINE_DEFINE_ERROR(CriterionMismatch);
PREFINE_DEFINE_ERROR(EmptyPersona);

// dataset_io
PREFINE_DEFINE_ERROR(ArityError);
PREFINE_DEFINE_ERROR(VersionMismatch);

// pipeline
PREFINE_DEFINE_ERROR(StructureViolation);
PREFINE_DEFINE_ERROR(PremiseMutation);

// judge
PREFINE_DEFINE_ERROR(UnparseableVerdict);
PREFINE_DEFINE_ERROR(EmptyCell);

// stats
PREFINE_DEFINE_ERROR(NonFiniteInput);
PREFINE_DEFINE_ERROR(ZeroVariance);
PREFINE_DEFINE_ERROR(NotAPermutation);
PREFINE_DEFINE_ERROR(MissingInput);

// eval_service
PREFINE_DEFINE_ERROR(MisconfiguredSeedSet);
PREFINE_DEFINE_ERROR(DuplicateIndex);
PREFINE_DEFINE_ERROR(RangeError);
PREFINE_DEFINE_ERROR(NotReady);
PREFINE_DEFINE_ERROR(InvalidRanking);
PREFINE_DEFINE_ERROR(StateError);
PREFINE_DEFINE_ERROR(UnknownSession);
PREFINE_DEFINE_ERROR(EmptyComment);

#undef PREFINE_DEFINE_ERROR

class RubricArityError : public Error {
public:
    explicit RubricArityError(std::size_t count)
        : Error("RubricArityError",
                "rubric has " + std::to_string(count) + " criteria, expected 3 to 5"),
          count_(count) {}
    std::size_t count() const noexcept { return count_; }

private:
    std::size_t count_;
};

class MissingPlaceholder : public Error {
public:
    explicit MissingPlaceholder(std::string name)
        : Error("MissingPlaceholder", "missing binding for placeholder '" + name + "'"),
          name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class UnknownPlaceholder : public Error {
public:
    explicit UnknownPlaceholder(std::string name)
        : Error("UnknownPlaceholder", "binding names unknown placeholder '" + name + "'"),
          name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class ScoreOutOfRange : public Error {
public:
    ScoreOutOfRange(long value, int lo, int hi)
        : Error("ScoreOutOfRange", "score " + std::to_string(value) + " outside [" +
                                       std::to_string(lo) + "," + std::to_string(hi) + "]"),
          value_(value) {}
    long value() const noexcept { return value_; }

private:
    long value_;
};

class MissingField : public Error {
public:
    MissingField(std::size_t block, std::string field)
        : Error("MissingField", "feedback block " + std::to_string(block) + " lacks field '" +
                                    field + "'"),
          block_(block), field_(std::move(field)) {}
    std::size_t block() const noexcept { return block_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t block_;
    std::string field_;
};

class MissingSection : public Error {
public:
    explicit MissingSection(std::string name)
        : Error("MissingSection", "feedback lacks section '" + name + "'"), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// line is 1-based for line-delimited files and 0 for whole documents.
class SchemaError : public Error {
public:
    SchemaError(std::size_t line, std::string reason)
        : Error("SchemaError",
                line ? "line " + std::to_string(line) + ": " + reason : std::move(reason)),
          line_(line) {}
    explicit SchemaError(const std::string& reason) : SchemaError(0, reason) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MissingCriterion : public Error {
public:
    explicit MissingCriterion(std::string name)
        : Error("MissingCriterion", "quality reply lacks criterion '" + name + "'"),
          name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

}  // namespace prefine
