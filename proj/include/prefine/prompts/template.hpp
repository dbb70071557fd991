#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prefine/core/types.hpp"
#include "prefine/resources.hpp"

namespace prefine::prompts {

enum class TemplateOrigin { Verbatim, Invented };

std::string_view to_string(TemplateOrigin origin);

struct Template {
    std::string id;
    std::optional<Dataset> dataset;  // nullopt: usable with either dataset
    std::string body;
    std::set<std::string> placeholders;
    std::set<std::string> optional;  // placeholders that may bind to ""
    std::string sentinel_kind;
    TemplateOrigin origin = TemplateOrigin::Verbatim;

    bool operator==(const Template&) const = default;
};

using Binding = std::map<std::string, std::string>;

// Placeholders are {identifier}. A doubled {{...}} is literal text that
// the model is meant to see as-is, so it is never substituted.
std::set<std::string> scan_placeholders(std::string_view body);

// Parses a template file: a front-matter block between "---" lines with
// id, dataset, placeholders, sentinel, origin and optional keys, then the
// body. Throws TemplateError, including when the declared placeholders
// differ from those found in the body.
Template parse_template_file(std::string_view text);

// Substitutes every placeholder. Binding keys must equal the declared
// placeholders. Throws MissingPlaceholder / UnknownPlaceholder; an empty
// value for a non-optional placeholder counts as missing.
std::string render(const Template& tmpl, const Binding& binding);

// render() followed by the sentinel line naming the prompt kind.
std::string render_tagged(const Template& tmpl, const Binding& binding);

class TemplateRegistry {
public:
    // Templates compiled into the library.
    static const TemplateRegistry& builtin();
    static TemplateRegistry from_resources(std::span<const resources::Resource> files);
    // Every *.tmpl file in `dir`.
    static TemplateRegistry load_directory(const std::filesystem::path& dir);

    void add(Template tmpl);
    bool contains(std::string_view id) const;
    // Throws TemplateError for unknown ids.
    const Template& get(std::string_view id) const;
    std::vector<std::string> ids() const;
    std::size_t size() const noexcept { return templates_.size(); }

    // SHA-256 over ids and bodies in id order; goes into experiment manifests.
    std::string hash() const;

private:
    std::map<std::string, Template, std::less<>> templates_;
};

// Template id for a (method, stage, dataset) cell. Throws IllegalStage
// when the method never runs that stage.
std::string select_template_id(const MethodConfig& method, Stage stage, Dataset dataset);

const Template& select_template(const TemplateRegistry& registry, const MethodConfig& method,
                                Stage stage, Dataset dataset);

}  // namespace prefine::prompts
