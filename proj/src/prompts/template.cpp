#include "prefine/prompts/template.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "prefine/errors.hpp"
#include "prefine/gateway/chat.hpp"
#include "prefine/util/hash.hpp"
#include "prefine/util/text.hpp"

namespace prefine::prompts {

namespace {

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

// Walks the body, calling on_text for literal runs and on_placeholder for
// each {name}.
template <typename OnText, typename OnPlaceholder>
void walk(std::string_view body, OnText&& on_text, OnPlaceholder&& on_placeholder) {
    std::size_t i = 0;
    std::size_t literal_start = 0;
    while (i < body.size()) {
        if (body[i] != '{') {
            ++i;
            continue;
        }
        if (i + 1 < body.size() && body[i + 1] == '{') {
            auto close = body.find("}}", i + 2);
            i = close == std::string_view::npos ? body.size() : close + 2;
            continue;
        }
        std::size_t j = i + 1;
        if (j < body.size() && ident_start(body[j])) {
            while (j < body.size() && ident_char(body[j])) ++j;
            if (j < body.size() && body[j] == '}') {
                on_text(body.substr(literal_start, i - literal_start));
                on_placeholder(body.substr(i + 1, j - i - 1));
                i = j + 1;
                literal_start = i;
                continue;
            }
        }
        ++i;
    }
    on_text(body.substr(literal_start));
}

std::set<std::string> parse_name_list(std::string_view value) {
    std::set<std::string> out;
    for (const auto& part : util::split(value, ',')) {
        auto t = util::trim(part);
        if (!t.empty()) out.emplace(t);
    }
    return out;
}

std::string first_of(const std::set<std::string>& names) { return names.empty() ? "" : *names.begin(); }

}  // namespace

std::string_view to_string(TemplateOrigin origin) {
    return origin == TemplateOrigin::Verbatim ? "verbatim" : "invented";
}

std::set<std::string> scan_placeholders(std::string_view body) {
    std::set<std::string> out;
    walk(body, [](std::string_view) {}, [&out](std::string_view name) { out.emplace(name); });
    return out;
}

Template parse_template_file(std::string_view text) {
    auto lines = util::split_lines(text);
    if (lines.empty() || util::trim(lines[0]) != "---") {
        throw TemplateError("template file must start with a '---' front-matter line");
    }
    Template t;
    bool has_placeholders = false;
    std::size_t i = 1;
    for (; i < lines.size(); ++i) {
        auto line = util::trim(lines[i]);
        if (line == "---") break;
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw TemplateError("malformed front-matter line '" + std::string(line) + "'");
        }
        auto key = util::trim(line.substr(0, colon));
        auto value = util::trim(line.substr(colon + 1));
        if (key == "id") {
            t.id = std::string(value);
        } else if (key == "dataset") {
            if (value != "any") t.dataset = parse_dataset(value);
        } else if (key == "placeholders") {
            t.placeholders = parse_name_list(value);
            has_placeholders = true;
        } else if (key == "optional") {
            t.optional = parse_name_list(value);
        } else if (key == "sentinel") {
            t.sentinel_kind = std::string(value);
        } else if (key == "origin") {
            if (value == "verbatim") {
                t.origin = TemplateOrigin::Verbatim;
            } else if (value == "invented") {
                t.origin = TemplateOrigin::Invented;
            } else {
                throw TemplateError("unknown template origin '" + std::string(value) + "'");
            }
        } else {
            throw TemplateError("unknown front-matter key '" + std::string(key) + "'");
        }
    }
    if (i >= lines.size()) throw TemplateError("front matter is not closed");
    if (t.id.empty()) throw TemplateError("template has no id");
    if (t.sentinel_kind.empty()) throw TemplateError("template " + t.id + " has no sentinel kind");
    if (!has_placeholders) throw TemplateError("template " + t.id + " declares no placeholders key");

    std::vector<std::string> body(lines.begin() + static_cast<std::ptrdiff_t>(i) + 1, lines.end());
    while (!body.empty() && body.back().empty()) body.pop_back();
    t.body = util::join(body, "\n");

    auto found = scan_placeholders(t.body);
    if (found != t.placeholders) {
        std::set<std::string> undeclared, unused;
        std::set_difference(found.begin(), found.end(), t.placeholders.begin(), t.placeholders.end(),
                            std::inserter(undeclared, undeclared.end()));
        std::set_difference(t.placeholders.begin(), t.placeholders.end(), found.begin(), found.end(),
                            std::inserter(unused, unused.end()));
        throw TemplateError("template " + t.id + ": placeholder set mismatch (undeclared: '" +
                            first_of(undeclared) + "', unused: '" + first_of(unused) + "')");
    }
    for (const auto& o : t.optional) {
        if (!t.placeholders.count(o)) {
            throw TemplateError("template " + t.id + ": optional '" + o + "' is not a placeholder");
        }
    }
    return t;
}

std::string render(const Template& tmpl, const Binding& binding) {
    for (const auto& name : tmpl.placeholders) {
        auto it = binding.find(name);
        if (it == binding.end()) throw MissingPlaceholder(name);
        if (it->second.empty() && !tmpl.optional.count(name)) throw MissingPlaceholder(name);
    }
    for (const auto& [name, value] : binding) {
        if (!tmpl.placeholders.count(name)) throw UnknownPlaceholder(name);
    }
    std::string out;
    out.reserve(tmpl.body.size() + 256);
    walk(
        tmpl.body, [&out](std::string_view text) { out.append(text); },
        [&out, &binding](std::string_view name) { out += binding.find(std::string(name))->second; });
    return out;
}

std::string render_tagged(const Template& tmpl, const Binding& binding) {
    return render(tmpl, binding) + "\n\n" + gateway::sentinel_line(tmpl.sentinel_kind);
}

const TemplateRegistry& TemplateRegistry::builtin() {
    static const TemplateRegistry registry = from_resources(resources::templates());
    return registry;
}

TemplateRegistry TemplateRegistry::from_resources(std::span<const resources::Resource> files) {
    TemplateRegistry r;
    for (const auto& f : files) {
        try {
            r.add(parse_template_file(f.content));
        } catch (const TemplateError& e) {
            throw TemplateError(std::string(f.name) + ": " + e.what());
        }
    }
    return r;
}

TemplateRegistry TemplateRegistry::load_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw TemplateError("template directory " + dir.string() + " does not exist");
    }
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".tmpl") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    TemplateRegistry r;
    for (const auto& p : paths) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            r.add(parse_template_file(ss.str()));
        } catch (const TemplateError& e) {
            throw TemplateError(p.filename().string() + ": " + e.what());
        }
    }
    return r;
}

void TemplateRegistry::add(Template tmpl) {
    auto id = tmpl.id;
    if (!templates_.emplace(id, std::move(tmpl)).second) {
        throw TemplateError("duplicate template id '" + id + "'");
    }
}

bool TemplateRegistry::contains(std::string_view id) const {
    return templates_.find(id) != templates_.end();
}

const Template& TemplateRegistry::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw TemplateError("no template with id '" + std::string(id) + "'");
    return it->second;
}

std::vector<std::string> TemplateRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, t] : templates_) out.push_back(id);
    return out;
}

std::string TemplateRegistry::hash() const {
    std::string buf;
    for (const auto& [id, t] : templates_) {
        buf += id;
        buf.push_back('\0');
        buf += t.body;
        buf.push_back('\0');
    }
    return util::sha256_hex(buf);
}

std::string select_template_id(const MethodConfig& method, Stage stage, Dataset dataset) {
    const auto caps = method_capabilities(method);
    const std::string ds(to_string(dataset));
    const std::string name(to_string(method.method));
    auto illegal = [&]() -> IllegalStage {
        return IllegalStage(name + " has no " + std::string(to_string(stage)) + " stage");
    };
    switch (stage) {
        case Stage::Init:
            if (method.method == Method::PP) return "init." + ds + ".pp";
            if (method.method == Method::PEP || method.init_from == InitFrom::PEP) {
                return "init." + ds + ".pep";
            }
            return "init." + ds;
        case Stage::Persona:
            if (caps.uses_explicit_persona || method.init_from == InitFrom::PEP) {
                return "persona." + ds;
            }
            throw illegal();
        case Stage::Rubric:
            if (method.method == Method::EPER) return "rubric." + ds + ".ep";
            if (method.method == Method::IPER) return "rubric." + ds + ".ip";
            throw illegal();
        case Stage::Feedback:
            if (!caps.iterates) throw illegal();
            return "feedback." + ds + "." + util::to_lower(name);
        case Stage::Refine:
            if (!caps.iterates) throw illegal();
            return "refine." + ds;
    }
    throw illegal();
}

const Template& select_template(const TemplateRegistry& registry, const MethodConfig& method,
                                Stage stage, Dataset dataset) {
    return registry.get(select_template_id(method, stage, dataset));
}

}  // namespace prefine::prompts
