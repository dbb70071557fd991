#include "prefine/core/tokenizer.hpp"

#include <map>
#include <mutex>
#include <shared_mutex>

#include "prefine/errors.hpp"

namespace prefine {

namespace {

enum class CharClass { Space, Word, Punct };

CharClass classify(unsigned char c) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        return CharClass::Space;
    }
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
        c >= 0x80) {
        return CharClass::Word;
    }
    return CharClass::Punct;
}

template <typename OnToken>
void scan(std::string_view text, OnToken&& on_token) {
    std::size_t i = 0;
    while (i < text.size()) {
        CharClass cls = classify(static_cast<unsigned char>(text[i]));
        if (cls == CharClass::Space) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < text.size() && classify(static_cast<unsigned char>(text[j])) == cls) ++j;
        on_token(text.substr(i, j - i));
        i = j;
    }
}

struct Registry {
    std::shared_mutex mutex;
    std::map<std::string, TokenCounter, std::less<>> counters;

    Registry() { counters.emplace(std::string(kApproxTokenizer), &approx_token_count); }
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

std::size_t approx_token_count(std::string_view text) {
    std::size_t n = 0;
    scan(text, [&n](std::string_view) { ++n; });
    return n;
}

std::vector<std::string> approx_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    scan(text, [&tokens](std::string_view t) { tokens.emplace_back(t); });
    return tokens;
}

void register_tokenizer(std::string name, TokenCounter counter) {
    if (!counter) throw InvalidArgument("tokenizer '" + name + "' has no counter");
    auto& r = registry();
    std::unique_lock lock(r.mutex);
    r.counters[std::move(name)] = std::move(counter);
}

bool unregister_tokenizer(std::string_view name) {
    if (name == kApproxTokenizer) return false;
    auto& r = registry();
    std::unique_lock lock(r.mutex);
    auto it = r.counters.find(name);
    if (it == r.counters.end()) return false;
    r.counters.erase(it);
    return true;
}

bool has_tokenizer(std::string_view name) {
    auto& r = registry();
    std::shared_lock lock(r.mutex);
    return r.counters.find(name) != r.counters.end();
}

std::size_t count_tokens(std::string_view text, std::string_view tokenizer) {
    if (tokenizer == kApproxTokenizer) return approx_token_count(text);
    TokenCounter counter;
    {
        auto& r = registry();
        std::shared_lock lock(r.mutex);
        auto it = r.counters.find(tokenizer);
        if (it == r.counters.end()) {
            throw UnknownTokenizer("tokenizer '" + std::string(tokenizer) + "' is not registered");
        }
        counter = it->second;
    }
    return text.empty() ? 0 : counter(text);
}

}  // namespace prefine
