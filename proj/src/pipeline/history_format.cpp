#include "prefine/pipeline/history_format.hpp"

#include "prefine/errors.hpp"

namespace prefine::pipeline {

std::string format_history(const UserHistory& history) {
    std::string out;
    if (history.dataset() == Dataset::PerDOC) {
        const auto& items = history.perdoc();
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out += "\n\n";
            if (items.size() > 1) {
                out += "Comparison " + std::to_string(i + 1) + " (aspect: " +
                       std::string(display_name(items[i].aspect)) + ", choice: " +
                       std::string(to_string(items[i].choice)) + ")\n";
            }
            out += "Plot A:\n" + items[i].plot_a + "\n\nPlot B:\n" + items[i].plot_b;
        }
        return out;
    }
    const auto& items = history.permpst();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += "\n\n";
        out += "Plot " + std::to_string(i) + ":\n" + items[i].synopsis + "\nReview: " + items[i].review +
               "\nScore: " + std::to_string(items[i].score);
    }
    return out;
}

std::string format_preference(const UserHistory& history) {
    if (history.dataset() != Dataset::PerDOC) return format_history(history);
    std::string out;
    const auto& items = history.perdoc();
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += "\n\n";
        out += "[Plot A]\n" + items[i].plot_a + "\n\n[Plot B]\n" + items[i].plot_b;
    }
    return out;
}

std::string choice_label(const UserHistory& history) {
    const auto& items = history.perdoc();
    if (items.empty()) throw PreconditionViolation("PerDOC history has no comparison");
    return std::string(to_string(items.front().choice));
}

std::string aspect_label(const UserHistory& history, const std::optional<Aspect>& aspect) {
    if (history.dataset() != Dataset::PerDOC) {
        throw PreconditionViolation("aspects exist only for PerDOC histories");
    }
    if (aspect) return std::string(display_name(*aspect));
    const auto& items = history.perdoc();
    if (items.empty()) throw PreconditionViolation("PerDOC history has no comparison");
    return std::string(display_name(items.front().aspect));
}

}  // namespace prefine::pipeline
