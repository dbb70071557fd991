#include "prefine/core/validation.hpp"

#include "prefine/util/text.hpp"

namespace prefine {

std::vector<std::string> validate_history(const UserHistory& history, Dataset dataset,
                                          const ArityConfig& arity) {
    std::vector<std::string> out;
    if (util::trim(history.user_id).empty()) out.emplace_back("empty userId");
    if (history.dataset() != dataset) {
        out.push_back("history holds " + std::string(to_string(history.dataset())) +
                      " interactions but dataset is " + std::string(to_string(dataset)));
        return out;
    }

    const std::size_t expected =
        dataset == Dataset::PerDOC ? arity.perdoc_interactions : arity.permpst_interactions;
    if (history.size() != expected) {
        out.push_back("interaction count " + std::to_string(history.size()) + " ≠ " +
                      std::to_string(expected));
    }

    if (dataset == Dataset::PerDOC) {
        const auto& items = history.perdoc();
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto idx = std::to_string(i);
            if (util::trim(items[i].plot_a).empty()) out.push_back("empty plotA at index " + idx);
            if (util::trim(items[i].plot_b).empty()) out.push_back("empty plotB at index " + idx);
            if (items[i].plot_a == items[i].plot_b) {
                out.push_back("plotA equals plotB at index " + idx);
            }
        }
    } else {
        const auto& items = history.permpst();
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto idx = std::to_string(i);
            if (items[i].score < 1 || items[i].score > 10) {
                out.push_back("score out of range at index " + idx);
            }
            if (util::trim(items[i].synopsis).empty()) {
                out.push_back("empty synopsis at index " + idx);
            }
        }
    }
    return out;
}

}  // namespace prefine
